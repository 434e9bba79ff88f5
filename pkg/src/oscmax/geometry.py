"""Layered dyadic grid: cells, enlargements, growth boxes, decompositions.

The ambient space is organised by the nested half-open boxes ``[-2^l, 2^l)^d``.
Layer 0 is the innermost box, and layer ``l >= 1`` is the difference between
the boxes at scales ``2^l`` and ``2^(l-1)``.  Layer ``l`` is tiled exactly by
half-open dyadic cells of sidelength ``2^-l``, so cells shrink as the layer
index grows; the union of layers ``0..L`` tiles the truncation box
``[-2^L, 2^L)^d``.

Every bound that appears here is a dyadic rational and therefore exactly
representable as a float, so all comparisons below are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .errors import (
    DomainError,
    NearRegionNotFoundError,
    OutOfDomainError,
    TruncatedGridError,
)

# Hard cap on the number of cells a single call is allowed to materialise.
# The package targets desk-scale experiments; symbolic queries (layer and
# cell lookup, growth exponents) stay cheap at any scale.
MAX_MATERIALIZED_CELLS = 2_000_000


def _min_layer_coord(u: float) -> int:
    """Smallest l with -2^l <= u < 2^l."""
    if u == 0.0:
        return 0
    _, e = math.frexp(abs(u))
    l = max(0, e - 2)
    while not (-(2.0 ** l) <= u < 2.0 ** l):
        l += 1
    return l


def layer_of_point(x: Sequence[float]) -> int:
    """Layer index of a point, independent of any truncation."""
    l = 0
    for u in x:
        if not math.isfinite(u):
            raise DomainError("point coordinates must be finite")
        l = max(l, _min_layer_coord(u))
    return l


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box, lower corner included."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if not (a < b):
                raise ValueError("box must have positive extent on every axis")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def volume(self) -> float:
        v = 1.0
        for s in self.sides():
            v *= s
        return v

    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def contains_point(self, x: Sequence[float]) -> bool:
        return all(a <= u < b for a, u, b in zip(self.lo, x, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b
                   for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))


def box_distance(a: Box, b: Box) -> float:
    """Euclidean distance between the closures of two boxes."""
    s = 0.0
    for alo, ahi, blo, bhi in zip(a.lo, a.hi, b.lo, b.hi):
        gap = max(0.0, blo - ahi, alo - bhi)
        s += gap * gap
    return math.sqrt(s)


@dataclass(frozen=True, order=True)
class GCube:
    """One grid cell: ``2^-(layer+level) * (coords + [0,1)^d)`` inside its layer.

    Only refinement level 0 is exercised by the operators in this package;
    the level field is kept in the data model and the serialization so that
    refined grids stay representable.
    """

    layer: int
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.layer < 0 or self.level < 0:
            raise ValueError("layer and level must be nonnegative")
        if not self.coords:
            raise ValueError("empty coordinates")
        if not _cell_in_layer(self.layer, self.level, self.coords):
            raise ValueError(
                f"cell {self.coords} at scale 2^-{self.layer + self.level} "
                f"is not contained in layer {self.layer}")

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def sidelength(self) -> float:
        return 2.0 ** -(self.layer + self.level)

    @property
    def lo(self) -> tuple[float, ...]:
        h = self.sidelength
        return tuple(i * h for i in self.coords)

    @property
    def hi(self) -> tuple[float, ...]:
        h = self.sidelength
        return tuple((i + 1) * h for i in self.coords)

    def center(self) -> tuple[float, ...]:
        h = self.sidelength
        return tuple((i + 0.5) * h for i in self.coords)

    def box(self) -> Box:
        return Box(self.lo, self.hi)

    def volume(self) -> float:
        return self.sidelength ** self.dimension


def _cell_in_layer(layer: int, level: int, coords: tuple[int, ...]) -> bool:
    """Exact integer test that a scale-2^-(layer+level) cell sits in its layer."""
    n = 1 << (2 * layer + level)          # outer box bound in cell units
    if any(i < -n or i >= n for i in coords):
        return False
    if layer == 0:
        return True
    inner = n >> 1                        # inner box bound in cell units
    return any(i >= inner or i < -inner for i in coords)


class Region:
    """A finite, pairwise disjoint collection of grid cells.

    Cells from distinct layers occupy disjoint shells, so disjointness
    reduces to per-layer coordinate uniqueness, which is checked here.
    """

    __slots__ = ("cubes", "_set")

    def __init__(self, cubes: Iterable[GCube]):
        cs = tuple(sorted(cubes))
        seen = set()
        for c in cs:
            key = (c.layer, c.level, c.coords)
            if key in seen:
                raise ValueError(f"duplicate cell in region: {c}")
            seen.add(key)
        self.cubes = cs
        self._set = frozenset(cs)

    def __iter__(self) -> Iterator[GCube]:
        return iter(self.cubes)

    def __len__(self) -> int:
        return len(self.cubes)

    def __contains__(self, cube: GCube) -> bool:
        return cube in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, Region) and self.cubes == other.cubes

    def __hash__(self) -> int:
        return hash(self.cubes)

    def __repr__(self) -> str:
        return f"Region({len(self.cubes)} cells)"

    def volume(self) -> float:
        return sum(c.volume() for c in self.cubes)

    def bounding_box(self) -> Box:
        if not self.cubes:
            raise ValueError("empty region has no bounding box")
        d = self.cubes[0].dimension
        lo = [math.inf] * d
        hi = [-math.inf] * d
        for c in self.cubes:
            for i, (a, b) in enumerate(zip(c.lo, c.hi)):
                lo[i] = min(lo[i], a)
                hi[i] = max(hi[i], b)
        return Box(tuple(lo), tuple(hi))


@dataclass(frozen=True)
class GridConfig:
    """Ambient dimension and truncation depth of the grid."""

    dimension: int = 1
    max_layer: int = 6

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.max_layer < 1:
            raise ValueError("max_layer must be >= 1")

    def truncation_box(self) -> Box:
        r = 2.0 ** self.max_layer
        d = self.dimension
        return Box((-r,) * d, (r,) * d)


@dataclass(frozen=True)
class GrowthRegion:
    """Grid content of a time-dependent growth box, clipped to the grid."""

    region: Region
    exponent: int          # the box is [-2^exponent, 2^exponent)^d before clipping
    truncated: bool


@dataclass(frozen=True)
class RingShell:
    """Cells within a distance ring of a cell, plus their enclosing cube."""

    region: Region
    enclosing: Box
    truncated: bool


class Grid:
    """Truncated layered grid with neighborhood and decomposition queries."""

    def __init__(self, config: GridConfig):
        self.config = config
        self._near_cache: dict[GCube, Region] = {}
        self._cubes_cache: list[GCube] | None = None

    # -- basic lookups ----------------------------------------------------

    def layer_index(self, x: Sequence[float]) -> int:
        x = tuple(x)
        self._check_dim(x)
        return layer_of_point(x)

    def cube_at(self, x: Sequence[float]) -> GCube:
        """The unique grid cell containing the point."""
        x = tuple(x)
        self._check_dim(x)
        l = layer_of_point(x)
        if l > self.config.max_layer:
            raise OutOfDomainError(
                f"point {x} lies in layer {l}, beyond max_layer="
                f"{self.config.max_layer}")
        scale = float(1 << l)
        coords = tuple(math.floor(u * scale) for u in x)
        return GCube(l, 0, coords)

    def layer_cell_count(self, l: int) -> int:
        d = self.config.dimension
        if l == 0:
            return 2 ** d
        outer = (1 << (2 * l + 1)) ** d
        inner = (1 << (2 * l)) ** d
        return outer - inner

    def cell_count(self) -> int:
        return sum(self.layer_cell_count(l)
                   for l in range(self.config.max_layer + 1))

    def layer_cubes(self, l: int) -> Iterator[GCube]:
        """All cells of one layer in ascending coordinate order."""
        if l < 0 or l > self.config.max_layer:
            raise OutOfDomainError(f"layer {l} outside truncated grid")
        d = self.config.dimension
        if l == 0:
            for coords in _coord_product([(-1, 0)] * d):
                yield GCube(0, 0, coords)
            return
        n = 1 << (2 * l)
        inner = n >> 1
        for coords in _coord_product([(-n, n - 1)] * d):
            if any(i >= inner or i < -inner for i in coords):
                yield GCube(l, 0, coords)

    def cubes(self) -> list[GCube]:
        """Every cell of the truncated grid, sorted by (layer, coords)."""
        if self._cubes_cache is None:
            total = self.cell_count()
            if total > MAX_MATERIALIZED_CELLS:
                raise TruncatedGridError(
                    f"grid with {total} cells is too large to materialise; "
                    "lower max_layer or use symbolic queries")
            out: list[GCube] = []
            for l in range(self.config.max_layer + 1):
                out.extend(self.layer_cubes(l))
            self._cubes_cache = out
        return list(self._cubes_cache)

    # -- neighborhoods -----------------------------------------------------

    def required_neighbors(self, cube: GCube) -> list[GCube]:
        """All cells of the untruncated grid closer to ``cube`` than its side.

        Distance is Euclidean between closures, and the comparison is
        strict.  Raises when a required cell lies beyond the truncation.
        """
        j = cube.layer
        h = cube.sidelength
        box = cube.box()
        expanded = Box(tuple(a - h for a in box.lo), tuple(b + h for b in box.hi))
        out = []
        for l in range(max(0, j - 1), j + 2):
            for cand in self._layer_cubes_in_box(l, expanded, allow_any_layer=True):
                if box_distance(box, cand.box()) < h:
                    if l > self.config.max_layer:
                        raise TruncatedGridError(
                            f"cell {cube} needs layer-{l} neighbors beyond "
                            f"max_layer={self.config.max_layer}")
                    out.append(cand)
        return sorted(out)

    def near_region(self, cube: GCube) -> Region:
        """The enlargement of a cell: a cube of four times its sidelength.

        The result tiles an axis-aligned cube with faces on the half-cell
        lattice that contains every cell within one sidelength of ``cube``
        and decomposes exactly into grid cells.  Among admissible positions
        the one whose center is nearest the origin wins, with lexicographic
        tie-break on the center, which biases the enlargement inward where
        cells are coarser.
        """
        cached = self._near_cache.get(cube)
        if cached is not None:
            return cached
        j = cube.layer
        h = cube.sidelength
        required = self.required_neighbors(cube)
        d = self.config.dimension
        span_lo = [min(c.lo[i] for c in required) for i in range(d)]
        span_hi = [max(c.hi[i] for c in required) for i in range(d)]
        step = 0.5 * h
        side = 4.0 * h
        axis_positions: list[list[float]] = []
        for i in range(d):
            k_lo = math.ceil((span_hi[i] - side) / step)
            k_hi = math.floor(span_lo[i] / step)
            axis_positions.append([k * step for k in range(k_lo, k_hi + 1)])

        trunc = self.config.truncation_box()
        best: tuple[tuple[float, tuple[float, ...]], Region] | None = None
        any_outside = False
        for corner in _float_product(axis_positions):
            cand = Box(corner, tuple(a + side for a in corner))
            if not trunc.contains_box(cand):
                any_outside = True
                continue
            tiling = self._exact_tiling(cand)
            if tiling is None:
                continue
            center = cand.center()
            key = (sum(u * u for u in center), center)
            if best is None or key < best[0]:
                best = (key, Region(tiling))
        if best is None:
            if any_outside:
                raise TruncatedGridError(
                    f"enlargement of {cube} exceeds the truncation box; "
                    "raise max_layer")
            raise NearRegionNotFoundError(
                f"no admissible enlargement cube for {cube}")
        self._near_cache[cube] = best[1]
        return best[1]

    def far_collection(self, cube: GCube) -> Region:
        """All cells of the truncated grid outside the enlargement of ``cube``."""
        near = self.near_region(cube)
        return Region(c for c in self.cubes() if c not in near)

    # -- growth boxes -------------------------------------------------------

    def growth_exponent(self, cube: GCube, t: float) -> int:
        """Dyadic exponent m of the growth box [-2^m, 2^m)^d at time t.

        For small times the radius is the fixed far-field threshold
        2^16 d^4 2^j; past t = 2^4 d^2 it grows like 2^8 t^2 2^j.  At the
        crossover both expressions agree.
        """
        if not (t > 0.0) or not math.isfinite(t):
            raise DomainError("t must be positive and finite")
        d = self.config.dimension
        j = cube.layer
        if t <= 16.0 * d * d:
            radius = (2.0 ** 16) * float(d) ** 4 * (2.0 ** j)
        else:
            radius = (2.0 ** 8) * t * t * (2.0 ** j)
        if radius > 2.0 ** 1000:
            raise DomainError("growth radius overflows the dyadic scale")
        mant, e = math.frexp(radius)       # radius = mant * 2^e, mant in [0.5, 1)
        m = e - 1 if mant == 0.5 else e
        return m

    def growth_region(self, cube: GCube, t: float) -> GrowthRegion:
        """Grid cells inside the growth box, clipped to the truncation."""
        m = self.growth_exponent(cube, t)
        top = min(m, self.config.max_layer)
        cells: list[GCube] = []
        for l in range(top + 1):
            cells.extend(self.layer_cubes(l))
        return GrowthRegion(Region(cells), m, m > self.config.max_layer)

    def cube_in_growth_box(self, cube: GCube, exponent: int) -> bool:
        """Whether a cell sits inside [-2^m, 2^m)^d; exact in layer arithmetic."""
        return cube.layer <= exponent

    # -- rings ---------------------------------------------------------------

    def ring_neighborhood(self, cube: GCube, k: int) -> RingShell:
        """Cells within distance 2^k times the sidelength of ``cube``."""
        if k < 0:
            raise DomainError("ring index must be nonnegative")
        h = cube.sidelength
        radius = (2.0 ** k) * h
        box = cube.box()
        expanded = Box(tuple(a - radius for a in box.lo),
                       tuple(b + radius for b in box.hi))
        members: list[GCube] = []
        for l in range(self.config.max_layer + 1):
            for cand in self._layer_cubes_in_box(l, expanded):
                if box_distance(box, cand.box()) < radius:
                    members.append(cand)
        truncated = not self.config.truncation_box().contains_box(expanded)
        region = Region(members)
        bb = region.bounding_box()
        side = max(b - a for a, b in zip(bb.lo, bb.hi))
        lo = []
        hi = []
        for a, b in zip(bb.lo, bb.hi):
            c = 0.5 * (a + b)
            lo.append(c - 0.5 * side)
            hi.append(c + 0.5 * side)
        return RingShell(region, Box(tuple(lo), tuple(hi)), truncated)

    # -- decompositions ------------------------------------------------------

    def cube_from_box(self, box: Box) -> GCube | None:
        """The grid cell coinciding with ``box``, if there is one."""
        sides = box.sides()
        s = sides[0]
        if any(t != s for t in sides[1:]):
            return None
        if s > 1.0:
            return None
        l = round(-math.log2(s))
        if not (0 <= l <= self.config.max_layer) or 2.0 ** -l != s:
            return None
        coords = []
        for a in box.lo:
            i = a / s
            if i != math.floor(i):
                return None
            coords.append(int(i))
        coords = tuple(coords)
        if not _cell_in_layer(l, 0, coords):
            return None
        return GCube(l, 0, coords)

    def cube_decompose(self, box: Box) -> Region:
        """Grid content of a box: itself if it is a cell, else all cells
        strictly inside (possibly none)."""
        if not self.config.truncation_box().contains_box(box):
            raise OutOfDomainError(f"{box} is not inside the truncation box")
        own = self.cube_from_box(box)
        if own is not None:
            return Region([own])
        return Region(self._cubes_inside(box))

    # -- internals -------------------------------------------------------

    def _check_dim(self, x: tuple) -> None:
        if len(x) != self.config.dimension:
            raise DomainError(
                f"expected {self.config.dimension} coordinates, got {len(x)}")

    def _layer_cubes_in_box(self, l: int, box: Box,
                            allow_any_layer: bool = False) -> Iterator[GCube]:
        """Cells of layer ``l`` whose closure meets the closed box."""
        if not allow_any_layer and l > self.config.max_layer:
            return
        # Skip layers whose shell cannot meet the box.
        lo_norm = 0.0
        hi_norm = 0.0
        for a, b in zip(box.lo, box.hi):
            lo_norm = max(lo_norm, a if a > 0 else (-b if b < 0 else 0.0))
            hi_norm = max(hi_norm, abs(a), abs(b))
        if l >= 1 and 2.0 ** (l - 1) > hi_norm:
            return
        if 2.0 ** l < lo_norm:
            return
        h = 2.0 ** -l
        ranges = []
        for a, b in zip(box.lo, box.hi):
            i_lo = math.floor(a / h)
            i_hi = math.ceil(b / h)
            ranges.append((i_lo, i_hi - 1))
        n = 1 << (2 * l)
        inner = n >> 1 if l >= 1 else 0
        for coords in _coord_product(ranges):
            if any(i < -n or i >= n for i in coords):
                continue
            if l >= 1 and not any(i >= inner or i < -inner for i in coords):
                continue
            cube = GCube(l, 0, coords)
            # closed-closure intersection test against the closed box
            if all(i * h <= b and (i + 1) * h >= a
                   for i, a, b in zip(coords, box.lo, box.hi)):
                yield cube

    def _cubes_inside(self, box: Box) -> list[GCube]:
        """All grid cells contained in the half-open box (strict subsets)."""
        out = []
        for l in range(self.config.max_layer + 1):
            for cand in self._layer_cubes_in_box(l, box):
                if all(a <= c_lo and c_hi <= b for a, b, c_lo, c_hi in
                       zip(box.lo, box.hi, cand.lo, cand.hi)):
                    out.append(cand)
        return out

    def _exact_tiling(self, box: Box) -> list[GCube] | None:
        """Cells tiling ``box`` exactly, or None when they do not cover it."""
        cells = self._cubes_inside(box)
        if not cells:
            return None
        l_top = max(c.layer for c in cells)
        unit = 2.0 ** l_top
        d = self.config.dimension
        total = 0
        for c in cells:
            total += (1 << ((l_top - c.layer) * d))
        box_units = 1
        for a, b in zip(box.lo, box.hi):
            w = (b - a) * unit
            if w != math.floor(w):
                return None
            box_units *= int(w)
        return cells if total == box_units else None


def _coord_product(ranges: list[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
    """Cartesian product of inclusive integer ranges, ascending."""
    if not ranges:
        yield ()
        return
    lo, hi = ranges[0]
    for i in range(lo, hi + 1):
        for rest in _coord_product(ranges[1:]):
            yield (i,) + rest


def _float_product(axes: list[list[float]]) -> Iterator[tuple[float, ...]]:
    if not axes:
        yield ()
        return
    for v in axes[0]:
        for rest in _float_product(axes[1:]):
            yield (v,) + rest


# -- serialization ---------------------------------------------------------

def cube_to_line(cube: GCube) -> str:
    return " ".join([str(cube.layer), str(cube.level)]
                    + [str(i) for i in cube.coords])


def cube_from_line(line: str) -> GCube:
    parts = line.split()
    if len(parts) < 3:
        raise ValueError(f"malformed cell line: {line!r}")
    layer, level = int(parts[0]), int(parts[1])
    coords = tuple(int(p) for p in parts[2:])
    return GCube(layer, level, coords)


def region_to_lines(region: Region) -> list[str]:
    return [f"region {len(region)}"] + [cube_to_line(c) for c in region]


def region_from_lines(lines: Iterable[str]) -> Region:
    it = iter(lines)
    header = next(it).split()
    if len(header) != 2 or header[0] != "region":
        raise ValueError("missing region header")
    n = int(header[1])
    cubes = [cube_from_line(next(it)) for _ in range(n)]
    return Region(cubes)
