"""Muckenhoupt-type ratio machinery over cube families.

A WeightSpec bundles a positive weight, the Lebesgue exponent p, and
exact integration where closed forms exist.  The central quantity is

    ratio(Q) = w(Q)^(1/p) * sigma(Q)^((p-1)/p) / |Q|,  sigma = w^(-1/(p-1)),

which Hoelder forces to be >= 1.  One-dimensional closed-form weights
integrate by antiderivative, so the sweep suprema carry no quadrature
noise; higher dimensions fall back to tensor Gauss-Legendre quadrature
with a refinement check.  Piecewise weights and their periodizations
integrate exactly in any dimension through cell overlaps, which is what
makes the extension (tiling) identities testable at 1e-10.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainError, NonIntegrableError, TruncatedGridError
from .geometry import Box, GCube
from .kernels import kernel_extremum, psi_theta, t_max

__all__ = [
    "ApEntry",
    "ApReport",
    "FarPairReport",
    "WeightSpec",
    "ap_constant",
    "ap_ratio",
    "ap_theta_constant",
    "centered_cube_family",
    "constant_weight",
    "dyadic_subcube_family",
    "exponential_weight",
    "extend_weight",
    "far_pair_bound",
    "lattice_family",
    "near_region_family",
    "piecewise_weight",
    "power_weight",
    "pure_power_weight",
    "weight_from_grid_function",
]

_CLOSED_FORMS = ("constant", "power", "purepower", "exponential")

QUAD_NODES = 32
QUAD_REL_TOL = 1e-3
QUAD_MAX_DEPTH = 12


def _check_p(p):
    p = float(p)
    if not (1.0 < p < math.inf):
        raise DomainError(f"need 1 < p < infinity, got {p}")
    return p


@dataclass(frozen=True)
class WeightSpec:
    """A positive weight with its Lebesgue exponent.

    kind is one of constant, power ((1+|x|)^gamma), purepower (|x|^gamma),
    exponential (e^(gamma |x|)), piecewise (explicit box/value pairs), or
    periodic (a base spec tiled by translates of a cube).  Build through
    the factory functions rather than directly.
    """

    kind: str
    p: float
    gamma: float = 0.0
    value: float = 1.0
    pieces: tuple = ()
    base: "WeightSpec" = None
    tile: Box = None

    # -- duality ---------------------------------------------------------------

    def dual_exponent(self):
        return -1.0 / (self.p - 1.0)

    def dual(self):
        """The conjugate weight sigma = w^(-1/(p-1)) with exponent p' = p/(p-1).

        Carrying the conjugate exponent makes the duality exact:
        ap_ratio(w.dual(), Q) == ap_ratio(w, Q) for every box, and
        w.dual().dual() is w again.
        """
        e = self.dual_exponent()
        q = self.p / (self.p - 1.0)
        if self.kind == "constant":
            return WeightSpec("constant", q, value=self.value ** e)
        if self.kind in ("power", "purepower", "exponential"):
            return WeightSpec(self.kind, q, gamma=self.gamma * e,
                              value=self.value ** e)
        if self.kind == "piecewise":
            return WeightSpec(
                "piecewise", q,
                pieces=tuple((b, v ** e) for b, v in self.pieces))
        if self.kind == "periodic":
            return WeightSpec("periodic", q, base=self.base.dual(),
                              tile=self.tile)
        raise DomainError(f"unknown weight kind {self.kind!r}")

    # -- evaluation --------------------------------------------------------------

    def __call__(self, x):
        """Pointwise value; quadrature and spot checks."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.sqrt((x ** 2).sum(axis=1))
        if self.kind == "constant":
            out = np.full_like(r, self.value)
        elif self.kind == "power":
            out = self.value * (1.0 + r) ** self.gamma
        elif self.kind == "purepower":
            with np.errstate(divide="ignore"):
                out = self.value * r ** self.gamma
        elif self.kind == "exponential":
            out = self.value * np.exp(self.gamma * r)
        elif self.kind == "piecewise":
            out = np.zeros_like(r)
            hit = np.zeros_like(r, dtype=bool)
            for b, v in self.pieces:
                inside = np.all(
                    (x >= np.asarray(b.lo)) & (x < np.asarray(b.hi)), axis=1)
                out[inside] = v
                hit |= inside
            if not hit.all():
                raise DomainError("point outside the piecewise domain")
        elif self.kind == "periodic":
            mapped = _wrap_into_tile(x, self.tile)
            return self.base(mapped)
        else:
            raise DomainError(f"unknown weight kind {self.kind!r}")
        return out if out.size > 1 else float(out[0])

    # -- integration ---------------------------------------------------------------

    def integral(self, box):
        """Exact (closed form / overlap) or quadrature integral over a box."""
        if self.kind in _CLOSED_FORMS:
            if box.dimension == 1:
                return self._integral_1d(box.lo[0], box.hi[0])
            return _quad_integral(self, box)
        if self.kind == "piecewise":
            return self._integral_piecewise(box)
        if self.kind == "periodic":
            return self._integral_periodic(box)
        raise DomainError(f"unknown weight kind {self.kind!r}")

    def _integral_1d(self, a, b):
        if a < 0.0 < b:
            return self._radial_1d(0.0, -a) + self._radial_1d(0.0, b)
        if b <= 0.0:
            a, b = -b, -a
        return self._radial_1d(a, b)

    def _radial_1d(self, a, b):
        """Integral of the radial profile over [a, b], 0 <= a <= b."""
        g = self.gamma
        c = self.value
        if a == b:
            return 0.0
        if self.kind == "constant":
            return c * (b - a)
        if self.kind == "power":
            if g == -1.0:
                return c * (math.log1p(b) - math.log1p(a))
            return c * ((1.0 + b) ** (g + 1.0) - (1.0 + a) ** (g + 1.0)) / (g + 1.0)
        if self.kind == "purepower":
            if a == 0.0:
                if g <= -1.0:
                    raise NonIntegrableError(
                        f"|x|^{g} is not integrable at the origin")
                return c * b ** (g + 1.0) / (g + 1.0)
            if g == -1.0:
                return c * math.log(b / a)
            return c * (b ** (g + 1.0) - a ** (g + 1.0)) / (g + 1.0)
        if self.kind == "exponential":
            if g == 0.0:
                return c * (b - a)
            if g * b > 700.0:
                raise DomainError(
                    f"exponential weight overflows: gamma*|x| = {g * b}")
            return c * (math.exp(g * b) - math.exp(g * a)) / g
        raise DomainError(f"no closed form for kind {self.kind!r}")

    def _integral_piecewise(self, box):
        blo = np.asarray(box.lo)
        bhi = np.asarray(box.hi)
        total = 0.0
        covered = 0.0
        for b, v in self.pieces:
            ov = np.minimum(np.asarray(b.hi), bhi) - np.maximum(np.asarray(b.lo), blo)
            np.clip(ov, 0.0, None, out=ov)
            vol = float(ov.prod())
            covered += vol
            total += v * vol
        want = box.volume()
        if not math.isclose(covered, want, rel_tol=1e-12):
            raise NonIntegrableError(
                f"box {box.lo}..{box.hi} leaves the piecewise domain "
                f"(covered {covered} of {want})")
        return total

    def _integral_periodic(self, box):
        tile = self.tile
        sides = tile.sides()
        total = 0.0
        ranges = []
        for a, b, tl, s in zip(box.lo, box.hi, tile.lo, sides):
            k0 = math.floor((a - tl) / s)
            k1 = math.ceil((b - tl) / s)
            ranges.append(range(k0, k1))
        for shift in product(*ranges):
            lo = []
            hi = []
            empty = False
            for a, b, tl, th, s, k in zip(box.lo, box.hi, tile.lo, tile.hi,
                                          sides, shift):
                u = max(a - k * s, tl)
                v = min(b - k * s, th)
                if not (u < v):
                    empty = True
                    break
                lo.append(u)
                hi.append(v)
            if empty:
                continue
            total += self.base.integral(Box(tuple(lo), tuple(hi)))
        return total


def _wrap_into_tile(x, tile):
    lo = np.asarray(tile.lo)
    s = np.asarray(tile.sides())
    return lo + np.mod(x - lo, s)


# -- factories ------------------------------------------------------------------


def constant_weight(c, p):
    if not (c > 0.0):
        raise DomainError("constant weight must be positive")
    return WeightSpec("constant", _check_p(p), value=float(c))


def power_weight(gamma, p, scale=1.0):
    """scale * (1 + |x|)^gamma."""
    if not (scale > 0.0):
        raise DomainError("scale must be positive")
    return WeightSpec("power", _check_p(p), gamma=float(gamma),
                      value=float(scale))


def pure_power_weight(gamma, p, scale=1.0):
    """scale * |x|^gamma."""
    if not (scale > 0.0):
        raise DomainError("scale must be positive")
    return WeightSpec("purepower", _check_p(p), gamma=float(gamma),
                      value=float(scale))


def exponential_weight(gamma, p, scale=1.0):
    """scale * e^(gamma |x|)."""
    if not (scale > 0.0):
        raise DomainError("scale must be positive")
    return WeightSpec("exponential", _check_p(p), gamma=float(gamma),
                      value=float(scale))


def piecewise_weight(pieces, p):
    """Explicit positive piecewise-constant weight on disjoint boxes."""
    p = _check_p(p)
    frozen = []
    for b, v in pieces:
        v = float(v)
        if not (v > 0.0) or not math.isfinite(v):
            raise DomainError("piecewise weight values must be positive finite")
        frozen.append((b, v))
    for i, (b1, _) in enumerate(frozen):
        for b2, _ in frozen[i + 1:]:
            ov = 1.0
            for a, b, c, d in zip(b1.lo, b1.hi, b2.lo, b2.hi):
                ov *= max(0.0, min(b, d) - max(a, c))
            if ov > 0.0:
                raise DomainError("piecewise weight boxes overlap")
    return WeightSpec("piecewise", p, pieces=tuple(frozen))


def weight_from_grid_function(gf, p):
    """Piecewise weight from a strictly positive GridFunction."""
    pieces = []
    for cube, v in gf.values.items():
        if not (v > 0.0):
            raise DomainError("weight requires strictly positive cell values")
        pieces.append((cube.box(), v))
    return piecewise_weight(pieces, p)


def extend_weight(w, q0):
    """Periodize a weight beyond its home cube by tiling translates.

    The returned spec agrees with w on q0 and copies it onto every
    translate q0 + k * l(q0); ratios over any union of whole tiles then
    reproduce the ratio over q0 exactly.
    """
    sides = q0.sides()
    if any(s != sides[0] for s in sides[1:]):
        raise DomainError("extension tile must be a cube")
    return WeightSpec("periodic", w.p, base=w, tile=q0)


# -- quadrature (d >= 2 closed forms) ----------------------------------------------


def _quad_once(w, box, nodes):
    pts, wts = np.polynomial.legendre.leggauss(nodes)
    axes_p = []
    axes_w = []
    for a, b in zip(box.lo, box.hi):
        axes_p.append(0.5 * (b - a) * pts + 0.5 * (a + b))
        axes_w.append(0.5 * (b - a) * wts)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes_p, indexing="ij")],
                    axis=1)
    wmesh = np.stack([m.ravel() for m in np.meshgrid(*axes_w, indexing="ij")],
                     axis=1).prod(axis=1)
    return float(np.asarray(w(mesh)) @ wmesh)


def _split_boxes(box):
    halves = []
    for a, b in zip(box.lo, box.hi):
        m = 0.5 * (a + b)
        halves.append(((a, m), (m, b)))
    out = []
    for combo in product(*halves):
        out.append(Box(tuple(c[0] for c in combo), tuple(c[1] for c in combo)))
    return out


def _quad_integral(w, box, depth=0):
    """Adaptive tensor Gauss-Legendre with a divergence detector.

    Boxes whose one-split refinement disagrees with the unsplit value are
    subdivided further, so integrable singularities (|x|^gamma with
    gamma > -d) converge while the effort concentrates near the singular
    point.  A box still refusing to settle at the depth cap with values
    drifting upward is reported non-integrable.
    """
    coarse = _quad_once(w, box, QUAD_NODES)
    fine = sum(_quad_once(w, sub, QUAD_NODES) for sub in _split_boxes(box))
    scale = max(abs(coarse), abs(fine), 1e-300)
    disagree = abs(fine - coarse) > QUAD_REL_TOL * scale
    growing = fine > coarse * (1.0 + QUAD_REL_TOL)
    if not disagree:
        return fine
    if depth >= QUAD_MAX_DEPTH:
        if growing:
            raise NonIntegrableError(
                f"quadrature unstable on {box.lo}..{box.hi}: {coarse} -> {fine}")
        return fine
    return sum(_quad_integral(w, sub, depth + 1) for sub in _split_boxes(box))


# -- ratios and sweeps ----------------------------------------------------------------


def _as_box(q):
    return q.box() if isinstance(q, GCube) else q


def ap_ratio(w, q, dual=None):
    """w(Q)^(1/p) sigma(Q)^((p-1)/p) / |Q| over one cube; always >= 1."""
    box = _as_box(q)
    sigma = dual if dual is not None else w.dual()
    p = w.p
    ww = w.integral(box)
    sw = sigma.integral(box)
    if not (ww > 0.0 and sw > 0.0):
        raise NonIntegrableError("weight integrals must be positive")
    return ww ** (1.0 / p) * sw ** ((p - 1.0) / p) / box.volume()


@dataclass(frozen=True)
class ApEntry:
    cube_id: str
    sidelength: float
    center_norm: float
    ratio: float
    psi: float
    normalized: float


@dataclass(frozen=True)
class ApReport:
    """Ratio table over one cube family with its supremum."""

    family: str
    p: float
    theta: float
    entries: tuple
    supremum: float
    argmax_id: str


def ap_theta_constant(w, theta, family, family_tag="family"):
    """Supremum of ratio(Q) / psi_theta(Q) over an explicit cube family.

    Parameters
    ----------
    w : WeightSpec
    theta : float >= 0
    family : iterable of (cube_id, Box)
    family_tag : str
        Label stored in the report and the CSV output.
    """
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    dual = w.dual()
    entries = []
    best = None
    for cube_id, q in family:
        box = _as_box(q)
        try:
            ratio = ap_ratio(w, box, dual=dual)
        except NonIntegrableError as exc:
            raise NonIntegrableError(f"cube {cube_id}: {exc}") from exc
        side = max(box.sides())
        center = box.center()
        psi = psi_theta(side, center, theta)
        norm = ratio / psi
        entry = ApEntry(
            cube_id=str(cube_id),
            sidelength=side,
            center_norm=math.sqrt(sum(u * u for u in center)),
            ratio=ratio,
            psi=psi,
            normalized=norm,
        )
        entries.append(entry)
        if best is None or norm > best[0]:
            best = (norm, entry.cube_id)
    if best is None:
        raise DomainError("empty cube family")
    return ApReport(
        family=family_tag, p=w.p, theta=theta, entries=tuple(entries),
        supremum=best[0], argmax_id=best[1])


def ap_constant(w, family, family_tag="family"):
    """Supremum of the plain ratio over a family (theta = 0)."""
    return ap_theta_constant(w, 0.0, family, family_tag=family_tag)


# -- cube family builders ----------------------------------------------------------


def centered_cube_family(exponents, dimension):
    """Origin-centered cubes [-2^m, 2^m)^d for m in exponents."""
    out = []
    for m in exponents:
        r = 2.0 ** m
        out.append((f"centered:{m}",
                    Box((-r,) * dimension, (r,) * dimension)))
    return out


def dyadic_subcube_family(q0, depth):
    """All dyadic subcubes of q0 down to the given halving depth."""
    d = q0.dimension
    out = []
    for k in range(depth + 1):
        n = 1 << k
        sides = [(b - a) / n for a, b in zip(q0.lo, q0.hi)]
        for idx in product(range(n), repeat=d):
            lo = tuple(a + i * s for a, i, s in zip(q0.lo, idx, sides))
            hi = tuple(a + (i + 1) * s for a, i, s in zip(q0.lo, idx, sides))
            label = ",".join(str(i) for i in idx)
            out.append((f"{k}:{label}", Box(lo, hi)))
    return out


def near_region_family(grid, depth=2):
    """Dyadic subcubes of every cell's near-region box, for the local sweep.

    Cells in the outermost layer are skipped: their neighborhoods reach
    past the truncation and have no grid realization.
    """
    out = []
    for cell in grid.cubes():
        try:
            nbox = grid.near_region(cell).bounding_box()
        except TruncatedGridError:
            continue
        cid = f"N{cell.layer}:" + ",".join(str(i) for i in cell.coords)
        for sub_id, box in dyadic_subcube_family(nbox, depth):
            out.append((f"{cid}/{sub_id}", box))
    return out


def lattice_family(q0, levels_up, levels_down, window=None):
    """Cubes of the dyadic system generated by q0, within a window.

    Level k cubes have side l(q0) * 2^k and corners on the lattice
    anchored at q0's lower corner.  The window defaults to the level
    levels_up cube at the anchor, extended one tile in each direction.
    """
    d = q0.dimension
    s0 = q0.sides()[0]
    if window is None:
        r = s0 * 2.0 ** levels_up
        window = Box(tuple(a - r for a in q0.lo), tuple(a + 2 * r for a in q0.lo))
    out = []
    for k in range(-levels_down, levels_up + 1):
        s = s0 * 2.0 ** k
        ranges = []
        for a, wlo, whi in zip(q0.lo, window.lo, window.hi):
            k0 = math.floor((wlo - a) / s)
            k1 = math.ceil((whi - a) / s)
            ranges.append(range(k0, k1))
        for idx in product(*ranges):
            lo = tuple(a + i * s for a, i in zip(q0.lo, idx))
            hi = tuple(a + (i + 1) * s for a, i in zip(q0.lo, idx))
            label = ",".join(str(i) for i in idx)
            out.append((f"L{k}:{label}", Box(lo, hi)))
    return out


# -- far-pair necessary condition ------------------------------------------------------


@dataclass(frozen=True)
class FarPairReport:
    """Log-domain pairing bounds for one far cube pair.

    log_sup_bound collects max over sample pairs of
    log[w(R)^(1/p) sigma(R')^((p-1)/p)] + log k at the pair's peak time
    (pointwise-kernel form); log_inf_bound uses the infimum of the
    kernel over the closed cube pair at the peak time of the sample
    pair.  A weight compatible with the adapted-operator classes keeps
    these uniformly bounded over far pairs.
    """

    log_sup_bound: float
    log_inf_bound: float
    n_pairs: int
    argmax_pair: tuple


def _cube_sample_points(cube):
    pts = list(product(*zip(cube.lo, cube.hi)))
    pts.append(cube.center())
    return pts


def far_pair_bound(w, cube_r, cube_rp, sample_pairs=None):
    """Evaluate the far-pair necessary-condition products in log domain.

    Parameters
    ----------
    w : WeightSpec
    cube_r, cube_rp : GCube
        The near cube (containing the evaluation point) and a far cube.
    sample_pairs : iterable of (point, point), optional
        Defaults to all corner/center combinations of the two cubes.
    """
    sigma = w.dual()
    int_w = w.integral(cube_r.box())
    int_s = sigma.integral(cube_rp.box())
    # fast-decaying weights underflow to 0 over deep-layer cubes; refuse
    # cleanly instead of feeding log(0) downstream
    if not (int_w > 0.0 and int_s > 0.0):
        raise DomainError(
            "weight integral underflowed to 0 over a far cube; this "
            "weight decays below double range at that distance")
    log_w = math.log(int_w)
    log_s = math.log(int_s)
    p = w.p
    log_weight_part = log_w / p + log_s * (p - 1.0) / p

    if sample_pairs is None:
        sample_pairs = [(a, b)
                        for a in _cube_sample_points(cube_r)
                        for b in _cube_sample_points(cube_rp)]
    best_sup = None
    best_inf = None
    best_pair = None
    n = 0
    for xs, ys in sample_pairs:
        n += 1
        res = t_max(xs, ys, cube_context=(cube_r, cube_rp))
        v_sup = log_weight_part + res.log_k_at_max
        v_inf = log_weight_part + kernel_extremum(
            cube_r, cube_rp, res.t_max, "inf")
        if best_sup is None or v_sup > best_sup:
            best_sup = v_sup
            best_pair = (tuple(xs), tuple(ys))
        if best_inf is None or v_inf > best_inf:
            best_inf = v_inf
    if n == 0:
        raise DomainError("no sample pairs")
    return FarPairReport(
        log_sup_bound=best_sup, log_inf_bound=best_inf,
        n_pairs=n, argmax_pair=best_pair)
