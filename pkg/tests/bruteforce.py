"""Nested-loop reference implementations of every maximal operator.

The library evaluates operators through cached arrays and log-domain
batch reductions; this module recomputes the same quantities with plain
Python loops over the cell dictionary, summing in the linear domain and
exponentiating per term.  Agreement to 1e-12 relative then checks the
whole staging pipeline (support arrays, masking, caching, log-sum-exp)
against independently structured arithmetic.

Deliberately shared with the library, because the operators are only
comparable when both sides range over the identical finite families:

* the grid geometry (cells, near regions, growth exponents), which has
  its own counting oracles in test_geometry;
* the evaluation time set of ``times_for_point``;
* the corner formula of the shifted cube family, mirrored literally so
  shifted boxes agree to the last bit;
* the rationalised branches of the confinement exponent, without which
  no 1e-12 comparison is possible at extreme times (the kernel extremum
  candidates built from it are checked against dense grids in
  test_kernels).

Everything downstream of those inputs is recomputed here from scratch.
"""

import math
from itertools import product

from oscmax.geometry import Box
from oscmax.operators import SHIFT_FRACTIONS, times_for_point

LOG_TWO_PI = math.log(2.0 * math.pi)


# -- scalar kernel pieces --------------------------------------------------


def alpha(t):
    """Confinement exponent, same cancellation-free branches as the library."""
    if t <= 1.0:
        return t / (2.0 * (math.sqrt(1.0 + t * t) + 1.0))
    u = 1.0 / t
    return 1.0 / (2.0 * (math.sqrt(1.0 + u * u) + u))


def log_heat(x, y, t):
    d = len(x)
    dsq = sum((u - v) ** 2 for u, v in zip(x, y))
    return -0.5 * d * (LOG_TWO_PI + math.log(t)) - dsq / (2.0 * t)


def log_kernel(x, y, t):
    ss = sum(u * u for u in x) + sum(v * v for v in y)
    return log_heat(x, y, t) - alpha(t) * ss


def log_pair_extremum(abox, bbox, t, sup):
    """Log extremum of the kernel over a closed box pair, candidate by candidate.

    Per coordinate the log kernel is a concave quadratic
    q(u, v) = -(u-v)^2/(2t) - alpha(t)(u^2 + v^2); its box maximum is 0 at
    the origin when feasible and otherwise sits on an edge, where fixing
    one variable at an endpoint puts the partner at endpoint/(1+2 alpha t)
    clamped into its interval.  The minimum of a concave function is at a
    corner.
    """
    d = len(abox.lo)
    a = alpha(t)
    inv2t = 0.5 / t
    s = 1.0 + 2.0 * a * t
    total = 0.0
    for i in range(d):
        a1, a2 = abox.lo[i], abox.hi[i]
        b1, b2 = bbox.lo[i], bbox.hi[i]
        if sup:
            best = -math.inf
            if a1 <= 0.0 <= a2 and b1 <= 0.0 <= b2:
                best = 0.0
            for u in (a1, a2):
                v = min(max(u / s, b1), b2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                best = max(best, q)
            for v in (b1, b2):
                u = min(max(v / s, a1), a2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                best = max(best, q)
        else:
            best = math.inf
            for u in (a1, a2):
                for v in (b1, b2):
                    q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                    best = min(best, q)
        total += best
    return -0.5 * d * (LOG_TWO_PI + math.log(t)) + total


# -- shared family construction --------------------------------------------


def shifted_box(x, side, fracs):
    # mirrors the library's ((k+s)*side, (k+s+1)*side) corner formula
    lo, hi = [], []
    for u, s in zip(x, fracs):
        k = math.floor(u / side - s)
        lo.append((k + s) * side)
        hi.append((k + s + 1.0) * side)
    return Box(tuple(lo), tuple(hi))


def _support(f):
    return [(c, v) for c, v in f.values.items() if v > 0.0]


def _box_mass(support, lo, hi):
    d = len(lo)
    mass = 0.0
    for c, v in support:
        ov = 1.0
        for i in range(d):
            w = min(c.hi[i], hi[i]) - max(c.lo[i], lo[i])
            if w <= 0.0:
                ov = 0.0
                break
            ov *= w
        mass += ov * v
    return mass


# -- cube-family operators ---------------------------------------------------


def maximal_theta(f, x, theta, shifts=True):
    x = tuple(float(u) for u in x)
    grid = f.grid
    grid.cube_at(x)
    d = grid.config.dimension
    lmax = grid.config.max_layer
    support = _support(f)
    combos = (list(product(SHIFT_FRACTIONS, repeat=d)) if shifts
              else [(0.0,) * d])
    best = 0.0
    for m in range(-(lmax + 2), lmax + 3):
        side = 2.0 ** m
        for fracs in combos:
            q = shifted_box(x, side, fracs)
            mass = _box_mass(support, q.lo, q.hi)
            if mass <= 0.0:
                continue
            avg = mass / side ** d
            if theta:
                nc = math.sqrt(sum(u * u for u in q.center()))
                avg /= (1.0 + side * max(1.0, nc)) ** theta
            best = max(best, avg)
    return best


def maximal_classical(f, x, shifts=True):
    return maximal_theta(f, x, 0.0, shifts=shifts)


def maximal_generic(f, x, coeff):
    x = tuple(float(u) for u in x)
    grid = f.grid
    r_cell = grid.cube_at(x)
    d = grid.config.dimension
    lmax = grid.config.max_layer
    tb = grid.config.truncation_box()
    support = _support(f)
    best = 0.0
    for m in range(-lmax, lmax + 1):
        side = 2.0 ** m
        q = shifted_box(x, side, (0.0,) * d)
        if not tb.contains_box(q):
            continue
        own = grid.cube_from_box(q)
        if own is not None:
            total = coeff(q, r_cell, own) * f.values.get(own, 0.0) * own.volume()
        else:
            total = 0.0
            for c, v in support:
                if q.contains_box(c.box()):
                    total += coeff(q, r_cell, c) * v * c.volume()
        best = max(best, total / side ** d)
    return best


# -- kernel operators --------------------------------------------------------


def heat_maximal(f, x, variant, tgrid):
    x = tuple(float(u) for u in x)
    grid = f.grid
    r_cell = grid.cube_at(x)
    support = _support(f)
    if variant in ("hermite_loc", "hermite_far"):
        near = grid.near_region(r_cell)
        if variant == "hermite_loc":
            support = [(c, v) for c, v in support if c in near]
        else:
            support = [(c, v) for c, v in support if c not in near]
    if not support:
        return 0.0
    best = 0.0
    for t in times_for_point(grid, r_cell, tgrid):
        t = float(t)
        if variant == "sharp":
            gate = grid.growth_exponent(r_cell, t)
        else:
            gate = grid.config.max_layer
        total = 0.0
        for c, v in support:
            if c.layer > gate:
                continue
            logk = (log_heat(x, c.center(), t) if variant == "classical"
                    else log_kernel(x, c.center(), t))
            total += math.exp(logk) * v * c.volume()
        best = max(best, total)
    return best


def far_adapted_maximal(f, x, mode, tgrid):
    x = tuple(float(u) for u in x)
    grid = f.grid
    r_cell = grid.cube_at(x)
    near = grid.near_region(r_cell)
    support = [(c, v) for c, v in _support(f) if c not in near]
    if not support:
        return 0.0
    abox = r_cell.box()
    sup = mode == "plus"
    best = 0.0
    for t in times_for_point(grid, r_cell, tgrid):
        t = float(t)
        gate = grid.growth_exponent(r_cell, t)
        total = 0.0
        for c, v in support:
            if c.layer > gate:
                continue
            total += math.exp(log_pair_extremum(abox, c.box(), t, sup)) * v * c.volume()
        best = max(best, total)
    return best


class _Restricted:
    """Minimal stand-in for a grid function restricted to a region."""

    def __init__(self, grid, values):
        self.grid = grid
        self.values = values


def maximal_local(op, f, x, tgrid):
    grid = f.grid
    near = grid.near_region(grid.cube_at(tuple(float(u) for u in x)))
    sub = _Restricted(grid, {c: v for c, v in f.values.items() if c in near})
    if op == "m":
        return maximal_classical(sub, x)
    variant = "classical" if op == "heat_classical" else "hermite"
    return heat_maximal(sub, x, variant, tgrid)
