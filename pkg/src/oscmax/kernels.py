"""Log-domain evaluation of the oscillator heat kernel family.

The kernel treated here is the Gaussian-damped heat kernel

    k_t(x, y) = (2 pi t)^(-d/2) exp(-|x-y|^2 / (2t)) exp(-alpha(t) (|x|^2 + |y|^2))

with damping coefficient alpha(t) = (sqrt(1+t^2) - 1) / (2t).  Substituting
t -> sinh(2s) turns k into the fundamental solution of the oscillator
operator -Laplace + |x|^2 at time s (up to normalization), which is what
``log_unrescaled_kernel`` evaluates.

Every routine works in the natural-log domain and never exponentiates a
large negative exponent, so values remain meaningful for |x|, |y| far past
the underflow threshold of a raw double (|y| up to 2^20 is routine here).

For fixed t the map (x, y) -> log k_t(x, y) is strictly concave and
separable across coordinate pairs (x_i, y_i), so extrema over a product of
closed boxes are attained either at an interior stationary point that is
computable in closed form or on the box edges.  ``kernel_extremum``
exploits this to return exact sup/inf values instead of running a search.
"""

import math
from dataclasses import dataclass

from .backend import core
from .errors import DomainError, NoInteriorMaxError

__all__ = [
    "TMaxResult",
    "alpha",
    "critical_radius",
    "derivative_sign",
    "kernel_extremum",
    "log_heat_kernel",
    "log_hermite_kernel",
    "log_unrescaled_kernel",
    "psi_theta",
    "t_max",
]

# bisection defaults: relative width 1e-12 or 200 halvings, whichever first
ROOT_RTOL = 1e-12
ROOT_MAXITER = 200

# fallback bracket floor when no cube context supplies the geometric
# lower bound: [1e-12 * hi, hi] with hi = |x-y|^2 / d
FALLBACK_LO_FACTOR = 1e-12


def _as_point(x):
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(u) for u in x)


def _point_pair(x, y):
    px, py = _as_point(x), _as_point(y)
    if len(px) != len(py):
        raise DomainError(f"point dimensions differ: {len(px)} vs {len(py)}")
    if not px:
        raise DomainError("points must have at least one coordinate")
    return px, py


def _pair_stats(px, py):
    """Return (ss, ip, dsq) = |x|^2+|y|^2, <x,y>, |x-y|^2."""
    ss = sum(u * u for u in px) + sum(v * v for v in py)
    ip = sum(u * v for u, v in zip(px, py))
    dsq = sum((u - v) ** 2 for u, v in zip(px, py))
    return ss, ip, dsq


def _check_time(t):
    if not (t > 0.0) or math.isinf(t):
        raise DomainError(f"time must be positive and finite, got {t}")


def alpha(t):
    """Gaussian damping coefficient (sqrt(1+t^2) - 1) / (2t).

    Evaluated through cancellation-free forms on both sides of t = 1:
    t / (2 (sqrt(1+t^2) + 1)) for small t and its reciprocal-argument
    analogue for large t.  Strictly increasing from 0 to the limit 1/2.

    Parameters
    ----------
    t : float
        Time, must be positive.

    Returns
    -------
    float
        alpha(t) in [0, 1/2).
    """
    _check_time(t)
    return core.alpha(t)


def critical_radius(x):
    """min(1, 1/|x|), the critical-scale radius at the point x."""
    nx = math.sqrt(sum(u * u for u in _as_point(x)))
    return 1.0 if nx <= 1.0 else 1.0 / nx


def psi_theta(sidelength, center, theta):
    """Scale penalty (1 + l / rho(c))^theta for a cube of side l at center c.

    Since rho(c) = min(1, 1/|c|), the ratio l / rho(c) is l * max(1, |c|).
    """
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    nc = math.sqrt(sum(u * u for u in _as_point(center)))
    return (1.0 + sidelength * max(1.0, nc)) ** theta


def log_heat_kernel(x, y, t):
    """log of the classical heat kernel (2 pi t)^(-d/2) e^(-|x-y|^2/(2t)).

    Parameters
    ----------
    x, y : point (scalar or coordinate sequence)
    t : float
        Time, must be positive.
    """
    _check_time(t)
    px, py = _point_pair(x, y)
    dsq = sum((u - v) ** 2 for u, v in zip(px, py))
    return core.log_heat(len(px), dsq, t)


def log_hermite_kernel(x, y, t):
    """log k_t(x, y): heat kernel log minus alpha(t) (|x|^2 + |y|^2).

    Always <= log_heat_kernel(x, y, t) since alpha >= 0, with equality
    only at x = y = 0.  Exactly symmetric in x and y.
    """
    _check_time(t)
    px, py = _point_pair(x, y)
    ss, _, dsq = _pair_stats(px, py)
    return core.log_kernel(len(px), ss, dsq, t)


def log_unrescaled_kernel(x, y, s):
    """log of the true oscillator semigroup kernel at time s.

    Equals log k_{sinh 2s}(x, y).  Guards the sinh argument: 2s > 700
    would overflow a double before the log-domain machinery can help.
    """
    if not (s > 0.0):
        raise DomainError(f"time must be positive, got {s}")
    if 2.0 * s > 700.0:
        raise DomainError(f"sinh argument 2s = {2.0 * s} exceeds overflow guard 700")
    return log_hermite_kernel(x, y, math.sinh(2.0 * s))


def derivative_sign(x, y, t):
    """Sign of d/dt k_t(x, y) at time t, as -1, 0 or +1.

    The derivative sign equals the sign of
    g(t) = -d t + (|x|^2+|y|^2)/sqrt(1+t^2) - 2 <x, y>,
    a strictly decreasing function of t, so k_t is unimodal in t.
    """
    _check_time(t)
    px, py = _point_pair(x, y)
    ss, ip, _ = _pair_stats(px, py)
    g = core.g_value(len(px), ss, ip, t)
    return (g > 0.0) - (g < 0.0)


@dataclass(frozen=True)
class TMaxResult:
    """Location of the unique interior maximum of t -> k_t(x, y).

    Attributes
    ----------
    t_max : float
        The maximizing time.
    log_k_at_max : float
        log k at that time.
    bracket : tuple of float
        (lo, hi) bisection bracket actually used; lo <= t_max <= hi.
    iterations : int
        Bisection steps taken.
    taylor_factor : float or None
        8 t_max sqrt(2^(j+j') / (|x|^2+|y|^2)) when cube context with
        layers j, j' was supplied, else None.
    """

    t_max: float
    log_k_at_max: float
    bracket: tuple
    iterations: int
    taylor_factor: float = None


def t_max(x, y, cube_context=None, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER):
    """Locate the unique time maximizing k_t(x, y) by bisection on g.

    g(t) (see ``derivative_sign``) is strictly decreasing with
    g(0+) = |x-y|^2 >= 0, so a positive root exists iff x != y, and the
    upper bracket end hi = |x-y|^2 / d always satisfies g(hi) <= 0.  With
    cube context the lower end starts from the layer-dependent bound
    |y| / (9 d |x|) (layer of the first cube >= 1) or |y| / (9 d) (layer
    0); otherwise from 1e-12 * hi.  A candidate lower end with g < 0 is
    shrunk geometrically before giving up.

    Parameters
    ----------
    x, y : point
    cube_context : (GCube, GCube), optional
        Cubes containing x and y; enables the layer-based lower bracket
        and the taylor_factor field.
    rtol : float
        Relative bracket width at which bisection stops.
    maxiter : int
        Bisection step cap.

    Returns
    -------
    TMaxResult

    Raises
    ------
    NoInteriorMaxError
        If x == y (k_t strictly decreasing, supremum at t -> 0+) or no
        sign change is found down to the shrink floor.
    """
    px, py = _point_pair(x, y)
    d = len(px)
    ss, ip, dsq = _pair_stats(px, py)
    if dsq == 0.0:
        raise NoInteriorMaxError(
            "k_t(x, x) is strictly decreasing in t; no interior maximum"
        )
    hi = dsq / d

    taylor = None
    if cube_context is not None:
        ca, cb = cube_context
        ny = math.sqrt(sum(v * v for v in py))
        if ca.layer >= 1:
            nx = math.sqrt(sum(u * u for u in px))
            lo = ny / (9.0 * d * nx)
        else:
            lo = ny / (9.0 * d)
        lo = min(lo, 0.5 * hi)
    else:
        lo = FALLBACK_LO_FACTOR * hi

    # shrink until the lower end sits on the positive side of g
    while core.g_value(d, ss, ip, lo) < 0.0 and lo > 1e-290:
        hi = lo
        lo /= 65536.0
    if core.g_value(d, ss, ip, lo) < 0.0:
        raise NoInteriorMaxError(
            "no derivative sign change found; supremum attained as t -> 0+"
        )

    bracket = (lo, hi)
    root, iters = core.bisect_g_root(d, ss, ip, lo, hi, rtol, maxiter)
    log_k = core.log_kernel(d, ss, dsq, root)

    if cube_context is not None:
        taylor = 8.0 * root * math.sqrt(2.0 ** (ca.layer + cb.layer) / ss)

    return TMaxResult(
        t_max=root,
        log_k_at_max=log_k,
        bracket=bracket,
        iterations=iters,
        taylor_factor=taylor,
    )


def kernel_extremum(cube_a, cube_b, t, mode="sup"):
    """Exact extremum of log k_t over the closed boxes of two cubes.

    For fixed t, log k_t is strictly concave in (x, y) jointly and splits
    into a sum of identical concave forms over coordinate pairs, so the
    supremum is attained at the per-coordinate stationary point clamped
    to the box edges and the infimum at box corners.  Both are evaluated
    in closed form; no search tolerance is involved.

    Parameters
    ----------
    cube_a, cube_b : cube-like
        Objects exposing lo/hi coordinate tuples (GCube or Box).
    t : float
        Time, must be positive.
    mode : str
        "sup" or "inf".

    Returns
    -------
    float
        log of the extremal kernel value over closure(A) x closure(B).
    """
    _check_time(t)
    if mode not in ("sup", "inf"):
        raise DomainError(f"mode must be 'sup' or 'inf', got {mode!r}")
    a_lo, a_hi = cube_a.lo, cube_a.hi
    b_lo, b_hi = cube_b.lo, cube_b.hi
    if len(a_lo) != len(b_lo):
        raise DomainError("cube dimensions differ")
    return core.pair_extremum(len(a_lo), t, a_lo, a_hi, b_lo, b_hi, mode == "sup")
