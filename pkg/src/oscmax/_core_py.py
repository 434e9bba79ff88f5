"""Pure-Python/numpy implementation of the hot kernel routines.

This module mirrors the compiled extension ``oscmax._core`` function for
function; ``oscmax.backend`` picks whichever is available.  Scalar entry
points use ``math`` for accuracy, batch entry points vectorise over cells
with numpy and reduce in the log domain.

Conventions shared by both backends:

* ``ss``  = |x|^2 + |y|^2,  ``ip`` = <x, y>,  ``dsq`` = |x - y|^2
* every kernel value is handled as a log
* batch routines gate cell ``j`` at time index ``k`` by
  ``layers[j] <= m_of_t[k]``.
"""

from __future__ import annotations

import math

import numpy as np

LOG_TWO_PI = math.log(2.0 * math.pi)
NEG_INF = float("-inf")


def alpha(t: float) -> float:
    """Confinement exponent (sqrt(1+t^2)-1)/(2t), evaluated cancellation-free.

    Increases from 0 to 1/2; for t <= 1 the rationalised form
    t/(2(sqrt(1+t^2)+1)) is used, for t > 1 the same expression in u = 1/t.
    """
    if t <= 1.0:
        return t / (2.0 * (math.sqrt(1.0 + t * t) + 1.0))
    u = 1.0 / t
    return 1.0 / (2.0 * (math.sqrt(1.0 + u * u) + u))


def log_heat(d: int, dsq: float, t: float) -> float:
    return -0.5 * d * (LOG_TWO_PI + math.log(t)) - dsq / (2.0 * t)


def log_kernel(d: int, ss: float, dsq: float, t: float) -> float:
    return log_heat(d, dsq, t) - alpha(t) * ss


def g_value(d: int, ss: float, ip: float, t: float) -> float:
    """Sign of the kernel's t-derivative: positive below the peak time.

    g(t) = -d t + ss / sqrt(1+t^2) - 2 ip, strictly decreasing in t.
    """
    return -d * t + ss / math.sqrt(1.0 + t * t) - 2.0 * ip


def bisect_g_root(d: int, ss: float, ip: float, lo: float, hi: float,
                  rtol: float, maxiter: int) -> tuple[float, int]:
    """Bisection for the root of g; assumes g(lo) >= 0 >= g(hi)."""
    it = 0
    while it < maxiter and (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        it += 1
        if g_value(d, ss, ip, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), it


def count_g_sign_changes(d: int, ss: float, ip: float,
                         tlo: float, thi: float, n: int) -> int:
    """Sign transitions of g over an n-point log-spaced scan (zeros skipped)."""
    ts = np.exp(np.linspace(math.log(tlo), math.log(thi), n))
    g = -float(d) * ts + ss / np.sqrt(1.0 + ts * ts) - 2.0 * ip
    s = np.sign(g)
    s = s[s != 0.0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(np.diff(s) != 0.0))


def pair_extremum(d: int, t: float, a_lo, a_hi, b_lo, b_hi, sup: bool) -> float:
    """Log of the exact extremum of the kernel over a closed box pair.

    For fixed t the log kernel is a strictly concave quadratic in the joint
    variable, separable across coordinate pairs, so the maximum follows from
    clamping the per-edge optimisers and the minimum sits at corners.
    """
    a = alpha(t)
    inv2t = 0.5 / t
    s = 1.0 + 2.0 * a * t
    total = 0.0
    for i in range(d):
        a1 = a_lo[i]
        a2 = a_hi[i]
        b1 = b_lo[i]
        b2 = b_hi[i]
        if sup:
            best = NEG_INF
            if a1 <= 0.0 <= a2 and b1 <= 0.0 <= b2:
                best = 0.0
            for u in (a1, a2):
                v = min(max(u / s, b1), b2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                if q > best:
                    best = q
            for v in (b1, b2):
                u = min(max(v / s, a1), a2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                if q > best:
                    best = q
        else:
            best = math.inf
            for u in (a1, a2):
                for v in (b1, b2):
                    q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                    if q < best:
                        best = q
        total += best
    return -0.5 * d * (LOG_TWO_PI + math.log(t)) + total


def _logsumexp(v: np.ndarray) -> float:
    m = np.max(v)
    if m == NEG_INF or not math.isfinite(m):
        return float(m)
    return float(m + math.log(np.exp(v - m).sum()))


def heat_sum(d: int, ts, m_of_t, layers, xx: float, yy, dsq, logmass,
             use_alpha: bool):
    """Per time: log of the kernel-weighted mass sum over admitted cells."""
    ts = np.asarray(ts, dtype=np.float64)
    m_of_t = np.asarray(m_of_t, dtype=np.int64)
    layers = np.asarray(layers, dtype=np.int64)
    yy = np.asarray(yy, dtype=np.float64)
    dsq = np.asarray(dsq, dtype=np.float64)
    logmass = np.asarray(logmass, dtype=np.float64)
    out = np.full(ts.shape[0], NEG_INF)
    for k in range(ts.shape[0]):
        t = float(ts[k])
        mask = layers <= m_of_t[k]
        if not mask.any():
            continue
        const = -0.5 * d * (LOG_TWO_PI + math.log(t))
        v = const - dsq[mask] / (2.0 * t) + logmass[mask]
        if use_alpha:
            v = v - alpha(t) * (xx + yy[mask])
        out[k] = _logsumexp(v)
    return out


def _extrema_terms(d: int, t: float, a_lo, a_hi, b_lo, b_hi, sup: bool):
    """Vector of Σ_i ext q over coordinate rectangles, one entry per cell."""
    a = alpha(t)
    inv2t = 0.5 / t
    n = b_lo.shape[0]
    total = np.zeros(n)
    if sup:
        s = 1.0 + 2.0 * a * t
        for i in range(d):
            a1 = a_lo[i]
            a2 = a_hi[i]
            b1 = b_lo[:, i]
            b2 = b_hi[:, i]
            best = np.full(n, NEG_INF)
            for u in (a1, a2):
                v = np.clip(u / s, b1, b2)
                q = -(u - v) ** 2 * inv2t - a * (u * u + v * v)
                np.maximum(best, q, out=best)
            for v in (b1, b2):
                u = np.clip(v / s, a1, a2)
                q = -(u - v) ** 2 * inv2t - a * (u * u + v * v)
                np.maximum(best, q, out=best)
            if a1 <= 0.0 <= a2:
                feas = (b1 <= 0.0) & (b2 >= 0.0)
                best[feas] = np.maximum(best[feas], 0.0)
            total += best
    else:
        for i in range(d):
            a1 = a_lo[i]
            a2 = a_hi[i]
            b1 = b_lo[:, i]
            b2 = b_hi[:, i]
            best = np.full(n, np.inf)
            for u in (a1, a2):
                for v in (b1, b2):
                    q = -(u - v) ** 2 * inv2t - a * (u * u + v * v)
                    np.minimum(best, q, out=best)
            total += best
    return total


def far_sum(d: int, ts, m_of_t, layers, a_lo, a_hi, b_lo, b_hi, logmass,
            sup: bool):
    """Per time: log of the extremal-kernel mass sum over admitted cells."""
    ts = np.asarray(ts, dtype=np.float64)
    m_of_t = np.asarray(m_of_t, dtype=np.int64)
    layers = np.asarray(layers, dtype=np.int64)
    a_lo = np.asarray(a_lo, dtype=np.float64)
    a_hi = np.asarray(a_hi, dtype=np.float64)
    b_lo = np.asarray(b_lo, dtype=np.float64)
    b_hi = np.asarray(b_hi, dtype=np.float64)
    logmass = np.asarray(logmass, dtype=np.float64)
    out = np.full(ts.shape[0], NEG_INF)
    for k in range(ts.shape[0]):
        t = float(ts[k])
        mask = layers <= m_of_t[k]
        if not mask.any():
            continue
        const = -0.5 * d * (LOG_TWO_PI + math.log(t))
        terms = _extrema_terms(d, t, a_lo, a_hi, b_lo[mask], b_hi[mask], sup)
        out[k] = _logsumexp(const + terms + logmass[mask])
    return out
