# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernel routines.

Mirrors ``oscmax._core_py`` function for function; see that module for the
shared conventions (ss/ip/dsq arguments, log-domain values, layer gating).
"""

from libc.math cimport exp, log, sqrt, INFINITY

import numpy as np

cdef double LOG_TWO_PI = log(2.0 * 3.14159265358979323846264338327950288)


cdef inline double _alpha(double t) nogil:
    cdef double u
    if t <= 1.0:
        return t / (2.0 * (sqrt(1.0 + t * t) + 1.0))
    u = 1.0 / t
    return 1.0 / (2.0 * (sqrt(1.0 + u * u) + u))


cdef inline double _g(double d, double ss, double ip, double t) nogil:
    return -d * t + ss / sqrt(1.0 + t * t) - 2.0 * ip


def alpha(double t):
    return _alpha(t)


def log_heat(int d, double dsq, double t):
    return -0.5 * d * (LOG_TWO_PI + log(t)) - dsq / (2.0 * t)


def log_kernel(int d, double ss, double dsq, double t):
    return -0.5 * d * (LOG_TWO_PI + log(t)) - dsq / (2.0 * t) - _alpha(t) * ss


def g_value(int d, double ss, double ip, double t):
    return _g(d, ss, ip, t)


def bisect_g_root(int d, double ss, double ip, double lo, double hi,
                  double rtol, int maxiter):
    cdef int it = 0
    cdef double mid
    cdef double dd = d
    while it < maxiter and (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        it += 1
        if _g(dd, ss, ip, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), it


def count_g_sign_changes(int d, double ss, double ip,
                         double tlo, double thi, int n):
    cdef double llo = log(tlo)
    cdef double step = (log(thi) - llo) / (n - 1)
    cdef double dd = d
    cdef double v
    cdef int i, s, prev = 0, count = 0
    for i in range(n):
        v = _g(dd, ss, ip, exp(llo + i * step))
        s = (v > 0.0) - (v < 0.0)
        if s != 0:
            if prev != 0 and s != prev:
                count += 1
            prev = s
    return count


cdef inline double _clip(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef double _extremum_coords(int d, double t, double a,
                             const double[::1] a_lo, const double[::1] a_hi,
                             const double[:] b_lo, const double[:] b_hi,
                             bint sup) nogil:
    """Sum over coordinates of the exact extremum of the concave quadratic
    q(u, v) = -(u-v)^2/(2t) - a(u^2+v^2) over [a_lo,a_hi] x [b_lo,b_hi]."""
    cdef double inv2t = 0.5 / t
    cdef double s = 1.0 + 2.0 * a * t
    cdef double total = 0.0
    cdef double a1, a2, b1, b2, best, u, v, q
    cdef int i, c
    for i in range(d):
        a1 = a_lo[i]
        a2 = a_hi[i]
        b1 = b_lo[i]
        b2 = b_hi[i]
        if sup:
            best = -INFINITY
            if a1 <= 0.0 <= a2 and b1 <= 0.0 <= b2:
                best = 0.0
            for c in range(2):
                u = a1 if c == 0 else a2
                v = _clip(u / s, b1, b2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                if q > best:
                    best = q
            for c in range(2):
                v = b1 if c == 0 else b2
                u = _clip(v / s, a1, a2)
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                if q > best:
                    best = q
        else:
            best = INFINITY
            for c in range(4):
                u = a1 if c < 2 else a2
                v = b1 if c % 2 == 0 else b2
                q = -(u - v) * (u - v) * inv2t - a * (u * u + v * v)
                if q < best:
                    best = q
        total += best
    return total


def pair_extremum(int d, double t, a_lo, a_hi, b_lo, b_hi, bint sup):
    cdef double[::1] alo = np.ascontiguousarray(a_lo, dtype=np.float64)
    cdef double[::1] ahi = np.ascontiguousarray(a_hi, dtype=np.float64)
    cdef double[::1] blo = np.ascontiguousarray(b_lo, dtype=np.float64)
    cdef double[::1] bhi = np.ascontiguousarray(b_hi, dtype=np.float64)
    cdef double a = _alpha(t)
    return (-0.5 * d * (LOG_TWO_PI + log(t))
            + _extremum_coords(d, t, a, alo, ahi, blo, bhi, sup))


def heat_sum(int d, ts, m_of_t, layers, double xx, yy, dsq, logmass,
             bint use_alpha):
    cdef const double[::1] tv = np.ascontiguousarray(ts, dtype=np.float64)
    cdef const long long[::1] mv = np.ascontiguousarray(m_of_t, dtype=np.int64)
    cdef const long long[::1] lv = np.ascontiguousarray(layers, dtype=np.int64)
    cdef const double[::1] yyv = np.ascontiguousarray(yy, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(dsq, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(logmass, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0]
    cdef Py_ssize_t nc = lv.shape[0]
    out = np.full(nt, -INFINITY)
    scratch = np.empty(nc)
    cdef double[::1] ov = out
    cdef double[::1] sv = scratch
    cdef Py_ssize_t k, j
    cdef double t, const_kt, a, v, m, acc
    cdef long long gate
    for k in range(nt):
        t = tv[k]
        gate = mv[k]
        const_kt = -0.5 * d * (LOG_TWO_PI + log(t))
        a = _alpha(t) if use_alpha else 0.0
        m = -INFINITY
        for j in range(nc):
            if lv[j] <= gate:
                v = const_kt - dv[j] / (2.0 * t) - a * (xx + yyv[j]) + wv[j]
                sv[j] = v
                if v > m:
                    m = v
        if m == -INFINITY:
            continue
        acc = 0.0
        for j in range(nc):
            if lv[j] <= gate:
                acc += exp(sv[j] - m)
        ov[k] = m + log(acc)
    return out


def far_sum(int d, ts, m_of_t, layers, a_lo, a_hi, b_lo, b_hi, logmass,
            bint sup):
    cdef const double[::1] tv = np.ascontiguousarray(ts, dtype=np.float64)
    cdef const long long[::1] mv = np.ascontiguousarray(m_of_t, dtype=np.int64)
    cdef const long long[::1] lv = np.ascontiguousarray(layers, dtype=np.int64)
    cdef const double[::1] alo = np.ascontiguousarray(a_lo, dtype=np.float64)
    cdef const double[::1] ahi = np.ascontiguousarray(a_hi, dtype=np.float64)
    cdef const double[:, ::1] blo = np.ascontiguousarray(b_lo, dtype=np.float64)
    cdef const double[:, ::1] bhi = np.ascontiguousarray(b_hi, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(logmass, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0]
    cdef Py_ssize_t nc = lv.shape[0]
    out = np.full(nt, -INFINITY)
    scratch = np.empty(nc)
    cdef double[::1] ov = out
    cdef double[::1] sv = scratch
    cdef Py_ssize_t k, j
    cdef double t, const_kt, a, v, m, acc
    cdef long long gate
    for k in range(nt):
        t = tv[k]
        gate = mv[k]
        const_kt = -0.5 * d * (LOG_TWO_PI + log(t))
        a = _alpha(t)
        m = -INFINITY
        for j in range(nc):
            if lv[j] <= gate:
                v = (const_kt + wv[j]
                     + _extremum_coords(d, t, a, alo, ahi,
                                        blo[j, :], bhi[j, :], sup))
                sv[j] = v
                if v > m:
                    m = v
        if m == -INFINITY:
            continue
        acc = 0.0
        for j in range(nc):
            if lv[j] <= gate:
                acc += exp(sv[j] - m)
        ov[k] = m + log(acc)
    return out
