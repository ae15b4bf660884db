# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: regularized incomplete gamma and the spiral recurrence.

Same algorithms as ``_kernels_py``; results agree to rounding.
"""
import numpy as np

from libc.math cimport asinh, exp, fabs, isinf, lgamma, log, log1p, sqrt, M_PI, NAN

cdef double EPS = 1e-16
cdef double FPMIN = 1e-300
cdef long MAX_ITER = 200000
cdef double LOG_SQRT_2PI = 0.91893853320467274178
cdef int NEWTON_TURNS = 2


cdef inline double _log1pmx(double d) nogil:
    cdef double total = 0.0, power = d, term
    cdef long k = 2
    if fabs(d) > 0.3:
        return log1p(d) - d
    while True:
        power *= d
        term = power / k
        if k % 2 == 0:
            total -= term
        else:
            total += term
        if fabs(term) <= 1e-17 * fabs(total):
            break
        k += 1
    return total


cdef inline double _stirlerr(double a) nogil:
    cdef double a2 = a * a
    return (
        1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * a2)) / a2) / a2) / a2
    ) / a


cdef inline double _log_prefactor(double a, double x) nogil:
    cdef double core
    if a >= 10.0:
        if x < 0.5 * a:
            core = a * (log(x) - log(a)) + a - x
        else:
            core = a * _log1pmx((x - a) / a)
        return core - _stirlerr(a) + 0.5 * log(a) - LOG_SQRT_2PI
    return a * log(x) - x - lgamma(a)


cdef double _series_p(double a, double x) nogil:
    cdef double term = 1.0 / a, total = term
    cdef long n = 1
    while n < MAX_ITER:
        term *= x / (a + n)
        total += term
        if term < total * EPS:
            return exp(_log_prefactor(a, x)) * total
        n += 1
    return NAN


cdef double _contfrac_q(double a, double x) nogil:
    cdef double b = x + 1.0 - a, c = 1.0 / FPMIN, d = 1.0 / b, h = d
    cdef double an, delta
    cdef long i = 1
    while i < MAX_ITER:
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return exp(_log_prefactor(a, x)) * h
        i += 1
    return NAN


cdef void _gamma_pq(double a, double x, double* p, double* q) nogil:
    if x == 0.0:
        p[0] = 0.0
        q[0] = 1.0
    elif isinf(x):
        p[0] = 1.0
        q[0] = 0.0
    elif x < a + 1.0:
        p[0] = _series_p(a, x)
        q[0] = 1.0 - p[0]
    else:
        q[0] = _contfrac_q(a, x)
        p[0] = 1.0 - q[0]


def gamma_pq(double a, double x):
    cdef double p, q
    _gamma_pq(a, x, &p, &q)
    return p, q


def _apply(a, x, bint upper):
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(x, dtype=np.float64))
    shape = a_arr.shape
    cdef double[::1] av = np.ascontiguousarray(a_arr).reshape(-1)
    cdef double[::1] xv = np.ascontiguousarray(x_arr).reshape(-1)
    out = np.empty(av.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = av.shape[0]
    cdef double p, q
    with nogil:
        for i in range(n):
            _gamma_pq(av[i], xv[i], &p, &q)
            ov[i] = q if upper else p
    return out.reshape(shape)


def gammaincc(a, x):
    return _apply(a, x, True)


def gammainc(a, x):
    return _apply(a, x, False)


cdef inline double _arc(double b, double theta) nogil:
    return 0.5 * b * (theta * sqrt(1.0 + theta * theta) + asinh(theta))


def spiral_angles(double b, double step, double r_max):
    cdef list thetas = [0.0]
    cdef double theta = 0.0, target, t, f, dt
    cdef int it
    while b * theta < r_max:
        if theta < NEWTON_TURNS * 2.0 * M_PI:
            target = _arc(b, theta) + step
            if theta == 0.0:
                t = sqrt(2.0 * step / b)
            else:
                t = theta + step / (b * sqrt(1.0 + theta * theta))
            for it in range(50):
                f = _arc(b, t) - target
                dt = f / (b * sqrt(1.0 + t * t))
                t -= dt
                if fabs(dt) < 1e-14 * (t if t > 1.0 else 1.0):
                    break
            theta = t
        else:
            theta = 0.5 * (theta + sqrt(theta * theta + 4.0 * step / b))
        thetas.append(theta)
    return np.asarray(thetas)
