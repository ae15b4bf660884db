"""Pure-Python kernels.

Line-for-line mirror of ``_kernels.pyx``; used when the compiled module is
missing or ``FSOACQ_PURE_PYTHON`` is set.
"""
import math

import numpy as np

EPS = 1e-16
FPMIN = 1e-300
MAX_ITER = 200000
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# turns solved with Newton on the exact arc length before the recurrence takes over
NEWTON_TURNS = 2


def _log1pmx(d):
    # log(1 + d) - d without cancellation near d = 0
    if abs(d) > 0.3:
        return math.log1p(d) - d
    total = 0.0
    power = d
    k = 2
    while True:
        power *= d
        term = power / k
        if k % 2 == 0:
            total -= term
        else:
            total += term
        if abs(term) <= 1e-17 * abs(total):
            break
        k += 1
    return total


def _stirlerr(a):
    # lgamma(a) - (a - 1/2) log a + a - log sqrt(2 pi), asymptotic for a >= 10
    a2 = a * a
    return (
        1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * a2)) / a2) / a2) / a2
    ) / a


def _log_prefactor(a, x):
    # log(x**a * exp(-x) / Gamma(a))
    if a >= 10.0:
        if x < 0.5 * a:
            # d = x/a - 1 would round toward -1 and lose x
            core = a * (math.log(x) - math.log(a)) + a - x
        else:
            core = a * _log1pmx((x - a) / a)
        return core - _stirlerr(a) + 0.5 * math.log(a) - LOG_SQRT_2PI
    return a * math.log(x) - x - math.lgamma(a)


def _series_p(a, x):
    term = 1.0 / a
    total = term
    n = 1
    while n < MAX_ITER:
        term *= x / (a + n)
        total += term
        if term < total * EPS:
            return math.exp(_log_prefactor(a, x)) * total
        n += 1
    return math.nan


def _contfrac_q(a, x):
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    i = 1
    while i < MAX_ITER:
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return math.exp(_log_prefactor(a, x)) * h
        i += 1
    return math.nan


def gamma_pq(a, x):
    """Return ``(P(a, x), Q(a, x))``, each computed on its accurate side."""
    if x == 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < a + 1.0:
        p = _series_p(a, x)
        return p, 1.0 - p
    q = _contfrac_q(a, x)
    return 1.0 - q, q


def gammaincc(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    out = np.empty(a.shape)
    flat_out = out.reshape(-1)
    for i, (ai, xi) in enumerate(zip(a.reshape(-1), x.reshape(-1))):
        flat_out[i] = gamma_pq(float(ai), float(xi))[1]
    return out


def gammainc(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    out = np.empty(a.shape)
    flat_out = out.reshape(-1)
    for i, (ai, xi) in enumerate(zip(a.reshape(-1), x.reshape(-1))):
        flat_out[i] = gamma_pq(float(ai), float(xi))[0]
    return out


def _arc(b, theta):
    return 0.5 * b * (theta * math.sqrt(1.0 + theta * theta) + math.asinh(theta))


def spiral_angles(b, step, r_max):
    """Angles of uniformly arc-spaced points on ``r = b * theta``.

    The first point is the centre. Over the first two turns each angle is
    solved with Newton's method on the exact arc length; further out the
    implicit first-order recurrence ``step = r[n] * (theta[n] - theta[n-1])``
    is solved in closed form. Stops at the first point with r >= r_max.
    """
    thetas = [0.0]
    theta = 0.0
    while b * theta < r_max:
        if theta < NEWTON_TURNS * 2.0 * math.pi:
            target = _arc(b, theta) + step
            if theta == 0.0:
                t = math.sqrt(2.0 * step / b)
            else:
                t = theta + step / (b * math.sqrt(1.0 + theta * theta))
            for _ in range(50):
                f = _arc(b, t) - target
                dt = f / (b * math.sqrt(1.0 + t * t))
                t -= dt
                if abs(dt) < 1e-14 * max(t, 1.0):
                    break
            theta = t
        else:
            theta = 0.5 * (theta + math.sqrt(theta * theta + 4.0 * step / b))
        thetas.append(theta)
    return np.asarray(thetas)
