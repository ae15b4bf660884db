"""One-shot and scan-level detection probabilities.

Every probability here reduces to the regularized incomplete gamma
function from :mod:`fsoacq.kernels`.
"""
from dataclasses import dataclass
import logging
import math
import warnings

import numpy as np
from scipy.special import ndtr

from . import kernels
from ._num import robust_floor_array

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentSummary:
    """Mean and variance of the weighted count statistic under both hypotheses.

    ``k_s = mu_s / sigma2_s`` and ``k_n = sum(alpha) / sum(alpha**2)`` are the
    scale factors of the moment-matched Poisson variables.
    """

    mu_s: float
    sigma2_s: float
    mu_n: float
    sigma2_n: float
    k_s: float
    k_n: float


def moment_summary(alpha, signal_means, noise_means):
    """Moments of ``sum(alpha * Z)`` with ``Z`` Poisson of the given per-cell means."""
    alpha = np.asarray(alpha, dtype=float)
    lam1 = np.asarray(signal_means, dtype=float)
    lam0 = np.asarray(noise_means, dtype=float)
    a2 = alpha * alpha
    mu_s = float(np.dot(alpha, lam1))
    s2_s = float(np.dot(a2, lam1))
    mu_n = float(np.dot(alpha, lam0))
    s2_n = float(np.dot(a2, lam0))
    sa2 = float(a2.sum())
    return MomentSummary(
        mu_s=mu_s,
        sigma2_s=s2_s,
        mu_n=mu_n,
        sigma2_n=s2_n,
        k_s=mu_s / s2_s if s2_s > 0 else math.nan,
        k_n=float(alpha.sum()) / sa2 if sa2 > 0 else math.nan,
    )


def regularized_gamma_q(x, y):
    """Upper regularized gamma ``Q(x, y) = Gamma(x, y) / Gamma(x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y >= 0)):
        raise ValueError("regularized_gamma_q needs x > 0 and y >= 0")
    out = kernels.gammaincc(x, y)
    return out[()] if out.ndim == 0 else out


def regularized_gamma_p(x, y):
    """Lower regularized gamma ``P(x, y) = 1 - Q(x, y)`` computed directly."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y >= 0)):
        raise ValueError("regularized_gamma_p needs x > 0 and y >= 0")
    out = kernels.gammainc(x, y)
    return out[()] if out.ndim == 0 else out


def pm_gaussian(mom, gamma0):
    """Missed-detection probability from the central-limit approximation."""
    if not mom.sigma2_s > 0:
        raise ValueError("sigma2_s must be positive")
    z = (np.asarray(gamma0, dtype=float) - mom.mu_s) / math.sqrt(mom.sigma2_s)
    out = ndtr(z)
    return out[()] if np.ndim(out) == 0 else out


def pm_scaled_poisson(mom, gamma0):
    """Missed detection from the moment-matched scaled Poisson variable.

    ``Q(floor(k_s * gamma0 + 1), k_s * mu_s)``; negative thresholds are
    clamped to zero.
    """
    if not mom.k_s > 0:
        raise ValueError("k_s must be positive")
    g = np.asarray(gamma0, dtype=float)
    if np.any(g < 0):
        warnings.warn("negative gamma0 clamped to 0", RuntimeWarning, stacklevel=2)
        g = np.maximum(g, 0.0)
    shape = robust_floor_array(mom.k_s * g + 1.0)
    return regularized_gamma_q(shape, mom.k_s * mom.mu_s)


def pf_scaled_poisson(mom, gamma0):
    """One-shot false-alarm probability ``1 - Q(floor(k_n * gamma0 + 1), k_n * mu_n)``.

    Evaluated as the lower regularized gamma so tiny values keep full
    relative precision.
    """
    if not mom.k_n > 0:
        raise ValueError("k_n must be positive")
    g = np.maximum(np.asarray(gamma0, dtype=float), 0.0)
    shape = robust_floor_array(mom.k_n * g + 1.0)
    return regularized_gamma_p(shape, mom.k_n * mom.mu_n)


def calibrate_threshold(mom, target_pf):
    """Smallest threshold whose scaled-Poisson false-alarm probability is at most ``target_pf``.

    ``P_f`` is piecewise constant with jumps at ``gamma0 = j / k_n``, so the
    search runs over the integer ``j`` by bisection and returns ``j / k_n``.
    """
    if not 0 < target_pf < 1:
        raise ValueError("target_pf must lie in (0, 1)")
    lam = mom.k_n * mom.mu_n

    def pf_at(j):
        return kernels.gamma_pq(j + 1.0, lam)[0]

    if pf_at(0) <= target_pf:
        log.info("false-alarm target already met at gamma0 = 0")
        return 0.0
    lo, hi = 0, 1
    while pf_at(hi) > target_pf:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pf_at(mid) > target_pf:
            lo = mid
        else:
            hi = mid
    return hi / mom.k_n


def scan_missed_detection_bounds(pm, pack):
    """``(pm**N1, pm**floor(N0 - L/rho))`` bracketing the full-scan miss probability."""
    if not pack.valid:
        raise ValueError("beam too large for packing bounds")
    if not 0 <= pm <= 1:
        raise ValueError("pm must lie in [0, 1]")
    return pm ** pack.n1, pm ** pack.full_overlap_floor


def _one_minus_power(pf, n):
    # 1 - (1 - pf)**n without cancellation
    with np.errstate(divide="ignore"):
        return float(-np.expm1(n * np.log1p(-pf)))


def scan_false_alarm_bounds(pf, pack, n_steps):
    """Bounds on the probability of at least one false alarm in a full scan."""
    if n_steps <= pack.n1:
        raise ValueError("n_steps must exceed N1")
    if not 0 <= pf <= 1:
        raise ValueError("pf must lie in [0, 1]")
    return (
        _one_minus_power(pf, n_steps - pack.n1),
        _one_minus_power(pf, n_steps - pack.full_overlap_floor),
    )


def one_shot_pf_target(scan_pf_upper, pack, n_steps):
    """Per-step false-alarm level at which the scan-level upper bound equals ``scan_pf_upper``."""
    if not 0 < scan_pf_upper < 1:
        raise ValueError("scan_pf_upper must lie in (0, 1)")
    n = n_steps - pack.full_overlap_floor
    if n < 1:
        raise ValueError("n_steps must exceed floor(N0 - L/rho)")
    return float(-np.expm1(np.log1p(-scan_pf_upper) / n))
