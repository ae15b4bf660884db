"""Acquisition-time model: failed scans plus steps in the successful scan.

``T_U = T_s X + T_d W`` is an upper bound on the acquisition time, with
``X`` geometric (failed scans) and ``W`` exponential (steps in the final
scan until the receiver is reached). ``p`` is always taken from the upper
packing bound ``P_m ** floor(N0 - L/rho)``.
"""
from dataclasses import dataclass
import math

import numpy as np

from ._num import InfeasibleError
from .scan import steps_per_scan
from .stats import regularized_gamma_q

# below this |log q| the geometric sum is evaluated as nearly equal terms
_EQUAL_TERM_TOL = 1e-9


@dataclass(frozen=True)
class UncertaintyModel:
    """Circular Gaussian pointing uncertainty.

    The receiver's radial offset is Rayleigh with scale ``sigma0`` meters.
    """

    sigma0: float

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")

    def sample_offsets(self, rng, n):
        r = self.sigma0 * np.sqrt(-2.0 * np.log1p(-rng.random(n)))
        phi = 2.0 * np.pi * rng.random(n)
        return r * np.cos(phi), r * np.sin(phi)


@dataclass(frozen=True)
class AcqTimeModel:
    """Parameters of ``T_U``.

    Attributes
    ----------
    p : float
        Probability that one full scan fails.
    T_s : float
        Seconds per full scan.
    T_d : float
        Seconds per step.
    beta : float
        Rate (1/s) of the exponential final-scan time ``T_d W``.
    rho : float
        Beam radius the model was built for.
    """

    p: float
    T_s: float
    T_d: float
    beta: float
    rho: float = math.nan

    def __post_init__(self):
        if not 0 <= self.p < 1:
            raise ValueError("acquisition never succeeds" if self.p >= 1 else "p must be >= 0")
        if not (self.T_s > 0 and self.T_d > 0 and self.beta > 0):
            raise ValueError("T_s, T_d and beta must be positive")


def acq_time_model(p, rho, Ru, Td, sigma0, a=1.0):
    """Model with ``T_s = a * ceil(Ru**2/rho**2) * Td`` and ``beta = rho**2 / (2 Td sigma0**2)``."""
    Ts = a * steps_per_scan(Ru, rho) * Td
    return AcqTimeModel(p=p, T_s=Ts, T_d=Td, beta=rho * rho / (2.0 * Td * sigma0 * sigma0), rho=rho)


def failure_probability(pm, pack):
    """Scan failure probability ``pm ** floor(N0 - L/rho)``."""
    if not pack.valid:
        raise InfeasibleError("beam radius outside valid range")
    return pm ** pack.full_overlap_floor


def expected_failed_scans(p):
    if p >= 1:
        raise ValueError("acquisition never succeeds")
    if p < 0:
        raise ValueError("p must be non-negative")
    return p / (1.0 - p)


def expected_final_scan_steps(sigma0, rho):
    """Mean of ``W``: ``2 sigma0**2 / rho**2`` steps."""
    if not (sigma0 > 0 and rho > 0):
        raise ValueError("sigma0 and rho must be positive")
    return 2.0 * sigma0 * sigma0 / (rho * rho)


def mean_TU(model):
    return model.T_s * expected_failed_scans(model.p) + 1.0 / model.beta


def bound_exponent(geom, rho):
    """Continuous exponent ``|A|/(4 rho**2) - L/rho - 2`` of the loosened mean bound."""
    return geom.area / (4.0 * rho * rho) - geom.side_length / rho - 2.0


def max_valid_rho(geom):
    """Largest radius with ``bound_exponent >= 1``."""
    A, L = geom.area, geom.side_length
    # (A/4) u**2 - L u - 3 = 0 with u = 1/rho
    u = (L + math.sqrt(L * L + 3.0 * A)) / (0.5 * A)
    return 1.0 / u


def mean_acq_time_upper_bound(geom, mom, gamma0, Ru, Td, sigma0, rho):
    """Upper bound on the mean acquisition time, in seconds.

    ``(Ru/rho)**2 Td G**e / (1 - G**e) + 2 Td sigma0**2 / rho**2`` with
    ``G = Q(k_s gamma0 + 1, k_s mu_s)`` left unfloored and ``e`` from
    :func:`bound_exponent`.
    """
    e = bound_exponent(geom, rho)
    if not e >= 1.0 - 1e-12:
        raise InfeasibleError("beam radius outside valid range")
    G = float(regularized_gamma_q(mom.k_s * gamma0 + 1.0, mom.k_s * mom.mu_s))
    Ge = G ** e
    if Ge >= 1.0:
        raise InfeasibleError("scan failure probability is 1")
    ratio = (Ru / rho) ** 2
    return ratio * Td * Ge / (1.0 - Ge) + Td * expected_final_scan_steps(sigma0, rho)


def _weighted_sum(model, t):
    """``exp(-beta t) * sum_{k < ceil(t/T_s)} (p exp(beta T_s))**k`` evaluated stably."""
    t = np.asarray(t, dtype=float)
    n = np.ceil(t / model.T_s)
    bt = model.beta * t
    if model.p == 0.0:
        return np.exp(-bt), n
    lq = math.log(model.p) + model.beta * model.T_s
    if abs(lq) < _EQUAL_TERM_TOL:
        # sum_{k<n} q**k ~ n + lq n (n - 1) / 2
        return np.exp(-bt) * (n + lq * n * (n - 1.0) / 2.0), n
    # n lq - bt = n log p + beta (n T_s - t) stays bounded for t in ((n-1) T_s, n T_s]
    return (np.exp(n * lq - bt) - np.exp(-bt)) / math.expm1(lq), n


def ccdf_TU(model, gamma):
    """``P(T_U > gamma)``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    s, n = _weighted_sum(model, np.maximum(g, 1e-300))
    with np.errstate(under="ignore"):
        out = (1.0 - model.p) * s + model.p ** n
    out = np.clip(out, 0.0, 1.0)
    out = np.where(g == 0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def pdf_TU(model, t):
    """Density of ``T_U``: ``beta (1-p) sum_{k < t/T_s} p**k exp(-beta (t - k T_s))``."""
    t = np.asarray(t, dtype=float)
    s, _ = _weighted_sum(model, np.maximum(t, 1e-300))
    out = np.where(t > 0, model.beta * (1.0 - model.p) * s, 0.0)
    return out[()] if out.ndim == 0 else out
