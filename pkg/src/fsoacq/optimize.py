"""Beam radius that minimizes the mean acquisition-time upper bound."""
from dataclasses import dataclass, replace
import math

import numpy as np

from ._num import InfeasibleError
from .acqtime import bound_exponent, mean_acq_time_upper_bound, max_valid_rho
from .beam import BeamParams
from .detector import build_detector, detector_moments
from .geometry import packing_counts
from .scan import steps_per_scan
from .stats import calibrate_threshold, one_shot_pf_target, scan_false_alarm_bounds, pf_scaled_poisson

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GRID_POINTS = 64


@dataclass(frozen=True)
class OptimizationProblem:
    """Fixed-power beam-radius search.

    The threshold is recalibrated at every candidate radius so the
    scan-level false-alarm upper bound meets ``target_pf_upper``.
    ``rho_max=None`` means the largest radius where the bound is defined.
    """

    geometry: object
    channel: object
    signal_power: float
    target_pf_upper: float
    Ru: float
    Td: float
    sigma0: float
    x0: float = 0.4
    y0: float = 0.4
    rho_min: float = 0.02
    rho_max: float = None

    def __post_init__(self):
        if not self.rho_min > 0:
            raise ValueError("rho_min must be positive")
        limit = max_valid_rho(self.geometry)
        hi = limit if self.rho_max is None else min(self.rho_max, limit)
        object.__setattr__(self, "rho_max", hi)

    def with_noise_power(self, noise_power):
        return replace(self, channel=self.channel.with_noise_power(noise_power, self.geometry.area))


@dataclass(frozen=True)
class ObjectiveDetail:
    rho: float
    gamma0: float
    pf_scan_upper: float
    value: float


def evaluate(problem, rho):
    """Objective at ``rho`` together with the calibrated threshold and false-alarm bound."""
    if not problem.rho_min <= rho <= problem.rho_max * (1.0 + 1e-12):
        raise InfeasibleError(f"rho={rho} outside [{problem.rho_min}, {problem.rho_max}]")
    geom = problem.geometry
    beam = BeamParams(problem.signal_power, rho, problem.x0, problem.y0)
    det = build_detector(geom, beam, problem.channel)
    mom = detector_moments(det, beam, problem.channel)
    pack = packing_counts(geom, rho)
    if not pack.valid or bound_exponent(geom, rho) < 1.0 - 1e-12:
        raise InfeasibleError("beam radius outside valid range")
    n_steps = steps_per_scan(problem.Ru, rho)
    gamma0 = calibrate_threshold(mom, one_shot_pf_target(problem.target_pf_upper, pack, n_steps))
    pf_upper = scan_false_alarm_bounds(float(pf_scaled_poisson(mom, gamma0)), pack, n_steps)[1]
    value = mean_acq_time_upper_bound(geom, mom, gamma0, problem.Ru, problem.Td, problem.sigma0, rho)
    return ObjectiveDetail(rho, gamma0, pf_upper, value)


def objective(problem, rho):
    """Mean acquisition-time upper bound (s) at beam radius ``rho``."""
    return evaluate(problem, rho).value


def golden_section(f, lo, hi, tol=1e-4):
    """Minimize ``f`` on ``[lo, hi]`` by golden-section search until ``hi - lo < tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a >= tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _safe(problem):
    def f(rho):
        try:
            return objective(problem, rho)
        except InfeasibleError:
            return math.inf
    return f


def minimize_rho(problem, grid_points=GRID_POINTS, tol=1e-4, brackets=4):
    """Grid-seeded golden-section minimum ``(rho_star, value)``.

    The threshold recalibration makes the objective saw-toothed in ``rho``,
    so golden-section runs in the bracket around each of the ``brackets``
    lowest local minima of the coarse grid. The best grid or refined point
    is returned.
    """
    f = _safe(problem)
    grid = np.linspace(problem.rho_min, problem.rho_max, grid_points)
    vals = np.array([f(r) for r in grid])
    if not np.isfinite(vals).any():
        raise InfeasibleError("objective infeasible on every grid point")
    padded = np.concatenate([[np.inf], vals, [np.inf]])
    local = np.flatnonzero((vals <= padded[:-2]) & (vals <= padded[2:]) & np.isfinite(vals))
    seeds = local[np.argsort(vals[local], kind="stable")][:brackets]
    i = int(np.argmin(vals))
    best_r, best_v = float(grid[i]), float(vals[i])
    for j in seeds:
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, grid_points - 1)]
        r, v = golden_section(f, lo, hi, tol)
        if v < best_v:
            best_r, best_v = float(r), float(v)
    return best_r, best_v


@dataclass(frozen=True)
class SweepRow:
    noise_power: float
    rho_star: float
    min_value: float
    feasible: bool = True


def sweep_noise(problem, noise_grid, **kw):
    """One :func:`minimize_rho` row per total noise power (W); infeasible rows are kept and flagged."""
    if len(noise_grid) == 0:
        raise ValueError("noise grid is empty")
    rows = []
    for pn in noise_grid:
        try:
            r, v = minimize_rho(problem.with_noise_power(pn), **kw)
            rows.append(SweepRow(float(pn), r, v))
        except InfeasibleError:
            rows.append(SweepRow(float(pn), math.nan, math.nan, False))
    return rows
