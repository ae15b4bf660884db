"""Seeded Monte Carlo estimates for every closed form in the package.

Trials are grouped into fixed-size blocks. Block ``i`` draws from a Philox
stream keyed by ``SeedSequence(seed, spawn_key=(i,))``, so estimates depend
only on ``(seed, n_trials)`` and not on the worker count or on the order in
which blocks finish.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.spatial import cKDTree

from .beam import BeamParams, array_mean_counts, cell_signal_flux
from .detector import build_detector, statistic

ONE_SHOT_BLOCK = 1 << 16
SCAN_BLOCK = 256
MIN_EVENTS = 10


def block_rng(seed, block):
    """Independent generator for trial block ``block``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _map_blocks(fn, n, block_size, threads=1):
    sizes = [min(block_size, n - s) for s in range(0, n, block_size)]
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(lambda j: fn(*j), jobs))
    return [fn(*j) for j in jobs]


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo proportion with a normal-approximation 95% half-width.

    ``censored`` flags fewer than ``MIN_EVENTS`` events; read such rows as
    ``P < upper_bound`` rather than as point estimates.
    """

    estimate: float
    half_width_95: float
    n: int
    events: int
    censored: bool

    @classmethod
    def from_events(cls, events, n):
        p = events / n
        hw = 1.96 * math.sqrt(p * (1.0 - p) / n)
        return cls(p, hw, int(n), int(events), events < MIN_EVENTS)

    @property
    def upper_bound(self):
        return max(self.events, MIN_EVENTS) / self.n


@dataclass(frozen=True)
class TrialConfig:
    """Everything one Monte Carlo run needs.

    Counts are drawn from ``true_beam`` and ``channel``; the detector is
    built from ``assumed_beam`` and ``assumed_channel`` (defaulting to the
    truth). ``gamma0`` overrides the threshold ``gamma + K S_assumed``.
    """

    seed: int
    n_trials: int
    true_beam: BeamParams
    channel: object
    geometry: object
    gamma0: float = None
    gamma: float = 0.0
    assumed_beam: BeamParams = None
    assumed_channel: object = None
    threads: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.assumed_beam is None:
            object.__setattr__(self, "assumed_beam", self.true_beam)
        if self.assumed_channel is None:
            object.__setattr__(self, "assumed_channel", self.channel)

    def detector(self):
        return build_detector(
            self.geometry, self.assumed_beam, self.assumed_channel, self.gamma, gamma0=self.gamma0
        )


def sample_counts(beam, chan, geom, rng, size=None):
    """Independent Poisson counts per cell; shape ``(M,)`` or ``(size, M)``."""
    lam1, _ = array_mean_counts(beam, chan, geom)
    shape = lam1.shape if size is None else (size, lam1.size)
    return rng.poisson(np.broadcast_to(lam1, shape))


def _noise_beam(beam):
    return replace(beam, power=0.0)


def sample_statistic(cfg, hypothesis="h1"):
    """Detector statistic for ``cfg.n_trials`` trials under ``'h1'`` or ``'h0'``."""
    det = cfg.detector()
    beam = cfg.true_beam if hypothesis == "h1" else _noise_beam(cfg.true_beam)

    def run(i, n):
        return statistic(det, sample_counts(beam, cfg.channel, cfg.geometry, block_rng(cfg.seed, i), n))

    return np.concatenate(_map_blocks(run, cfg.n_trials, ONE_SHOT_BLOCK, cfg.threads))


def estimate_pm(cfg):
    """Fraction of signal-present trials whose statistic falls below the threshold."""
    det = cfg.detector()
    y = sample_statistic(cfg, "h1")
    return EstimateWithCI.from_events(int(np.count_nonzero(y < det.threshold)), y.size)


def estimate_pf(cfg):
    """Fraction of noise-only trials declared signal-present."""
    det = cfg.detector()
    y = sample_statistic(cfg, "h0")
    return EstimateWithCI.from_events(int(np.count_nonzero(y >= det.threshold)), y.size)


def pm_curve(cfg, gamma0_grid):
    """Empirical ``P(Y < gamma0)`` under signal-present for every threshold in the grid."""
    y = np.sort(sample_statistic(cfg, "h1"))
    g = np.asarray(gamma0_grid, dtype=float)
    return np.searchsorted(y, g, side="left") / y.size


def _overlapping_steps(tree, offx, offy, geom, rho):
    """Indices of plan points whose footprint disc meets the array square."""
    half = 0.5 * geom.side_length
    cx, cy = offx + geom.center[0], offy + geom.center[1]
    idx = np.asarray(tree.query_ball_point((cx, cy), half * math.sqrt(2.0) + rho), dtype=np.intp)
    idx.sort()
    pts = tree.data[idx]
    dx = np.maximum(np.abs(pts[:, 0] - cx) - half, 0.0)
    dy = np.maximum(np.abs(pts[:, 1] - cy) - half, 0.0)
    return idx[np.hypot(dx, dy) < rho]


def _step_model(cfg, rel_x, rel_y):
    """Per-step Poisson means and matched detector weights for beams at ``(rel_x, rel_y)``.

    Coordinates are beam centre minus receiver offset, i.e. in the frame
    where the array sits at ``geometry.center``.
    """
    geom, chan = cfg.geometry, cfg.channel
    lx, ux, ly, uy = geom.bounds()
    x = rel_x[:, None]
    y = rel_y[:, None]
    t = cfg.true_beam
    f_true = cell_signal_flux(BeamParams(t.power, t.rho), lx - x, ux - x, ly - y, uy - y)
    a = cfg.assumed_beam
    f_assumed = cell_signal_flux(BeamParams(a.power, a.rho), lx - x, ux - x, ly - y, uy - y)
    noise = chan.noise_intensity * geom.cell_area
    lam = chan.K * (f_true + noise)
    weights = np.log1p(f_assumed / (cfg.assumed_channel.noise_intensity * geom.cell_area))
    return lam, weights


def _threshold(cfg):
    if cfg.gamma0 is not None:
        return cfg.gamma0
    return cfg.gamma + cfg.assumed_channel.K * cfg.assumed_beam.power


def _scan_block(cfg, plan, uncertainty, tree, xy, i, n):
    rng = block_rng(cfg.seed, i)
    offx, offy = uncertainty.sample_offsets(rng, n)
    steps = [_overlapping_steps(tree, offx[t], offy[t], cfg.geometry, cfg.true_beam.rho) for t in range(n)]
    owner = np.repeat(np.arange(n), [s.size for s in steps])
    flat = np.concatenate(steps) if steps else np.empty(0, dtype=np.intp)
    lam, w = _step_model(cfg, xy[0][flat] - offx[owner], xy[1][flat] - offy[owner])
    return rng, owner, flat, lam, w


def estimate_scan_pm(cfg, plan, uncertainty):
    """Full-scan missed-detection probability.

    Per trial the receiver offset is Rayleigh, the beam visits every plan
    point whose footprint meets the array, and each visit is an independent
    pulse judged by a detector matched to that relative position.
    """
    xy = plan.xy
    tree = cKDTree(np.column_stack(xy))
    gamma0 = _threshold(cfg)

    def run(i, n):
        rng, owner, _, lam, w = _scan_block(cfg, plan, uncertainty, tree, xy, i, n)
        hit = np.zeros(n, dtype=bool)
        if owner.size:
            z = rng.poisson(lam)
            np.logical_or.at(hit, owner, np.einsum("ij,ij->i", z, w) >= gamma0)
        return int(np.count_nonzero(~hit))

    misses = sum(_map_blocks(run, cfg.n_trials, SCAN_BLOCK, cfg.threads))
    return EstimateWithCI.from_events(misses, cfg.n_trials)


@dataclass(frozen=True, eq=False)
class AcqTimeSamples:
    """Simulated acquisition times; ``censored`` trials hit the scan cap or never overlap."""

    times: np.ndarray
    censored: np.ndarray

    def ccdf(self, gamma):
        """Empirical ``P(T > gamma)`` counting censored trials as exceeding every gamma."""
        t = np.sort(np.where(self.censored, np.inf, self.times))
        g = np.asarray(gamma, dtype=float)
        return 1.0 - np.searchsorted(t, g, side="right") / t.size

    @property
    def mean(self):
        return float(self.times[~self.censored].mean())


def sample_acq_time(cfg, plan, uncertainty, max_scans=10_000):
    """Time to first detection with full-scan restarts after each failed scan.

    A trial's time is ``failed_scans * T_scan + step_index * T_d`` where
    ``T_scan`` is the plan's own duration.
    """
    xy = plan.xy
    tree = cKDTree(np.column_stack(xy))
    gamma0 = _threshold(cfg)
    Td = plan.dwell_time
    T_scan = plan.scan_time

    def run(i, n):
        rng, owner, flat, lam, w = _scan_block(cfg, plan, uncertainty, tree, xy, i, n)
        times = np.full(n, np.nan)
        censored = np.ones(n, dtype=bool)
        if not owner.size:
            return times, censored
        active = np.zeros(n, dtype=bool)
        active[owner] = True
        big = np.iinfo(np.intp).max
        for scan in range(max_scans):
            rows = np.flatnonzero(active[owner])
            if not rows.size:
                break
            z = rng.poisson(lam[rows])
            det = np.einsum("ij,ij->i", z, w[rows]) >= gamma0
            first = np.full(n, big, dtype=np.intp)
            np.minimum.at(first, owner[rows], np.where(det, flat[rows], big))
            done = active & (first < big)
            times[done] = scan * T_scan + first[done] * Td
            censored[done] = False
            active &= ~done
        return times, censored

    parts = _map_blocks(run, cfg.n_trials, SCAN_BLOCK, cfg.threads)
    return AcqTimeSamples(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


@dataclass(frozen=True)
class SensitivityRow:
    value: float
    pm: EstimateWithCI
    pf: EstimateWithCI


SWEEP_PARAMETERS = ("assumed_power", "assumed_rho", "assumed_x0")


def _assumed_beam(cfg, parameter, value):
    a = cfg.assumed_beam
    if parameter == "assumed_power":
        return replace(a, power=value)
    if parameter == "assumed_rho":
        # peak intensity held at its assumed value while the radius varies
        return replace(a, rho=value, power=a.power * (value / a.rho) ** 2)
    if parameter == "assumed_x0":
        return replace(a, x0=value)
    raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")


def sensitivity_sweep(cfg, parameter, grid):
    """Missed-detection and false-alarm estimates for detectors built at each assumed value.

    One set of signal-present and noise-only counts per trial is shared by
    every grid value (common random numbers), so differences between rows
    reflect the detector rather than sampling noise.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    dets = [
        build_detector(cfg.geometry, _assumed_beam(cfg, parameter, v), cfg.assumed_channel, cfg.gamma,
                       gamma0=cfg.gamma0)
        for v in grid
    ]
    W = np.column_stack([d.weights for d in dets])
    thr = np.array([d.threshold for d in dets])
    noise_beam = _noise_beam(cfg.true_beam)

    def run(i, n):
        rng = block_rng(cfg.seed, i)
        z1 = sample_counts(cfg.true_beam, cfg.channel, cfg.geometry, rng, n)
        z0 = sample_counts(noise_beam, cfg.channel, cfg.geometry, rng, n)
        return (z1 @ W < thr).sum(axis=0), (z0 @ W >= thr).sum(axis=0)

    parts = _map_blocks(run, cfg.n_trials, ONE_SHOT_BLOCK, cfg.threads)
    miss = sum(p[0] for p in parts)
    fa = sum(p[1] for p in parts)
    return [
        SensitivityRow(v, EstimateWithCI.from_events(int(m), cfg.n_trials),
                       EstimateWithCI.from_events(int(f), cfg.n_trials))
        for v, m, f in zip(grid, miss, fa)
    ]
