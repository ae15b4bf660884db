"""Command-line front end: JSON config in, CSV table plus JSON sidecar out.

Exit status is 0 on success, 2 on configuration errors and 3 when the
physics is infeasible (for example a beam too wide for the packing bounds).
"""
import argparse
import hashlib
import io
import json
import math
import os
import sys
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ._num import InfeasibleError
from .acqtime import (
    UncertaintyModel, acq_time_model, ccdf_TU, failure_probability, pdf_TU,
)
from .beam import BeamParams, ChannelParams
from .detector import build_detector, detector_moments
from .geometry import ArrayGeometry, packing_counts
from .montecarlo import TrialConfig, estimate_scan_pm, pm_curve, sensitivity_sweep
from .optimize import OptimizationProblem, evaluate, minimize_rho
from .scan import build_spiral, steps_per_scan
from .stats import (
    calibrate_threshold, one_shot_pf_target, pf_scaled_poisson, pm_gaussian, pm_scaled_poisson,
    scan_false_alarm_bounds, scan_missed_detection_bounds,
)
from .whiten import EllipticalRegion, verify_probability_preservation, whitened_covariance, whitening_transform

SUBCOMMANDS = (
    "approx-compare", "pm-bounds", "sensitivity", "rho-objective", "rho-optimize",
    "acq-pdf", "acq-ccdf", "scan-plan", "whiten-check",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryBlock(_Strict):
    cells_per_side: List[int] = Field(default=[4], min_length=1)
    side_length_m: float = Field(2.0, gt=0)

    @model_validator(mode="after")
    def _positive(self):
        if any(n < 1 for n in self.cells_per_side):
            raise ValueError("cells_per_side entries must be >= 1")
        return self


class BeamBlock(_Strict):
    signal_power_W: float = Field(1e-6, ge=0)
    rho_m: float = Field(0.2, gt=0)
    x0_m: float = 0.4
    y0_m: float = 0.4


class ChannelBlock(_Strict):
    noise_convention: Literal["total_power_W", "intensity_W_per_m2"] = "total_power_W"
    noise_value: float = Field(1e-6, gt=0)
    eta: float = Field(0.5, gt=0, le=1)
    wavelength_m: float = Field(1550e-9, gt=0)
    pulse_duration_s: float = Field(7.7e-12, gt=0)


class ScanBlock(_Strict):
    Ru_m: float = Field(50.0, gt=0)
    Tr_s: float = Field(1e-3, gt=0)
    R_m: float = Field(0.0, ge=0)
    overlap: float = Field(0.0, ge=0, lt=1)
    scale_a: float = Field(1.0, ge=1)


class UncertaintyBlock(_Strict):
    sigma0_m: float = Field(10.0, gt=0)
    covariance_m2: Optional[List[List[float]]] = None
    region_shape_m2: Optional[List[List[float]]] = None
    region_level: float = Field(1.0, gt=0)
    common_draws: bool = True


class DetectionBlock(_Strict):
    gamma0: Optional[float] = Field(None, ge=0)
    target_pf_upper: Optional[float] = Field(None, gt=0, lt=1)

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.gamma0 is None) == (self.target_pf_upper is None):
            raise ValueError("supply exactly one of gamma0 and target_pf_upper")
        return self


class SweepBlock(_Strict):
    variable: str
    grid: List[float] = Field(min_length=1)


class MCBlock(_Strict):
    seed: int = Field(0, ge=0, lt=2 ** 64)
    trials: int = Field(100_000, ge=1)


class RunConfig(_Strict):
    scenario: str = "default"
    geometry: GeometryBlock = GeometryBlock()
    beam: BeamBlock = BeamBlock()
    channel: ChannelBlock = ChannelBlock()
    scan: ScanBlock = ScanBlock()
    uncertainty: UncertaintyBlock = UncertaintyBlock()
    detection: DetectionBlock = DetectionBlock(target_pf_upper=7e-10)
    sweep: Optional[SweepBlock] = None
    mc: MCBlock = MCBlock()
    output: Optional[str] = None


SWEEP_VARIABLES = {
    "approx-compare": ("gamma0",),
    "pm-bounds": ("noise_W",),
    "sensitivity": ("assumed_power_W", "assumed_rho_m", "assumed_x0_m"),
    "rho-objective": ("rho_m",),
    "rho-optimize": ("noise_W",),
    "acq-pdf": ("t_s",),
    "acq-ccdf": ("gamma_s", "noise_W", "rho_m"),
}


class _Context:
    """Resolved physical objects shared by the subcommands."""

    def __init__(self, cfg, threads):
        self.cfg = cfg
        self.threads = threads

    def geometry(self, n):
        return ArrayGeometry(n, self.cfg.geometry.side_length_m)

    def channel(self, geom, noise=None):
        c = self.cfg.channel
        kw = dict(eta=c.eta, wavelength=c.wavelength_m, pulse_duration=c.pulse_duration_s)
        if noise is not None:
            return ChannelParams.from_noise_power(noise, geom.area, **kw)
        if c.noise_convention == "total_power_W":
            return ChannelParams.from_noise_power(c.noise_value, geom.area, **kw)
        return ChannelParams(c.noise_value, **kw)

    def beam(self, rho=None):
        b = self.cfg.beam
        return BeamParams(b.signal_power_W, b.rho_m if rho is None else rho, b.x0_m, b.y0_m)

    def threshold(self, mom, geom, rho):
        d = self.cfg.detection
        if d.gamma0 is not None:
            return d.gamma0
        pack = packing_counts(geom, rho)
        if not pack.valid:
            raise InfeasibleError("beam radius outside valid range")
        n_steps = steps_per_scan(self.cfg.scan.Ru_m, rho)
        return calibrate_threshold(mom, one_shot_pf_target(d.target_pf_upper, pack, n_steps))

    def point(self, n, noise=None, rho=None):
        geom = self.geometry(n)
        chan = self.channel(geom, noise)
        beam = self.beam(rho)
        det = build_detector(geom, beam, chan)
        mom = detector_moments(det, beam, chan)
        return geom, chan, beam, mom, self.threshold(mom, geom, beam.rho)

    def acq_model(self, n, noise=None, rho=None):
        geom, _, beam, mom, g0 = self.point(n, noise, rho)
        pm = float(pm_scaled_poisson(mom, g0))
        s = self.cfg.scan
        p = failure_probability(pm, packing_counts(geom, beam.rho))
        if p >= 1.0:
            raise InfeasibleError("scan failure probability is 1")
        return acq_time_model(p, beam.rho, s.Ru_m, self._Td(), self.cfg.uncertainty.sigma0_m, s.scale_a)

    def _Td(self):
        return self.cfg.scan.Tr_s + self.cfg.scan.R_m / 3e8

    def problem(self, n, noise=None):
        geom = self.geometry(n)
        d = self.cfg.detection
        if d.target_pf_upper is None:
            raise ValueError("rho optimization needs detection.target_pf_upper")
        return OptimizationProblem(
            geom, self.channel(geom, noise), self.cfg.beam.signal_power_W, d.target_pf_upper,
            self.cfg.scan.Ru_m, self._Td(), self.cfg.uncertainty.sigma0_m, self.cfg.beam.x0_m, self.cfg.beam.y0_m,
        )

    def grid(self, name):
        sw = self.cfg.sweep
        allowed = SWEEP_VARIABLES[name]
        if sw is None:
            raise ValueError(f"{name} needs a sweep block with variable in {allowed}")
        if sw.variable not in allowed:
            raise ValueError(f"sweep.variable must be one of {allowed} for {name}")
        return sw.variable, sw.grid


def _approx_compare(ctx):
    var, grid = ctx.grid("approx-compare")
    rows = []
    for n in ctx.cfg.geometry.cells_per_side:
        geom, chan, beam, mom, _ = ctx.point(n)
        tc = TrialConfig(ctx.cfg.mc.seed, ctx.cfg.mc.trials, beam, chan, geom, threads=ctx.threads)
        mc = pm_curve(tc, grid)
        sp = pm_scaled_poisson(mom, grid)
        ga = pm_gaussian(mom, grid)
        for g, m, s, q in zip(grid, mc, sp, ga):
            hw = 1.96 * math.sqrt(m * (1 - m) / tc.n_trials)
            rows.append([n * n, g, m, hw, s, q])
    return ["M", "gamma0", "pm_mc", "pm_mc_hw95", "pm_scaled_poisson", "pm_gaussian"], rows


def _pm_bounds(ctx):
    _, grid = ctx.grid("pm-bounds")
    s = ctx.cfg.scan
    plan = build_spiral(s.Ru_m, ctx.cfg.beam.rho_m, s.overlap, s.Tr_s, s.R_m)
    unc = UncertaintyModel(ctx.cfg.uncertainty.sigma0_m)
    rows = []
    for n in ctx.cfg.geometry.cells_per_side:
        for noise in grid:
            geom, chan, beam, mom, g0 = ctx.point(n, noise)
            pack = packing_counts(geom, beam.rho)
            pm = float(pm_scaled_poisson(mom, g0))
            lo, hi = scan_missed_detection_bounds(pm, pack)
            n_steps = steps_per_scan(s.Ru_m, beam.rho)
            flo, fhi = scan_false_alarm_bounds(float(pf_scaled_poisson(mom, g0)), pack, n_steps)
            tc = TrialConfig(ctx.cfg.mc.seed, ctx.cfg.mc.trials, beam, chan, geom, gamma0=g0, threads=ctx.threads)
            est = estimate_scan_pm(tc, plan, unc)
            rows.append([n * n, noise, g0, pm, lo, hi, flo, fhi, est.estimate, est.half_width_95, int(est.censored)])
    cols = ["M", "noise_W", "gamma0", "pm", "PM_lower", "PM_upper", "PF_lower", "PF_upper",
            "PM_mc", "PM_mc_hw95", "censored"]
    return cols, rows


def _sensitivity(ctx):
    var, grid = ctx.grid("sensitivity")
    parameter = {"assumed_power_W": "assumed_power", "assumed_rho_m": "assumed_rho", "assumed_x0_m": "assumed_x0"}[var]
    if ctx.cfg.detection.gamma0 is None:
        raise ValueError("sensitivity needs detection.gamma0")
    rows = []
    for n in ctx.cfg.geometry.cells_per_side:
        geom = ctx.geometry(n)
        tc = TrialConfig(ctx.cfg.mc.seed, ctx.cfg.mc.trials, ctx.beam(), ctx.channel(geom), geom,
                         gamma0=ctx.cfg.detection.gamma0, threads=ctx.threads)
        for r in sensitivity_sweep(tc, parameter, grid):
            rows.append([n * n, r.value, r.pm.estimate, r.pm.half_width_95, int(r.pm.censored),
                         r.pf.estimate, r.pf.half_width_95, int(r.pf.censored)])
    return ["M", var, "pm_mc", "pm_hw95", "pm_censored", "pf_mc", "pf_hw95", "pf_censored"], rows


def _wide(grid, ns, fn, prefix):
    cols = [prefix + str(n * n) for n in ns]
    rows = [[g] for g in grid]
    for n in ns:
        vals = fn(n)
        for row, v in zip(rows, vals):
            row.append(v)
    return cols, rows


def _rho_objective(ctx):
    var, grid = ctx.grid("rho-objective")

    def f(n):
        prob = ctx.problem(n)
        out = []
        for r in grid:
            try:
                out.append(evaluate(prob, r).value)
            except InfeasibleError:
                out.append(math.nan)
        return out

    cols, rows = _wide(grid, ctx.cfg.geometry.cells_per_side, f, "bound_s_M")
    return [var] + cols, rows


def _rho_optimize(ctx):
    _, grid = ctx.grid("rho-optimize")
    rows = []
    for n in ctx.cfg.geometry.cells_per_side:
        for noise in grid:
            r, v = minimize_rho(ctx.problem(n, noise))
            rows.append([noise, r, v, n * n])
    return ["noise_W", "rho_star_m", "min_bound_s", "M"], rows


def _acq_pdf(ctx):
    var, grid = ctx.grid("acq-pdf")
    cols, rows = _wide(grid, ctx.cfg.geometry.cells_per_side, lambda n: pdf_TU(ctx.acq_model(n), grid), "pdf_M")
    return [var] + cols, rows


def _acq_ccdf(ctx):
    var, grid = ctx.grid("acq-ccdf")
    gamma = 50.0

    def f(n):
        if var == "gamma_s":
            return ccdf_TU(ctx.acq_model(n), grid)
        if var == "noise_W":
            return [float(ccdf_TU(ctx.acq_model(n, noise=v), gamma)) for v in grid]
        return [float(ccdf_TU(ctx.acq_model(n, rho=v), gamma)) for v in grid]

    cols, rows = _wide(grid, ctx.cfg.geometry.cells_per_side, f, "ccdf_M")
    return [var] + cols, rows


def _scan_plan(ctx):
    s = ctx.cfg.scan
    plan = build_spiral(s.Ru_m, ctx.cfg.beam.rho_m, s.overlap, s.Tr_s, s.R_m)
    x, y = plan.xy
    return ["n", "r_m", "theta_rad", "x_m", "y_m"], [
        [i, plan.r[i], plan.theta[i], x[i], y[i]] for i in range(plan.n_points)
    ]


def _whiten_check(ctx):
    u = ctx.cfg.uncertainty
    if u.covariance_m2 is None:
        raise ValueError("whiten-check needs uncertainty.covariance_m2")
    cov = np.array(u.covariance_m2, dtype=float)
    T = whitening_transform(cov)
    sp = whitened_covariance(cov)
    shape = cov if u.region_shape_m2 is None else np.array(u.region_shape_m2, dtype=float)
    region = EllipticalRegion(tuple(map(tuple, shape)), u.region_level)
    chk = verify_probability_preservation(cov, region, ctx.cfg.mc.trials, ctx.cfg.mc.seed, u.common_draws)
    rows = [
        ["T00", T[0, 0]], ["T01", T[0, 1]], ["T10", T[1, 0]], ["T11", T[1, 1]],
        ["det_T", float(np.linalg.det(T))],
        ["sigma_prime00", sp[0, 0]], ["sigma_prime01", sp[0, 1]], ["sigma_prime11", sp[1, 1]],
        ["mass_original", chk.mass_original], ["mass_transformed", chk.mass_transformed],
        ["mass_difference", chk.difference], ["mass_difference_hw95", chk.half_width_95],
    ]
    return ["quantity", "value"], rows


HANDLERS = {
    "approx-compare": _approx_compare,
    "pm-bounds": _pm_bounds,
    "sensitivity": _sensitivity,
    "rho-objective": _rho_objective,
    "rho-optimize": _rho_optimize,
    "acq-pdf": _acq_pdf,
    "acq-ccdf": _acq_ccdf,
    "scan-plan": _scan_plan,
    "whiten-check": _whiten_check,
}


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def render_csv(columns, rows):
    buf = io.StringIO()
    buf.write(",".join(columns) + "\r\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\r\n")
    return buf.getvalue()


def config_hash(resolved):
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path):
    """Parse a config file; a sidecar written by a previous run is accepted too."""
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict) and "config" in raw and "config_hash" in raw:
        raw = raw["config"]
    return RunConfig.model_validate(raw)


def run(subcommand, cfg, out=None, threads=1):
    """Run one subcommand; return the CSV path written."""
    columns, rows = HANDLERS[subcommand](_Context(cfg, threads))
    if out is None:
        name = cfg.output or f"{cfg.scenario}-{subcommand}.csv"
        out = os.path.join(os.environ.get("FSOACQ_OUT_DIR", "."), name)
    resolved = cfg.model_dump(mode="json")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write(render_csv(columns, rows))
    sidecar = {
        "subcommand": subcommand,
        "columns": columns,
        "config": resolved,
        "config_hash": config_hash(resolved),
    }
    with open(os.path.splitext(out)[0] + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def _error(code, kind, detail):
    json.dump({"error": kind, "detail": detail}, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None):
    ap = argparse.ArgumentParser(prog="fsoacq", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON config (or a previous run's sidecar)")
    ap.add_argument("--seed", type=int, help="override mc.seed")
    ap.add_argument("--out", help="CSV path; sidecar goes next to it")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            data = cfg.model_dump()
            data["mc"]["seed"] = args.seed
            cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        errs = [{"loc": ".".join(map(str, e["loc"])), "msg": e["msg"]} for e in exc.errors()]
        return _error(2, "validation", errs)
    except (OSError, json.JSONDecodeError) as exc:
        return _error(2, "config", str(exc))
    if args.threads < 1:
        return _error(2, "validation", [{"loc": "threads", "msg": "must be >= 1"}])
    try:
        path = run(args.subcommand, cfg, args.out, args.threads)
    except InfeasibleError as exc:
        return _error(3, "infeasible", str(exc))
    except ValueError as exc:
        return _error(2, "validation", str(exc))
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
