
import numpy as np
import pytest

from fsoacq._num import InfeasibleError
from fsoacq.beam import ChannelParams
from fsoacq.geometry import ArrayGeometry
from fsoacq.optimize import (
    OptimizationProblem, evaluate, golden_section, minimize_rho, objective, sweep_noise,
)


def problem(n=4, noise=1e-6, Td=1e-3, **kw):
    g = ArrayGeometry(n, 2.0)
    return OptimizationProblem(g, ChannelParams.from_noise_power(noise, g.area), 1e-6, 7e-10, 50.0, Td, 10.0, **kw)


def test_rho_max_from_exponent():
    assert problem().rho_max == pytest.approx(1 / 3)
    assert problem(rho_max=0.3).rho_max == 0.3


def test_golden_quadratic():
    r, v = golden_section(lambda x: (x - 0.2) ** 2 + 1, 0.05, 0.35)
    assert abs(r - 0.2) < 1e-4 and v == pytest.approx(1.0)


def test_minimize_quadratic_via_grid(monkeypatch):
    import fsoacq.optimize as opt

    monkeypatch.setattr(opt, "objective", lambda prob, rho: (rho - 0.2) ** 2 + 1)
    r, v = minimize_rho(problem(rho_min=0.05, rho_max=0.35))
    assert abs(r - 0.2) < 1e-4


def test_interior_minimum():
    for n in (2, 4, 6, 10):
        p = problem(n)
        r, v = minimize_rho(p)
        assert objective(p, p.rho_min) > v
        assert objective(p, p.rho_max) > v


def test_td_scales_objective():
    assert objective(problem(Td=2e-3), 0.2) == pytest.approx(2 * objective(problem(), 0.2), rel=1e-12)


def test_threshold_consistency():
    p = problem(6)
    for rho in np.linspace(p.rho_min, p.rho_max, 25):
        d = evaluate(p, rho)
        assert d.pf_scan_upper <= 7e-10 * (1 + 1e-12)


def test_zero_miss_limit():
    # very strong signal: G -> 0 and the bound is the final-scan term
    g = ArrayGeometry(4)
    p = OptimizationProblem(g, ChannelParams.from_noise_power(1e-9, g.area), 1e-3, 7e-10, 50.0, 1e-3, 10.0)
    assert objective(p, 0.2) == pytest.approx(1e-3 * 2 * 100 / 0.04, rel=1e-9)


def test_infeasible_rho():
    with pytest.raises(InfeasibleError):
        objective(problem(), 0.4)


def test_refinement_not_worse_than_grid():
    p = problem(4)
    grid = np.linspace(p.rho_min, p.rho_max, 64)
    best = min(objective(p, r) for r in grid)
    assert minimize_rho(p)[1] <= best


def test_sweep_rows():
    p = problem(4)
    rows = sweep_noise(p, [1e-6])
    assert len(rows) == 1
    assert (rows[0].rho_star, rows[0].min_value) == minimize_rho(p.with_noise_power(1e-6))
    with pytest.raises(ValueError):
        sweep_noise(p, [])


@pytest.mark.parametrize("n", [2, 4, 6, 10])
def test_min_value_non_decreasing_on_coarse_grid(n):
    coarse = [r.min_value for r in sweep_noise(problem(n), np.linspace(0.2e-6, 1e-6, 5))]
    assert np.all(np.diff(coarse) >= 0)


@pytest.mark.xfail(strict=True, reason="integer threshold calibration makes the minimum saw-toothed in noise power")
def test_min_value_non_decreasing_on_fine_grid():
    fine = [r.min_value for r in sweep_noise(problem(4), np.linspace(0.2e-6, 1e-6, 41))]
    assert np.all(np.diff(fine) >= 0)
