import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from fsoacq.whiten import (
    EllipticalRegion, EllipticalUncertainty, lattice_scan_steps, region_scan_time, spectral_sqrt,
    transformed_radius, verify_probability_preservation, whitened_covariance, whitening_transform,
)


def random_spd(rng):
    a = rng.normal(size=(2, 2))
    return a @ a.T + rng.uniform(0.01, 1.0) * np.eye(2)


def test_identity():
    T = whitening_transform(np.eye(2))
    assert np.allclose(np.abs(T), np.eye(2)) and np.linalg.det(T) == pytest.approx(1.0)


def test_diag_example():
    c = np.diag([4.0, 1.0])
    T = whitening_transform(c)
    assert np.linalg.det(T) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(whitened_covariance(c), 2.0 * np.eye(2), atol=1e-14)


def test_rejects_non_spd():
    with pytest.raises(ValueError):
        EllipticalUncertainty([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        EllipticalUncertainty([[1.0, 0.1], [0.0, 1.0]])


def test_random_spd_properties():
    rng = np.random.default_rng(100)
    for _ in range(100):
        c = random_spd(rng)
        T = whitening_transform(c)
        assert abs(np.linalg.det(T) - 1.0) < 1e-12
        s = T @ spectral_sqrt(c)
        sp = s @ s.T
        tr = np.trace(sp)
        assert abs(sp[0, 1]) < 1e-10 * tr and abs(sp[1, 0]) < 1e-10 * tr
        assert sp[0, 0] == pytest.approx(sp[1, 1], rel=1e-10)
        assert sp[0, 0] == pytest.approx(math.sqrt(np.linalg.det(c)), rel=1e-10)


def test_spectral_root_not_elementwise():
    c = np.array([[4.0, 1.2], [1.2, 1.0]])
    r = spectral_sqrt(c)
    np.testing.assert_allclose(r @ r.T, c, atol=1e-14)
    e = np.sqrt(c)
    assert not np.allclose(e @ e.T, c)


def test_preservation_full_plane():
    chk = verify_probability_preservation(np.diag([4.0, 1.0]), EllipticalRegion(((1.0, 0.0), (0.0, 1.0)), math.inf), 100_000)
    assert chk.mass_original == 1.0 and chk.mass_transformed == 1.0


def test_preservation_identity_exact():
    chk = verify_probability_preservation(np.eye(2), EllipticalRegion(((1.0, 0.0), (0.0, 1.0)), 1.3), 200_000, seed=4)
    assert chk.mass_original == chk.mass_transformed


def test_preservation_one_sigma_independent_streams():
    c = np.diag([4.0, 1.0])
    region = EllipticalRegion(((4.0, 0.0), (0.0, 1.0)), 1.0)
    chk = verify_probability_preservation(c, region, 1_000_000, seed=9, common_draws=False)
    assert abs(chk.difference) < 3 * chk.half_width_95
    assert chk.mass_original == pytest.approx(1 - math.exp(-0.5), abs=3e-3)


@pytest.mark.parametrize("seed", range(5))
def test_preservation_skew_region(seed):
    rng = np.random.default_rng(seed)
    c = random_spd(rng)
    region = EllipticalRegion(tuple(map(tuple, random_spd(rng))), 1.2)
    chk = verify_probability_preservation(c, region, 400_000, seed=seed, common_draws=False)
    assert abs(chk.difference) < 3 * chk.half_width_95 + 1e-12


def test_region_scan_time_bounds():
    rng = np.random.default_rng(7)
    rho, Td = 0.2, 1e-3
    for _ in range(30):
        c = random_spd(rng) * rng.uniform(1, 20)
        level = 2.0
        B = EllipticalRegion(tuple(map(tuple, c)), level)
        Bp = B.transformed(whitening_transform(c))
        R = transformed_radius(c, level)
        if R < 10 * rho:
            continue
        tau = region_scan_time(Td, R, rho, a=2.0)
        assert Td * lattice_scan_steps(B, rho) <= tau
        assert Td * lattice_scan_steps(Bp, rho) <= tau
    with pytest.raises(ValueError):
        region_scan_time(Td, 1.0, rho, a=0.5)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-0.9, 0.9))
def test_det_property(a, b, corr):
    c = np.array([[a, corr * math.sqrt(a * b)], [corr * math.sqrt(a * b), b]])
    assert abs(np.linalg.det(whitening_transform(c)) - 1.0) < 1e-12
