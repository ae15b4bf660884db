import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from fsoacq.geometry import ArrayGeometry, cell_bounds, packing_counts


def test_cell_bounds_examples():
    assert cell_bounds(ArrayGeometry(1, 2.0), 0) == (-1.0, 1.0, -1.0, 1.0)
    assert cell_bounds(ArrayGeometry(2, 2.0), 0) == (-1.0, 0.0, -1.0, 0.0)
    assert cell_bounds(ArrayGeometry(4, 2.0), 5) == (-0.5, 0.0, -0.5, 0.0)


def test_cell_bounds_range():
    with pytest.raises(IndexError):
        cell_bounds(ArrayGeometry(2), 4)
    with pytest.raises(IndexError):
        cell_bounds(ArrayGeometry(2), -1)


def test_invalid_geometry():
    with pytest.raises(ValueError):
        ArrayGeometry(0)
    with pytest.raises(ValueError):
        ArrayGeometry(2, -1.0)


@given(st.integers(1, 12), st.floats(0.1, 10.0), st.floats(-5, 5), st.floats(-5, 5))
def test_tiling(n, L, cx, cy):
    g = ArrayGeometry(n, L, (cx, cy))
    lx, ux, ly, uy = g.bounds()
    w = ux - lx
    h = uy - ly
    assert np.allclose(w, L / n) and np.allclose(h, L / n)
    assert math.isclose(float(np.sum(w * h)), L * L, rel_tol=1e-12)
    assert lx.min() == pytest.approx(cx - L / 2) and ux.max() == pytest.approx(cx + L / 2)
    # neighbours share edges exactly, so cells are interior-disjoint and gap-free
    grid_x = lx.reshape(n, n)
    assert np.array_equal(ux.reshape(n, n)[:, :-1], grid_x[:, 1:])
    assert np.array_equal(uy.reshape(n, n)[:-1, :], ly.reshape(n, n)[1:, :])


def test_packing_examples():
    p = packing_counts(ArrayGeometry(4, 2.0), 0.2)
    assert (p.n0, p.n1, p.full_overlap_floor, p.valid) == (25, 29, 15, True)
    p = packing_counts(ArrayGeometry(4, 2.0), 1.0)
    assert (p.n0, p.n1) == (1, 2)
    p = packing_counts(ArrayGeometry(4, 2.0), 0.5)
    assert p.full_overlap_floor == 1 and not p.valid
    with pytest.raises(ValueError):
        packing_counts(ArrayGeometry(4), 0.0)


@given(st.floats(0.01, 1.0), st.floats(1.0, 3.0))
def test_packing_monotone(rho, factor):
    g = ArrayGeometry(4, 2.0)
    a, b = packing_counts(g, rho), packing_counts(g, rho * factor)
    assert b.n0 <= a.n0 and b.n1 <= a.n1
    if a.n0 >= 1:
        assert a.n0 < a.n1
    if a.valid:
        assert a.full_overlap_floor <= a.n0
