import numpy as np
import pytest

from sparse_smooth.filters import bspline
from sparse_smooth.grid import (CoefficientVector, CompositeSolution, GridSpec, basis_matrix,
                                evaluate_component, index_ranges)


def test_grid_spec():
    g = GridSpec(128)
    assert g.h == 1 / 128
    with pytest.raises(ValueError):
        GridSpec(1)


@pytest.mark.parametrize("T, D1, D2, expected", [
    (10, 4, 3, (-2, 9, -1, 11)),
    (128, 2, 3, (0, 127, -1, 129)),
])
def test_index_ranges(T, D1, D2, expected):
    r = index_ranges(GridSpec(T), D1, D2)
    assert (r.m1, r.M1, r.m2, r.M2) == expected
    assert r.N1 == r.M1 - r.m1 + 1
    assert r.N2 == r.M2 - r.m2 + 1


def test_index_ranges_t128_first_order():
    r = index_ranges(GridSpec(128), 2, 2)
    assert (r.m1, r.M1, r.N1) == (0, 127, 128)


def test_index_ranges_reject_short_grid():
    with pytest.raises(ValueError):
        index_ranges(GridSpec(3), 4, 2)


@pytest.mark.parametrize("order1, order2", [(1, 1), (2, 2), (3, 2), (1, 3)])
def test_active_indices_are_exactly_the_overlapping_ones(order1, order2):
    T = 12
    grid = GridSpec(T)
    r = index_ranges(grid, order1 + 1, order2 + 1)
    x = np.linspace(0, T, 20001)[1:-1]
    for comp, basis in ((1, bspline(order1)), (2, bspline(order2, "centered_for_LstarL"))):
        lo, hi = r.bounds(comp)
        for k in range(lo - 3, hi + 4):
            touches = np.any(basis(x - k) != 0.0)
            assert touches == (lo <= k <= hi), (comp, k)


def test_zero_and_box():
    grid = GridSpec(8)
    r = index_ranges(grid, 2, 2)
    t = np.linspace(0, 1, 101, endpoint=False)
    zero = evaluate_component(np.zeros(r.N1), r, bspline(1), grid, t, component=1)
    np.testing.assert_array_equal(zero, 0.0)
    c = np.zeros(r.N1)
    c[3 - r.m1] = 1.0
    box = evaluate_component(CoefficientVector(c, 1), r, bspline(1), grid, t)
    np.testing.assert_array_equal(box, ((t >= 3 / 8) & (t < 4 / 8)).astype(float))


def test_matches_dense_summation():
    grid = GridSpec(16)
    r = index_ranges(grid, 3, 3)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(r.N1)
    beta = bspline(2)
    t = rng.uniform(0, 1, 1000)
    dense = sum(c[i] * beta(t * 16 - (r.m1 + i)) for i in range(r.N1))
    got = evaluate_component(c, r, beta, grid, t, component=1)
    np.testing.assert_allclose(got, dense, atol=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_partition_of_unity(order):
    T = 20
    grid = GridSpec(T)
    r = index_ranges(grid, order + 1, 2)
    t = np.linspace(0, 1, 777, endpoint=False)  # boxes are half-open on the right
    s = evaluate_component(np.ones(r.N1), r, bspline(order), grid, t, component=1)
    np.testing.assert_allclose(s, 1.0, atol=1e-12)


def test_locality():
    grid = GridSpec(16)
    r = index_ranges(grid, 3, 3)
    beta = bspline(2)
    c = np.zeros(r.N1)
    k = 5
    c[k - r.m1] = 1.0
    t = np.linspace(0, 1, 2001)
    s = evaluate_component(c, r, beta, grid, t, component=1)
    outside = (t < k / 16) | (t > (k + 2) / 16)
    assert np.all(s[outside] == 0.0)


def test_second_component_at_knots_reproduces_kernel():
    grid = GridSpec(10)
    r = index_ranges(grid, 2, 3)
    c = np.zeros(r.N2)
    c[4 - r.m2] = 1.0
    beta = bspline(2, "centered_for_LstarL")
    vals = evaluate_component(c, r, beta, grid, np.array([0.3, 0.4, 0.5]), component=2)
    np.testing.assert_allclose(vals, [1 / 6, 4 / 6, 1 / 6], atol=1e-14)


def test_wrong_length_rejected():
    grid = GridSpec(10)
    r = index_ranges(grid, 2, 3)
    with pytest.raises(ValueError):
        evaluate_component(np.ones(3), r, bspline(1), grid, 0.5, component=1)


def test_composite_solution_sums_components():
    grid = GridSpec(10)
    r = index_ranges(grid, 2, 3)
    rng = np.random.default_rng(1)
    sol = CompositeSolution(CoefficientVector(rng.standard_normal(r.N1), 1),
                            CoefficientVector(rng.standard_normal(r.N2), 2), r, bspline(1),
                            bspline(2, "centered_for_LstarL"), grid)
    t = np.linspace(0, 1, 50)
    np.testing.assert_allclose(sol.s(t), sol.s1(t) + sol.s2(t))


def test_basis_matrix_columns():
    grid = GridSpec(6)
    B = basis_matrix(bspline(1), 0, 6, grid, np.array([0.05, 0.95]))
    np.testing.assert_array_equal(B, [[1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 1]])
