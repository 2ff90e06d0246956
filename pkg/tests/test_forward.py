import numpy as np
import pytest

from oracles import gauss_legendre
from sparse_smooth.filters import bspline
from sparse_smooth.forward import (MeasurementFunctional, assemble_system_matrix, cosine_moments,
                                   integrate_poly_cosine, make_cosine_model,
                                   measure_one_sided_powers, measure_piecewise_linear)
from sparse_smooth.grid import GridSpec, index_ranges


def quad_poly_cos(coeffs, a, b, omega, theta, nodes=64):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (a + b) + 0.5 * (b - a) * xg
    p = np.polynomial.polynomial.polyval(t - a, coeffs)
    return 0.5 * (b - a) * np.dot(wg, p * np.cos(omega * t + theta))


class TestCosineModel:
    def test_first_is_dc(self):
        model = make_cosine_model(2, 10.0, 3)
        assert model[0].kind == "dc"
        assert model[1].kind == "cosine"

    def test_deterministic(self):
        assert make_cosine_model(20, 100.0, 7) == make_cosine_model(20, 100.0, 7)
        assert make_cosine_model(20, 100.0, 7) != make_cosine_model(20, 100.0, 8)

    def test_ranges(self):
        model = make_cosine_model(50, 100.0, 1)
        assert len(model) == 50
        omegas = np.array([m.omega for m in model[1:]])
        thetas = np.array([m.theta for m in model[1:]])
        assert np.all((omegas > 0) & (omegas <= 100.0))
        assert np.all((thetas >= 0) & (thetas < 2 * np.pi))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            make_cosine_model(1, 10.0, 0)
        with pytest.raises(ValueError):
            make_cosine_model(5, 0.0, 0)
        with pytest.raises(ValueError):
            MeasurementFunctional.point(1.5)
        with pytest.raises(ValueError):
            MeasurementFunctional("fourier")


class TestPolyCosine:
    def test_full_period(self):
        assert integrate_poly_cosine([1.0], 0.0, 1.0, 2 * np.pi, 0.0) == pytest.approx(0, abs=1e-15)

    def test_zero_frequency(self):
        assert integrate_poly_cosine([1.0], 0.2, 0.7, 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_quadratic_against_quadrature(self):
        # t^2 on [0, 1] in local coordinates about a = 0
        got = integrate_poly_cosine([0, 0, 1.0], 0.0, 1.0, 3.0, 0.7)
        assert got == pytest.approx(quad_poly_cos([0, 0, 1.0], 0.0, 1.0, 3.0, 0.7), abs=1e-12)

    @pytest.mark.parametrize("omega", [0.0, 1e-9, 1e-4, 0.3, 0.99, 1.01, 2.5, 5.9, 6.1, 40.0, 300.0])
    @pytest.mark.parametrize("degree", [0, 1, 3, 6])
    def test_moments_across_branches(self, omega, degree):
        rng = np.random.default_rng(degree)
        coeffs = rng.standard_normal(degree + 1)
        a, b = 0.3, 0.3 + rng.uniform(0.01, 1.0)
        theta = rng.uniform(0, 2 * np.pi)
        got = integrate_poly_cosine(coeffs, a, b, omega, theta)
        ref = quad_poly_cos(coeffs, a, b, omega, theta, nodes=128)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-14)

    def test_moments_vectorize_over_phase(self):
        thetas = np.array([0.0, 1.0, 2.0])
        m = cosine_moments(3, 2.0, thetas)
        assert m.shape == (3, 4)
        np.testing.assert_allclose(m[1], cosine_moments(3, 2.0, 1.0))


@pytest.fixture(scope="module")
def small_problem():
    grid = GridSpec(16)
    model = make_cosine_model(8, 60.0, 4)
    return grid, model


class TestSystemMatrix:
    def test_dc_box_columns(self, small_problem):
        grid, model = small_problem
        r = index_ranges(grid, 2, 2)
        H = assemble_system_matrix(model, bspline(1), r, grid, 1)
        np.testing.assert_allclose(H[0], grid.h, atol=1e-16)

    @pytest.mark.parametrize("order1", [1, 2, 3])
    def test_dc_of_constant_is_one(self, small_problem, order1):
        grid, model = small_problem
        r = index_ranges(grid, order1 + 1, 2)
        H = assemble_system_matrix(model, bspline(order1), r, grid, 1)
        assert H[0].sum() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("order1, order2", [(1, 2), (2, 3), (3, 1)])
    def test_entries_match_quadrature(self, small_problem, order1, order2):
        grid, model = small_problem
        r = index_ranges(grid, order1 + 1, order2 + 1)
        T = grid.T
        for comp, basis in ((1, bspline(order1)), (2, bspline(order2, "centered_for_LstarL"))):
            H = assemble_system_matrix(model, basis, r, grid, comp)
            first, _ = r.bounds(comp)
            for m, nu in enumerate(model):
                omega, theta = nu.pulsation
                for j in range(H.shape[1]):
                    k = first + j
                    ref = gauss_legendre(lambda t: basis(t * T - k) * np.cos(omega * t + theta),
                                         0.0, 1.0, T)
                    assert H[m, j] == pytest.approx(ref, rel=1e-10, abs=1e-15)

    def test_no_zero_columns(self, small_problem):
        grid, model = small_problem
        r = index_ranges(grid, 3, 3)
        H = assemble_system_matrix(model, bspline(2), r, grid, 1)
        assert np.all(np.abs(H[0]) > 0)

    def test_linearity(self, small_problem):
        grid, model = small_problem
        r = index_ranges(grid, 3, 3)
        basis = bspline(2, "centered_for_LstarL")
        H = assemble_system_matrix(model, basis, r, grid, 2)
        rng = np.random.default_rng(2)
        c = rng.standard_normal(r.N2)
        T = grid.T

        def s(t):
            return sum(c[i] * basis(t * T - (r.m2 + i)) for i in range(r.N2))

        for m, nu in enumerate(model):
            omega, theta = nu.pulsation
            ref = gauss_legendre(lambda t: s(t) * np.cos(omega * t + theta), 0, 1, T)
            assert H[m] @ c == pytest.approx(ref, rel=1e-11, abs=1e-13)

    def test_point_samples(self):
        grid = GridSpec(10)
        r = index_ranges(grid, 3, 3)
        model = [MeasurementFunctional.point(0.33), MeasurementFunctional.point(1.0)]
        H = assemble_system_matrix(model, bspline(2), r, grid, 1)
        beta = bspline(2)
        expected = beta(3.3 - (r.m1 + np.arange(r.N1)))
        np.testing.assert_allclose(H[0], expected)


class TestGroundTruthMeasurements:
    def test_piecewise_linear_against_quadrature(self):
        model = make_cosine_model(6, 50.0, 0) + [MeasurementFunctional.point(0.4)]
        step = 1 / 64
        rng = np.random.default_rng(0)
        values = rng.standard_normal(65)
        got = measure_piecewise_linear(model, step, values)
        grid = step * np.arange(65)
        for m, nu in enumerate(model[:-1]):
            omega, theta = nu.pulsation
            ref = gauss_legendre(lambda t: np.interp(t, grid, values) * np.cos(omega * t + theta),
                                 0, 1, 64)
            assert got[m] == pytest.approx(ref, rel=1e-11, abs=1e-13)
        assert got[-1] == pytest.approx(np.interp(0.4, grid, values))

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_one_sided_powers_against_quadrature(self, order):
        model = make_cosine_model(5, 80.0, 1)
        knots, amps = [0.21, 0.6], [1.5, -0.7]
        got = measure_one_sided_powers(model, knots, amps, order)
        from math import factorial

        def s(t):
            return sum(a * np.where(t >= x, (t - x) ** (order - 1), 0.0) / factorial(order - 1)
                       for x, a in zip(knots, amps))

        for m, nu in enumerate(model):
            omega, theta = nu.pulsation
            ref = sum(gauss_legendre(lambda t: s(t) * np.cos(omega * t + theta), lo, hi, 20)
                      for lo, hi in ((0, 0.21), (0.21, 0.6), (0.6, 1.0)))
            assert got[m] == pytest.approx(ref, rel=1e-11, abs=1e-13)

    def test_knots_outside_rejected(self):
        with pytest.raises(ValueError):
            measure_one_sided_powers(make_cosine_model(2, 1.0, 0), [1.2], [1.0], 1)
