import importlib
import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from sparse_smooth.forward import make_cosine_model
from sparse_smooth.grid import basis_matrix
from sparse_smooth.problem import build_problem, restore_boundary
from sparse_smooth.signals import add_noise, make_ground_truth
from sparse_smooth.solver import CompositeProblem, solve_composite, solve_sparse_only
from sparse_smooth.sparsify import (SparsifyWarning, count_knots, knot_threshold, solve_lp_vertex,
                                    sparsify, sparsify_coefficients)


def highs_l1_min(H1, L1, c0, eliminated=()):
    """``min ||L1 c||_1`` s.t. ``H1 c = H1 c0`` by HiGHS, in the plain split formulation."""
    kept = np.setdiff1d(np.arange(H1.shape[1]), np.asarray(eliminated, dtype=int))
    H, L = H1[:, kept], L1[:, kept]
    n, p = H.shape[1], L.shape[0]
    A_eq = np.block([[H, np.zeros((H.shape[0], 2 * p))], [L, -np.eye(p), np.eye(p)]])
    b_eq = np.concatenate([H @ c0[kept], np.zeros(p)])
    cost = np.concatenate([np.zeros(n), np.ones(2 * p)])
    bounds = [(None, None)] * n + [(0, None)] * (2 * p)
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    assert res.status == 0, res.message
    return res.fun


def composite_instance(seed, T=64, M=30, lam1=1e-6, lam2=1e-9):
    setup = build_problem(T, 1, 2, make_cosine_model(M, 100.0, seed))
    gt = make_ground_truth(4, 1.0, 1, 10.0, 2, 1 / (16 * T), seed)
    y = add_noise(gt.measure(setup.model), 50.0, seed).y
    p = CompositeProblem.from_setup(setup, y, lam1, lam2)
    return setup, p, solve_composite(p)


@pytest.fixture(scope="module")
def solved():
    return composite_instance(5)


def test_knot_threshold():
    assert knot_threshold([0.5, -0.2]) == 1e-7
    assert knot_threshold([0.0, 30.0]) == pytest.approx(3e-6)
    assert count_knots([1.0, 1e-9, -2.0, 0.0]) == 2


def test_preserves_measurements_and_does_not_raise_cost(solved):
    setup, p, rep = solved
    out = sparsify(rep.c1, p)
    assert not out.fallback
    c0, c = rep.c1.values, out.c1.values
    before = np.abs(setup.L1 @ c0).sum()
    after = np.abs(setup.L1 @ c).sum()
    assert after <= before + 1e-8
    assert out.lp_value == pytest.approx(after, rel=1e-9)
    np.testing.assert_allclose(setup.H1 @ c, setup.H1 @ c0, atol=1e-10)
    J0 = p.objective(c0, rep.c2.values)
    assert p.objective(c, rep.c2.values) <= J0 + 1e-8 * (1 + abs(J0))


def test_matches_highs(solved):
    setup, p, rep = solved
    out = sparsify(rep.c1, p)
    ref = highs_l1_min(setup.H1, setup.L1, rep.c1.values)
    assert out.lp_value == pytest.approx(ref, rel=1e-6)
    # releasing the boundary coordinates never helps beyond the ADMM optimum
    assert out.lp_value == pytest.approx(np.abs(setup.L1 @ rep.c1.values).sum(), rel=1e-6)


def test_keeping_the_boundary_matches_highs(solved):
    setup, p, rep = solved
    out = sparsify(rep.c1, p, keep_boundary=True)
    for i in setup.eliminated[0]:
        assert out.c1.values[i] == 0.0
    ref = highs_l1_min(setup.H1, setup.L1, rep.c1.values, setup.eliminated[0])
    assert out.lp_value == pytest.approx(ref, rel=1e-6)


def test_restore_boundary_keeps_the_reconstruction(solved):
    setup, p, rep = solved
    out = sparsify(rep.c1, p)
    c1, c2 = restore_boundary(setup, out.c1, rep.c2)
    for i in setup.eliminated[0]:
        assert c1[i] == 0.0
    r = setup.ranges
    t = np.linspace(0, 1, 997, endpoint=False)
    B1 = basis_matrix(setup.basis1, r.m1, r.N1, setup.grid, t)
    B2 = basis_matrix(setup.basis2, r.m2, r.N2, setup.grid, t)
    before = B1 @ out.c1.values + B2 @ rep.c2.values
    np.testing.assert_allclose(B1 @ c1 + B2 @ c2, before, atol=1e-12)
    np.testing.assert_allclose(setup.L1 @ c1, setup.L1 @ out.c1.values, atol=1e-12)
    assert np.linalg.norm(setup.L2 @ c2) == pytest.approx(np.linalg.norm(setup.L2 @ rep.c2.values),
                                                          rel=1e-10)
    assert p.objective(c1, c2) == pytest.approx(p.objective(out.c1.values, rep.c2.values),
                                                rel=1e-10)


def test_output_is_a_vertex(solved):
    setup, p, rep = solved
    out = sparsify(rep.c1, p)
    H, L = setup.H1, setup.L1
    w = L @ out.c1.values
    active = np.abs(w) <= knot_threshold(w)
    # vertex: the measurement rows plus the active innovation rows pin down every free variable
    stacked = np.vstack([H / np.linalg.norm(H, 2), L[active] / np.linalg.norm(L, 2)])
    s = np.linalg.svd(stacked, compute_uv=False)
    numerically_zero = np.linalg.svd(H, compute_uv=False) <= 1e-12 * np.linalg.norm(H, 2)
    # directions the measurements do not resolve are outside the pinning; allow for them
    assert np.count_nonzero(s > 1e-13) >= H.shape[1] - np.count_nonzero(numerically_zero)
    assert count_knots(w) <= p.H1.shape[0] - 1


def test_vertex_is_returned_unchanged(solved):
    setup, p, rep = solved
    once = sparsify(rep.c1, p)
    twice = sparsify(once.c1, p)
    np.testing.assert_allclose(twice.c1.values, once.c1.values, atol=1e-10)
    assert twice.knots == once.knots


def test_two_measurement_toy_against_brute_force():
    # without boundary elimination the constant is free and one measurement pins it
    setup = build_problem(8, 1, 2, make_cosine_model(2, 20.0, 1))
    rng = np.random.default_rng(0)
    c0 = rng.standard_normal(setup.H1.shape[1])
    H, L = setup.H1, setup.L1
    out = sparsify_coefficients(c0, H, L)
    w = L @ out.c1.values
    assert count_knots(w) <= 1
    np.testing.assert_allclose(H @ out.c1.values, H @ c0, atol=1e-12)
    # brute force: the constant plus at most one innovation
    n = H.shape[1]
    S = np.vstack([np.eye(1, n), L])
    A = np.linalg.solve(S.T, H.T).T  # measurements in terms of (constant, innovations)
    b = H @ c0
    best = np.inf
    for j in range(1, n):
        try:
            x = np.linalg.solve(A[:, [0, j]], b)
        except np.linalg.LinAlgError:
            continue
        best = min(best, abs(x[1]))
    assert np.abs(w).sum() == pytest.approx(best, rel=1e-9)


def test_sparse_only_input():
    setup = build_problem(32, 1, 2, make_cosine_model(12, 60.0, 2))
    gt = make_ground_truth(3, 1.0, 1, 3.0, 2, 1 / 512, 2)
    y = add_noise(gt.measure(setup.model), 40.0, 2).y
    rep = solve_sparse_only(setup.H1, setup.L1, y, 1e-5)
    out = sparsify_coefficients(rep.c1, setup.H1, setup.L1)
    assert out.knots <= 12 - 1
    ref = highs_l1_min(setup.H1, setup.L1, rep.c1.values)
    assert out.lp_value == pytest.approx(ref, rel=1e-6)


def test_higher_order_sparse_component():
    setup = build_problem(32, 2, 2, make_cosine_model(12, 60.0, 3))
    rng = np.random.default_rng(3)
    c0 = rng.standard_normal(setup.H1.shape[1])
    out = sparsify_coefficients(c0, setup.H1, setup.L1)
    assert out.knots <= 12 - 2
    ref = highs_l1_min(setup.H1, setup.L1, c0)
    assert out.lp_value == pytest.approx(ref, rel=1e-6)


def test_fallback_warns(solved, monkeypatch):
    setup, p, rep = solved

    def broken(*args, **kwargs):
        raise np.linalg.LinAlgError("singular")

    monkeypatch.setattr(importlib.import_module("sparse_smooth.sparsify"), "purify", broken)
    with pytest.warns(SparsifyWarning):
        out = sparsify(rep.c1, p)
    assert out.fallback
    np.testing.assert_array_equal(out.c1.values, rep.c1.values)


class TestLpVertex:
    @pytest.mark.parametrize("seed", range(5))
    def test_against_highs(self, seed):
        rng = np.random.default_rng(seed)
        m, n = 6, 15
        A = rng.standard_normal((m, n))
        b = A @ rng.uniform(0, 1, n)
        cost = rng.uniform(0.1, 1.0, n)
        x, basis, rows, _ = solve_lp_vertex(A, b, cost)
        ref = linprog(cost, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
        assert cost @ x == pytest.approx(ref.fun, rel=1e-9)
        np.testing.assert_allclose(A @ x, b, atol=1e-9)
        assert np.count_nonzero(x > 1e-12) <= m

    def test_redundant_rows(self):
        A = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        x, basis, rows, _ = solve_lp_vertex(A, np.array([1.0, 2.0]), np.array([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(x, [0.0, 1.0, 0.0])
        assert len(rows) == 1

    def test_infeasible(self):
        with pytest.raises(RuntimeError):
            solve_lp_vertex(np.array([[1.0, 1.0]]), np.array([-1.0]), np.ones(2))

    def test_small_enumeration(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((2, 5))
        b = A @ rng.uniform(0, 1, 5)
        cost = rng.uniform(0, 1, 5)
        best = np.inf
        for cols in itertools.combinations(range(5), 2):
            try:
                xb = np.linalg.solve(A[:, cols], b)
            except np.linalg.LinAlgError:
                continue
            if np.all(xb >= -1e-12):
                best = min(best, cost[list(cols)] @ xb)
        x, *_ = solve_lp_vertex(A, b, cost)
        assert cost @ x == pytest.approx(best, rel=1e-10)
