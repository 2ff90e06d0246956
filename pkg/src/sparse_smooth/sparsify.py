"""Move the sparse coefficients to a vertex of their solution set.

With the smooth component held fixed, every minimizer over ``c1`` produces
the same measurements ``H1 c1``. The solution set is therefore the set of
minimizers of ``||L1 c1||_1`` subject to ``H1 c1 = H1 c1_admm``, a linear
program. A basic optimal solution of it has at most as many nonzero
innovations as there are independent measurement constraints.

The LP is written in the variables ``(a, w)`` with ``w = L1 c1`` and ``a``
the first few coordinates of ``c1`` that ``L1`` cannot see. The map
``c1 -> (a, w)`` is lower triangular with a constant diagonal, so it is
inverted exactly by a triangular solve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from . import kernels
from .grid import CoefficientVector


class SparsifyWarning(UserWarning):
    """The LP could not be solved; the input coefficients were returned unchanged."""


@dataclass
class SparsifyResult:
    c1: CoefficientVector
    knots: int
    lp_value: float
    fallback: bool
    pivots: int
    basis: np.ndarray
    rows: np.ndarray


def knot_threshold(innovations) -> float:
    return 1e-7 * max(1.0, float(np.max(np.abs(innovations), initial=0.0)))


def count_knots(innovations) -> int:
    """Number of innovations above :func:`knot_threshold`."""
    innovations = np.asarray(innovations)
    return int(np.count_nonzero(np.abs(innovations) > knot_threshold(innovations)))


def synthesis_matrix(L1r: np.ndarray) -> np.ndarray:
    """Lower-triangular ``S`` with ``S c = [c[:f]; L1r c]``."""
    p, n = L1r.shape
    f = n - p
    if f < 0:
        raise ValueError("L1 has more rows than columns")
    S = np.zeros((n, n))
    S[:f, :f] = np.eye(f)
    S[f:] = L1r
    if np.any(np.triu(S, 1)) or not np.all(np.diag(S)):
        raise ValueError("L1 does not have lower-triangular structure")
    return S


def _phase_one(A: np.ndarray, b: np.ndarray, tol: float, max_pivots: int):
    m, n = A.shape
    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.abs(b)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    # reduced costs of minimizing the sum of artificials from the all-artificial basis
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)
    allowed = np.ones(n + m, dtype=np.uint8)
    status, pivots = kernels.simplex_iterate(T, basis, allowed, tol, max_pivots)
    return T, basis, status, pivots


def _drive_out_artificials(T: np.ndarray, basis: np.ndarray, n: int, tol: float):
    """Pivot zero-level artificials out of the basis; drop rows where that is impossible."""
    m = T.shape[0] - 1
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] < n:
            continue
        row = T[i, :n]
        cand = np.flatnonzero(np.abs(row) > tol)
        if cand.size == 0:
            keep[i] = False
            continue
        j = cand[np.argmax(np.abs(row[cand]))]
        T[i] /= T[i, j]
        factors = T[:, j].copy()
        factors[i] = 0.0
        T -= np.outer(factors, T[i])
        basis[i] = j
    rows = np.append(np.flatnonzero(keep), m)
    return np.ascontiguousarray(T[rows]), np.ascontiguousarray(basis[keep]), np.flatnonzero(keep)


def solve_lp_vertex(A: np.ndarray, b: np.ndarray, cost: np.ndarray, tol: float = 1e-9,
                    max_pivots: int = 50000):
    """Basic optimal solution of ``min cost @ x`` s.t. ``A x = b``, ``x >= 0``.

    Two-phase dense-tableau simplex with Bland's rule. Rows are equilibrated
    first. Returns ``(x, basis, rows)`` with ``rows`` the constraint rows
    that were not found redundant, or raises ``RuntimeError`` if the problem
    is infeasible, unbounded or the pivot budget runs out.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    scale = np.max(np.abs(A), axis=1)
    scale[scale == 0] = 1.0
    As = A / scale[:, None]
    bs = b / scale
    T, basis, status, pivots = _phase_one(As, bs, tol, max_pivots)
    if status != kernels.OPTIMAL:
        raise RuntimeError("phase I did not terminate")
    if -T[m, -1] > tol * max(1.0, np.abs(bs).sum()):
        raise RuntimeError(f"LP infeasible (phase I residual {-T[m, -1]:.3e})")
    T, basis, rows = _drive_out_artificials(T, basis, n, tol)
    mr = len(rows)
    # phase II: original costs, artificials barred from re-entering
    T[mr] = 0.0
    T[mr, :n] = cost
    cb = np.where(basis < n, cost[np.minimum(basis, n - 1)], 0.0)
    T[mr] -= cb @ T[:mr]
    allowed = np.zeros(T.shape[1] - 1, dtype=np.uint8)
    allowed[:n] = 1
    T = np.ascontiguousarray(T)
    status2, pivots2 = kernels.simplex_iterate(T, basis, allowed, tol, max_pivots)
    if status2 != kernels.OPTIMAL:
        raise RuntimeError("phase II did not reach an optimal basis")
    # re-solve the basic variables from the original data to shed tableau drift
    x = np.zeros(n)
    x[basis] = np.linalg.solve(As[rows][:, basis], bs[rows])
    x = np.maximum(x, 0.0)
    return x, basis, rows, pivots + pivots2


def compress_constraints(A: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal rows spanning the numerically significant row space of ``A``.

    Singular directions below ``rtol * s_max`` carry no usable information
    and make every basis matrix ill-conditioned; they are dropped. The
    right-hand side must be formed from a feasible point with the returned
    rows, not by rescaling ``b``, which would amplify its rounding error.
    """
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    r = int(np.count_nonzero(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[:r]


def purify(A: np.ndarray, b: np.ndarray, x: np.ndarray, free: int, rank_tol: float = 1e-9):
    """Walk from a feasible ``x`` to a basic solution of ``A x = b`` without raising the cost.

    The cost is ``sum |x[free:]|``; the first ``free`` entries are unrestricted.
    While the columns of the support are dependent, move along a null
    direction (oriented so the cost does not grow) until an entry reaches
    zero. The null space of the support is computed once and downdated by a
    Householder reflection each time a column leaves. Returns the new ``x``
    and its support.
    """
    x = np.array(x, dtype=float)
    idx = np.array([j for j in range(len(x)) if j < free or x[j] != 0.0], dtype=int)
    if idx.size:
        _, s, Vt = np.linalg.svd(A[:, idx], full_matrices=True)
        smax = s[0] if s.size else 0.0
        rank = int(np.count_nonzero(s > rank_tol * max(smax, 1.0)))
        Z = Vt[rank:].T  # orthonormal basis of the null space of the support columns
    else:
        Z = np.zeros((0, 0))
    while Z.shape[1]:
        bounded = idx >= free
        weight = np.linalg.norm(Z[bounded], axis=0)
        col = int(np.argmax(weight))
        if weight[col] == 0.0:
            break  # what is left only couples free variables
        d = Z[:, col]
        if np.sum(np.sign(x[idx[bounded]]) * d[bounded]) > 0.0:
            d = -d
        # entries moving towards zero limit the step
        toward = bounded & (np.sign(x[idx]) * d < 0.0)
        if not np.any(toward):
            d = -d
            toward = bounded & (np.sign(x[idx]) * d < 0.0)
        steps = np.full(idx.size, np.inf)
        steps[toward] = -x[idx[toward]] / d[toward]
        k = int(np.argmin(steps))
        x[idx] += steps[k] * d
        x[idx[k]] = 0.0
        # keep only null vectors that vanish on the dropped column
        zk = Z[k]
        v = zk.copy()
        v[0] += np.copysign(np.linalg.norm(zk), zk[0])
        Z = Z - np.outer(Z @ v, v) * (2.0 / (v @ v))
        Z = np.delete(Z[:, 1:], k, axis=0)
        idx = np.delete(idx, k)
    support = idx.tolist()
    # restore the equality constraints on the final support
    if support:
        x_s, *_ = np.linalg.lstsq(A[:, support], b, rcond=None)
        x[:] = 0.0
        x[support] = x_s
    return x, support


def _complete_basis(A: np.ndarray, columns: list[int]) -> list[int]:
    """Extend independent ``columns`` of ``A`` to a square nonsingular column set."""
    m = A.shape[0]
    if len(columns) >= m:
        return list(columns[:m])
    Q, _ = np.linalg.qr(A[:, columns]) if columns else (np.zeros((m, 0)), None)
    rest = np.setdiff1d(np.arange(A.shape[1]), columns)
    R = A[:, rest] - Q @ (Q.T @ A[:, rest])
    _, _, piv = qr(R, mode="economic", pivoting=True)
    return list(columns) + [int(rest[j]) for j in piv[:m - len(columns)]]


def _phase_two_from(A: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray,
                    tol: float, max_pivots: int):
    """Primal simplex from a feasible basis; returns ``(x, basis, pivots)`` or ``None``."""
    m, n = A.shape
    B = A[:, basis]
    T = np.zeros((m + 1, n + 1))
    T[:m, :n] = np.linalg.solve(B, A)
    T[:m, -1] = np.maximum(np.linalg.solve(B, b), 0.0)
    T[m, :n] = cost - cost[basis] @ T[:m, :n]
    T[m, -1] = -cost[basis] @ T[:m, -1]
    basis = np.ascontiguousarray(basis, dtype=np.int64)
    status, pivots = kernels.simplex_iterate(T, basis, np.ones(n, dtype=np.uint8), tol, max_pivots)
    if status != kernels.OPTIMAL:
        return None
    x = np.zeros(n)
    x[basis] = np.linalg.solve(A[:, basis], b)
    if np.min(x) < -1e-9 * max(1.0, np.max(np.abs(x))):
        return None
    return np.maximum(x, 0.0), basis, pivots


def sparsify_coefficients(c1_admm, H1: np.ndarray, L1: np.ndarray, eliminated=(),
                          tol: float = 1e-9, max_pivots: int = 20000) -> SparsifyResult:
    """Vertex of ``{c : H1 c = H1 c1_admm}`` minimizing ``||L1 c||_1``.

    Coordinates in ``eliminated`` stay at zero. The ADMM point is first
    purified to a basic feasible solution, then simplex pivots polish it to
    an optimal vertex. If that fails the input is returned with
    ``fallback=True`` and a :class:`SparsifyWarning`.
    """
    c_in = np.asarray(getattr(c1_admm, "values", c1_admm), dtype=float)
    N = len(c_in)
    kept = np.setdiff1d(np.arange(N), np.asarray(eliminated, dtype=int))
    H1r, L1r = H1[:, kept], L1[:, kept]
    S = synthesis_matrix(L1r)
    n = len(kept)
    f = n - L1r.shape[0]
    # columns of H1r S^{-1}: the measurements in terms of (a, w)
    A_ = solve_triangular(S, H1r.T, lower=True, trans="T").T
    aw0 = S @ c_in[kept]
    Ac = compress_constraints(A_)
    bc = Ac @ aw0
    try:
        aw, support = purify(Ac, bc, aw0, f)
        value = np.abs(aw[f:]).sum()
        # standard form with split columns x = x+ - x-
        A_std = np.hstack([Ac, -Ac])
        cost = np.concatenate([np.zeros(f), np.ones(n - f), np.zeros(f), np.ones(n - f)])
        cols = [j if aw[j] >= 0 else j + n for j in support]
        basis = np.asarray(_complete_basis(A_std, cols), dtype=np.int64)
        pivots = 0
        polished = _phase_two_from(A_std, bc, cost, basis, tol, max_pivots) if len(basis) else None
        if polished is not None:
            x, basis_p, pivots = polished
            cand = x[:n] - x[n:]
            if np.abs(cand[f:]).sum() <= value:
                aw, basis, value = cand, basis_p, np.abs(cand[f:]).sum()
    except np.linalg.LinAlgError as exc:
        warnings.warn(f"sparsification failed ({exc}); keeping the ADMM coefficients",
                      SparsifyWarning, stacklevel=2)
        w = L1 @ c_in
        return SparsifyResult(CoefficientVector(c_in, 1), count_knots(w), float(np.abs(w).sum()),
                              True, 0, np.empty(0, dtype=int), np.empty(0, dtype=int))
    c = np.zeros(N)
    c[kept] = solve_triangular(S, aw, lower=True)
    w = aw[f:]
    return SparsifyResult(CoefficientVector(c, 1), count_knots(w), float(value),
                          False, int(pivots), np.asarray(basis), np.arange(Ac.shape[0]))


def sparsify(c1_admm, p, keep_boundary: bool = False) -> SparsifyResult:
    """Sparsify the first component of a solved :class:`~sparse_smooth.solver.CompositeProblem`.

    By default the coordinates fixed by the boundary conditions are released:
    the polynomial they carry can always be handed to the smooth component
    (see :func:`~sparse_smooth.problem.restore_boundary`), and leaving them
    free lets the vertex use one fewer innovation per released coordinate.
    """
    eliminated = p.eliminated[0] if keep_boundary else ()
    return sparsify_coefficients(c1_admm, p.H1, p.L1, eliminated)
