"""ADMM for the composite problem and the two single-component baselines.

The composite objective is

    J(c1, c2) = 1/2 ||H1 c1 + H2 c2 - y||^2 + lam1 ||L1 c1||_1 + lam2 ||L2 c2||^2.

ADMM splits ``z = L1 c1``. The joint update over ``(c1, c2)`` is a single
linear system whose matrix does not change across iterations, so it is
factored once. Eliminating the ``(c1, c2)`` update entirely leaves an
iteration on ``(z, u)`` only: ``L1 c1 = v0 + W (z - u)``, which is what the
inner kernel runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import kernels
from .grid import CoefficientVector
from .problem import ProblemSetup


class IllPosedError(ValueError):
    """The normal matrix is singular: the configuration has no unique ``(c1, c2)`` update."""


@dataclass(frozen=True)
class AdmmConfig:
    """ADMM parameters. ``mu=None`` sets the penalty equal to ``lam1``.

    ``init_seed=None`` starts from ``z = u = 0``; an integer draws a random
    start of scale ``init_scale``.
    """

    mu: float | None = None
    max_iterations: int = 20000
    tol_abs: float = 1e-10
    tol_rel: float = 1e-8
    alpha: float = 1.5
    init_seed: int | None = None
    init_scale: float = 1.0

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0:
            raise ValueError("ADMM penalty must be positive")
        if not 1.0 <= self.alpha <= 1.8:
            raise ValueError("over-relaxation must lie in [1, 1.8]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if not (self.tol_abs > 0 and self.tol_rel > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class CompositeProblem:
    """Data of the finite problem. ``eliminated`` lists coordinates fixed to 0 per component."""

    H1: np.ndarray
    H2: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    y: np.ndarray
    lam1: float
    lam2: float
    eliminated: tuple = ((), ())

    def __post_init__(self):
        M = len(self.y)
        if self.H1.shape[0] != M or self.H2.shape[0] != M:
            raise ValueError("system matrices and data disagree on M")
        if self.L1.shape[1] != self.H1.shape[1] or self.L2.shape[1] != self.H2.shape[1]:
            raise ValueError("regularization and system matrices disagree on N")
        if not (self.lam1 > 0 and self.lam2 > 0):
            raise ValueError("regularization weights must be positive")

    @classmethod
    def from_setup(cls, setup: ProblemSetup, y, lam1: float, lam2: float) -> "CompositeProblem":
        return cls(setup.H1, setup.H2, setup.L1, setup.L2, np.asarray(y, dtype=float),
                   float(lam1), float(lam2), setup.eliminated)

    def kept(self, component: int) -> np.ndarray:
        n = self.H1.shape[1] if component == 1 else self.H2.shape[1]
        return np.setdiff1d(np.arange(n), np.asarray(self.eliminated[component - 1], dtype=int))

    def objective(self, c1, c2) -> float:
        r = self.H1 @ c1 + self.H2 @ c2 - self.y
        return float(0.5 * r @ r + self.lam1 * np.abs(self.L1 @ c1).sum()
                     + self.lam2 * np.sum((self.L2 @ c2) ** 2))


@dataclass
class SolverReport:
    """Result of an ADMM solve.

    ``z`` is the sparse split variable (the thresholded ``L1 c1``) and
    ``dual`` the unscaled multiplier ``mu * u``.
    """

    c1: CoefficientVector
    c2: CoefficientVector | None
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    z: np.ndarray = field(repr=False, default=None)
    dual: np.ndarray = field(repr=False, default=None)
    trace: np.ndarray | None = field(repr=False, default=None)


_ILL_POSED = ("normal matrix is singular; "
              "check that the measurements see the regularizers' null spaces")


def _factor(Q: np.ndarray):
    try:
        fac = cho_factor(Q, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise IllPosedError(_ILL_POSED) from exc
    # rounding can let an exactly singular matrix through with a tiny pivot
    pivots = np.diag(fac[0]) ** 2
    if pivots.min() <= len(Q) * np.finfo(float).eps * np.abs(np.diag(Q)).max():
        raise IllPosedError(_ILL_POSED)
    return fac


def _admm(H: np.ndarray, L1: np.ndarray, n1: int, R: np.ndarray, y: np.ndarray, lam1: float,
          cfg: AdmmConfig, objective, track: bool):
    """ADMM over ``x = [c1; c2]`` where only ``c1 = x[:n1]`` enters the l1 term.

    ``R`` is the quadratic penalty block on ``c2`` (``2 lam2 L2^T L2``).
    Returns ``(x, z, u, iterations, r_norm, s_norm, converged, trace)``.
    """
    mu = lam1 if cfg.mu is None else cfg.mu
    n = H.shape[1]
    Q = H.T @ H
    Q[:n1, :n1] += mu * (L1.T @ L1)
    Q[n1:, n1:] += R
    fac = _factor(Q)
    Hty = H.T @ y
    E1 = np.zeros((n, L1.shape[0]))
    E1[:n1] = L1.T
    G = cho_solve(fac, E1)  # Q^{-1} [L1^T; 0]
    W = mu * (L1 @ G[:n1])
    W = 0.5 * (W + W.T)
    v0 = L1 @ cho_solve(fac, Hty)[:n1]
    Lt = np.ascontiguousarray(L1.T)
    p = L1.shape[0]
    if cfg.init_seed is None:
        z = np.zeros(p)
        u = np.zeros(p)
    else:
        rng = np.random.default_rng(cfg.init_seed)
        z = cfg.init_scale * rng.standard_normal(p)
        u = cfg.init_scale * rng.standard_normal(p)

    def recover(z, u):
        return cho_solve(fac, Hty) + mu * (G @ (z - u))

    trace = None
    if track:
        values = []
        it = 0
        r_norm = s_norm = np.inf
        converged = False
        while it < cfg.max_iterations and not converged:
            values.append(objective(recover(z, u)))
            _, r_norm, s_norm, converged = kernels.admm_l1_loop(
                W, v0, Lt, mu, lam1, cfg.alpha, cfg.tol_abs, cfg.tol_rel, 1, z, u)
            it += 1
        trace = np.asarray(values)
    else:
        it, r_norm, s_norm, converged = kernels.admm_l1_loop(
            W, v0, Lt, mu, lam1, cfg.alpha, cfg.tol_abs, cfg.tol_rel, cfg.max_iterations, z, u)
    x = recover(z, u)
    return x, z, mu * u, int(it), float(r_norm), float(s_norm), bool(converged), trace


def _scatter(values: np.ndarray, kept: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[kept] = values
    return out


def solve_composite(p: CompositeProblem, cfg: AdmmConfig = AdmmConfig(), *,
                    track_objective: bool = False) -> SolverReport:
    """Minimize the composite objective by ADMM.

    Raises
    ------
    IllPosedError
        If the joint normal matrix is singular after the boundary elimination.
    """
    k1, k2 = p.kept(1), p.kept(2)
    N1, N2 = p.H1.shape[1], p.H2.shape[1]
    H = np.hstack([p.H1[:, k1], p.H2[:, k2]])
    L1r = p.L1[:, k1]
    L2r = p.L2[:, k2]
    R = 2.0 * p.lam2 * (L2r.T @ L2r)
    n1 = len(k1)

    def objective(x):
        return p.objective(_scatter(x[:n1], k1, N1), _scatter(x[n1:], k2, N2))

    x, z, dual, it, r, s, ok, trace = _admm(H, L1r, n1, R, p.y, p.lam1, cfg, objective,
                                             track_objective)
    c1 = _scatter(x[:n1], k1, N1)
    c2 = _scatter(x[n1:], k2, N2)
    return SolverReport(CoefficientVector(c1, 1), CoefficientVector(c2, 2), p.objective(c1, c2),
                        it, r, s, ok, z, dual, trace)


def solve_sparse_only(H1: np.ndarray, L1: np.ndarray, y, lam: float,
                      cfg: AdmmConfig = AdmmConfig()) -> SolverReport:
    """Minimize ``1/2 ||H1 c - y||^2 + lam ||L1 c||_1`` over all active coefficients."""
    if not lam > 0:
        raise ValueError("regularization weight must be positive")
    y = np.asarray(y, dtype=float)
    n1 = H1.shape[1]

    def objective(c):
        r = H1 @ c - y
        return float(0.5 * r @ r + lam * np.abs(L1 @ c).sum())

    x, z, dual, it, r, s, ok, _ = _admm(H1, L1, n1, np.zeros((0, 0)), y, lam, cfg, objective,
                                         False)
    return SolverReport(CoefficientVector(x, 1), None, objective(x), it, r, s, ok, z, dual)


def solve_smooth_only(H2: np.ndarray, L2: np.ndarray, y, lam: float) -> CoefficientVector:
    """Closed-form minimizer of ``1/2 ||H2 c - y||^2 + lam ||L2 c||^2``."""
    if not lam > 0:
        raise ValueError("regularization weight must be positive")
    Q = H2.T @ H2 + 2.0 * lam * (L2.T @ L2)
    c = cho_solve(_factor(Q), H2.T @ np.asarray(y, dtype=float))
    return CoefficientVector(c, 2)
