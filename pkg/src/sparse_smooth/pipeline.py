"""End-to-end experiment: ground truth, measurements, the three models, reports.

The three models are the composite sparse-plus-smooth reconstruction and
the two single-component baselines. Regularization weights are either fixed
or chosen by maximizing the SNR against the ground truth over a log grid.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .forward import make_cosine_model
from .grid import basis_matrix
from .problem import build_problem, restore_boundary
from .signals import add_noise, evaluation_grid, make_ground_truth, snr_db
from .solver import (AdmmConfig, CompositeProblem, solve_composite, solve_smooth_only,
                     solve_sparse_only)
from .sparsify import sparsify, sparsify_coefficients

MODELS = ("composite", "sparse_only", "smooth_only")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment.

    ``lambda1``/``lambda2`` are the composite weights; ``lambda_sparse`` and
    ``lambda_smooth`` those of the baselines. With ``search=True`` every
    weight is chosen on the grid with ``grid_per_decade`` points per decade
    over ``[grid_min, grid_max]``.
    """

    T: int = 128
    M: int = 50
    omega_max: float = 100.0
    N0_1: int = 1
    N0_2: int = 2
    K_jumps: int = 5
    sigma1: float = 1.0
    sigma2: float = 10.0
    snr_db: float = 50.0
    lambda1: float = 8e-7
    lambda2: float = 5e-10
    lambda_sparse: float = 1e-9
    lambda_smooth: float = 1e-11
    search: bool = False
    grid_min: float = 1e-12
    grid_max: float = 1e-4
    grid_per_decade: int = 7
    gt_seed: int = 0
    model_seed: int = 0
    noise_seed: int = 0
    models: tuple = MODELS
    oversampling: int = 16
    max_iterations: int = 20000
    tol_abs: float = 1e-10
    tol_rel: float = 1e-8
    alpha: float = 1.5
    workers: int = 1
    output_dir: str = "results"

    def __post_init__(self):
        models = self.models
        if isinstance(models, str):
            models = tuple(m.strip() for m in models.split(",") if m.strip())
        object.__setattr__(self, "models", tuple(models))
        errors = []
        for name in ("T", "M", "N0_1", "N0_2", "oversampling", "grid_per_decade", "workers"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1")
        for name in ("omega_max", "lambda1", "lambda2", "lambda_sparse", "lambda_smooth",
                     "grid_min", "grid_max", "tol_abs", "tol_rel"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be positive")
        if self.M < 2:
            errors.append("M must be >= 2")
        if self.T < 2 or self.T < self.N0_1 + 1 or self.T < self.N0_2 + 1:
            errors.append("T must be at least the filter lengths")
        if self.K_jumps < 0 or self.sigma1 < 0 or self.sigma2 < 0:
            errors.append("K_jumps, sigma1 and sigma2 must be non-negative")
        if self.grid_min > self.grid_max:
            errors.append("grid_min must not exceed grid_max")
        if not 1.0 <= self.alpha <= 1.8:
            errors.append("alpha must lie in [1, 1.8]")
        unknown = [m for m in self.models if m not in MODELS]
        if unknown or not self.models:
            errors.append(f"models must be a non-empty subset of {', '.join(MODELS)}")
        if errors:
            raise ConfigError("; ".join(errors))

    def lambda_grid(self) -> np.ndarray:
        lo, hi = np.log10(self.grid_min), np.log10(self.grid_max)
        count = int(round((hi - lo) * self.grid_per_decade)) + 1
        return np.logspace(lo, hi, count)

    def admm(self) -> AdmmConfig:
        return AdmmConfig(max_iterations=self.max_iterations, tol_abs=self.tol_abs,
                          tol_rel=self.tol_rel, alpha=self.alpha)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["models"] = list(self.models)
        return out


@dataclass
class ModelResult:
    name: str
    lambdas: dict
    snr_db: float
    iterations: int
    converged: bool
    knots: int | None
    sparsify_fallback: bool
    s1: np.ndarray = field(repr=False)
    s2: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {"lambdas": self.lambdas, "snr_db": self.snr_db, "iterations": self.iterations,
                "converged": self.converged, "knots": self.knots,
                "sparsify_fallback": self.sparsify_fallback}


class Experiment:
    """Everything that stays fixed while the regularization weights vary."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.model = make_cosine_model(cfg.M, cfg.omega_max, cfg.model_seed)
        self.setup = build_problem(cfg.T, cfg.N0_1, cfg.N0_2, self.model)
        h_fine = 1.0 / (cfg.oversampling * cfg.T)
        self.truth = make_ground_truth(cfg.K_jumps, cfg.sigma1, cfg.N0_1, cfg.sigma2, cfg.N0_2,
                                       h_fine, cfg.gt_seed)
        self.data = add_noise(self.truth.measure(self.model), cfg.snr_db, cfg.noise_seed)
        self.t = evaluation_grid(cfg.T, cfg.oversampling)
        self.reference = self.truth(self.t)
        r = self.setup.ranges
        self.B1 = basis_matrix(self.setup.basis1, r.m1, r.N1, self.setup.grid, self.t)
        self.B2 = basis_matrix(self.setup.basis2, r.m2, r.N2, self.setup.grid, self.t)

    def evaluate(self, name: str, lam1: float, lam2: float | None = None) -> ModelResult:
        """Solve one model at fixed weights and score it against the ground truth."""
        S, y, admm = self.setup, self.data.y, self.cfg.admm()
        zeros = np.zeros_like(self.t)
        if name == "composite":
            problem = CompositeProblem.from_setup(S, y, lam1, lam2)
            rep = solve_composite(problem, admm)
            sp = sparsify(rep.c1, problem)
            c1, c2 = restore_boundary(S, sp.c1, rep.c2)
            s1, s2 = self.B1 @ c1, self.B2 @ c2
            lambdas = {"lambda1": lam1, "lambda2": lam2}
            return ModelResult(name, lambdas, snr_db(self.reference, s1 + s2), rep.iterations,
                               rep.converged, sp.knots, sp.fallback, s1, s2)
        if name == "sparse_only":
            rep = solve_sparse_only(S.H1, S.L1, y, lam1, admm)
            sp = sparsify_coefficients(rep.c1, S.H1, S.L1)
            s1 = self.B1 @ sp.c1.values
            return ModelResult(name, {"lambda": lam1}, snr_db(self.reference, s1), rep.iterations,
                               rep.converged, sp.knots, sp.fallback, s1, zeros)
        if name == "smooth_only":
            c2 = solve_smooth_only(S.H2, S.L2, y, lam1)
            s2 = self.B2 @ c2.values
            return ModelResult(name, {"lambda": lam1}, snr_db(self.reference, s2), 0, True, None,
                               False, zeros, s2)
        raise ConfigError(f"unknown model {name!r}")


def _cells(name: str, grid1, grid2):
    if name == "composite":
        return [(float(a), float(b)) for a in grid1 for b in grid2]
    return [(float(a), None) for a in grid1]


def _evaluate_cell(args):
    cfg, name, lam1, lam2 = args
    return _worker_experiment(cfg).evaluate(name, lam1, lam2).snr_db


_WORKER_CACHE: dict = {}


def _worker_experiment(cfg: ExperimentConfig) -> Experiment:
    if cfg not in _WORKER_CACHE:
        _WORKER_CACHE.clear()
        _WORKER_CACHE[cfg] = Experiment(cfg)
    return _WORKER_CACHE[cfg]


def grid_search(cfg: ExperimentConfig, name: str = "composite", grid1=None, grid2=None,
                experiment: Experiment | None = None):
    """Exhaustive search of the weights that maximize the ground-truth SNR.

    ``grid1`` holds the weight of the l1 term (or the only weight of a
    baseline), ``grid2`` that of the quadratic term of the composite model;
    both default to :meth:`ExperimentConfig.lambda_grid`. Ties go to the
    larger weights. Returns ``(lam1, lam2, snr)`` with ``lam2=None`` for a
    baseline.
    """
    grid1 = cfg.lambda_grid() if grid1 is None else np.atleast_1d(grid1)
    grid2 = cfg.lambda_grid() if grid2 is None else np.atleast_1d(grid2)
    cells = _cells(name, grid1, grid2)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            snrs = list(pool.map(_evaluate_cell, [(cfg, name, a, b) for a, b in cells],
                                 chunksize=max(1, len(cells) // (4 * cfg.workers))))
    else:
        exp = experiment or Experiment(cfg)
        snrs = [exp.evaluate(name, a, b).snr_db for a, b in cells]
    best = max(range(len(cells)), key=lambda i: (snrs[i], cells[i][0], cells[i][1] or 0.0))
    lam1, lam2 = cells[best]
    return lam1, lam2, snrs[best]


@dataclass
class RunReport:
    config: dict
    results: dict
    wall_time: float
    backend: str = kernels.BACKEND

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.results.values())

    def to_json(self) -> dict:
        cfg = self.config
        return {
            "config": cfg,
            "seeds": {"gt_seed": cfg["gt_seed"], "model_seed": cfg["model_seed"],
                      "noise_seed": cfg["noise_seed"]},
            "models": {name: r.summary() for name, r in self.results.items()},
            "backend": self.backend,
            "wall_time": self.wall_time,
        }


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> RunReport:
    """Run every requested model, optionally with grid-searched weights, and write outputs."""
    start = time.perf_counter()
    exp = Experiment(cfg)
    results = {}
    for name in MODELS:
        if name not in cfg.models:
            continue
        if cfg.search:
            lam1, lam2, _ = grid_search(cfg, name, experiment=exp)
        elif name == "composite":
            lam1, lam2 = cfg.lambda1, cfg.lambda2
        elif name == "sparse_only":
            lam1, lam2 = cfg.lambda_sparse, None
        else:
            lam1, lam2 = cfg.lambda_smooth, None
        results[name] = exp.evaluate(name, lam1, lam2)
    report = RunReport(cfg.to_dict(), results, time.perf_counter() - start)
    if write:
        write_outputs(report, exp, Path(cfg.output_dir))
    return report


def _write_signals(path: Path, t, s_gt, s1, s2) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "s_gt", "s1", "s2", "s_total"])
        for row in zip(t, s_gt, s1, s2, s1 + s2):
            writer.writerow([f"{v:.12g}" for v in row])


def write_outputs(report: RunReport, exp: Experiment, out: Path) -> None:
    """``report.json``, ``signals.csv`` for the first model and one CSV per model."""
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for i, (name, r) in enumerate(report.results.items()):
        _write_signals(out / f"signals_{name}.csv", exp.t, exp.reference, r.s1, r.s2)
        if i == 0:
            _write_signals(out / "signals.csv", exp.t, exp.reference, r.s1, r.s2)
