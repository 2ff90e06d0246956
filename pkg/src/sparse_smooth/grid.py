"""Index bookkeeping on the rescaled grid and evaluation of spline expansions.

The problem lives on ``[0, 1]`` with knots at ``k * h``, ``h = 1 / T``. A
basis function of index ``k`` is ``beta(t / h - k)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import PiecewisePoly


@dataclass(frozen=True)
class GridSpec:
    T: int

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 2:
            raise ValueError(f"grid length T must be an integer >= 2, got {self.T}")

    @property
    def h(self) -> float:
        return 1.0 / self.T


@dataclass(frozen=True)
class IndexRanges:
    m1: int
    M1: int
    m2: int
    M2: int

    @property
    def N1(self) -> int:
        return self.M1 - self.m1 + 1

    @property
    def N2(self) -> int:
        return self.M2 - self.m2 + 1

    def bounds(self, component: int) -> tuple[int, int]:
        return (self.m1, self.M1) if component == 1 else (self.m2, self.M2)

    def count(self, component: int) -> int:
        return self.N1 if component == 1 else self.N2


@dataclass(frozen=True)
class CoefficientVector:
    values: np.ndarray
    component: int

    def __post_init__(self):
        if self.component not in (1, 2):
            raise ValueError("component must be 1 or 2")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)


def index_ranges(grid: GridSpec, D1: int, D2: int) -> IndexRanges:
    """Active index ranges for causal ``beta_{L1}`` and centred ``beta_{L2* L2}``.

    ``N_i`` counts every integer in ``[m_i, M_i]``.
    """
    if grid.T < D1 or grid.T < D2:
        raise ValueError(f"grid T={grid.T} is shorter than a filter support (D1={D1}, D2={D2})")
    return IndexRanges(m1=2 - D1, M1=grid.T - 1, m2=2 - D2, M2=grid.T + D2 - 2)


def active_range(basis: PiecewisePoly, grid: GridSpec) -> tuple[int, int]:
    """Indices ``k`` whose shifted basis ``beta(. - k)`` meets the open interval ``(0, T)``."""
    lo, hi = basis.support
    return 1 - hi, grid.T - 1 - lo


def basis_matrix(basis: PiecewisePoly, first: int, count: int, grid: GridSpec, t) -> np.ndarray:
    """Matrix ``B[j, k] = beta(t_j / h - (first + k))``.

    Only the basis functions overlapping each ``t_j`` are evaluated.
    """
    t = np.asarray(t, dtype=float)
    x = t * grid.T
    lo, hi = basis.support
    out = np.zeros((t.size, count))
    rows = np.arange(t.size)
    # beta(x - k) != 0 requires lo <= x - k < hi
    k_hi = np.floor(x - lo).astype(int)
    for j in range(hi - lo + 1):
        k = k_hi - j
        col = k - first
        ok = (col >= 0) & (col < count)
        if np.any(ok):
            out[rows[ok], col[ok]] += basis(x[ok] - k[ok])
    return out


def evaluate_component(c: CoefficientVector | np.ndarray, ranges: IndexRanges, basis: PiecewisePoly,
                       grid: GridSpec, t, component: int | None = None) -> np.ndarray:
    """Evaluate ``sum_k c[k] beta(t / h - k)`` at the points ``t`` in ``[0, 1]``."""
    if isinstance(c, CoefficientVector):
        component = c.component
        values = c.values
    else:
        values = np.asarray(c, dtype=float)
        if component is None:
            raise ValueError("component is required for a bare array")
    first, _ = ranges.bounds(component)
    if len(values) != ranges.count(component):
        raise ValueError(f"expected {ranges.count(component)} coefficients, got {len(values)}")
    scalar = np.ndim(t) == 0
    B = basis_matrix(basis, first, len(values), grid, np.atleast_1d(t))
    out = B @ values
    return float(out[0]) if scalar else out


@dataclass
class CompositeSolution:
    """Coefficients of both components with their continuous-domain evaluators."""

    c1: CoefficientVector
    c2: CoefficientVector
    ranges: IndexRanges
    basis1: PiecewisePoly
    basis2: PiecewisePoly
    grid: GridSpec

    def s1(self, t) -> np.ndarray:
        return evaluate_component(self.c1, self.ranges, self.basis1, self.grid, t)

    def s2(self, t) -> np.ndarray:
        return evaluate_component(self.c2, self.ranges, self.basis2, self.grid, t)

    def s(self, t) -> np.ndarray:
        return self.s1(t) + self.s2(t)
