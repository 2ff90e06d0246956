"""Assembly of the finite composite problem on ``[0, 1]``.

Basis functions are ``beta(t / h - k)`` with ``h = 1 / T``. The integer-grid
regularization matrices are rescaled so that ``||L1 c1||_1`` is the total
variation of ``D^N1 s1`` and ``||L2 c2||_2^2`` is ``int (D^N2 s2)^2`` on the
unit interval. Regularization weights therefore keep their meaning when
``T`` changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import PiecewisePoly, bspline, fd_filter
from .forward import MeasurementFunctional, assemble_system_matrix
from .grid import GridSpec, IndexRanges, basis_matrix, index_ranges
from .regularization import BoundaryMatrix, assemble_boundary, assemble_L1, assemble_L2


@dataclass(frozen=True)
class ProblemSetup:
    """Everything about the discretization that does not depend on the data."""

    grid: GridSpec
    order1: int
    order2: int
    ranges: IndexRanges
    basis1: PiecewisePoly
    basis2: PiecewisePoly
    model: tuple
    H1: np.ndarray
    H2: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    boundary: BoundaryMatrix

    @property
    def M(self) -> int:
        return len(self.model)

    @property
    def eliminated(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Indices (within each coefficient vector) fixed to zero by the boundary conditions."""
        idx = tuple(int(i) for i in self.boundary.eliminated)
        return (idx, ()) if self.boundary.component == 1 else ((), idx)


def l1_scale(order1: int, h: float) -> float:
    return h ** (1 - order1)


def l2_scale(order2: int, h: float) -> float:
    return h ** ((1 - 2 * order2) / 2)


def build_problem(T: int, order1: int, order2: int,
                  model: list[MeasurementFunctional]) -> ProblemSetup:
    """Assemble bases, system matrices, regularization matrices and boundary conditions."""
    grid = GridSpec(T)
    d1 = fd_filter(order1)
    ranges = index_ranges(grid, order1 + 1, order2 + 1)
    basis1 = bspline(order1, "causal")
    basis2 = bspline(order2, "centered_for_LstarL")
    H1 = assemble_system_matrix(model, basis1, ranges, grid, 1)
    H2 = assemble_system_matrix(model, basis2, ranges, grid, 2)
    L1 = l1_scale(order1, grid.h) * assemble_L1(d1, ranges.N1)
    L2 = l2_scale(order2, grid.h) * assemble_L2(order2, ranges.N2)
    boundary = assemble_boundary(order1, order2, ranges.N1, ranges.N2)
    return ProblemSetup(grid, order1, order2, ranges, basis1, basis2, tuple(model),
                        H1, H2, L1, L2, boundary)


def restore_boundary(setup: ProblemSetup, c1, c2) -> tuple[np.ndarray, np.ndarray]:
    """Move the null-space part of ``c1`` into ``c2`` so that the boundary conditions hold again.

    The sum ``s1 + s2``, the innovations ``L1 c1`` and ``||L2 c2||`` are
    unchanged: the part moved is a polynomial of degree below ``order1``,
    which ``L2`` also annihilates. Only needed when the conditions sit on the
    first component; otherwise the inputs are returned as they are.
    """
    c1 = np.array(getattr(c1, "values", c1), dtype=float)
    c2 = np.array(getattr(c2, "values", c2), dtype=float)
    elim = np.asarray(setup.eliminated[0], dtype=int)
    if elim.size == 0 or not np.any(c1[elim]):
        return c1, c2
    N0 = elim.size
    r = setup.ranges
    # L1 annihilates exactly the polynomial coefficient sequences of degree < order1
    k1 = np.arange(r.N1, dtype=float) / r.N1
    P1 = np.vander(k1, N0, increasing=True)
    shift1 = P1 @ np.linalg.solve(P1[elim], c1[elim])
    # the same polynomial in the second basis, fitted through enough points to be exact
    t = 0.5 - 0.5 * np.cos(np.pi * (np.arange(4 * N0 + 4) + 0.5) / (4 * N0 + 4))
    B1 = basis_matrix(setup.basis1, r.m1, r.N1, setup.grid, t)
    B2 = basis_matrix(setup.basis2, r.m2, r.N2, setup.grid, t)
    P2 = np.vander(np.arange(r.N2, dtype=float) / r.N2, N0, increasing=True)
    coef, *_ = np.linalg.lstsq(B2 @ P2, B1 @ shift1, rcond=None)
    c1 = c1 - shift1
    c1[elim] = 0.0
    return c1, c2 + P2 @ coef
