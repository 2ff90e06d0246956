"""Regularization matrices ``L1``, ``L2`` and the boundary-condition selector.

``L1 c1`` lists the innovation weights ``(d * c1)[n]`` at the interior knots
``n = 1..T-1``. ``L2`` satisfies ``||L2 c2||^2 = <c2, rho * c2>`` for the
unique extension of ``c2`` with ``d * c2`` supported in ``[1, M2]``. Its first
and last ``B - 1`` rows come from truncated copies of ``b_half``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import DigitalFilter, autocorrelation, fd_filter, sampled_kernel, spectral_factor


def _row_from_filter(f: DigitalFilter, n: int, first: int, count: int) -> np.ndarray:
    # (f * c)[n] = sum_j f[j] c[n - j]; c[k] lives in column k - first
    row = np.zeros(count)
    for j in range(f.first, f.last + 1):
        col = n - j - first
        if f[j] != 0.0:
            if not 0 <= col < count:
                raise ValueError("filter row reaches outside the active coefficients")
            row[col] += f[j]
    return row


def banded_toeplitz(taps, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` matrix whose row ``r`` holds ``taps`` reversed, starting at column ``r``."""
    taps = np.asarray(taps, dtype=float)
    width = len(taps)
    if cols != rows + width - 1:
        raise ValueError("banded Toeplitz shape mismatch")
    out = np.zeros((rows, cols))
    band = taps[::-1]
    for r in range(rows):
        out[r, r:r + width] = band
    return out


def assemble_L1(d1: DigitalFilter, N1: int) -> np.ndarray:
    """``(N1 - D1 + 1) x N1`` banded matrix with rows ``d[D1-1], ..., d[0]``."""
    D1 = len(d1)
    if N1 < D1:
        raise ValueError(f"N1={N1} is shorter than the filter length {D1}")
    return banded_toeplitz(d1.array, N1 - D1 + 1, N1)


@dataclass(frozen=True)
class RegMatrixL2:
    """``L2`` stacked as ``[M_minus; M; M_plus]``."""

    M_minus: np.ndarray
    M: np.ndarray
    M_plus: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.M_minus, self.M, self.M_plus])


def l2_blocks(order2: int, N2: int) -> RegMatrixL2:
    d = fd_filter(order2)
    b_half = spectral_factor(sampled_kernel(order2))
    _, g = autocorrelation(order2)
    D2 = order2 + 1
    B = len(b_half)
    G = len(g)
    if N2 < G:
        raise ValueError(f"N2={N2} is shorter than the filter length G={G}")
    m2 = 2 - D2
    M2 = N2 + m2 - 1
    central = banded_toeplitz(g.array, N2 - G + 1, N2)
    minus = np.zeros((B - 1, N2))
    plus = np.zeros((B - 1, N2))
    for i in range(1, B):
        # row n = i keeps b_half[0 .. i-1]; row n = M2 + i keeps b_half[i .. B-1]
        head = b_half.restricted(0, i - 1).convolve(d)
        minus[i - 1] = _row_from_filter(head, i, m2, N2)
        tail = b_half.restricted(i, B - 1).convolve(d)
        plus[i - 1] = _row_from_filter(tail, M2 + i, m2, N2)
    return RegMatrixL2(minus, central, plus)


def assemble_L2(order2: int, N2: int) -> np.ndarray:
    """``(N2 - 1) x N2`` regularization matrix of the smooth component."""
    return l2_blocks(order2, N2).matrix


def l2_blocks_from_indices(order2: int, N2: int) -> RegMatrixL2:
    """Same blocks, filled from the closed-form index formulas of the corner blocks.

    Kept as an independent cross-check of :func:`l2_blocks`.
    """
    d = fd_filter(order2)
    b_half = spectral_factor(sampled_kernel(order2))
    _, g = autocorrelation(order2)
    B, G = len(b_half), len(g)
    central = banded_toeplitz(g.array, N2 - G + 1, N2)
    minus = np.zeros((B - 1, N2))
    plus = np.zeros((B - 1, N2))
    for i in range(1, B):
        g_minus = b_half.restricted(0, B - 1 - (B - i)).convolve(d)
        g_plus = b_half.restricted(i, B - 1).convolve(d)
        for j in range(1, G):
            minus[i - 1, j - 1] = g_minus[G - B + (i - 1) - (j - 1)]
            plus[i - 1, N2 - (G - 1) + j - 1] = g_plus[G + (i - 1) - j]
    return RegMatrixL2(minus, central, plus)


@dataclass(frozen=True)
class BoundaryMatrix:
    """Selector ``A`` zeroing the first ``N0`` coefficients of one component."""

    N0: int
    component: int
    size: int

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.N0, self.size)

    @property
    def eliminated(self) -> np.ndarray:
        return np.arange(self.N0)


def assemble_boundary(order1: int, order2: int, N1: int, N2: int) -> BoundaryMatrix:
    """Boundary conditions on the component whose null space is the intersection.

    ``N0 = min(order1, order2)``; the constraint sits on component 1 unless
    ``order1 > order2``.
    """
    N0 = min(order1, order2)
    if order1 <= order2:
        return BoundaryMatrix(N0, 1, N1)
    return BoundaryMatrix(N0, 2, N2)
