"""Digital filters and polynomial B-splines for derivative operators ``D^N``.

Everything here works on the integer grid. A :class:`DigitalFilter` is a
finite sequence with an integer offset, a :class:`PiecewisePoly` a function
with integer breakpoints whose pieces are stored in local coordinates
(``x - breaks[i]``) so that high-degree pieces do not suffer from
cancellation far from the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np


@dataclass(frozen=True)
class DigitalFilter:
    """Finite real sequence; tap ``j`` sits at index ``offset + j``."""

    taps: tuple
    offset: int = 0

    def __post_init__(self):
        taps = tuple(float(t) for t in np.ravel(self.taps))
        if not taps:
            raise ValueError("a filter needs at least one tap")
        lo, hi = 0, len(taps)
        while lo < hi and taps[lo] == 0.0:
            lo += 1
        while hi > lo and taps[hi - 1] == 0.0:
            hi -= 1
        if lo == hi:
            raise ValueError("the zero filter has no canonical form")
        object.__setattr__(self, "taps", taps[lo:hi])
        object.__setattr__(self, "offset", int(self.offset) + lo)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.taps)

    @property
    def first(self) -> int:
        return self.offset

    @property
    def last(self) -> int:
        return self.offset + len(self.taps) - 1

    def __len__(self) -> int:
        return len(self.taps)

    def __getitem__(self, k: int) -> float:
        j = k - self.offset
        if 0 <= j < len(self.taps):
            return self.taps[j]
        return 0.0

    def convolve(self, other: "DigitalFilter") -> "DigitalFilter":
        return DigitalFilter(np.convolve(self.array, other.array), self.offset + other.offset)

    def reversed(self) -> "DigitalFilter":
        """The filter ``k -> a[-k]``."""
        return DigitalFilter(self.array[::-1], -self.last)

    def restricted(self, lo: int, hi: int) -> "DigitalFilter":
        """Keep only the taps with index in ``[lo, hi]``."""
        vals = [self[k] for k in range(lo, hi + 1)]
        return DigitalFilter(vals, lo)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Dense copy of the taps with index in ``[lo, hi]``."""
        return np.array([self[k] for k in range(lo, hi + 1)])

    def allclose(self, other: "DigitalFilter", atol: float = 1e-10) -> bool:
        lo = min(self.first, other.first)
        hi = max(self.last, other.last)
        return bool(np.allclose(self.window(lo, hi), other.window(lo, hi), rtol=0.0, atol=atol))


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on integer breakpoints, zero outside its support.

    ``pieces[i]`` holds ascending-power coefficients of the polynomial on
    ``[breaks[i], breaks[i+1])`` in the local variable ``x - breaks[i]``.
    """

    breaks: tuple
    pieces: np.ndarray

    def __post_init__(self):
        breaks = tuple(int(b) for b in self.breaks)
        pieces = np.atleast_2d(np.asarray(self.pieces, dtype=float))
        if len(breaks) < 2 or any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
            raise ValueError("breaks must be strictly increasing with at least two entries")
        if pieces.shape[0] != len(breaks) - 1:
            raise ValueError("need exactly one polynomial per interval")
        pieces.setflags(write=False)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "pieces", pieces)

    @property
    def support(self) -> tuple[int, int]:
        return self.breaks[0], self.breaks[-1]

    @property
    def degree(self) -> int:
        return self.pieces.shape[1] - 1

    def _locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(np.asarray(self.breaks), x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.breaks) - 1)
        return idx, inside

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx, inside = self._locate(x)
        out = np.zeros_like(x)
        if not np.any(inside):
            return out
        i = idx[inside]
        u = x[inside] - np.asarray(self.breaks)[i]
        coeffs = self.pieces[i]
        acc = coeffs[:, -1].copy()
        for p in range(self.degree - 1, -1, -1):
            acc = acc * u + coeffs[:, p]
        out[inside] = acc
        return out

    def derivative(self, order: int = 1) -> "PiecewisePoly":
        pieces = self.pieces
        for _ in range(order):
            if pieces.shape[1] == 1:
                pieces = np.zeros_like(pieces)
            else:
                pieces = pieces[:, 1:] * np.arange(1, pieces.shape[1])
        return PiecewisePoly(self.breaks, pieces)

    def integral(self) -> float:
        """Integral over the whole support."""
        widths = np.diff(self.breaks).astype(float)
        total = 0.0
        for w, c in zip(widths, self.pieces):
            powers = np.arange(1, len(c) + 1)
            total += float(np.sum(c * w**powers / powers))
        return total

    def shifted(self, shift: int) -> "PiecewisePoly":
        return PiecewisePoly(tuple(b + shift for b in self.breaks), self.pieces)

    def jumps(self, order: int) -> np.ndarray:
        """Jump of the ``order``-th derivative at every breakpoint (right minus left)."""
        d = self.derivative(order)
        widths = np.diff(self.breaks)
        left_vals = [0.0]
        for w, c in zip(widths, d.pieces):
            left_vals.append(float(np.polynomial.polynomial.polyval(w, c)))
        right_vals = [float(c[0]) for c in d.pieces] + [0.0]
        return np.array(right_vals) - np.array(left_vals)


def fd_filter(order: int) -> DigitalFilter:
    """Finite-difference filter of ``D^order``: z-transform ``(1 - z^-1)^order``."""
    if order < 1:
        raise ValueError(f"operator order must be >= 1, got {order}")
    return DigitalFilter([(-1) ** j * comb(order, j) for j in range(order + 1)], 0)


def _causal_bspline_pieces(order: int) -> list[list[Fraction]]:
    # beta(x) = sum_j (-1)^j C(N, j) (x - j)_+^{N-1} / (N-1)!, expanded on [i, i+1] in u = x - i
    deg = order - 1
    norm = Fraction(1, factorial(deg))
    pieces = []
    for i in range(order):
        coeffs = [Fraction(0)] * (deg + 1)
        for j in range(i + 1):
            w = (-1) ** j * comb(order, j) * norm
            shift = i - j
            for p in range(deg + 1):
                coeffs[p] += w * comb(deg, p) * Fraction(shift) ** (deg - p)
        pieces.append(coeffs)
    return pieces


def bspline(order: int, centering: str = "causal") -> PiecewisePoly:
    """Polynomial B-spline of ``D^order``.

    ``centering="causal"`` gives the B-spline supported on ``[0, order]``.
    ``centering="centered_for_LstarL"`` gives the B-spline of ``L* L``, that is
    ``beta_L * beta_L^v``, which is the causal spline of order ``2*order``
    shifted to ``[-order, order]``.
    """
    if order < 1:
        raise ValueError(f"operator order must be >= 1, got {order}")
    if centering == "causal":
        pieces = _causal_bspline_pieces(order)
        return PiecewisePoly(tuple(range(order + 1)), np.array(pieces, dtype=float))
    if centering == "centered_for_LstarL":
        pieces = _causal_bspline_pieces(2 * order)
        return PiecewisePoly(tuple(range(-order, order + 1)), np.array(pieces, dtype=float))
    raise ValueError(f"unknown centering {centering!r}")


def greens_function(order: int, window: tuple[int, int] = (-1, 1)) -> PiecewisePoly:
    """One-sided power ``x_+^{order-1} / (order-1)!`` on the integer window ``[lo, hi]``."""
    if order < 1:
        raise ValueError(f"operator order must be >= 1, got {order}")
    lo, hi = window
    if hi <= max(lo, 0):
        raise ValueError("window must extend to the right of 0")
    mono = np.zeros(order)
    mono[-1] = 1.0 / factorial(order - 1)
    if lo >= 0:
        # re-expand x^{N-1} around lo
        coeffs = [comb(order - 1, p) * lo ** (order - 1 - p) / factorial(order - 1) for p in range(order)]
        return PiecewisePoly((lo, hi), np.array([coeffs]))
    return PiecewisePoly((lo, 0, hi), np.vstack([np.zeros(order), mono]))


def sampled_kernel(order2: int) -> DigitalFilter:
    """Integer samples ``b[k] = beta_{L*L}(k)`` of the centred ``L*L`` B-spline."""
    beta = bspline(order2, "centered_for_LstarL")
    half = order2 - 1
    ks = np.arange(-half, half + 1)
    return DigitalFilter(beta(ks.astype(float)), -half)


def spectral_factor(b: DigitalFilter, tol: float = 1e-8) -> DigitalFilter:
    """Causal ``b_half`` with ``b = b_half * b_half^v``.

    The zeros of ``z^{B-1} B(z)`` come in pairs ``(z, 1/z)``; the factor keeps
    the member of each pair outside the unit circle, so its leading tap is the
    smallest one (this reproduces ``C [1, 2 + sqrt(3)]`` for the cubic kernel).
    """
    taps = b.array
    if b.first != -b.last or not np.allclose(taps, taps[::-1], rtol=0, atol=1e-14 * np.max(np.abs(taps))):
        raise ValueError("spectral factorisation needs a symmetric filter")
    nb = b.last + 1
    if nb == 1:
        if taps[0] <= 0:
            raise ValueError("a length-one filter must be positive to be factorised")
        return DigitalFilter([np.sqrt(taps[0])], 0)
    roots = np.roots(taps)
    if np.any(np.abs(np.abs(roots) - 1.0) < tol):
        raise ValueError("filter has zeros on the unit circle; it has no spectral factor")
    outer = roots[np.abs(roots) > 1.0]
    if len(outer) != nb - 1:
        raise ValueError("zeros of the filter do not pair up as (z, 1/z)")
    monic = np.real(np.poly(outer))
    # b[B-1] = b_half[0] * b_half[B-1] fixes the scale
    scale2 = b[nb - 1] / monic[-1]
    if scale2 <= 0:
        raise ValueError("filter is not positive semidefinite")
    return DigitalFilter(np.sqrt(scale2) * monic, 0)


def autocorrelation(order2: int) -> tuple[DigitalFilter, DigitalFilter]:
    """Autocorrelation filter ``rho`` and its causal root ``g = b_half * d``."""
    d = fd_filter(order2)
    b = sampled_kernel(order2)
    rho = d.convolve(d.reversed()).convolve(b)
    g = spectral_factor(b).convolve(d)
    return rho, g


def filter_table(order1: int, order2: int) -> dict[str, DigitalFilter]:
    """All filters relevant to a pair of operator orders, keyed by name."""
    b = sampled_kernel(order2)
    b_half = spectral_factor(b)
    rho, g = autocorrelation(order2)
    return {
        "d1": fd_filter(order1),
        "d2": fd_filter(order2),
        "rho": rho,
        "g": g,
        "b": b,
        "b_half": b_half,
    }
