"""Measurement functionals and exact system matrices.

Entries ``H[m, k] = nu_m(phi_k)`` are computed piece by piece from the
polynomial pieces of the basis, in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .filters import PiecewisePoly
from .grid import GridSpec, IndexRanges, basis_matrix

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MeasurementFunctional:
    """``kind`` is ``"dc"``, ``"cosine"`` or ``"point"``.

    A DC functional integrates over ``[0, 1]``; a cosine functional integrates
    against ``cos(omega t + theta)`` on ``[0, 1]``; a point functional samples at ``x``.
    """

    kind: str
    omega: float = 0.0
    theta: float = 0.0
    x: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dc", "cosine", "point"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "cosine" and not (self.omega > 0 and 0 <= self.theta < TWO_PI):
            raise ValueError("cosine functional needs omega > 0 and theta in [0, 2 pi)")
        if self.kind == "point" and not 0.0 <= self.x <= 1.0:
            raise ValueError("sampling location must lie in [0, 1]")

    @classmethod
    def dc(cls) -> "MeasurementFunctional":
        return cls("dc")

    @classmethod
    def cosine(cls, omega: float, theta: float) -> "MeasurementFunctional":
        return cls("cosine", omega=float(omega), theta=float(theta))

    @classmethod
    def point(cls, x: float) -> "MeasurementFunctional":
        return cls("point", x=float(x))

    @property
    def pulsation(self) -> tuple[float, float]:
        """``(omega, theta)``; the DC term is the zero-frequency cosine."""
        if self.kind == "dc":
            return 0.0, 0.0
        return self.omega, self.theta


def make_cosine_model(M: int, omega_max: float, rng_seed: int) -> list[MeasurementFunctional]:
    """DC term followed by ``M - 1`` cosines with random pulsation and phase."""
    if M < 2:
        raise ValueError(f"need at least two measurements, got M={M}")
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    rng = np.random.default_rng(rng_seed)
    omegas = omega_max * (1.0 - rng.random(M - 1))  # (0, omega_max]
    thetas = TWO_PI * rng.random(M - 1)  # [0, 2 pi)
    model = [MeasurementFunctional.dc()]
    model += [MeasurementFunctional.cosine(w, th) for w, th in zip(omegas, thetas)]
    return model


def cosine_moments(degree: int, omega: float, theta) -> np.ndarray:
    """``I[..., n] = int_0^1 u^n cos(omega u + theta) du`` for ``n = 0..degree``.

    Uses a power series in ``omega`` when ``|omega| < max(1, degree)`` and
    integration by parts otherwise; both are accurate to rounding.
    """
    theta = np.asarray(theta, dtype=float)
    n = np.arange(degree + 1)
    if abs(omega) < max(1.0, float(degree)):
        # int_0^1 u^n e^{i omega u} du = sum_j (i omega)^j / (j! (n + j + 1))
        acc = np.zeros(degree + 1, dtype=complex)
        term = 1.0 + 0j
        j = 0
        while True:
            contrib = term / (n + j + 1)
            acc += contrib
            if abs(term) < 1e-18 * max(1.0, np.max(np.abs(acc))) and j > 2:
                break
            j += 1
            term *= 1j * omega / j
        phase = np.exp(1j * theta)[..., None]
        return np.real(phase * acc)
    s1, c1 = np.sin(omega + theta), np.cos(omega + theta)
    s0, c0 = np.sin(theta), np.cos(theta)
    cos_m = np.empty(theta.shape + (degree + 1,))
    sin_m = np.empty_like(cos_m)
    cos_m[..., 0] = (s1 - s0) / omega
    sin_m[..., 0] = (c0 - c1) / omega
    for k in range(1, degree + 1):
        # u^k boundary terms vanish at u = 0 for k >= 1
        cos_m[..., k] = s1 / omega - k / omega * sin_m[..., k - 1]
        sin_m[..., k] = -c1 / omega + k / omega * cos_m[..., k - 1]
    return cos_m


def integrate_poly_cosine(coeffs, a: float, b: float, omega: float, theta: float) -> float:
    """Exact ``int_a^b p(t) cos(omega t + theta) dt``.

    ``coeffs`` are ascending-power coefficients of ``p`` in the local variable
    ``t - a``.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if not b > a:
        raise ValueError("need b > a")
    w = b - a
    # p(a + w u) in u
    scaled = coeffs * w ** np.arange(len(coeffs))
    mom = cosine_moments(len(coeffs) - 1, omega * w, omega * a + theta)
    return float(w * np.dot(mom, scaled))


def _cosine_rows(basis: PiecewisePoly, first: int, count: int, grid: GridSpec, omega: float,
                 theta: float) -> np.ndarray:
    h = grid.h
    row = np.zeros(count)
    ks = first + np.arange(count)
    for i, b0 in enumerate(basis.breaks[:-1]):
        starts = ks + b0  # integer left end of this piece for every column
        ok = (starts >= 0) & (starts <= grid.T - 1)
        if not np.any(ok):
            continue
        theta_local = omega * h * starts[ok] + theta
        mom = cosine_moments(basis.degree, omega * h, theta_local)
        row[ok] += h * (mom @ basis.pieces[i])
    return row


def assemble_system_matrix(model: list[MeasurementFunctional], basis: PiecewisePoly,
                           ranges: IndexRanges, grid: GridSpec, component: int) -> np.ndarray:
    """Dense ``M x N_i`` matrix with column ``k`` equal to ``nu(phi_{i,k})``."""
    first, last = ranges.bounds(component)
    count = last - first + 1
    H = np.zeros((len(model), count))
    for m, nu in enumerate(model):
        if nu.kind == "point":
            H[m] = basis_matrix(basis, first, count, grid, np.array([nu.x]))[0]
        else:
            omega, theta = nu.pulsation
            H[m] = _cosine_rows(basis, first, count, grid, omega, theta)
    return H


def measure_piecewise_linear(model: list[MeasurementFunctional], step: float,
                             values: np.ndarray) -> np.ndarray:
    """Apply every functional to the piecewise-linear interpolant of samples at ``j * step``."""
    values = np.asarray(values, dtype=float)
    starts = step * np.arange(len(values) - 1)
    slopes_local = np.diff(values)  # p(u) = v_j + (v_{j+1} - v_j) u on each cell
    out = np.zeros(len(model))
    for m, nu in enumerate(model):
        if nu.kind == "point":
            out[m] = np.interp(nu.x, step * np.arange(len(values)), values)
            continue
        omega, theta = nu.pulsation
        mom = cosine_moments(1, omega * step, omega * starts + theta)
        out[m] = step * np.sum(mom[:, 0] * values[:-1] + mom[:, 1] * slopes_local)
    return out


def measure_one_sided_powers(model: list[MeasurementFunctional], knots, amplitudes,
                             order: int) -> np.ndarray:
    """Apply every functional to ``sum_k a_k (t - x_k)_+^{order-1} / (order-1)!``.

    Knots must lie in ``[0, 1)``.
    """
    mono = np.zeros(order)
    mono[-1] = 1.0 / factorial(order - 1)
    out = np.zeros(len(model))
    for m, nu in enumerate(model):
        total = 0.0
        for x_k, a_k in zip(knots, amplitudes):
            if not 0.0 <= x_k < 1.0:
                raise ValueError(f"knot {x_k} outside [0, 1)")
            if nu.kind == "point":
                if nu.x >= x_k:
                    total += a_k * (nu.x - x_k) ** (order - 1) / factorial(order - 1)
            else:
                omega, theta = nu.pulsation
                total += a_k * integrate_poly_cosine(mono, x_k, 1.0, omega, theta)
        out[m] = total
    return out
