"""Synthetic ground truths, measurement noise and SNR.

The sparse part is a sum of shifted one-sided powers with random knots. The
smooth part is a sampled realization of white noise integrated ``order2``
times on a fine grid, anchored at ``t = 0``; between samples it is linear.
Every generator draws from its own stream, derived from ``(seed, tag)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .forward import MeasurementFunctional, measure_one_sided_powers, measure_piecewise_linear

SNR_CAP_DB = 300.0

_SPARSE_TAG, _SMOOTH_TAG, _NOISE_TAG = 1, 2, 3


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


@dataclass(frozen=True)
class SparsePart:
    knots: np.ndarray
    amplitudes: np.ndarray
    order: int
    sigma: float = 1.0

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for x_k, a_k in zip(self.knots, self.amplitudes):
            dt = np.maximum(t - x_k, 0.0)
            # (t - x)_+^0 is the step that includes its knot
            out += a_k * (np.where(t >= x_k, 1.0, 0.0) if self.order == 1
                          else dt ** (self.order - 1) / factorial(self.order - 1))
        return out


@dataclass(frozen=True)
class SmoothPart:
    """Samples at ``j * step``, ``j = 0 .. round(1 / step)``."""

    samples: np.ndarray
    step: float
    order: int
    sigma: float = 0.0

    @property
    def grid(self) -> np.ndarray:
        return self.step * np.arange(len(self.samples))

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.grid, self.samples)


@dataclass(frozen=True)
class GroundTruth:
    sparse: SparsePart
    smooth: SmoothPart
    seed: int = 0

    @property
    def s1_knots(self) -> list[tuple[float, float]]:
        return list(zip(self.sparse.knots.tolist(), self.sparse.amplitudes.tolist()))

    def s1(self, t) -> np.ndarray:
        return self.sparse(t)

    def s2(self, t) -> np.ndarray:
        return self.smooth(t)

    def __call__(self, t) -> np.ndarray:
        return self.s1(t) + self.s2(t)

    def measure(self, model: list[MeasurementFunctional]) -> np.ndarray:
        """Noise-free measurements, computed in closed form for both parts."""
        sparse = measure_one_sided_powers(model, self.sparse.knots, self.sparse.amplitudes,
                                          self.sparse.order)
        smooth = measure_piecewise_linear(model, self.smooth.step, self.smooth.samples)
        return sparse + smooth


@dataclass(frozen=True)
class NoisyMeasurements:
    y: np.ndarray
    clean: np.ndarray
    noise_snr_db: float
    seed: int = field(default=0)


def make_sparse_gt(K: int, sigma1: float, order1: int, seed: int,
                   margin: float = 0.05) -> SparsePart:
    """``K`` sorted knots uniform in ``(margin, 1 - margin)`` with ``N(0, sigma1^2)`` amplitudes."""
    if K < 0:
        raise ValueError("number of knots must be non-negative")
    rng = _rng(seed, _SPARSE_TAG)
    knots = np.sort(rng.uniform(margin, 1.0 - margin, K))
    amplitudes = sigma1 * rng.standard_normal(K)
    return SparsePart(knots, amplitudes, order1, sigma1)


def make_smooth_gt(sigma2: float, order2: int, h_fine: float, seed: int) -> SmoothPart:
    """Anchored ``order2``-fold integral of white noise sampled every ``h_fine``.

    The first integration is a Brownian path with increments of variance
    ``sigma2^2 * h_fine``; each further one is a left Riemann sum.
    """
    n = int(round(1.0 / h_fine))
    if not np.isclose(n * h_fine, 1.0, rtol=0, atol=1e-12):
        raise ValueError("h_fine must divide the unit interval")
    rng = _rng(seed, _SMOOTH_TAG)
    w = sigma2 * np.sqrt(h_fine) * rng.standard_normal(n)
    s = np.concatenate([[0.0], np.cumsum(w)])
    for _ in range(order2 - 1):
        s = np.concatenate([[0.0], h_fine * np.cumsum(s[:-1])])
    return SmoothPart(s, h_fine, order2, sigma2)


def make_ground_truth(K: int, sigma1: float, order1: int, sigma2: float, order2: int,
                      h_fine: float, seed: int) -> GroundTruth:
    return GroundTruth(make_sparse_gt(K, sigma1, order1, seed),
                       make_smooth_gt(sigma2, order2, h_fine, seed), seed)


def add_noise(clean, snr_db: float, seed: int) -> NoisyMeasurements:
    """Add Gaussian noise rescaled so that the realized SNR is exactly ``snr_db``."""
    clean = np.asarray(clean, dtype=float)
    if np.isinf(snr_db) and snr_db > 0:
        return NoisyMeasurements(clean.copy(), clean, float(snr_db), seed)
    norm = np.linalg.norm(clean)
    if norm == 0.0:
        raise ValueError("cannot set a finite SNR on a zero measurement vector")
    n = _rng(seed, _NOISE_TAG).standard_normal(clean.shape)
    n *= norm * 10.0 ** (-snr_db / 20.0) / np.linalg.norm(n)
    return NoisyMeasurements(clean + n, clean, float(snr_db), seed)


def snr_db(reference, reconstruction) -> float:
    """``20 log10(||ref|| / ||ref - rec||)``, capped at :data:`SNR_CAP_DB`."""
    reference = np.asarray(reference, dtype=float)
    reconstruction = np.asarray(reconstruction, dtype=float)
    if reference.shape != reconstruction.shape or reference.size < 2:
        raise ValueError("SNR needs two arrays of equal length >= 2")
    err = np.linalg.norm(reference - reconstruction)
    ref = np.linalg.norm(reference)
    if err == 0.0 or err <= ref * 10.0 ** (-SNR_CAP_DB / 20.0):
        return SNR_CAP_DB
    if ref == 0.0:
        return -SNR_CAP_DB
    return float(20.0 * np.log10(ref / err))


def evaluation_grid(T: int, oversampling: int = 16) -> np.ndarray:
    """Cell midpoints of the ``oversampling * T`` fine grid on ``[0, 1]``."""
    n = oversampling * T
    return (np.arange(n) + 0.5) / n
