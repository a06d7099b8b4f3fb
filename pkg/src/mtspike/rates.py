"""Firing-rate smoothing and the rate-driven penalty field.

The rate estimate is a separable kernel average of per-frame spike rates:
a truncated Gaussian over time (bandwidth in milliseconds, evaluated in
seconds) crossed with a boxcar over neighboring trials. Near the edges of
the raster the kernel mass falling outside the data is excluded from the
normalizer, so boundary rates are not artificially depressed.

The penalty field maps each trial's rate estimate through a decaying
exponential and rescales so every trial's penalties average exactly the
base penalty; sharpness exponent 0 recovers a constant penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .exceptions import NegativeRateError
from .model import PenaltyField, RateField, SpikeRaster

__all__ = [
    "KernelConfig",
    "gaussian_boxcar_weight",
    "estimate_firing_rate",
    "build_penalty",
]


@dataclass(frozen=True)
class KernelConfig:
    """Smoothing kernel: Gaussian bandwidth (ms), boxcar width (trials),
    and the penalty-sharpness exponent applied downstream."""

    sigma_ms: float = 200.0
    window_B: int = 1
    a: float = 1.0

    def __post_init__(self):
        if not self.sigma_ms > 0:
            raise ValueError(f"sigma_ms must be positive, got {self.sigma_ms}")
        if not (isinstance(self.window_B, (int, np.integer)) and self.window_B >= 1):
            raise ValueError(f"window_B must be an integer >= 1, got {self.window_B}")
        if self.a < 0:
            raise ValueError(f"sharpness exponent a must be >= 0, got {self.a}")


# Gaussian support is cut at this many bandwidths; the discarded mass is
# below 1e-4 of the total.
GAUSS_TRUNC_SIGMAS = 4.0


def _sigma_frames(cfg: KernelConfig, sample_rate_hz: float) -> float:
    return cfg.sigma_ms / 1000.0 * sample_rate_hz


def _boxcar_halfwidth(window_B: int) -> int:
    # |dr| < B/2 over integer offsets
    return (window_B - 1) // 2


def gaussian_boxcar_weight(
    dr: int, dt_frames: float, cfg: KernelConfig, sample_rate_hz: float
) -> float:
    """Kernel weight at trial offset dr and frame offset dt_frames.

    Zero when |dr| >= window_B / 2 or beyond the Gaussian truncation;
    otherwise the Gaussian density in seconds at dt_frames / sample_rate.
    """
    if abs(dr) >= cfg.window_B / 2.0:
        return 0.0
    sigma_s = cfg.sigma_ms / 1000.0
    dt_s = dt_frames / sample_rate_hz
    if abs(dt_s) > GAUSS_TRUNC_SIGMAS * sigma_s:
        return 0.0
    z = dt_s / sigma_s
    return math.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma_s)


def _time_kernel(cfg: KernelConfig, sample_rate_hz: float) -> np.ndarray:
    sigma_f = _sigma_frames(cfg, sample_rate_hz)
    half = int(math.floor(GAUSS_TRUNC_SIGMAS * sigma_f))
    offs = np.arange(-half, half + 1, dtype=float)
    z = offs / sigma_f
    sigma_s = cfg.sigma_ms / 1000.0
    return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma_s)


def _smooth(field: np.ndarray, kernel: np.ndarray, halfwidth: int) -> np.ndarray:
    """Gaussian over frames (zero padded), then boxcar sum over trials
    clipped at the raster edges.

    The trial window is summed directly per row (not via cumulative sums) so
    that rows seeing the same neighborhood come out bitwise identical.
    """
    blurred = convolve1d(field, kernel, axis=1, mode="constant", cval=0.0)
    R = blurred.shape[0]
    out = np.empty_like(blurred)
    for r in range(R):
        lo = max(r - halfwidth, 0)
        hi = min(r + halfwidth, R - 1)
        out[r] = blurred[lo : hi + 1].sum(axis=0)
    return out


def estimate_firing_rate(raster: SpikeRaster, cfg: KernelConfig) -> RateField:
    """Edge-normalized kernel estimate of the rate field, in spikes/second.

    Numerator and denominator pass through the identical smoothing path, so
    the kernel's normalizing constant cancels and a raster with one spike in
    every frame comes back as exactly the sampling rate everywhere.
    """
    counts = raster.counts.astype(float)
    kernel = _time_kernel(cfg, raster.sample_rate_hz)
    hw = _boxcar_halfwidth(cfg.window_B)
    num = _smooth(counts, kernel, hw)
    den = _smooth(np.ones_like(counts), kernel, hw)
    # num/den first: when the raster is one spike per frame the ratio is
    # exactly 1 and the field is exactly the sampling rate
    rates = raster.sample_rate_hz * (num / den)
    # round-off can leave tiny negatives on an all-but-empty raster
    np.clip(rates, 0.0, None, out=rates)
    return RateField(rates=rates)


def build_penalty(rates: RateField, base_lambda: float, a: float) -> PenaltyField:
    """Map a rate field to per-frame penalties with per-trial mean base_lambda.

    Within each trial the rate is scaled by its maximum, passed through
    exp(-a * scaled), and renormalized to mean base_lambda. A trial whose
    rate is identically zero has no scale and gets the constant penalty.
    """
    if base_lambda <= 0:
        raise ValueError(f"base_lambda must be positive, got {base_lambda}")
    if a < 0:
        raise ValueError(f"sharpness exponent a must be >= 0, got {a}")
    f = np.asarray(rates.rates, dtype=float)
    if np.any(f < 0):
        raise NegativeRateError("rate field has negative entries")
    R, T = f.shape
    pen = np.empty_like(f)
    for r in range(R):
        peak = f[r].max()
        if peak == 0.0:
            pen[r] = base_lambda
            continue
        w = np.exp(-a * (f[r] / peak))
        # grouped so that w == 1 gives (T * 1) / T == 1 and the penalty is
        # base_lambda to the last bit
        pen[r] = base_lambda * ((T * w) / w.sum())
    return PenaltyField(penalties=pen, base_lambda=float(base_lambda))
