"""Ground-truth simulation: inhomogeneous-Poisson spike trains by thinning,
AR(1) fluorescence synthesis, and the stock bimodal rate functions.

Spike trains are drawn by classical thinning: a homogeneous Poisson draw at
the trial's rate ceiling scatters candidate times uniformly over (0, T],
each kept with probability rate(frame)/ceiling, frame = ceiling of the
candidate time. Accepted times are binned to per-frame counts, so two
accepted candidates in one frame yield a count of 2.

All randomness flows through numpy's PCG64 with SeedSequence-derived
substreams keyed by (seed, trial, purpose), making every dataset bitwise
reproducible and trial-order independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .exceptions import OutOfDomainError
from .model import RateField, SpikeRaster, TraceSet

__all__ = [
    "RateFunctionSpec",
    "SimConfig",
    "eval_rate",
    "simulate_spike_train",
    "generate_trace",
    "simulate_dataset",
    "true_rate_field",
]

RATE_KINDS = ("bimodal_constant", "bimodal_dynamic", "custom_table")


@dataclass(frozen=True)
class RateFunctionSpec:
    """Per-frame firing probability surface f_r(t) on r = 1..R, t = 1..T.

    bimodal_constant: baseline + amplitude * sum of Gaussian bumps at
        peak_frames with width width_d, identical across trials.
    bimodal_dynamic: the bump sum additionally scaled by
        exp(-(r - trial_center)^2 / trial_scale).
    custom_table: explicit R x T table of per-frame rates.
    """

    kind: str = "bimodal_constant"
    baseline: float = 0.01
    amplitude: float = 0.19
    peak_frames: tuple = (300, 700)
    width_d: float = 150.0
    trial_center: float = 25.0
    trial_scale: float = 1000.0
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in RATE_KINDS:
            raise ValueError(f"unknown rate kind {self.kind!r}")
        if self.kind == "custom_table":
            if self.table is None:
                raise ValueError("custom_table requires a table")
            tab = np.array(self.table, dtype=float)
            tab.setflags(write=False)
            if np.any(tab < 0) or np.any(tab > 1):
                raise ValueError("table rates must lie in [0, 1] per frame")
            object.__setattr__(self, "table", tab)


@dataclass(frozen=True)
class SimConfig:
    """Dataset dimensions and AR(1) parameters for synthesis."""

    R: int = 50
    T: int = 1000
    gamma: float = 0.96
    noise_sd: float = 0.15
    sample_rate_hz: float = 50.0
    spike_amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.R < 1 or self.T < 1:
            raise ValueError("R and T must be >= 1")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")


def eval_rate(spec: RateFunctionSpec, r: int, t: int) -> float:
    """Per-frame rate at 1-based trial r and frame t.

    Multiply by the sampling rate for spikes/second.
    """
    if t < 1 or r < 1:
        raise OutOfDomainError(f"trial {r}, frame {t} outside domain")
    if spec.kind == "custom_table":
        if r > spec.table.shape[0] or t > spec.table.shape[1]:
            raise OutOfDomainError(f"trial {r}, frame {t} outside table")
        return float(spec.table[r - 1, t - 1])
    bumps = 0.0
    for t0 in spec.peak_frames:
        z = (t - t0) / spec.width_d
        bumps += np.exp(-z * z)
    if spec.kind == "bimodal_dynamic":
        dr = r - spec.trial_center
        bumps *= np.exp(-dr * dr / spec.trial_scale)
    return float(spec.baseline + spec.amplitude * bumps)


def _rate_row(spec: RateFunctionSpec, r: int, T: int) -> np.ndarray:
    """Vectorized eval_rate over frames 1..T (same operations, same order)."""
    if r < 1:
        raise OutOfDomainError(f"trial {r} outside domain")
    if spec.kind == "custom_table":
        if r > spec.table.shape[0] or T > spec.table.shape[1]:
            raise OutOfDomainError(f"trial {r} x {T} frames outside table")
        return spec.table[r - 1, :T].copy()
    t = np.arange(1, T + 1, dtype=float)
    bumps = np.zeros(T)
    for t0 in spec.peak_frames:
        z = (t - t0) / spec.width_d
        bumps += np.exp(-z * z)
    if spec.kind == "bimodal_dynamic":
        dr = r - spec.trial_center
        bumps *= np.exp(-dr * dr / spec.trial_scale)
    return spec.baseline + spec.amplitude * bumps


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed,) + key)))


def simulate_spike_train(spec: RateFunctionSpec, r: int, T: int, seed) -> np.ndarray:
    """Draw per-frame spike counts for trial r from the rate surface by thinning.

    ``seed`` may be an int or a numpy Generator. A rate ceiling of zero
    yields all-zero counts.
    """
    rng = seed if isinstance(seed, np.random.Generator) else _substream(int(seed), r, 0)
    rate = _rate_row(spec, r, T)
    f_star = float(rate.max())
    counts = np.zeros(T, dtype=np.int64)
    if f_star <= 0.0:
        return counts
    n_cand = rng.poisson(T * f_star)
    if n_cand == 0:
        return counts
    # uniform on (0, T]; floor(u)+1 with u ~ U[0, T) realizes ceil on (0, T]
    frames = np.floor(rng.uniform(0.0, T, size=n_cand)).astype(np.int64) + 1
    accept = rng.uniform(0.0, 1.0, size=n_cand) < rate[frames - 1] / f_star
    np.add.at(counts, frames[accept] - 1, 1)
    return counts


def generate_trace(counts, cfg: SimConfig, seed) -> np.ndarray:
    """Synthesize one fluorescence trace from spike counts.

    c(t) = gamma * c(t-1) + spike_amplitude * counts(t) from c(0) = 0, plus
    iid Gaussian noise with sd cfg.noise_sd. Deterministic for a fixed seed.
    """
    counts = np.asarray(counts, dtype=float)
    calcium = lfilter([cfg.spike_amplitude], [1.0, -cfg.gamma], counts)
    if cfg.noise_sd == 0.0:
        return calcium
    rng = seed if isinstance(seed, np.random.Generator) else _substream(int(seed), 0, 1)
    return calcium + rng.normal(0.0, cfg.noise_sd, size=counts.shape[0])


def true_rate_field(spec: RateFunctionSpec, cfg: SimConfig) -> RateField:
    """Ground-truth rates in spikes/second on the (R, T) grid."""
    rows = np.stack([_rate_row(spec, r, cfg.T) for r in range(1, cfg.R + 1)])
    return RateField(rates=rows * cfg.sample_rate_hz)


def simulate_dataset(
    spec: RateFunctionSpec, cfg: SimConfig
) -> tuple[TraceSet, SpikeRaster, RateField]:
    """Simulate a full multi-trial dataset: traces, true spikes, true rates.

    Each trial consumes its own (seed, trial, purpose) substreams, so output
    is bitwise reproducible and unaffected by trial evaluation order.
    """
    counts = np.empty((cfg.R, cfg.T), dtype=np.int64)
    traces = np.empty((cfg.R, cfg.T))
    for r in range(1, cfg.R + 1):
        counts[r - 1] = simulate_spike_train(spec, r, cfg.T, _substream(cfg.seed, r, 0))
        traces[r - 1] = generate_trace(counts[r - 1], cfg, _substream(cfg.seed, r, 1))
    return (
        TraceSet(values=traces, sample_rate_hz=cfg.sample_rate_hz),
        SpikeRaster(counts=counts, sample_rate_hz=cfg.sample_rate_hz),
        true_rate_field(spec, cfg),
    )
