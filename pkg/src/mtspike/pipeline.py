"""Alternating spike detection and rate estimation over a trial set.

One iteration solves every trial's penalized changepoint problem against
the current penalty field (synchronously: all trials see the same field),
collects the detected spikes into a raster, then re-estimates the rate
field and rebuilds the penalties from it. Penalties start constant, so the
first iteration always reproduces the constant-penalty solution.

The loop stops when the raster repeats. A repeat of the immediately
preceding raster is a fixed point. A repeat of an earlier iterate means the
alternation entered a cycle; the cycle member with the smallest total
objective is returned. Alternation over a finite set of rasters must do one
or the other, but max_iter caps the work regardless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import ConstantTraceError, TrialError
from .model import PenaltyField, RateField, SpikeRaster, TraceSet, validate_trace_set
from .rates import KernelConfig, build_penalty, estimate_firing_rate
from .solver import solve_l0

__all__ = ["FitConfig", "FitResult", "estimate_gamma", "fit"]

GAMMA_CLAMP = (0.5, 0.999)


@dataclass(frozen=True)
class FitConfig:
    """Penalty level, smoothing kernel, decay handling and loop controls.

    gamma: "auto" to estimate per trial from the lag-1 autocorrelation, a
    scalar applied to all trials, or a sequence of per-trial values.
    """

    base_lambda: float
    kernel: KernelConfig = field(default_factory=KernelConfig)
    gamma: Union[str, float, Sequence[float]] = "auto"
    max_iter: int = 20
    record_history: bool = False

    def __post_init__(self):
        if self.base_lambda <= 0:
            raise ValueError(f"base_lambda must be positive, got {self.base_lambda}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class FitResult:
    """Converged state of the alternation.

    raster holds exactly the changepoint spikes of ``segmentations``; rates
    is the kernel estimate from that raster; penalties is the field the
    returned segmentations were solved against (identical to the field built
    from the returned raster whenever termination is a fixed point).
    objective_trace records the summed solver objective per iteration.
    """

    raster: SpikeRaster
    rates: RateField
    penalties: PenaltyField
    segmentations: tuple
    gamma: np.ndarray
    iterations: int
    termination: str  # fixed_point | cycle | max_iter
    objective_trace: tuple
    history: Optional[tuple] = None

    @property
    def total_objective(self) -> float:
        return float(sum(s.objective for s in self.segmentations))


def estimate_gamma(y) -> float:
    """Lag-1 sample autocorrelation of a trace, clamped to [0.5, 0.999].

    The clamp floor reflects that a calcium transient decaying faster than
    gamma = 0.5 per frame is implausible at typical frame rates; 1.0 would
    make the decay model degenerate.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] < 3:
        raise ValueError(f"need a 1-D trace with T >= 3, got shape {y.shape}")
    centered = y - y.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        raise ConstantTraceError("autocorrelation undefined for a constant trace")
    r1 = float(np.dot(centered[:-1], centered[1:])) / denom
    return float(min(max(r1, GAMMA_CLAMP[0]), GAMMA_CLAMP[1]))


def _resolve_gamma(traces: TraceSet, cfg: FitConfig) -> np.ndarray:
    R = traces.n_trials
    if isinstance(cfg.gamma, str):
        if cfg.gamma != "auto":
            raise ValueError(f"gamma must be 'auto', a scalar or a sequence, got {cfg.gamma!r}")
        out = np.empty(R)
        for r in range(R):
            try:
                out[r] = estimate_gamma(traces.values[r])
            except ConstantTraceError as e:
                raise TrialError(r + 1, e) from e
        return out
    gamma = np.atleast_1d(np.asarray(cfg.gamma, dtype=float))
    if gamma.size == 1:
        gamma = np.full(R, gamma[0])
    if gamma.size != R:
        raise ValueError(f"{gamma.size} gamma values for {R} trials")
    if np.any(gamma <= 0) or np.any(gamma >= 1):
        raise ValueError("gamma must lie in (0, 1)")
    return gamma


def _solve_all(traces: TraceSet, gamma: np.ndarray, penalties: np.ndarray):
    segmentations = []
    raster = np.zeros((traces.n_trials, traces.n_frames), dtype=np.int64)
    for r in range(traces.n_trials):
        try:
            seg = solve_l0(traces.values[r], float(gamma[r]), penalties[r])
        except Exception as e:
            raise TrialError(r + 1, e) from e
        segmentations.append(seg)
        raster[r, seg.changepoints] = 1
    return segmentations, raster


def fit(traces: TraceSet, cfg: FitConfig) -> FitResult:
    """Run the alternating detection / rate-estimation loop to termination."""
    validate_trace_set(traces)
    gamma = _resolve_gamma(traces, cfg)
    R, T = traces.n_trials, traces.n_frames
    lam = float(cfg.base_lambda)

    penalties = np.full((R, T), lam)
    seen = [np.zeros((R, T), dtype=np.int64)]  # iterate 0: the empty raster
    iterates = [None]  # per-iterate (segmentations, raster, objective)
    termination = None
    chosen = None

    for it in range(1, cfg.max_iter + 1):
        segmentations, raster = _solve_all(traces, gamma, penalties)
        total = float(sum(s.objective for s in segmentations))
        iterates.append((segmentations, raster, total))

        if np.array_equal(raster, seen[-1]):
            termination, chosen = "fixed_point", it
            break
        repeat = next(
            (j for j in range(1, len(seen) - 1) if np.array_equal(raster, seen[j])),
            None,
        )
        if repeat is not None:
            # cycle covers iterates repeat .. it-1; pick the best objective
            members = range(repeat, it)
            chosen = min(members, key=lambda j: (iterates[j][2], j))
            termination = "cycle"
            break
        seen.append(raster)

        rate_field = estimate_firing_rate(
            SpikeRaster(counts=raster, sample_rate_hz=traces.sample_rate_hz), cfg.kernel
        )
        penalties = build_penalty(rate_field, lam, cfg.kernel.a).penalties
    else:
        termination, chosen = "max_iter", cfg.max_iter

    iterations = it
    segmentations, raster, _ = iterates[chosen]
    out_raster = SpikeRaster(counts=raster, sample_rate_hz=traces.sample_rate_hz)
    out_rates = estimate_firing_rate(out_raster, cfg.kernel)
    # the field the chosen iterate was solved against: built from the previous
    # raster (the zero raster regenerates the constant initial field, so this
    # holds for iterate 1 too); at a fixed point it equals the field built
    # from the returned raster itself
    producing = SpikeRaster(counts=seen[chosen - 1], sample_rate_hz=traces.sample_rate_hz)
    out_pen = build_penalty(estimate_firing_rate(producing, cfg.kernel), lam, cfg.kernel.a)
    history = None
    if cfg.record_history:
        history = tuple(
            SpikeRaster(counts=x[1], sample_rate_hz=traces.sample_rate_hz)
            for x in iterates[1:]
        )
    return FitResult(
        raster=out_raster,
        rates=out_rates,
        penalties=out_pen,
        segmentations=tuple(segmentations),
        gamma=gamma,
        iterations=iterations,
        termination=termination,
        objective_trace=tuple(x[2] for x in iterates[1:]),
        history=history,
    )
