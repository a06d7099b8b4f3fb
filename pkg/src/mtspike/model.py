"""Core domain types and the AR(1) objective they share.

Index conventions
-----------------
Frames and trials are 1-based in documentation, file formats and error
messages (t = 1..T, r = 1..R); numpy arrays are 0-based as usual, so frame t
lives at array position t-1.

A changepoint tau marks the end of a decay segment: the spike sits at frame
tau+1, which is array position tau. Because of this off-by-one alignment the
integer stored in ``Segmentation.changepoints`` is simultaneously the 1-based
changepoint frame and the 0-based array position of the spike.

The per-frame penalty charged for a changepoint at tau is the penalty of the
spike frame, ``penalty[tau]`` in array terms (frame tau+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    BadSampleRateError,
    DimensionMismatchError,
    EmptyTrialError,
    NonFiniteValueError,
)

__all__ = [
    "TraceSet",
    "ARParams",
    "SpikeRaster",
    "RateField",
    "PenaltyField",
    "Segmentation",
    "validate_trace_set",
    "evaluate_objective",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TraceSet:
    """R x T fluorescence matrix with its sampling rate.

    values : (R, T) float array, one row per trial
    sample_rate_hz : frames per second
    trial_ids : optional labels, length R
    """

    values: np.ndarray
    sample_rate_hz: float
    trial_ids: Optional[Sequence] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(np.atleast_2d(self.values), float))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        if self.trial_ids is not None:
            object.__setattr__(self, "trial_ids", tuple(self.trial_ids))

    @property
    def n_trials(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ARParams:
    """Per-trial AR(1) parameters: decay gamma in (0,1), optional noise sd.

    The solver only consumes gamma; noise_sd is carried for simulators.
    """

    gamma: np.ndarray
    noise_sd: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "gamma", _frozen_array(np.atleast_1d(self.gamma), float))
        if np.any(self.gamma <= 0.0) or np.any(self.gamma >= 1.0):
            raise ValueError("gamma must lie in the open interval (0, 1) for every trial")
        if self.noise_sd is not None:
            sd = _frozen_array(np.atleast_1d(self.noise_sd), float)
            if np.any(sd < 0.0):
                raise ValueError("noise_sd must be nonnegative")
            object.__setattr__(self, "noise_sd", sd)


@dataclass(frozen=True)
class SpikeRaster:
    """R x T nonnegative integer spike counts per frame.

    Counts (not booleans) so simulated ground truth with two spikes in one
    frame survives a round trip; the solver itself emits at most one
    changepoint per frame, so fitted rasters are always 0/1.
    """

    counts: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        counts = np.atleast_2d(np.asarray(self.counts))
        if counts.dtype.kind == "f":
            rounded = np.rint(counts)
            if not np.array_equal(rounded, counts):
                raise ValueError("spike counts must be integer-valued")
            counts = rounded
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("spike counts must be nonnegative")
        object.__setattr__(self, "counts", _frozen_array(counts, np.int64))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def n_trials(self) -> int:
        return self.counts.shape[0]

    @property
    def n_frames(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True)
class RateField:
    """R x T firing-rate estimates in spikes/second, all entries >= 0."""

    rates: np.ndarray

    def __post_init__(self):
        rates = _frozen_array(np.atleast_2d(self.rates), float)
        if not np.all(np.isfinite(rates)):
            raise ValueError("rates must be finite")
        if np.any(rates < 0.0):
            raise ValueError("rates must be nonnegative")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class PenaltyField:
    """R x T strictly positive per-frame penalties with per-trial mean base_lambda."""

    penalties: np.ndarray
    base_lambda: float

    def __post_init__(self):
        pen = _frozen_array(np.atleast_2d(self.penalties), float)
        if not np.all(np.isfinite(pen)) or np.any(pen <= 0.0):
            raise ValueError("penalties must be strictly positive and finite")
        lam = float(self.base_lambda)
        if lam <= 0.0:
            raise ValueError("base_lambda must be positive")
        means = pen.mean(axis=1)
        if np.any(np.abs(means - lam) > 1e-9 * lam):
            raise ValueError("per-trial penalty mean must equal base_lambda")
        object.__setattr__(self, "penalties", pen)
        object.__setattr__(self, "base_lambda", lam)


@dataclass(frozen=True)
class Segmentation:
    """Single-trial solver output.

    changepoints : strictly increasing ints in [1, T-1]; spike frames are
        changepoints + 1 (1-based), i.e. array positions ``changepoints``.
    calcium : fitted decay sequence, length T
    jumps : calcium[tau] - gamma * calcium[tau-1] per changepoint
    objective : attained value of the penalized least-squares objective
    """

    changepoints: np.ndarray
    calcium: np.ndarray
    jumps: np.ndarray
    objective: float

    def __post_init__(self):
        object.__setattr__(self, "changepoints", _frozen_array(self.changepoints, np.int64))
        object.__setattr__(self, "calcium", _frozen_array(self.calcium, float))
        object.__setattr__(self, "jumps", _frozen_array(self.jumps, float))
        object.__setattr__(self, "objective", float(self.objective))

    @property
    def spike_frames(self) -> np.ndarray:
        """1-based spike frames (changepoint + 1)."""
        return self.changepoints + 1


def validate_trace_set(ts: TraceSet) -> None:
    """Check all TraceSet invariants, raising on the first violation.

    Raises EmptyTrialError (R < 1 or T < 2), NonFiniteValueError with 1-based
    coordinates, or BadSampleRateError.
    """
    if ts.values.ndim != 2 or ts.n_trials < 1 or ts.n_frames < 2:
        raise EmptyTrialError(
            f"need at least 1 trial and 2 frames, got shape {ts.values.shape}"
        )
    finite = np.isfinite(ts.values)
    if not finite.all():
        r, t = np.argwhere(~finite)[0]
        raise NonFiniteValueError(int(r) + 1, int(t) + 1)
    if not np.isfinite(ts.sample_rate_hz) or ts.sample_rate_hz <= 0.0:
        raise BadSampleRateError(f"sample_rate_hz must be > 0, got {ts.sample_rate_hz}")
    if ts.trial_ids is not None and len(ts.trial_ids) != ts.n_trials:
        raise DimensionMismatchError(
            f"{len(ts.trial_ids)} trial ids for {ts.n_trials} trials"
        )


def evaluate_objective(y, calcium, changepoints, penalty, gamma: float) -> float:
    """Directly evaluate the penalized objective for a candidate fit.

    Returns 0.5 * sum((y - calcium)^2) plus the penalty charged at each
    changepoint, where a changepoint at tau is charged the spike-frame
    penalty ``penalty[tau]`` (frame tau+1). ``gamma`` is part of the model
    signature but the value does not enter the objective; the decay
    structure of ``calcium`` is the caller's responsibility.
    """
    y = np.asarray(y, dtype=float)
    calcium = np.asarray(calcium, dtype=float)
    penalty = np.asarray(penalty, dtype=float)
    changepoints = np.asarray(changepoints, dtype=np.int64)
    T = y.shape[0]
    if calcium.shape[0] != T or penalty.shape[0] != T:
        raise DimensionMismatchError(
            f"y, calcium, penalty lengths differ: {T}, {calcium.shape[0]}, {penalty.shape[0]}"
        )
    if changepoints.size:
        if np.any(np.diff(changepoints) <= 0):
            raise ValueError("changepoints must be strictly increasing")
        if changepoints[0] < 1 or changepoints[-1] > T - 1:
            raise ValueError("changepoints must lie in [1, T-1]")
    resid = y - calcium
    return 0.5 * float(np.dot(resid, resid)) + float(penalty[changepoints].sum())
