"""Spike-train and rate-field accuracy metrics.

Victor-Purpura distance: minimum cost of editing one spike train into
another with unit-cost inserts/deletes and shifts costing q per second.
q is per second and spike times are in seconds, so with 50 Hz frames and
q = 1 a one-frame shift costs 0.02.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import DimensionMismatchError, ZeroWeightError

__all__ = ["SpikeTimes", "vp_distance", "l2_rate_error", "raster_to_times"]

# separation added to same-frame duplicates so times stay strictly increasing
DUPLICATE_EPS_S = 1e-9


@dataclass(frozen=True)
class SpikeTimes:
    """Strictly increasing spike times in seconds."""

    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        t.setflags(write=False)
        if t.size:
            if np.any(t < 0):
                raise ValueError("spike times must be nonnegative")
            if np.any(np.diff(t) <= 0):
                raise ValueError("spike times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return self.times.size


def _as_times(train) -> np.ndarray:
    if isinstance(train, SpikeTimes):
        return train.times
    return np.asarray(train, dtype=float)


@njit(cache=True, nogil=True)
def _vp_dp(a, b, q):
    n, m = a.shape[0], b.shape[0]
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            shift = prev[j - 1] + q * abs(ai - b[j - 1])
            ins = cur[j - 1] + 1.0
            dele = prev[j] + 1.0
            best = shift
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


def vp_distance(a, b, q: float = 1.0) -> float:
    """Victor-Purpura edit distance between two spike trains (seconds)."""
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    ta, tb = _as_times(a), _as_times(b)
    if ta.size == 0 or tb.size == 0:
        return float(ta.size + tb.size)
    return float(_vp_dp(ta, tb, float(q)))


def l2_rate_error(f, fhat, weights=None) -> float:
    """Weighted root-mean-square difference between two rate arrays.

    sqrt( sum(m * |f - fhat|^2) / sum(m) ); constant weights give the plain
    RMS over the grid. Works on 1-D rows and full R x T fields alike.
    """
    f = np.asarray(f, dtype=float)
    fhat = np.asarray(fhat, dtype=float)
    if f.shape != fhat.shape:
        raise DimensionMismatchError(f"shape mismatch: {f.shape} vs {fhat.shape}")
    if weights is None:
        m = np.ones_like(f)
    else:
        m = np.broadcast_to(np.asarray(weights, dtype=float), f.shape)
    if np.any(m < 0):
        raise ValueError("weights must be nonnegative")
    total = m.sum()
    if total <= 0:
        raise ZeroWeightError("weights sum to zero")
    diff = f - fhat
    return float(np.sqrt(np.sum(m * diff * diff) / total))


def raster_to_times(row, sample_rate_hz: float) -> SpikeTimes:
    """Convert one raster row of per-frame counts to spike times in seconds.

    Frame t (1-based, array position t-1) with count k emits k times at
    t / sample_rate_hz, the extras offset by multiples of 1 ns so the
    sequence stays strictly increasing.
    """
    row = np.asarray(row)
    times = []
    for idx in np.flatnonzero(row):
        base = (idx + 1) / sample_rate_hz
        for j in range(int(row[idx])):
            times.append(base + j * DUPLICATE_EPS_S)
    return SpikeTimes(times=np.asarray(times, dtype=float))
