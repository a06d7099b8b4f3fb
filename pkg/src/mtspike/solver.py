"""Exact single-trial L0 changepoint solver for the AR(1) decay model.

The penalized least-squares problem

    min over c(1..T) of  0.5 * sum_t (y(t) - c(t))^2
                         + sum over spike frames t of penalty(t)

with c constrained to decay as c(t) = gamma * c(t-1) between spikes is
equivalent to segmenting y at changepoints tau_1 < ... < tau_k, where each
segment [a, b] pays the closed-form residual cost

    D(y[a:b]) = 0.5 * ( sum y(t)^2 - (sum y(t) gamma^(t-a))^2
                                     / sum gamma^(2(t-a)) )

and each changepoint tau pays the penalty of its spike frame tau+1. The
optimum is found by the forward recursion

    F(0) = -pen(0),   F(t) = min over tau < t of
                            F(tau) + D(y[tau+1 : t]) + pen(tau)

with pen(tau) = penalty(tau+1). ``solve_l0`` prunes candidates that can
never win again; ``solve_l0_exact`` runs the identical recursion over every
candidate and is the pruning oracle; ``brute_force_l0`` enumerates all
changepoint subsets and anchors both.

Pruning rule: a candidate tau is discarded at time t once

    F(tau) + D(y[tau+1 : t]) + pen(tau)  >  F(t) + pen(t) + slack.

Because segment costs are subadditive, a discarded tau is beaten by t at
every future time, so the surviving set always contains the optimum. The
candidate's own penalty appears on both sides (unlike the constant-penalty
rule, which can drop it); this keeps the rule exact for arbitrary positive
penalty sequences. The small relative slack keeps floating-point round-off
from ever pruning a candidate involved in a near-tie.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import (
    BadGammaError,
    BadPenaltyError,
    BadRangeError,
    TooLongError,
)
from .model import Segmentation

__all__ = [
    "SegmentStats",
    "segment_cost",
    "segment_fit",
    "solve_l0",
    "solve_l0_exact",
    "brute_force_l0",
]

# Relative slack protecting pruning decisions from round-off; see module
# docstring. Far above accumulated float64 error, far below any real cost gap.
PRUNE_SLACK = 1e-10

BRUTE_FORCE_MAX_T = 16


@dataclass
class SegmentStats:
    """Running sums for one segment, extendable right-to-left in O(1).

    weighted_sum = sum y(t) gamma^(t-a), weight_norm = sum gamma^(2(t-a)),
    square_sum = sum y(t)^2, for t from ``start`` through the last frame
    appended. ``gamma_power`` holds gamma^(t-a) for the next frame.
    """

    start: int
    gamma: float
    weighted_sum: float = 0.0
    weight_norm: float = 0.0
    square_sum: float = 0.0
    gamma_power: float = 1.0

    def extend(self, y_t: float) -> None:
        g = self.gamma_power
        self.weighted_sum += y_t * g
        self.weight_norm += g * g
        self.square_sum += y_t * y_t
        self.gamma_power = g * self.gamma

    def cost(self) -> float:
        return 0.5 * (self.square_sum - self.weighted_sum**2 / self.weight_norm)

    def fitted_start(self) -> float:
        return self.weighted_sum / self.weight_norm


def _check_range(T: int, a: int, b: int) -> None:
    if not (1 <= a <= b <= T):
        raise BadRangeError(f"need 1 <= a <= b <= T, got a={a}, b={b}, T={T}")


def _check_gamma(gamma: float) -> None:
    if not (0.0 < gamma < 1.0):
        raise BadGammaError(f"gamma must lie in (0, 1), got {gamma}")


def segment_cost(y, a: int, b: int, gamma: float) -> float:
    """Closed-form least-squares cost of fitting one decay to y[a:b] (1-based)."""
    y = np.asarray(y, dtype=float)
    _check_range(y.shape[0], a, b)
    _check_gamma(gamma)
    stats = SegmentStats(start=a, gamma=gamma)
    for t in range(a - 1, b):
        stats.extend(y[t])
    return stats.cost()


def segment_fit(y, a: int, b: int, gamma: float) -> np.ndarray:
    """Best-fit decay curve c(t) = gamma^(t-a) c_hat(a) over y[a:b] (1-based).

    The curve is built by successive multiplication so c[t] == gamma * c[t-1]
    holds exactly in floating point.
    """
    y = np.asarray(y, dtype=float)
    _check_range(y.shape[0], a, b)
    _check_gamma(gamma)
    stats = SegmentStats(start=a, gamma=gamma)
    for t in range(a - 1, b):
        stats.extend(y[t])
    out = np.empty(b - a + 1)
    c = stats.fitted_start()
    for i in range(out.shape[0]):
        out[i] = c
        c = gamma * c
    return out


@njit(cache=True, nogil=True)
def _dp_forward(y, pen, gamma, prune):
    """Forward recursion; returns (F, prev) with prev[t] = argmin changepoint.

    ``pen[i]`` is the penalty of 0-based frame i, i.e. pen(tau) for
    changepoint tau. Candidate arrays stay sorted by tau, so taking the
    first minimum breaks ties toward the smallest changepoint.
    """
    T = y.shape[0]
    F = np.empty(T + 1)
    prev = np.full(T + 1, -1, np.int64)
    F[0] = -pen[0]

    cand_tau = np.empty(T, np.int64)
    cand_base = np.empty(T)  # F(tau) + pen(tau)
    cand_s1 = np.empty(T)
    cand_s2 = np.empty(T)
    cand_s3 = np.empty(T)
    cand_gpow = np.empty(T)
    cand_val = np.empty(T)
    n = 0

    for t in range(1, T + 1):
        cand_tau[n] = t - 1
        cand_base[n] = F[t - 1] + pen[t - 1]
        cand_s1[n] = 0.0
        cand_s2[n] = 0.0
        cand_s3[n] = 0.0
        cand_gpow[n] = 1.0
        n += 1

        yt = y[t - 1]
        best = np.inf
        best_i = 0
        for i in range(n):
            g = cand_gpow[i]
            s1 = cand_s1[i] + yt * g
            s2 = cand_s2[i] + g * g
            s3 = cand_s3[i] + yt * yt
            cand_s1[i] = s1
            cand_s2[i] = s2
            cand_s3[i] = s3
            cand_gpow[i] = g * gamma
            v = cand_base[i] + 0.5 * (s3 - s1 * s1 / s2)
            cand_val[i] = v
            if v < best:
                best = v
                best_i = i
        F[t] = best
        prev[t] = cand_tau[best_i]

        if prune and t < T:
            bar = best + pen[t]
            bar += PRUNE_SLACK * (1.0 + abs(bar))
            m = 0
            for i in range(n):
                if cand_val[i] <= bar:
                    cand_tau[m] = cand_tau[i]
                    cand_base[m] = cand_base[i]
                    cand_s1[m] = cand_s1[i]
                    cand_s2[m] = cand_s2[i]
                    cand_s3[m] = cand_s3[i]
                    cand_gpow[m] = cand_gpow[i]
                    m += 1
            n = m
    return F, prev


@njit(cache=True, nogil=True)
def _reconstruct(y, gamma, prev):
    """Walk the argmin chain from T and rebuild the fitted decay sequence.

    Within each segment the best-fit start value is propagated by successive
    multiplication, so calcium[t] == gamma * calcium[t-1] holds bitwise;
    the running sums mirror SegmentStats.extend exactly.
    """
    T = y.shape[0]
    n_cps = 0
    t = T
    while t > 0:
        tau = prev[t]
        if tau > 0:
            n_cps += 1
        t = tau
    cps = np.empty(n_cps, np.int64)
    t = T
    i = n_cps - 1
    while t > 0:
        tau = prev[t]
        if tau > 0:
            cps[i] = tau
            i -= 1
        t = tau

    calcium = np.empty(T)
    for j in range(n_cps + 1):
        a0 = 0 if j == 0 else cps[j - 1]
        b0 = T if j == n_cps else cps[j]
        s1 = 0.0
        s2 = 0.0
        g = 1.0
        for t in range(a0, b0):
            s1 += y[t] * g
            s2 += g * g
            g = g * gamma
        c = s1 / s2
        for t in range(a0, b0):
            calcium[t] = c
            c = gamma * c
    return cps, calcium


def _prepare(y, gamma, penalty):
    y = np.ascontiguousarray(np.asarray(y, dtype=float))
    penalty = np.ascontiguousarray(np.asarray(penalty, dtype=float))
    _check_gamma(float(gamma))
    if y.ndim != 1 or y.shape[0] < 2:
        raise BadRangeError(f"need a 1-D trace with T >= 2, got shape {y.shape}")
    if penalty.shape != y.shape:
        raise BadPenaltyError(
            f"penalty length {penalty.shape} does not match trace length {y.shape}"
        )
    if not np.all(np.isfinite(penalty)) or np.any(penalty <= 0.0):
        raise BadPenaltyError("penalties must be strictly positive and finite")
    return y, float(gamma), penalty


def _backtrack(y, gamma, penalty, F, prev) -> Segmentation:
    T = y.shape[0]
    cps, calcium = _reconstruct(y, gamma, prev)
    jumps = calcium[cps] - gamma * calcium[cps - 1] if cps.size else np.empty(0)
    return Segmentation(
        changepoints=cps, calcium=calcium, jumps=jumps, objective=float(F[T])
    )


def solve_l0(y, gamma: float, penalty) -> Segmentation:
    """Globally minimize the penalized objective with candidate pruning.

    Near-linear cost in practice; output matches ``solve_l0_exact``.
    """
    y, gamma, penalty = _prepare(y, gamma, penalty)
    F, prev = _dp_forward(y, penalty, gamma, True)
    return _backtrack(y, gamma, penalty, F, prev)


def solve_l0_exact(y, gamma: float, penalty) -> Segmentation:
    """Unpruned O(T^2) recursion over every candidate; pruning oracle."""
    y, gamma, penalty = _prepare(y, gamma, penalty)
    F, prev = _dp_forward(y, penalty, gamma, False)
    return _backtrack(y, gamma, penalty, F, prev)


def brute_force_l0(y, gamma: float, penalty) -> Segmentation:
    """Exhaustive minimizer over all 2^(T-1) changepoint subsets (T <= 16).

    Subsets are scanned by size then lexicographically, keeping strict
    improvements only, so ties resolve to fewer, earlier changepoints.
    """
    from itertools import combinations

    y, gamma, penalty = _prepare(y, gamma, penalty)
    T = y.shape[0]
    if T > BRUTE_FORCE_MAX_T:
        raise TooLongError(f"T={T} exceeds brute-force limit {BRUTE_FORCE_MAX_T}")

    best_obj = np.inf
    best_cps: tuple[int, ...] = ()
    for k in range(T):
        for cps in combinations(range(1, T), k):
            bounds = (0,) + cps + (T,)
            total = 0.0
            for a0, b0 in zip(bounds[:-1], bounds[1:]):
                total += segment_cost(y, a0 + 1, b0, gamma)
            for tau in cps:
                total += penalty[tau]
            if total < best_obj:
                best_obj = total
                best_cps = cps

    calcium = np.empty(T)
    bounds = (0,) + best_cps + (T,)
    for a0, b0 in zip(bounds[:-1], bounds[1:]):
        calcium[a0:b0] = segment_fit(y, a0 + 1, b0, gamma)
    cps = np.asarray(best_cps, dtype=np.int64)
    jumps = calcium[cps] - gamma * calcium[cps - 1] if cps.size else np.empty(0)
    return Segmentation(
        changepoints=cps, calcium=calcium, jumps=jumps, objective=best_obj
    )
