"""Multi-trial spike inference from calcium fluorescence traces.

Jointly detects spikes and estimates time-varying firing rates across
repeated trials by alternating an exact L0-penalized AR(1) changepoint
solver with Gaussian-boxcar rate smoothing, where the per-frame detection
penalty is a decreasing function of the current rate estimate.
"""

__version__ = "0.1.0"

from .model import (
    ARParams,
    PenaltyField,
    RateField,
    Segmentation,
    SpikeRaster,
    TraceSet,
    evaluate_objective,
    validate_trace_set,
)
from .solver import (
    SegmentStats,
    brute_force_l0,
    segment_cost,
    segment_fit,
    solve_l0,
    solve_l0_exact,
)
from .rates import KernelConfig, build_penalty, estimate_firing_rate, gaussian_boxcar_weight
from .pipeline import FitConfig, FitResult, estimate_gamma, fit
from .simulate import (
    RateFunctionSpec,
    SimConfig,
    eval_rate,
    generate_trace,
    simulate_dataset,
    simulate_spike_train,
)
from .metrics import SpikeTimes, l2_rate_error, raster_to_times, vp_distance

__all__ = [
    "__version__",
    "TraceSet",
    "ARParams",
    "SpikeRaster",
    "RateField",
    "PenaltyField",
    "Segmentation",
    "validate_trace_set",
    "evaluate_objective",
    "SegmentStats",
    "segment_cost",
    "segment_fit",
    "solve_l0",
    "solve_l0_exact",
    "brute_force_l0",
    "KernelConfig",
    "gaussian_boxcar_weight",
    "estimate_firing_rate",
    "build_penalty",
    "FitConfig",
    "FitResult",
    "estimate_gamma",
    "fit",
    "RateFunctionSpec",
    "SimConfig",
    "eval_rate",
    "simulate_spike_train",
    "generate_trace",
    "simulate_dataset",
    "SpikeTimes",
    "vp_distance",
    "l2_rate_error",
    "raster_to_times",
]
