"""Monte-Carlo benchmark: simulate, fit with time-varying and constant
penalties over a lambda grid, and score both against the ground truth.

Two stock scenarios mirror the simulation studies the method was built for:
``constant_rate`` (bimodal rate shared by all trials, rate smoothing pooled
over the whole trial set) and ``dynamic_rate`` (bump heights waxing and
waning across trials, pooling limited to a 10-trial boxcar). Reported
headline numbers are the percentage reductions in mean Victor-Purpura
distance and rate RMSE when switching from the constant to the time-varying
penalty, each method evaluated at its own VP-optimal lambda.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fileio import write_manifest
from .metrics import l2_rate_error, raster_to_times, vp_distance
from .model import RateField, SpikeRaster
from .pipeline import FitConfig, fit
from .rates import KernelConfig
from .simulate import RateFunctionSpec, SimConfig, simulate_dataset
from .svgchart import write_line_chart, write_panels

__all__ = ["SCENARIOS", "ScenarioConfig", "BenchmarkResult", "run_scenario", "score_fit"]

# 8 log-spaced penalty levels bracketing the VP-optimal lambda of both
# methods at the stock amplitude and noise level
DEFAULT_LAMBDA_GRID = tuple(float(v) for v in np.geomspace(0.02, 1.0, 8))

# Spike amplitude for the stock scenarios. With the stock noise level 0.15
# this puts single-spike transients at 2.7 sigma, the regime where the
# penalty placement visibly decides which spikes are recovered; unit-
# amplitude spikes (6.7 sigma) are detected almost perfectly by a constant
# penalty and leave the two methods indistinguishable.
SCENARIO_SPIKE_AMPLITUDE = 0.4

METHOD_TV = "time_varying"
METHOD_CONST = "constant"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    sim: SimConfig
    rate_spec: RateFunctionSpec
    kernel_tv: KernelConfig
    kernel_const: KernelConfig
    q: float = 1.0


def _scenario(name: str, seed: int = 0) -> ScenarioConfig:
    sim = SimConfig(
        R=50,
        T=1000,
        gamma=0.96,
        noise_sd=0.15,
        sample_rate_hz=50.0,
        spike_amplitude=SCENARIO_SPIKE_AMPLITUDE,
        seed=seed,
    )
    if name == "constant_rate":
        spec = RateFunctionSpec(kind="bimodal_constant")
        window = 2 * sim.R - 1  # pool every trial
    elif name == "dynamic_rate":
        spec = RateFunctionSpec(kind="bimodal_dynamic", trial_center=sim.R / 2)
        window = 10
    else:
        raise ValueError(f"unknown scenario {name!r}")
    return ScenarioConfig(
        name=name,
        sim=sim,
        rate_spec=spec,
        kernel_tv=KernelConfig(sigma_ms=200.0, window_B=window, a=1.0),
        kernel_const=KernelConfig(sigma_ms=200.0, window_B=window, a=0.0),
    )


SCENARIOS = ("constant_rate", "dynamic_rate")


@dataclass(frozen=True)
class BenchmarkResult:
    """Aggregated scores plus the headline reductions.

    The gated rate error (``mean_l2_rate`` in rows, ``l2_at_opt``,
    ``l2_reduction_pct``) is the RMSE of the trial-averaged rate curve; the
    full R x T field RMSE rides along as ``mean_l2_field``. Under full trial
    pooling the two coincide.
    """

    scenario: str
    lambda_grid: tuple
    rows: tuple  # (lambda, method, mean_vp, mean_l2_rate, mean_l2_field, n_replicates)
    lambda_opt: dict  # method -> VP-optimal lambda
    vp_at_opt: dict
    l2_at_opt: dict
    vp_reduction_pct: float
    l2_reduction_pct: float
    runtime_s: float


def score_fit(
    est_raster: SpikeRaster,
    est_rates: RateField,
    truth_raster: SpikeRaster,
    truth_rates: RateField,
    q: float = 1.0,
) -> tuple[float, float, float]:
    """(mean VP over trials, rate-field RMSE, trial-averaged-rate RMSE)."""
    hz = truth_raster.sample_rate_hz
    vps = [
        vp_distance(
            raster_to_times(est_raster.counts[r], hz),
            raster_to_times(truth_raster.counts[r], hz),
            q,
        )
        for r in range(truth_raster.n_trials)
    ]
    l2_field = l2_rate_error(truth_rates.rates, est_rates.rates)
    l2_marginal = l2_rate_error(
        truth_rates.rates.mean(axis=0), est_rates.rates.mean(axis=0)
    )
    return float(np.mean(vps)), l2_field, l2_marginal


def _replicate_seed(master_seed: int, rep: int) -> int:
    return int(np.random.SeedSequence((master_seed, rep)).generate_state(1, np.uint64)[0])


def _run_replicate(scn: ScenarioConfig, rep_seed: int, lambda_grid, max_iter: int):
    sim = SimConfig(
        R=scn.sim.R,
        T=scn.sim.T,
        gamma=scn.sim.gamma,
        noise_sd=scn.sim.noise_sd,
        sample_rate_hz=scn.sim.sample_rate_hz,
        spike_amplitude=scn.sim.spike_amplitude,
        seed=rep_seed,
    )
    traces, truth_raster, truth_rates = simulate_dataset(scn.rate_spec, sim)
    out = {}
    for lam in lambda_grid:
        for method, kernel in ((METHOD_TV, scn.kernel_tv), (METHOD_CONST, scn.kernel_const)):
            # both methods get the scenario's true decay constant
            res = fit(
                traces,
                FitConfig(base_lambda=lam, kernel=kernel, gamma=scn.sim.gamma, max_iter=max_iter),
            )
            out[(lam, method)] = score_fit(
                res.raster, res.rates, truth_raster, truth_rates, scn.q
            )
    return out


def run_scenario(
    scenario: str,
    replicates: int = 20,
    lambda_grid=None,
    seed: int = 0,
    threads: int = 1,
    max_iter: int = 20,
    out_dir=None,
) -> BenchmarkResult:
    """Run the full pipeline and aggregate scores; optionally write artifacts."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    scn = _scenario(scenario)
    grid = tuple(float(v) for v in (lambda_grid if lambda_grid is not None else DEFAULT_LAMBDA_GRID))
    if any(v <= 0 for v in grid):
        raise ValueError("lambda grid must be positive")

    t_start = time.perf_counter()
    seeds = [_replicate_seed(seed, i) for i in range(replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(
                pool.map(lambda s: _run_replicate(scn, s, grid, max_iter), seeds)
            )
    else:
        per_rep = [_run_replicate(scn, s, grid, max_iter) for s in seeds]

    rows = []
    means = {}
    for lam in grid:
        for method in (METHOD_TV, METHOD_CONST):
            scores = np.array([rep[(lam, method)] for rep in per_rep])
            mean_vp, mean_l2f, mean_l2m = scores.mean(axis=0)
            means[(lam, method)] = (mean_vp, mean_l2m, mean_l2f)
            rows.append((lam, method, float(mean_vp), float(mean_l2m), float(mean_l2f), replicates))

    lambda_opt = {
        m: min(grid, key=lambda lam: means[(lam, m)][0]) for m in (METHOD_TV, METHOD_CONST)
    }
    vp_at_opt = {m: means[(lambda_opt[m], m)][0] for m in lambda_opt}
    l2_at_opt = {m: means[(lambda_opt[m], m)][1] for m in lambda_opt}
    vp_red = 100.0 * (1.0 - vp_at_opt[METHOD_TV] / vp_at_opt[METHOD_CONST])
    l2_red = 100.0 * (1.0 - l2_at_opt[METHOD_TV] / l2_at_opt[METHOD_CONST])
    runtime = time.perf_counter() - t_start

    result = BenchmarkResult(
        scenario=scenario,
        lambda_grid=grid,
        rows=tuple(rows),
        lambda_opt=lambda_opt,
        vp_at_opt=vp_at_opt,
        l2_at_opt=l2_at_opt,
        vp_reduction_pct=float(vp_red),
        l2_reduction_pct=float(l2_red),
        runtime_s=runtime,
    )
    if out_dir is not None:
        write_benchmark_artifacts(out_dir, result, seed=seed)
    return result


def _series(result: BenchmarkResult, col: int):
    out = []
    for method in (METHOD_TV, METHOD_CONST):
        pts = [(row[0], row[2 + col]) for row in result.rows if row[1] == method]
        out.append((method, pts))
    return out


def write_benchmark_artifacts(out_dir, result: BenchmarkResult, seed: int = 0) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "benchmark_results.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("scenario,lambda,method,mean_vp,mean_l2_rate,mean_l2_field,n_replicates\n")
        for lam, method, vp, l2, l2f, n in result.rows:
            fh.write(
                f"{result.scenario},{lam:.17g},{method},{vp:.17g},{l2:.17g},{l2f:.17g},{n}\n"
            )

    write_line_chart(
        out_dir / "plots" / "vp_vs_lambda.svg",
        f"{result.scenario}: spike detection",
        "lambda",
        "mean VP distance",
        _series(result, 0),
        log_x=True,
    )
    write_line_chart(
        out_dir / "plots" / "l2_vs_lambda.svg",
        f"{result.scenario}: rate estimation",
        "lambda",
        "rate RMSE (spikes/s)",
        _series(result, 1),
        log_x=True,
    )
    write_panels(
        out_dir / "plots" / "summary.svg",
        [
            ("mean VP distance vs lambda", "lambda", "mean VP", _series(result, 0)),
            ("rate RMSE vs lambda", "lambda", "RMSE (spikes/s)", _series(result, 1)),
        ],
        log_x=True,
    )

    lines = [
        f"# Benchmark: {result.scenario}",
        "",
        f"- replicates: {result.rows[0][5]}",
        f"- lambda grid: {', '.join(f'{v:.4g}' for v in result.lambda_grid)}",
        f"- runtime: {result.runtime_s:.1f} s",
        "",
        "| lambda | method | mean VP | rate RMSE | field RMSE |",
        "|---|---|---|---|---|",
    ]
    for lam, method, vp, l2, l2f, _ in result.rows:
        lines.append(f"| {lam:.4g} | {method} | {vp:.4f} | {l2:.4f} | {l2f:.4f} |")
    lines += [
        "",
        "Rate RMSE is the error of the trial-averaged rate curve; field RMSE",
        "covers the full trial-by-frame surface (identical under full pooling).",
        "",
        f"VP-optimal lambda: {METHOD_TV} {result.lambda_opt[METHOD_TV]:.4g}, "
        f"{METHOD_CONST} {result.lambda_opt[METHOD_CONST]:.4g}",
        "",
        "At each method's VP-optimal lambda, the time-varying penalty changes "
        f"mean VP by {result.vp_reduction_pct:.1f}% and rate RMSE by "
        f"{result.l2_reduction_pct:.1f}% relative to the constant penalty "
        "(positive = reduction).",
        "",
    ]
    (out_dir / "report.md").write_text("\n".join(lines), encoding="utf-8")
    write_manifest(
        out_dir,
        "benchmark",
        {
            "scenario": result.scenario,
            "replicates": result.rows[0][5],
            "lambda_grid": list(result.lambda_grid),
        },
        seed=seed,
    )
