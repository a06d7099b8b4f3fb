"""Command-line pipeline: simulate, fit, evaluate, benchmark.

Exit codes: 0 success, 1 usage error or missing input, 2 malformed input
file, 3 fit stopped at the iteration cap without converging.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import SCENARIOS, run_scenario, score_fit
from .exceptions import MissingInputError, MtspikeError, ParseError
from .fileio import (
    digest_files,
    read_counts_csv,
    read_manifest,
    read_matrix_csv,
    read_spikes_csv,
    read_traces_csv,
    write_counts_csv,
    write_manifest,
    write_matrix_csv,
    write_segments_json,
    write_spikes_csv,
    write_traces_csv,
)
from .model import RateField
from .pipeline import FitConfig, fit
from .rates import KernelConfig
from .simulate import RateFunctionSpec, SimConfig, simulate_dataset
from .svgchart import write_panels

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NO_CONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the pipeline reserves 2 for
    # malformed input files
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mtspike", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mtspike {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, default=0, help="random seed (64-bit)")
    common.add_argument("--hz", type=float, default=50.0, help="sampling rate, frames/s")
    common.add_argument("--threads", type=int, default=1, help="worker threads")

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic dataset")
    p.add_argument(
        "--rate",
        nargs="+",
        required=True,
        metavar=("KIND", "FILE"),
        help="bimodal | bimodal2d | zero | table FILE",
    )
    p.add_argument("--R", type=int, default=50, help="trials")
    p.add_argument("--T", type=int, default=1000, help="frames per trial")
    p.add_argument("--gamma", type=float, default=0.96, help="calcium decay per frame")
    p.add_argument("--noise", type=float, default=0.15, help="observation noise sd")
    p.add_argument("--amplitude", type=float, default=1.0, help="fluorescence jump per spike")

    p = sub.add_parser("fit", parents=[common], help="detect spikes and estimate rates")
    p.add_argument("--traces", required=True, help="traces.csv to analyze")
    p.add_argument("--lambda", dest="base_lambda", type=float, required=True, help="mean penalty")
    p.add_argument("--a", type=float, default=1.0, help="penalty sharpness (0 = constant)")
    p.add_argument("--sigma-ms", type=float, default=200.0, help="rate kernel bandwidth, ms")
    p.add_argument("--B", type=int, default=1, help="cross-trial boxcar width, trials")
    p.add_argument("--gamma", default="auto", help="'auto' or a decay value in (0,1)")
    p.add_argument("--max-iter", type=int, default=20, help="alternation cap")

    p = sub.add_parser("evaluate", parents=[common], help="score fits against ground truth")
    p.add_argument("--est", required=True, help="fit output dir, or dir of fit dirs")
    p.add_argument("--truth", required=True, help="simulate output dir")
    p.add_argument("--q", type=float, default=1.0, help="VP shift cost per second")

    p = sub.add_parser("benchmark", parents=[common], help="full simulate/fit/evaluate study")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument(
        "--lambda-grid",
        default=None,
        help="comma-separated penalty levels (default: 8 log-spaced)",
    )
    p.add_argument("--max-iter", type=int, default=20)
    return parser


def _rate_spec(args) -> tuple[RateFunctionSpec, int, int]:
    kind = args.rate[0]
    extra = args.rate[1:]
    if kind in ("bimodal", "bimodal2d", "zero") and extra:
        print(f"--rate {kind} takes no file argument", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    if kind == "bimodal":
        return RateFunctionSpec(kind="bimodal_constant"), args.R, args.T
    if kind == "bimodal2d":
        return (
            RateFunctionSpec(kind="bimodal_dynamic", trial_center=args.R / 2),
            args.R,
            args.T,
        )
    if kind == "zero":
        table = np.zeros((args.R, args.T))
        return RateFunctionSpec(kind="custom_table", table=table), args.R, args.T
    if kind == "table":
        if len(extra) != 1:
            print("--rate table needs a file argument", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        table = read_matrix_csv(extra[0])
        return RateFunctionSpec(kind="custom_table", table=table), table.shape[0], table.shape[1]
    print(f"unknown rate kind {kind!r}", file=sys.stderr)
    raise SystemExit(EXIT_USAGE)


def cmd_simulate(args) -> int:
    spec, R, T = _rate_spec(args)
    cfg = SimConfig(
        R=R,
        T=T,
        gamma=args.gamma,
        noise_sd=args.noise,
        sample_rate_hz=args.hz,
        spike_amplitude=args.amplitude,
        seed=args.seed,
    )
    traces, raster, rates = simulate_dataset(spec, cfg)
    out = Path(args.out)
    write_traces_csv(out / "traces.csv", traces)
    write_counts_csv(out / "truth_spikes.csv", raster)
    write_matrix_csv(out / "truth_rates.csv", rates.rates, args.hz)
    write_manifest(
        out,
        "simulate",
        {
            "rate": args.rate,
            "R": R,
            "T": T,
            "gamma": args.gamma,
            "noise": args.noise,
            "amplitude": args.amplitude,
            "hz": args.hz,
        },
        seed=args.seed,
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    traces = read_traces_csv(args.traces, default_hz=args.hz)
    if args.gamma == "auto":
        gamma = "auto"
    else:
        try:
            gamma = float(args.gamma)
        except ValueError:
            print(f"--gamma must be 'auto' or a number, got {args.gamma!r}", file=sys.stderr)
            return EXIT_USAGE
    cfg = FitConfig(
        base_lambda=args.base_lambda,
        kernel=KernelConfig(sigma_ms=args.sigma_ms, window_B=args.B, a=args.a),
        gamma=gamma,
        max_iter=args.max_iter,
    )
    result = fit(traces, cfg)
    out = Path(args.out)
    hz = traces.sample_rate_hz
    write_spikes_csv(out / "spikes.csv", result.segmentations, hz)
    write_matrix_csv(out / "rates.csv", result.rates.rates, hz)
    write_matrix_csv(out / "penalties.csv", result.penalties.penalties, hz)
    write_segments_json(out / "segments.json", result.segmentations, result.gamma)
    write_manifest(
        out,
        "fit",
        {
            "traces": str(args.traces),
            "lambda": args.base_lambda,
            "a": args.a,
            "sigma_ms": args.sigma_ms,
            "B": args.B,
            "gamma": args.gamma,
            "max_iter": args.max_iter,
            "hz": hz,
            "method": "time_varying" if args.a > 0 else "constant",
            "iterations": result.iterations,
            "termination": result.termination,
        },
        seed=args.seed,
        input_digest=digest_files(args.traces),
    )
    if result.termination == "max_iter":
        print("warning: stopped at max_iter without a fixed point", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _discover_runs(est_dir: Path) -> list[Path]:
    if (est_dir / "spikes.csv").exists():
        return [est_dir]
    runs = sorted(d for d in est_dir.iterdir() if d.is_dir() and (d / "spikes.csv").exists())
    if not runs:
        raise MissingInputError(f"no fit outputs (spikes.csv) under {est_dir}")
    return runs


def cmd_evaluate(args) -> int:
    truth_dir = Path(args.truth)
    truth_raster = read_counts_csv(truth_dir / "truth_spikes.csv", default_hz=args.hz)
    truth_rates = read_matrix_csv(truth_dir / "truth_rates.csv")
    R, T = truth_raster.counts.shape
    hz = truth_raster.sample_rate_hz

    groups: dict[tuple, list] = {}
    for run in _discover_runs(Path(args.est)):
        est_raster = read_spikes_csv(run / "spikes.csv", R, T, hz)
        est_rates = read_matrix_csv(run / "rates.csv")
        if (run / "manifest.json").exists():
            config = read_manifest(run).get("config", {})
            lam = float(config.get("lambda", float("nan")))
            method = config.get("method", "unknown")
        else:
            lam, method = float("nan"), "unknown"
        mean_vp, l2_field, _ = score_fit(
            est_raster,
            RateField(rates=est_rates),
            truth_raster,
            RateField(rates=truth_rates),
            args.q,
        )
        groups.setdefault((lam, method), []).append((mean_vp, l2_field))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for (lam, method), vals in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        arr = np.asarray(vals)
        rows.append((lam, method, float(arr[:, 0].mean()), float(arr[:, 1].mean()), len(vals)))
    with open(out / "metrics.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lambda,method,mean_vp,mean_l2_rate,n_replicates\n")
        for lam, method, vp, l2, n in rows:
            fh.write(f"{lam:.17g},{method},{vp:.17g},{l2:.17g},{n}\n")

    methods = sorted({m for _, m, *_ in rows})
    vp_series = [(m, [(lam, vp) for lam, mm, vp, _, _ in rows if mm == m]) for m in methods]
    l2_series = [(m, [(lam, l2) for lam, mm, _, l2, _ in rows if mm == m]) for m in methods]
    log_x = all(np.isfinite(lam) and lam > 0 for lam, *_ in rows) and len({r[0] for r in rows}) > 1
    write_panels(
        out / "summary.svg",
        [
            ("mean VP distance vs lambda", "lambda", "mean VP", vp_series),
            ("rate RMSE vs lambda", "lambda", "RMSE (spikes/s)", l2_series),
        ],
        log_x=log_x,
    )
    write_manifest(
        out,
        "evaluate",
        {"est": str(args.est), "truth": str(args.truth), "q": args.q},
        seed=args.seed,
        input_digest=digest_files(truth_dir / "truth_spikes.csv", truth_dir / "truth_rates.csv"),
    )
    return EXIT_OK


def cmd_benchmark(args) -> int:
    grid = None
    if args.lambda_grid:
        grid = [float(v) for v in str(args.lambda_grid).split(",") if v.strip()]
    run_scenario(
        args.scenario,
        replicates=args.replicates,
        lambda_grid=grid,
        seed=args.seed,
        threads=args.threads,
        max_iter=args.max_iter,
        out_dir=args.out,
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (MissingInputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (MtspikeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
