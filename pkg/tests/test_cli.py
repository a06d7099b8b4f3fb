import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from mtspike.cli import main
from mtspike.fileio import (
    read_counts_csv,
    read_matrix_csv,
    read_traces_csv,
    write_matrix_csv,
    write_manifest,
)


def run(*argv):
    return main([str(a) for a in argv])


def simulate_small(out, seed=1, rate="bimodal", R=6, T=300, amplitude=0.4):
    code = run(
        "simulate", "--rate", rate, "--R", R, "--T", T, "--gamma", 0.96,
        "--noise", 0.15, "--hz", 50, "--amplitude", amplitude,
        "--seed", seed, "--out", out,
    )
    assert code == 0
    return Path(out)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    return simulate_small(tmp_path_factory.mktemp("data") / "sim")


@pytest.fixture(scope="module")
def fit_dirs(dataset, tmp_path_factory):
    root = tmp_path_factory.mktemp("fits")
    for name, a in (("tv", 1.0), ("const", 0.0)):
        code = run(
            "fit", "--traces", dataset / "traces.csv", "--lambda", 0.08,
            "--a", a, "--B", 11, "--gamma", 0.96, "--out", root / name,
        )
        assert code == 0
    return root


class TestSimulate:
    def test_outputs_and_shapes(self, dataset):
        assert {p.name for p in dataset.iterdir()} == {
            "traces.csv", "truth_spikes.csv", "truth_rates.csv", "manifest.json"
        }
        traces = read_traces_csv(dataset / "traces.csv")
        assert traces.values.shape == (6, 300)
        assert traces.sample_rate_hz == 50.0

    def test_byte_identical_rerun(self, dataset, tmp_path):
        other = simulate_small(tmp_path / "again")
        for name in ("traces.csv", "truth_spikes.csv", "truth_rates.csv"):
            assert (dataset / name).read_bytes() == (other / name).read_bytes()

    def test_different_seed_differs(self, dataset, tmp_path):
        other = simulate_small(tmp_path / "seed2", seed=2)
        assert (dataset / "traces.csv").read_bytes() != (other / "traces.csv").read_bytes()

    def test_zero_rate(self, tmp_path):
        out = simulate_small(tmp_path / "zero", rate="zero")
        raster = read_counts_csv(out / "truth_spikes.csv")
        assert raster.counts.sum() == 0

    def test_table_rate(self, tmp_path):
        table = np.full((2, 50), 0.05)
        write_matrix_csv(tmp_path / "table.csv", table, 50.0)
        code = run("simulate", "--rate", "table", tmp_path / "table.csv",
                   "--seed", 3, "--out", tmp_path / "sim")
        assert code == 0
        assert read_traces_csv(tmp_path / "sim" / "traces.csv").values.shape == (2, 50)


class TestFit:
    def test_outputs(self, fit_dirs):
        for name in ("tv", "const"):
            files = {p.name for p in (fit_dirs / name).iterdir()}
            assert files == {
                "spikes.csv", "rates.csv", "penalties.csv", "segments.json", "manifest.json"
            }

    def test_methods_differ_and_const_matches_baseline(self, fit_dirs, dataset):
        tv = (fit_dirs / "tv" / "spikes.csv").read_text()
        const = (fit_dirs / "const" / "spikes.csv").read_text()
        assert tv != const
        # constant-penalty run marks method and keeps penalties flat
        pen = read_matrix_csv(fit_dirs / "const" / "penalties.csv")
        assert np.all(pen == 0.08)
        manifest = json.loads((fit_dirs / "const" / "manifest.json").read_text())
        assert manifest["config"]["method"] == "constant"

    def test_all_zero_traces_give_empty_spikes(self, tmp_path):
        from mtspike import TraceSet
        from mtspike.fileio import write_traces_csv

        write_traces_csv(tmp_path / "traces.csv",
                         TraceSet(values=np.zeros((2, 40)), sample_rate_hz=50.0))
        code = run("fit", "--traces", tmp_path / "traces.csv", "--lambda", 0.5,
                   "--gamma", 0.9, "--out", tmp_path / "fit")
        assert code == 0
        lines = (tmp_path / "fit" / "spikes.csv").read_text().splitlines()
        assert lines == ["trial,frame,time_s,jump"]

    def test_nonconvergence_exit_code(self, dataset, tmp_path):
        code = run("fit", "--traces", dataset / "traces.csv", "--lambda", 0.08,
                   "--a", 1, "--B", 11, "--gamma", 0.96, "--max-iter", 1,
                   "--out", tmp_path / "fit")
        assert code == 3

    def test_rerun_is_byte_identical(self, dataset, tmp_path):
        for d in ("r1", "r2"):
            code = run("fit", "--traces", dataset / "traces.csv", "--lambda", 0.08,
                       "--a", 1, "--B", 11, "--gamma", 0.96, "--out", tmp_path / d)
            assert code == 0
        for name in ("spikes.csv", "rates.csv", "penalties.csv", "segments.json"):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_parse_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# hz=50\n1.0,2.0\n3.0,x\n")
        code = run("fit", "--traces", bad, "--lambda", 0.5, "--out", tmp_path / "f")
        assert code == 2

    def test_missing_input_exit_code(self, tmp_path):
        code = run("fit", "--traces", tmp_path / "none.csv", "--lambda", 0.5,
                   "--out", tmp_path / "f")
        assert code == 1

    def test_bad_flag_values_exit_one(self, dataset, tmp_path):
        base = ["fit", "--traces", dataset / "traces.csv", "--out", tmp_path / "f"]
        assert run(*base, "--lambda", 0.5, "--gamma", "fast") == 1
        assert run(*base, "--lambda", -2.0, "--gamma", 0.9) == 1


class TestUsageErrors:
    def test_missing_required_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("fit", "--out", "/tmp/x")
        assert exc.value.code == 1

    def test_unknown_scenario(self):
        with pytest.raises(SystemExit) as exc:
            run("benchmark", "--scenario", "bogus", "--out", "/tmp/x")
        assert exc.value.code == 1


class TestEvaluate:
    def test_truth_against_itself_is_zero(self, dataset, tmp_path):
        est = tmp_path / "perfect"
        est.mkdir()
        raster = read_counts_csv(dataset / "truth_spikes.csv")
        with open(est / "spikes.csv", "w") as fh:
            fh.write("trial,frame,time_s,jump\n")
            for r, t in zip(*np.nonzero(raster.counts)):
                for _ in range(raster.counts[r, t]):
                    fh.write(f"{r + 1},{t + 1},{(t + 1) / 50.0:.17g},1.0\n")
        shutil.copy(dataset / "truth_rates.csv", est / "rates.csv")
        write_manifest(est, "fit", {"lambda": 0.1, "method": "perfect"}, seed=0)
        code = run("evaluate", "--est", est, "--truth", dataset, "--q", 1,
                   "--out", tmp_path / "eval")
        assert code == 0
        rows = (tmp_path / "eval" / "metrics.csv").read_text().splitlines()
        assert rows[0] == "lambda,method,mean_vp,mean_l2_rate,n_replicates"
        lam, method, vp, l2, n = rows[1].split(",")
        assert float(vp) == 0.0
        assert float(l2) == 0.0
        assert n == "1"

    def test_empty_estimate_scores_mean_count(self, dataset, tmp_path):
        est = tmp_path / "empty"
        est.mkdir()
        (est / "spikes.csv").write_text("trial,frame,time_s,jump\n")
        truth_rates = read_matrix_csv(dataset / "truth_rates.csv")
        write_matrix_csv(est / "rates.csv", np.zeros_like(truth_rates), 50.0)
        write_manifest(est, "fit", {"lambda": 0.1, "method": "empty"}, seed=0)
        code = run("evaluate", "--est", est, "--truth", dataset, "--out", tmp_path / "eval")
        assert code == 0
        row = (tmp_path / "eval" / "metrics.csv").read_text().splitlines()[1]
        vp = float(row.split(",")[2])
        truth = read_counts_csv(dataset / "truth_spikes.csv")
        assert vp == pytest.approx(truth.counts.sum(axis=1).mean())

    def test_directory_of_runs_grouped(self, dataset, fit_dirs, tmp_path):
        code = run("evaluate", "--est", fit_dirs, "--truth", dataset,
                   "--out", tmp_path / "eval")
        assert code == 0
        rows = (tmp_path / "eval" / "metrics.csv").read_text().splitlines()
        assert len(rows) == 3  # header + tv + const
        assert (tmp_path / "eval" / "summary.svg").exists()
        svg = (tmp_path / "eval" / "summary.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_missing_truth(self, fit_dirs, tmp_path):
        code = run("evaluate", "--est", fit_dirs, "--truth", tmp_path / "nothere",
                   "--out", tmp_path / "eval")
        assert code == 1


class TestBenchmarkCommand:
    def test_single_replicate_small_grid(self, tmp_path):
        code = run("benchmark", "--scenario", "constant_rate", "--replicates", 1,
                   "--lambda-grid", "0.06,0.12", "--seed", 5, "--out", tmp_path / "b")
        assert code == 0
        out = tmp_path / "b"
        results = (out / "benchmark_results.csv").read_text().splitlines()
        assert results[0] == (
            "scenario,lambda,method,mean_vp,mean_l2_rate,mean_l2_field,n_replicates"
        )
        assert len(results) == 5  # header + 2 lambdas x 2 methods
        assert (out / "report.md").exists()
        assert (out / "plots" / "vp_vs_lambda.svg").exists()
        assert (out / "plots" / "l2_vs_lambda.svg").exists()
        assert (out / "manifest.json").exists()

    def test_deterministic_rows(self, tmp_path):
        for d in ("b1", "b2"):
            assert run("benchmark", "--scenario", "dynamic_rate", "--replicates", 1,
                       "--lambda-grid", "0.08", "--seed", 9, "--out", tmp_path / d) == 0
        a = (tmp_path / "b1" / "benchmark_results.csv").read_bytes()
        b = (tmp_path / "b2" / "benchmark_results.csv").read_bytes()
        assert a == b
