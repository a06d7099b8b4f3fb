import json

import numpy as np
import pytest

from mtspike import SpikeRaster, TraceSet, solve_l0
from mtspike.exceptions import MissingInputError, ParseError
from mtspike.fileio import (
    digest_files,
    read_counts_csv,
    read_manifest,
    read_matrix_csv,
    read_spikes_csv,
    read_traces_csv,
    write_counts_csv,
    write_manifest,
    write_matrix_csv,
    write_spikes_csv,
    write_traces_csv,
)


class TestMatrixRoundTrips:
    def test_traces_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        values = np.concatenate(
            [rng.normal(0, 1, (2, 30)), [[1e-300] * 30], [[1.2345678901234567e17] * 30]]
        )
        ts = TraceSet(values=values, sample_rate_hz=50.0)
        write_traces_csv(tmp_path / "traces.csv", ts)
        back = read_traces_csv(tmp_path / "traces.csv")
        assert np.array_equal(back.values, values)
        assert back.sample_rate_hz == 50.0

    def test_counts_round_trip(self, tmp_path):
        counts = np.random.default_rng(2).poisson(0.5, (4, 50))
        raster = SpikeRaster(counts=counts, sample_rate_hz=15.0)
        write_counts_csv(tmp_path / "c.csv", raster)
        back = read_counts_csv(tmp_path / "c.csv")
        assert np.array_equal(back.counts, counts)
        assert back.sample_rate_hz == 15.0

    def test_matrix_round_trip(self, tmp_path):
        m = np.random.default_rng(3).uniform(-5, 5, (3, 20))
        write_matrix_csv(tmp_path / "m.csv", m, 50.0)
        assert np.array_equal(read_matrix_csv(tmp_path / "m.csv"), m)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputError):
            read_traces_csv(tmp_path / "nope.csv")

    def test_parse_error_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# hz=50\n1.0,2.0\n1.0,oops\n")
        err = pytest.raises(ParseError, read_traces_csv, p).value
        assert err.line == 3
        assert err.column == 2

    def test_ragged_rows_rejected(self, tmp_path):
        p = tmp_path / "ragged.csv"
        p.write_text("# hz=50\n1.0,2.0\n1.0\n")
        err = pytest.raises(ParseError, read_traces_csv, p).value
        assert err.line == 3


class TestSpikesCsv:
    def test_round_trip_through_sparse_format(self, tmp_path):
        rng = np.random.default_rng(4)
        y = np.zeros(80)
        segs = []
        for r in range(3):
            trace = rng.normal(0, 0.1, 80)
            trace[20 + r :] += 0.9 ** np.arange(60 - r)
            segs.append(solve_l0(trace, 0.9, np.full(80, 0.4)))
        write_spikes_csv(tmp_path / "spikes.csv", segs, 50.0)
        raster = read_spikes_csv(tmp_path / "spikes.csv", 3, 80, 50.0)
        for r, seg in enumerate(segs):
            want = np.zeros(80, dtype=np.int64)
            want[seg.changepoints] = 1
            assert np.array_equal(raster.counts[r], want)

    def test_header_and_one_based_frames(self, tmp_path):
        seg = solve_l0(
            np.concatenate([np.zeros(49), 0.96 ** np.arange(51)]),
            0.96,
            np.full(100, 0.1),
        )
        write_spikes_csv(tmp_path / "spikes.csv", [seg], 50.0)
        lines = (tmp_path / "spikes.csv").read_text().splitlines()
        assert lines[0] == "trial,frame,time_s,jump"
        trial, frame, time_s, _ = lines[1].split(",")
        assert (trial, frame) == ("1", "50")
        assert float(time_s) == 1.0

    def test_out_of_range_spike_rejected(self, tmp_path):
        p = tmp_path / "spikes.csv"
        p.write_text("trial,frame,time_s,jump\n9,5,0.1,1.0\n")
        with pytest.raises(ParseError):
            read_spikes_csv(p, 3, 80, 50.0)

    def test_missing_header_rejected(self, tmp_path):
        p = tmp_path / "spikes.csv"
        p.write_text("1,5,0.1,1.0\n")
        with pytest.raises(ParseError):
            read_spikes_csv(p, 3, 80, 50.0)


class TestManifest:
    def test_written_sorted_and_readable(self, tmp_path):
        write_manifest(tmp_path, "simulate", {"b": 1, "a": 2}, seed=7, input_digest="")
        raw = (tmp_path / "manifest.json").read_text()
        data = json.loads(raw)
        assert data["command"] == "simulate"
        assert data["seed"] == 7
        assert list(data.keys()) == sorted(data.keys())
        assert read_manifest(tmp_path)["config"] == {"a": 2, "b": 1}

    def test_digest_is_stable(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("1,2,3\n")
        assert digest_files(f) == digest_files(f)
        f2 = tmp_path / "y.csv"
        f2.write_text("1,2,4\n")
        assert digest_files(f) != digest_files(f2)
