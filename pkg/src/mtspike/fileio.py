"""CSV/JSON artifact formats and the reproducibility manifest.

Matrix artifacts (traces, spike counts, rates, penalties) are one row per
trial with a leading ``# hz=<rate>`` comment; floats are written with 17
significant digits so a write-read round trip is value-exact. Detected
spikes are sparse ``trial,frame,time_s,jump`` rows with 1-based trial and
frame numbers.

Every command writes exactly one ``manifest.json`` (UTF-8, sorted keys)
recording the command, the fully resolved configuration, the seed, a digest
of the inputs and the tool version; re-running a command from its manifest
reproduces the CSV outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import MissingInputError, ParseError
from .model import SpikeRaster, TraceSet

__all__ = [
    "RunManifest",
    "write_traces_csv",
    "read_traces_csv",
    "write_counts_csv",
    "read_counts_csv",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_spikes_csv",
    "read_spikes_csv",
    "write_segments_json",
    "write_manifest",
    "read_manifest",
    "digest_files",
]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingInputError(f"missing input: {path}")
    return path


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    seed: int
    input_digest: str
    tool_version: str
    timestamp: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def digest_files(*paths) -> str:
    """sha256 over the named files' bytes, in argument order."""
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, seed: int, input_digest: str = "") -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command=command,
        config=config,
        seed=int(seed),
        input_digest=input_digest,
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    path = out_dir / "manifest.json"
    path.write_text(manifest.to_json(), encoding="utf-8")
    return path


def read_manifest(run_dir) -> dict:
    path = _require(Path(run_dir) / "manifest.json")
    return json.loads(path.read_text(encoding="utf-8"))


def _write_rows(path, matrix, hz: float, fmt) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# hz={_fmt(hz)}\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _read_rows(path) -> tuple[np.ndarray, float]:
    path = _require(Path(path))
    hz = None
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("hz="):
                try:
                    hz = float(body[3:])
                except ValueError:
                    raise ParseError(f"bad hz header {body!r}", line=lineno) from None
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"expected {width} columns, got {len(cells)}", line=lineno
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as e:
            col = next(i for i, c in enumerate(cells, start=1) if not _is_float(c))
            raise ParseError(f"bad number: {e}", line=lineno, column=col) from None
    if not rows:
        raise ParseError(f"{path} contains no data rows")
    return np.asarray(rows), hz


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_traces_csv(path, traces: TraceSet) -> None:
    _write_rows(path, traces.values, traces.sample_rate_hz, _fmt)


def read_traces_csv(path, default_hz: float = 50.0) -> TraceSet:
    values, hz = _read_rows(path)
    return TraceSet(values=values, sample_rate_hz=hz if hz is not None else default_hz)


def write_counts_csv(path, raster: SpikeRaster) -> None:
    _write_rows(path, raster.counts, raster.sample_rate_hz, lambda v: str(int(v)))


def read_counts_csv(path, default_hz: float = 50.0) -> SpikeRaster:
    values, hz = _read_rows(path)
    return SpikeRaster(counts=values, sample_rate_hz=hz if hz is not None else default_hz)


def write_matrix_csv(path, matrix, hz: float) -> None:
    _write_rows(path, matrix, hz, _fmt)


def read_matrix_csv(path) -> np.ndarray:
    values, _ = _read_rows(path)
    return values


def write_spikes_csv(path, segmentations, sample_rate_hz: float) -> None:
    """Sparse detected-spike table: 1-based trial and spike frame, the spike
    time in seconds, and the fitted jump size."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("trial,frame,time_s,jump\n")
        for r, seg in enumerate(segmentations, start=1):
            for tau, jump in zip(seg.changepoints, seg.jumps):
                frame = int(tau) + 1
                fh.write(
                    f"{r},{frame},{_fmt(frame / sample_rate_hz)},{_fmt(jump)}\n"
                )


def read_spikes_csv(path, n_trials: int, n_frames: int, sample_rate_hz: float) -> SpikeRaster:
    """Rebuild a raster from a sparse spike table."""
    path = _require(Path(path))
    counts = np.zeros((n_trials, n_frames), dtype=np.int64)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",")[:2] != ["trial", "frame"]:
        raise ParseError("spikes.csv must start with a trial,frame,... header", line=1)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            trial, frame = int(cells[0]), int(cells[1])
        except (ValueError, IndexError):
            raise ParseError("bad spike row", line=lineno) from None
        if not (1 <= trial <= n_trials and 1 <= frame <= n_frames):
            raise ParseError(
                f"spike ({trial}, {frame}) outside {n_trials} x {n_frames}", line=lineno
            )
        counts[trial - 1, frame - 1] += 1
    return SpikeRaster(counts=counts, sample_rate_hz=sample_rate_hz)


def write_segments_json(path, segmentations, gamma) -> None:
    """Per-trial summaries: changepoints, jumps, objective, gamma."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [
        {
            "trial": r,
            "gamma": float(g),
            "objective": seg.objective,
            "changepoints": [int(v) for v in seg.changepoints],
            "jumps": [float(v) for v in seg.jumps],
        }
        for r, (seg, g) in enumerate(zip(segmentations, gamma), start=1)
    ]
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
