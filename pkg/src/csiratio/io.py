"""On-disk formats: CSI record files, ground-truth sidecars, result streams.

A record file is comma-separated text::

    # csiratio-record 1
    # sample_rate=100
    # n_antennas=2
    # n_subcarriers=30
    # carrier_frequency=5240000000
    timestamp,antenna,subcarrier,re,im
    0,1,1,0.84131...,-0.3313...

Antenna and subcarrier indices are 1-based and every frame lists all
antenna x subcarrier rows, antenna-major.  Floats use 17 significant
digits so a write/read round trip is exact.  Paths ending in ``.gz`` are
gzip-compressed with a zero mtime, keeping outputs byte-identical across
runs.
"""

from __future__ import annotations

import gzip
import io as _io
import json
from pathlib import Path
from typing import Iterable, List, Union

import jsonschema
import numpy as np

from .core import CsiStream
from .exceptions import RecordFormatError
from .rate import RateEstimate
from .simulate import GroundTruth

FORMAT_NAME = "csiratio-record"
FORMAT_VERSION = 1
COLUMNS = ("timestamp", "antenna", "subcarrier", "re", "im")
HEADER_KEYS = ("sample_rate", "n_antennas", "n_subcarriers", "carrier_frequency")

PathLike = Union[str, Path]


def _open_text(path: PathLike, mode: str):
    path = str(path)
    if path.endswith(".gz"):
        if "w" in mode:
            raw = open(path, "wb")
            gz = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
            return _ClosingWrapper(_io.TextIOWrapper(gz, encoding="ascii", newline="\n"), raw)
        return _io.TextIOWrapper(gzip.open(path, "rb"), encoding="ascii")
    return open(path, mode, encoding="ascii", newline="\n" if "w" in mode else None)


class _ClosingWrapper:
    """Closes the underlying file after the gzip stream (GzipFile leaves it open)."""

    def __init__(self, text, raw):
        self._text, self._raw = text, raw

    def write(self, s):
        return self._text.write(s)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self._text.close()
        self._raw.close()


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_csi_record(path: PathLike, stream: CsiStream) -> None:
    n_t, n_a, n_k = stream.values.shape
    ant = np.repeat(np.arange(1, n_a + 1), n_k)
    sub = np.tile(np.arange(1, n_k + 1), n_a)
    with _open_text(path, "w") as f:
        f.write(f"# {FORMAT_NAME} {FORMAT_VERSION}\n")
        f.write(f"# sample_rate={_fmt(stream.sample_rate)}\n")
        f.write(f"# n_antennas={n_a}\n")
        f.write(f"# n_subcarriers={n_k}\n")
        f.write(f"# carrier_frequency={_fmt(stream.carrier_frequency)}\n")
        f.write(",".join(COLUMNS) + "\n")
        for t, frame in zip(stream.timestamps, stream.values):
            ts = _fmt(t)
            flat = frame.reshape(-1)
            f.write(
                "".join(
                    f"{ts},{a},{k},{_fmt(z.real)},{_fmt(z.imag)}\n" for a, k, z in zip(ant, sub, flat)
                )
            )


def _parse_header(lines, path):
    header = {}
    n = 0
    for n, line in enumerate(lines, start=1):
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if n == 1:
            parts = body.split()
            if len(parts) != 2 or parts[0] != FORMAT_NAME:
                raise RecordFormatError(f"{path}: not a {FORMAT_NAME} file", line=1)
            if parts[1] != str(FORMAT_VERSION):
                raise RecordFormatError(f"{path}: unsupported format version {parts[1]}", line=1)
            continue
        if "=" not in body:
            raise RecordFormatError(f"{path}: malformed header line", line=n)
        key, value = (s.strip() for s in body.split("=", 1))
        header[key] = value
    else:
        n += 1
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise RecordFormatError(f"{path}: header lacks {', '.join(missing)}", line=n)
    try:
        meta = {
            "sample_rate": float(header["sample_rate"]),
            "n_antennas": int(header["n_antennas"]),
            "n_subcarriers": int(header["n_subcarriers"]),
            "carrier_frequency": float(header["carrier_frequency"]),
        }
    except ValueError as exc:
        raise RecordFormatError(f"{path}: bad header value ({exc})", line=n) from None
    if meta["sample_rate"] <= 0 or meta["n_antennas"] < 1 or meta["n_subcarriers"] < 1:
        raise RecordFormatError(f"{path}: header values must be positive", line=n)
    return meta, n


def read_csi_record(path: PathLike) -> CsiStream:
    """Parse a record file; errors name the offending line (1-based)."""
    with _open_text(path, "r") as f:
        lines = f.read().splitlines()
    meta, first = _parse_header(lines, path)
    if first > len(lines) or lines[first - 1].strip() != ",".join(COLUMNS):
        raise RecordFormatError(f"{path}: expected column line {','.join(COLUMNS)!r}", line=first)
    n_a, n_k = meta["n_antennas"], meta["n_subcarriers"]
    per_frame = n_a * n_k
    expect_ant = np.repeat(np.arange(1, n_a + 1), n_k)
    expect_sub = np.tile(np.arange(1, n_k + 1), n_a)

    body = [(i, ln) for i, ln in enumerate(lines[first:], start=first + 1) if ln.strip()]
    ts = np.empty(len(body))
    values = np.empty(len(body), dtype=np.complex128)
    for row, (lineno, line) in enumerate(body):
        parts = line.split(",")
        if len(parts) != len(COLUMNS):
            raise RecordFormatError(f"{path}: expected {len(COLUMNS)} fields, got {len(parts)}", line=lineno)
        try:
            t, a, k = float(parts[0]), int(parts[1]), int(parts[2])
            z = complex(float(parts[3]), float(parts[4]))
        except ValueError as exc:
            raise RecordFormatError(f"{path}: {exc}", line=lineno) from None
        slot = row % per_frame
        if a != expect_ant[slot] or k != expect_sub[slot]:
            raise RecordFormatError(
                f"{path}: expected antenna {expect_ant[slot]} subcarrier {expect_sub[slot]}, "
                f"got antenna {a} subcarrier {k}",
                line=lineno,
            )
        if slot and t != ts[row - 1]:
            raise RecordFormatError(f"{path}: timestamp changes inside a frame", line=lineno)
        if not slot and row and not t > ts[row - 1]:
            raise RecordFormatError(f"{path}: timestamps must increase between frames", line=lineno)
        if not (np.isfinite(t) and np.isfinite(z)):
            raise RecordFormatError(f"{path}: non-finite value", line=lineno)
        ts[row] = t
        values[row] = z
    if not body:
        raise RecordFormatError(f"{path}: no data rows", line=first + 1)
    if len(body) % per_frame:
        start = body[len(body) - len(body) % per_frame][0]
        raise RecordFormatError(
            f"{path}: truncated file, last frame has {len(body) % per_frame} of {per_frame} rows", line=start
        )
    n_t = len(body) // per_frame
    return CsiStream(
        timestamps=ts[::per_frame].copy(),
        values=values.reshape(n_t, n_a, n_k),
        sample_rate=meta["sample_rate"],
        carrier_frequency=meta["carrier_frequency"],
    )


def sidecar_path(record_path: PathLike) -> Path:
    """``run.csv`` / ``run.csv.gz`` -> ``run.truth.json``."""
    p = Path(record_path)
    name = p.name
    for suffix in (".gz", ".csv"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return p.with_name(name + ".truth.json")


def write_truth(path: PathLike, truth: GroundTruth) -> None:
    Path(path).write_text(json.dumps(truth.to_dict(), sort_keys=True) + "\n")


def read_truth(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())


RESULT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "csiratio window estimate",
    "type": "object",
    "required": [
        "timestamp",
        "end_time",
        "status",
        "rate_bpm",
        "first_peak_lag",
        "contributing_subcarriers",
        "bnr",
        "stationary",
    ],
    "additionalProperties": False,
    "properties": {
        "timestamp": {"type": "number"},
        "end_time": {"type": "number"},
        "status": {"enum": ["ok", "non_stationary", "no_peak"]},
        "rate_bpm": {"type": ["number", "null"]},
        "first_peak_lag": {"type": ["integer", "null"], "minimum": 1},
        "in_band": {"type": "boolean"},
        "contributing_subcarriers": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "bnr": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"type": "number", "minimum": 0, "maximum": 1}},
            "additionalProperties": False,
        },
        "stationary": {"type": "boolean"},
    },
    "allOf": [
        {
            "if": {"properties": {"status": {"const": "ok"}}},
            "then": {"properties": {"rate_bpm": {"type": "number"}, "first_peak_lag": {"type": "integer"}}},
            "else": {"properties": {"rate_bpm": {"type": "null"}}},
        }
    ],
}


def result_record(est: RateEstimate) -> dict:
    ok = est.ok
    return {
        "timestamp": est.start_time,
        "end_time": est.end_time,
        "status": est.status,
        "rate_bpm": float(est.rate_bpm) if ok else None,
        "first_peak_lag": int(est.first_peak_lag) if ok else None,
        "in_band": bool(est.in_band),
        "contributing_subcarriers": [int(k) for k in est.contributing_subcarriers],
        "bnr": {str(k): float(v) for k, v in sorted(est.per_subcarrier_bnr.items())},
        "stationary": bool(est.stationary),
    }


def write_results(fileobj, estimates: Iterable[RateEstimate]) -> int:
    """Write one JSON object per line, in window order; returns the count."""
    n = 0
    for est in sorted(estimates, key=lambda e: e.start_time):
        fileobj.write(json.dumps(result_record(est), sort_keys=True) + "\n")
        n += 1
    return n


def validate_results(lines: Iterable[str]) -> List[dict]:
    """Parse and schema-check a result stream; raises on the first bad line."""
    validator = jsonschema.Draft7Validator(RESULT_SCHEMA)
    records = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordFormatError(f"result line is not JSON: {exc.msg}", line=n) from None
        errors = sorted(validator.iter_errors(rec), key=lambda e: list(e.path))
        if errors:
            raise RecordFormatError(f"result record invalid: {errors[0].message}", line=n)
        records.append(rec)
    return records
