"""Observation-matrix I/O and machine-readable report writing.

Supported input formats:

* ``csv``  -- one observation per line, comma separated, optional single
  header line (skipped when any of its cells is non-numeric).
* ``raw``  -- magic ``CPKN``, little-endian u64 ``n``, u64 ``d``, then
  ``n * d`` little-endian float64 values, row major.  Meant for wide
  matrices (fMRI-scale d) where CSV is impractical.

Rows are time ordered and never reordered by I/O.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, TooFewObservations, ValidationError

RAW_MAGIC = b"CPKN"
MIN_OBSERVATIONS = 5


@dataclass(frozen=True)
class DataMatrix:
    """Validated observation sequence: n rows (time order) by d columns."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValidationError(f"expected a 2-d matrix, got ndim={v.ndim}")
        if v.shape[1] < 1:
            raise ValidationError("dimension d must be >= 1")
        if v.shape[0] < MIN_OBSERVATIONS:
            raise TooFewObservations(
                f"need at least {MIN_OBSERVATIONS} observations, got {v.shape[0]}"
            )
        bad = np.argwhere(~np.isfinite(v))
        if bad.size:
            r, c = bad[0]
            raise ValidationError(
                f"non-finite value at row {r + 1}, column {c + 1}", row=int(r) + 1, col=int(c) + 1
            )


def _looks_like_header(cells) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def _load_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if lineno == 1 and _looks_like_header(cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(
                    f"{path}: line {lineno} has {len(cells)} cells, expected {width}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _load_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != RAW_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}, expected {RAW_MAGIC!r}")
        header = fh.read(16)
        if len(header) != 16:
            raise ParseError(f"{path}: truncated header")
        n = int.from_bytes(header[:8], "little")
        d = int.from_bytes(header[8:], "little")
        data = np.fromfile(fh, dtype="<f8", count=n * d)
    if data.size != n * d:
        raise ParseError(f"{path}: expected {n * d} values, got {data.size}")
    return data.reshape(n, d)


def load_matrix(path, format: str = "csv") -> DataMatrix:
    """Load and validate an observation matrix.

    Raises ParseError for malformed files, ValidationError for non-finite
    entries, TooFewObservations for n < 5.
    """
    if format == "csv":
        values = _load_csv(path)
    elif format in ("raw", "raw-f64"):
        values = _load_raw(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    return DataMatrix(np.ascontiguousarray(values))


def save_matrix(matrix, path, format: str = "csv") -> None:
    """Write a matrix in a loadable format (raw round-trips bit-exactly)."""
    values = matrix.values if isinstance(matrix, DataMatrix) else np.asarray(matrix, dtype=np.float64)
    if format == "csv":
        # %.17g guarantees float64 round-trip
        np.savetxt(path, values, fmt="%.17g", delimiter=",")
    elif format in ("raw", "raw-f64"):
        n, d = values.shape
        with open(path, "wb") as fh:
            fh.write(RAW_MAGIC)
            fh.write(int(n).to_bytes(8, "little"))
            fh.write(int(d).to_bytes(8, "little"))
            np.ascontiguousarray(values, dtype="<f8").tofile(fh)
    else:
        raise ValueError(f"unknown format {format!r}")


def _jsonify(value):
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return value
    return value


def report_json(report) -> str:
    """Serialize a report object (anything with to_json_dict) deterministically."""
    return json.dumps(_jsonify(report.to_json_dict()), indent=2) + "\n"


def write_report(report, path, trace_path=None) -> None:
    """Write the JSON report; optionally dump the per-t trace as CSV.

    Trace columns: t, r1, r2, z_w, z_diff, m.
    """
    text = report_json(report)
    with open(path, "w") as fh:
        fh.write(text)
    if trace_path is not None:
        rows = report.trace_rows()
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "r1", "r2", "z_w", "z_diff", "m"])
            for row in rows:
                writer.writerow(row)
