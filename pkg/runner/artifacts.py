#!/usr/bin/env python3
"""
DKPP Artifacts Module
Run-directory files: binary field snapshots, the report JSON, residual and
study CSV tables, and flat plot-data CSVs. Output is deterministic: floats are
written with repr, JSON with sorted keys, snapshots as raw little-endian bytes.
"""

import csv
import json
import logging
import math
import struct
from pathlib import Path

import numpy as np

from config import SNAPSHOT_MAGIC, SNAPSHOT_VERSION
from errors import ArtifactError
from model.problem import SpaceTimeField, TimeWindow
from spectral.grid import Grid

logger = logging.getLogger(__name__)

# magic, version u32, N u64, M u64, L f64, T f64
SNAPSHOT_HEADER = struct.Struct("<4sIQQdd")

REPORT_FILE = "report.json"
RESIDUALS_FILE = "residuals.csv"
FIELD_FILE = "field.dkpp"
CONFIG_COPY = "config.json"
PLOT_KINDS = ("field", "norms", "residuals")


def window_field_file(index: int) -> str:
    return f"field_{index:03d}.dkpp"


def write_snapshot(path, field: SpaceTimeField) -> Path:
    """Writes u(x_j, t_m) time-major after the fixed header."""
    path = Path(path)
    header = SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        field.grid.n_points,
        field.window.steps,
        field.grid.half_width,
        field.window.horizon,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return path


def read_snapshot(path) -> SpaceTimeField:
    """
    Reads a snapshot back into a SpaceTimeField.

    Raises:
        ArtifactError: If the file is missing, truncated, or has the wrong magic or version
    """
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"snapshot not found: {path}")
    data = path.read_bytes()
    if len(data) < SNAPSHOT_HEADER.size:
        raise ArtifactError(f"{path} is too short for a snapshot header")
    magic, version, n, m, half_width, horizon = SNAPSHOT_HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ArtifactError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ArtifactError(f"{path}: unsupported snapshot version {version}")
    expected = SNAPSHOT_HEADER.size + 8 * (m + 1) * n
    if len(data) != expected:
        raise ArtifactError(f"{path}: {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=SNAPSHOT_HEADER.size).reshape(m + 1, n)
    return SpaceTimeField(values.astype(float), Grid(half_width, int(n)), TimeWindow(horizon, int(m)))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path, document: dict) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(document), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"artifact not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{path} is not valid JSON: {e}") from e


def write_table(path, header, rows) -> Path:
    """CSV with repr-formatted floats; None becomes an empty cell."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_table(path):
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"artifact not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ArtifactError(f"{path} is empty")
    return rows[0], rows[1:]


def residual_rows(residuals) -> list:
    """(iteration, residual, ratio) with ratio empty when the previous residual is at roundoff."""
    floor = 1e2 * np.finfo(float).eps
    rows = []
    for n, r in enumerate(residuals):
        ratio = None
        if n > 0 and residuals[n - 1] > floor:
            ratio = r / residuals[n - 1]
        rows.append((n + 1, float(r), ratio))
    return rows


def write_residuals(path, residuals) -> Path:
    return write_table(path, ("iteration", "residual", "ratio"), residual_rows(residuals))


def field_rows(field: SpaceTimeField):
    for t, level in zip(field.window.levels, field.values):
        for x, value in zip(field.grid.x, level):
            yield float(x), float(t), float(value)


def emit_plot(run_dir, what: str, out=None) -> Path:
    """
    Flattens one run-directory artifact to a plotting CSV.

    Args:
        run_dir: A run directory written by solve or march
        what (str): 'field' (x, t, value), 'norms' (window plus one column per norm)
            or 'residuals' (iteration, residual)

    Returns:
        Path: The written CSV

    Raises:
        ArtifactError: If the requested artifact is missing or `what` is unknown
    """
    run_dir = Path(run_dir)
    if what not in PLOT_KINDS:
        raise ArtifactError(f"unknown plot data {what!r}, expected one of {PLOT_KINDS}")
    out = Path(out) if out is not None else run_dir / f"plot_{what}.csv"

    if what == "field":
        snapshots = sorted(run_dir.glob("field*.dkpp"))
        if not snapshots:
            raise ArtifactError(f"no field snapshot in {run_dir}")
        return write_table(out, ("x", "t", "value"), field_rows(read_snapshot(snapshots[-1])))

    report = read_json(run_dir / REPORT_FILE)
    windows = report.get("windows") or [report]
    if what == "norms":
        rows = []
        for index, entry in enumerate(windows):
            norms = entry.get("norms")
            if not norms:
                raise ArtifactError(f"{run_dir / REPORT_FILE} has no norms for window {index}")
            rows.append((index, norms["l2"], norms["h2alpha"], norms["w122"]))
        return write_table(out, ("window", "l2", "h2alpha", "w122"), rows)

    residuals_path = run_dir / RESIDUALS_FILE
    _, rows = read_table(residuals_path)
    # copy cells verbatim so the plot file agrees with the residual table digit for digit
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("iteration", "residual"))
        for row in rows:
            writer.writerow(row[:2])
    return out
