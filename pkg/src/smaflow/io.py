"""State snapshots and time-series export.

Snapshot layout: an ASCII header

    SMAFLOW1
    n=<resolution>
    t=<repr of the time>
    fields=v1,v2,phi

followed by the row-major little-endian float64 physical values of v1, v2 and
phi.  The payload is the physical representation, so a save/load round trip is
bit-exact and the spectral data is recomputed on load.

Time series are written as CSV (17 significant digits) or JSON with the exact
column set of DiagnosticsRecord.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord
from .model import State
from .spectral import Field, VectorField, make_grid

__all__ = [
    "SnapshotError",
    "TimeseriesError",
    "SNAPSHOT_MAGIC",
    "save_snapshot",
    "load_snapshot",
    "write_timeseries",
    "read_timeseries",
]

SNAPSHOT_MAGIC = "SMAFLOW1"
TIMESERIES_COLUMNS = tuple(f.name for f in dataclasses.fields(DiagnosticsRecord))


class SnapshotError(ValueError):
    """Malformed snapshot file or non-finite payload."""


class TimeseriesError(ValueError):
    """Malformed time-series file."""


def save_snapshot(state: State, path: str | Path) -> None:
    arrays = (state.v.c1.values, state.v.c2.values, state.phi.values)
    for name, a in zip(("v1", "v2", "phi"), arrays):
        if not np.all(np.isfinite(a)):
            raise SnapshotError(f"refusing to save non-finite field {name}")
    header = f"{SNAPSHOT_MAGIC}\nn={state.grid.n}\nt={state.t!r}\nfields=v1,v2,phi\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_snapshot(path: str | Path) -> State:
    path = Path(path)
    if not path.exists():
        raise SnapshotError(f"snapshot not found: {path}")
    blob = path.read_bytes()
    lines = []
    offset = 0
    for _ in range(4):
        end = blob.find(b"\n", offset)
        if end < 0:
            raise SnapshotError(f"truncated snapshot header in {path}")
        lines.append(blob[offset:end].decode("ascii", errors="replace"))
        offset = end + 1
    if lines[0] != SNAPSHOT_MAGIC:
        raise SnapshotError(f"bad magic in {path}: expected {SNAPSHOT_MAGIC!r}, got {lines[0]!r}")
    try:
        n = int(lines[1].removeprefix("n="))
        t = float(lines[2].removeprefix("t="))
    except ValueError as err:
        raise SnapshotError(f"malformed snapshot header in {path}: {err}") from err
    if lines[3] != "fields=v1,v2,phi":
        raise SnapshotError(f"unexpected field list in {path}: {lines[3]!r}")
    expected = 3 * n * n * 8
    payload = blob[offset:]
    if len(payload) != expected:
        raise SnapshotError(f"payload size mismatch in {path}: expected {expected} bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype="<f8").reshape(3, n, n)
    if not np.all(np.isfinite(data)):
        raise SnapshotError(f"non-finite payload in {path}")
    grid = make_grid(n)
    return State(
        v=VectorField(Field.from_physical(grid, data[0]), Field.from_physical(grid, data[1])),
        phi=Field.from_physical(grid, data[2]),
        t=t,
    )


def _record_list(traj_or_records) -> list[DiagnosticsRecord]:
    records = getattr(traj_or_records, "records", traj_or_records)
    return list(records)


def write_timeseries(traj_or_records, path: str | Path, fmt: str = "csv") -> None:
    records = _record_list(traj_or_records)
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(TIMESERIES_COLUMNS)]
        for r in records:
            lines.append(",".join(f"{getattr(r, c):.17g}" for c in TIMESERIES_COLUMNS))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        rows = [{c: getattr(r, c) for c in TIMESERIES_COLUMNS} for r in records]
        path.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    else:
        raise TimeseriesError(f"unknown time-series format {fmt!r}; expected csv or json")


def read_timeseries(path: str | Path) -> list[DiagnosticsRecord]:
    path = Path(path)
    if not path.exists():
        raise TimeseriesError(f"time series not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json" or text.lstrip().startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as err:
            raise TimeseriesError(f"parse error in {path}: {err.msg}") from err
        return [_row_to_record(dict(row), path) for row in rows]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TimeseriesError(f"empty time series {path}")
    header = lines[0].split(",")
    if tuple(header) != TIMESERIES_COLUMNS:
        raise TimeseriesError(f"unexpected columns in {path}: {header}")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(TIMESERIES_COLUMNS):
            raise TimeseriesError(f"bad row in {path}: {ln!r}")
        records.append(_row_to_record(dict(zip(TIMESERIES_COLUMNS, (float(p) for p in parts))), path))
    return records


def _row_to_record(row: dict, path: Path) -> DiagnosticsRecord:
    missing = set(TIMESERIES_COLUMNS) - set(row)
    if missing:
        raise TimeseriesError(f"missing columns {sorted(missing)} in {path}")
    values = {c: float(row[c]) for c in TIMESERIES_COLUMNS}
    if not all(math.isfinite(v) for v in values.values()):
        raise TimeseriesError(f"non-finite entry in {path}")
    return DiagnosticsRecord(**values)
