"""CSV frame I/O, duplicate-timestamp handling, and grid regularization.

The raw-to-regular path: read_csv -> deduplicate -> regularize. Duplicated
timestamps keep their first occurrence only; the sampling interval is the
mode of adjacent time differences (ties prefer the smaller, denser grid);
grid ticks without an observed row become all-missing rows.
"""

from __future__ import annotations

import csv
import warnings
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from tsscrub.core import DataError, TimeSeriesFrame


@dataclass(frozen=True)
class RawFrame:
    """Pre-regularization series: timestamps may repeat or skip grid ticks."""

    timestamps: np.ndarray
    values: np.ndarray
    variable_names: tuple[str, ...]
    duplicates_dropped: int = 0

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        if len(ts) < 2:
            raise DataError("at least 2 rows required")
        if np.any(np.diff(ts) < 0):
            raise DataError("unsorted timestamps")


def _parse_timestamp(token: str, fmt: str, row: int) -> int:
    token = token.strip()
    if fmt == "int":
        try:
            return int(token)
        except ValueError:
            raise DataError(f"unparseable timestamp at row {row}: {token!r}") from None
    if fmt == "iso8601":
        try:
            dt = datetime.fromisoformat(token)
        except ValueError:
            raise DataError(f"unparseable timestamp at row {row}: {token!r}") from None
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise DataError(f"unknown timestamp format {fmt!r}")


def read_csv(path, timestamp_format: str = "int") -> RawFrame:
    """Read a header + timestamp-first CSV; empty cells become missing."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if len(header) < 2:
        raise DataError(f"{path}: need a timestamp column and at least one variable")
    names = tuple(h.strip() for h in header[1:])
    data_rows = rows[1:]
    if len(data_rows) < 2:
        raise DataError(f"{path}: at least 2 rows required")
    ts = np.empty(len(data_rows), dtype=np.int64)
    vals = np.full((len(data_rows), len(names)), np.nan)
    for i, row in enumerate(data_rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 1} has {len(row)} fields, expected {len(header)}")
        ts[i] = _parse_timestamp(row[0], timestamp_format, i + 1)
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                vals[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: unparseable cell at row {i + 1}, column {names[j]!r}: {cell!r}"
                ) from None
            if not np.isfinite(vals[i, j]):
                raise DataError(
                    f"{path}: non-finite cell at row {i + 1}, column {names[j]!r}"
                )
    if np.any(np.diff(ts) < 0):
        raise DataError(f"{path}: unsorted timestamps")
    return RawFrame(ts, vals, names)


def deduplicate(raw: RawFrame) -> RawFrame:
    """Keep the first row of every duplicated timestamp."""
    _, first_idx = np.unique(raw.timestamps, return_index=True)
    first_idx.sort()
    dropped = len(raw.timestamps) - len(first_idx)
    if dropped == 0 and raw.duplicates_dropped == 0:
        return raw
    return RawFrame(
        raw.timestamps[first_idx],
        raw.values[first_idx],
        raw.variable_names,
        raw.duplicates_dropped + dropped,
    )


def _mode_interval(ts: np.ndarray) -> int:
    diffs = np.diff(ts)
    counts = Counter(int(d) for d in diffs)
    best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
    return best[0]


def regularize(raw: RawFrame) -> TimeSeriesFrame:
    """Snap rows onto the modal-interval grid; absent ticks become missing rows."""
    ts = raw.timestamps
    if np.any(np.diff(ts) <= 0):
        raise DataError("regularize requires strictly increasing timestamps; deduplicate first")
    delta = _mode_interval(ts)
    if delta <= 0:
        raise DataError("non-positive sampling interval")
    t0, t1 = int(ts[0]), int(ts[-1])
    n_ticks = (t1 - t0) // delta + 1
    grid = t0 + delta * np.arange(n_ticks, dtype=np.int64)
    values = np.full((n_ticks, len(raw.variable_names)), np.nan)
    offsets = (ts - t0) / delta
    # round-half-down keeps the tie-break deterministic
    ticks = np.ceil(offsets - 0.5).astype(np.int64)
    ticks = np.clip(ticks, 0, n_ticks - 1)
    off_grid = np.nonzero(offsets != np.floor(offsets))[0]
    if off_grid.size:
        warnings.warn(
            f"{off_grid.size} off-grid rows snapped to the nearest tick",
            stacklevel=2,
        )
    filled = np.zeros(n_ticks, dtype=bool)
    for i, tick in enumerate(ticks):
        if filled[tick]:
            warnings.warn(f"row {i} collided with an occupied tick; kept first", stacklevel=2)
            continue
        values[tick] = raw.values[i]
        filled[tick] = True
    return TimeSeriesFrame(
        grid,
        values,
        raw.variable_names,
        regularized=True,
        source_timestamps=tuple(int(t) for t in ts),
    )


def preprocess(raw: RawFrame) -> TimeSeriesFrame:
    """deduplicate + regularize, the standard ingestion path."""
    return regularize(deduplicate(raw))


def _format_value(v: float) -> str:
    if np.isnan(v):
        return ""
    return repr(float(v))


def write_csv(frame, path) -> None:
    """Write a frame or raw frame; missing cells serialize as empty cells."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("t",) + tuple(frame.variable_names))
        for i in range(len(frame.timestamps)):
            w.writerow(
                [int(frame.timestamps[i])]
                + [_format_value(v) for v in frame.values[i]]
            )


def read_frame(path, timestamp_format: str = "int") -> TimeSeriesFrame:
    """read_csv + preprocess in one step (the CLI ingestion path)."""
    return preprocess(read_csv(path, timestamp_format))
