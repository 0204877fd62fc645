"""Uniform-grid time series and labeled scan results with CSV/JSON output.

CSV files carry a header row, RFC-4180 quoting, '.' decimal separator and
scientific notation with 17 significant digits so that re-runs are
bit-comparable on one platform.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def format_value(x) -> str:
    if isinstance(x, (np.floating, float)):
        return f"{float(x):.17e}"
    if isinstance(x, (np.complexfloating, complex)):
        return f"{x.real:.17e}{x.imag:+.17e}j"
    if isinstance(x, (np.integer, int)):
        return str(int(x))
    return str(x)


@dataclass
class TimeSeries:
    """Named observable columns on a common time grid."""

    times: np.ndarray
    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        for name, col in self.columns.items():
            col = np.asarray(col)
            if col.shape[0] != self.times.shape[0]:
                raise ValueError(f"column {name!r} length does not match time grid")
            self.columns[name] = col

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def window(self, fraction: float) -> "TimeSeries":
        """Restrict to the trailing `fraction` of the grid."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError("fraction must be in (0, 1]")
        start = int(round((1.0 - fraction) * len(self.times)))
        return TimeSeries(
            self.times[start:],
            {k: v[start:] for k, v in self.columns.items()},
            dict(self.meta),
        )

    def write_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", *self.columns.keys()])
            for i, t in enumerate(self.times):
                writer.writerow(
                    [format_value(t)]
                    + [format_value(self.columns[k][i]) for k in self.columns]
                )

    def write_json(self, path) -> None:
        payload = {
            "meta": _jsonable(self.meta),
            "t": [format_value(t) for t in self.times],
            "columns": {
                k: [format_value(x) for x in v] for k, v in self.columns.items()
            },
        }
        Path(path).write_text(json.dumps(payload, indent=1))


@dataclass
class ScanResult:
    """Rows of labeled scan output (one dict per scan point)."""

    fields: list[str]
    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.fields)
            for row in self.rows:
                writer.writerow([format_value(row[k]) for k in self.fields])

    def write_json(self, path) -> None:
        payload = {"meta": _jsonable(self.meta), "fields": self.fields,
                   "rows": [_jsonable(r) for r in self.rows]}
        Path(path).write_text(json.dumps(payload, indent=1))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj
