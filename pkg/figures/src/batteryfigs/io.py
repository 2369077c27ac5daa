"""Reading spinbattery output directories.

A sweep directory holds one subdirectory per swept value, each with a
metrics.csv in the fixed nine-column schema; absent values are empty fields.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_COLUMNS = (
    "t", "energy", "ergotropy", "power_b", "power_w",
    "purity", "coherence_l1", "trace_distance", "ratio_w_over_e",
)


class InputError(ValueError):
    """Missing columns, empty directories, malformed values."""


@dataclass(frozen=True)
class RunSeries:
    """One run's time series; absent fields come back as NaN."""

    label: str
    value: float
    columns: dict[str, np.ndarray]

    def __getitem__(self, column: str) -> np.ndarray:
        return self.columns[column]


def read_metrics_csv(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    with path.open() as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError(f"{path}: missing required columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise InputError(f"{path}: no data rows")
    out = {}
    for col in header:
        out[col] = np.array(
            [float(r[col]) if r[col] not in ("", None) else np.nan for r in rows])
    return out


def load_sweep_dir(root: Path, required: tuple[str, ...]) -> list[RunSeries]:
    """All value-labelled subruns of a sweep directory, sorted by value.

    A directory that itself contains metrics.csv (a single `simulate` output)
    is returned as one unlabelled series.
    """
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"{root}: not a directory")
    if (root / "metrics.csv").exists():
        return [RunSeries("run", 0.0, read_metrics_csv(root / "metrics.csv", required))]
    runs = []
    for sub in root.iterdir():
        if sub.is_dir() and (sub / "metrics.csv").exists():
            try:
                value = float(sub.name)
            except ValueError:
                continue
            runs.append(RunSeries(sub.name, value, read_metrics_csv(sub / "metrics.csv", required)))
    if not runs:
        raise InputError(f"{root}: no metrics.csv found in any value subdirectory")
    runs.sort(key=lambda r: r.value)
    return runs
