"""Hourly multi-area load ingestion, weekly-block splitting and scaling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

HOURS_PER_WEEK = 168


class DatasetError(ValueError):
    """Raised for unusable input data (missing file, bad timestamps, ...)."""


@dataclass
class LoadDataset:
    """Hourly load matrix: one row per hour, one column per area (MW)."""

    timestamps: np.ndarray          # datetime64[ns], strictly increasing
    areas: list[str]
    values: np.ndarray              # shape (n, d), float64
    dropped_rows: int = 0           # rows removed during ingestion

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.timestamps = np.asarray(self.timestamps, dtype="datetime64[ns]")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.areas):
            raise DatasetError(
                f"value matrix {self.values.shape} does not match "
                f"{len(self.areas)} areas"
            )
        if len(self.timestamps) != len(self.values):
            raise DatasetError("timestamp count does not match row count")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def hours(self) -> np.ndarray:
        """Hour of day (0-23) for every row."""
        return pd.DatetimeIndex(self.timestamps).hour.to_numpy()

    def summary(self) -> dict:
        """JSON-ready summary of the dataset."""
        return {
            "rows": int(self.n),
            "areas": list(self.areas),
            "dropped_rows": int(self.dropped_rows),
            "start": str(self.timestamps[0]) if self.n else None,
            "end": str(self.timestamps[-1]) if self.n else None,
            "min_mw": self.values.min(axis=0).tolist() if self.n else [],
            "max_mw": self.values.max(axis=0).tolist() if self.n else [],
        }


@dataclass
class NormalizationSpec:
    """Per-dimension min/max fitted on the training split only."""

    minimum: np.ndarray
    maximum: np.ndarray
    degenerate: np.ndarray = field(default=None)  # max == min mask

    def __post_init__(self):
        self.minimum = np.asarray(self.minimum, dtype=float)
        self.maximum = np.asarray(self.maximum, dtype=float)
        if np.any(self.maximum < self.minimum):
            raise DatasetError("normalization spec has max < min")
        if self.degenerate is None:
            self.degenerate = self.maximum == self.minimum
        self.degenerate = np.asarray(self.degenerate, dtype=bool)

    @property
    def d(self) -> int:
        return self.minimum.size

    def to_dict(self) -> dict:
        return {
            "minimum": self.minimum.tolist(),
            "maximum": self.maximum.tolist(),
            "degenerate": self.degenerate.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "NormalizationSpec":
        return cls(
            np.array(obj["minimum"], dtype=float),
            np.array(obj["maximum"], dtype=float),
            np.array(obj["degenerate"], dtype=bool),
        )


@dataclass(frozen=True)
class ConditionVector:
    """Cyclic sine/cosine encoding of the hour of day."""

    sin: float
    cos: float

    def as_array(self) -> np.ndarray:
        return np.array([self.sin, self.cos])


def load_csv(path, drop_columns=()) -> LoadDataset:
    """Read an hourly load CSV: first column timestamps, rest MW per area.

    Columns listed in ``drop_columns`` are removed, then any row with a
    missing value in a retained column is dropped (count kept on the
    returned dataset).
    """
    try:
        frame = pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if frame.shape[1] < 2:
        raise DatasetError(f"{path}: need a timestamp column plus data columns")

    ts_col = frame.columns[0]
    drop = set(drop_columns)
    unknown = drop - set(frame.columns[1:])
    if unknown:
        raise DatasetError(f"drop columns not present: {sorted(unknown)}")
    areas = [c for c in frame.columns[1:] if c not in drop]
    if not areas:
        raise DatasetError("no area columns retained after drops")

    timestamps = pd.to_datetime(frame[ts_col], errors="coerce", format="ISO8601")
    values = frame[areas].apply(pd.to_numeric, errors="coerce")
    keep = timestamps.notna() & values.notna().all(axis=1)
    dropped = int((~keep).sum())
    if dropped:
        log.info("%s: dropped %d rows with missing values", path, dropped)
    timestamps = timestamps[keep]
    values = values[keep]
    if len(values) == 0:
        raise DatasetError(f"{path}: no complete rows remain")

    ts = timestamps.to_numpy(dtype="datetime64[ns]")
    diffs = np.diff(ts)
    if np.any(diffs <= np.timedelta64(0, "ns")):
        raise DatasetError(f"{path}: timestamps are not strictly increasing")
    # hourly grid: gaps (dropped rows) are whole-hour multiples
    if np.any(diffs % np.timedelta64(1, "h")):
        raise DatasetError(f"{path}: timestamps are not on an hourly grid")

    return LoadDataset(ts, areas, values.to_numpy(dtype=float), dropped_rows=dropped)


def split_weekly_blocks(ds: LoadDataset, test_fraction: float, seed: int):
    """Split into train/test at 168-hour block granularity.

    Blocks are assigned to the test set in a random order until the test
    row count is the nearest achievable to ``test_fraction``.  Rows past
    the last full week join the final block.  Deterministic per seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if ds.n < 2 * HOURS_PER_WEEK:
        raise DatasetError(f"dataset has {ds.n} rows; need at least two full weeks")

    n_blocks = ds.n // HOURS_PER_WEEK
    bounds = [i * HOURS_PER_WEEK for i in range(n_blocks)] + [ds.n]
    sizes = np.diff(bounds)

    rng = np.random.default_rng(seed)
    order = rng.permutation(n_blocks)
    target = test_fraction * ds.n
    test_blocks = []
    cum = 0
    for b in order:
        if abs(cum + sizes[b] - target) < abs(cum - target):
            test_blocks.append(b)
            cum += sizes[b]
        else:
            break

    in_test = np.zeros(ds.n, dtype=bool)
    for b in test_blocks:
        in_test[bounds[b]:bounds[b + 1]] = True

    def take(mask):
        return LoadDataset(ds.timestamps[mask], ds.areas, ds.values[mask])

    return take(~in_test), take(in_test)


def fit_minmax(train: LoadDataset) -> NormalizationSpec:
    """Per-dimension min/max of the training values; flags constant columns."""
    if train.n < 2:
        raise DatasetError("need at least 2 rows to fit normalization")
    lo = train.values.min(axis=0)
    hi = train.values.max(axis=0)
    spec = NormalizationSpec(lo, hi)
    if spec.degenerate.any():
        bad = [train.areas[i] for i in np.flatnonzero(spec.degenerate)]
        log.warning("degenerate (constant) dimensions: %s", bad)
    return spec


def normalize(ds: LoadDataset, spec: NormalizationSpec) -> LoadDataset:
    """Map values through (v - min)/(max - min); no clipping outside [0, 1]."""
    if ds.d != spec.d:
        raise DatasetError(f"dimension mismatch: data d={ds.d}, spec d={spec.d}")
    span = np.where(spec.degenerate, 1.0, spec.maximum - spec.minimum)
    scaled = (ds.values - spec.minimum) / span
    scaled[:, spec.degenerate] = 0.0
    return LoadDataset(ds.timestamps, ds.areas, scaled, ds.dropped_rows)


def denormalize(samples: np.ndarray, spec: NormalizationSpec) -> np.ndarray:
    """Inverse of :func:`normalize`; degenerate dimensions return the constant."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != spec.d:
        raise DatasetError(
            f"dimension mismatch: samples {samples.shape}, spec d={spec.d}"
        )
    span = np.where(spec.degenerate, 0.0, spec.maximum - spec.minimum)
    return spec.minimum + samples * span


def encode_hour(hour: int) -> ConditionVector:
    """Cyclic encoding (sin, cos) of an hour of day in 0..23."""
    if not 0 <= hour <= 23 or int(hour) != hour:
        raise DatasetError(f"hour must be an integer in 0..23, got {hour!r}")
    angle = 2.0 * math.pi * hour / 24.0
    return ConditionVector(math.sin(angle), math.cos(angle))


def hour_conditions(hours: np.ndarray) -> np.ndarray:
    """Stack encode_hour over an array of hours -> (n, 2) condition matrix."""
    hours = np.asarray(hours)
    if hours.size and (hours.min() < 0 or hours.max() > 23):
        raise DatasetError("hours outside 0..23")
    angle = 2.0 * np.pi * hours / 24.0
    return np.column_stack([np.sin(angle), np.cos(angle)])
