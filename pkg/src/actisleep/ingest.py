"""Actigraphy ingestion: CSV parsing and wear-time validation.

Input is one CSV per subject with a timestamp column (ISO-8601, minute
precision, strictly one minute apart) and a vector-magnitude count column.
Subjects are screened with two field-study rules before any modeling: a
maximum run of consecutive zero counts (non-wear, a relaxation of the
90-minute rule of Choi et al. 2011) and a minimum number of recorded days.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    MissingColumnError,
    NegativeCountError,
    NonMonotonicTimestampsError,
    WrongEpochLengthError,
)

MINUTES_PER_DAY = 1440

# Rejection reasons reported by validate_wear.
ZERO_RUN = "zero_run"
TOO_SHORT = "too_short"


@dataclass(frozen=True)
class EpochSeries:
    """One subject's minute-by-minute vector-magnitude counts.

    Sample t (1-based) was recorded at ``start_time + (t - 1) minutes``.
    Counts are non-negative finite reals; only 60-second epochs are
    accepted.
    """

    subject_id: str
    start_time: datetime
    counts: np.ndarray
    epoch_seconds: int = 60

    def __post_init__(self) -> None:
        if self.epoch_seconds != 60:
            raise WrongEpochLengthError(
                f"only 60-second epochs are supported, got {self.epoch_seconds}"
            )
        arr = np.ascontiguousarray(self.counts, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("counts must be a non-empty 1-d sequence")
        if not np.isfinite(arr).all():
            raise NegativeCountError("counts contain non-finite values")
        if (arr < 0).any():
            raise NegativeCountError("counts must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def n(self) -> int:
        return len(self.counts)

    def time_at(self, t: int) -> datetime:
        """Timestamp of 1-based sample index t."""
        return self.start_time + timedelta(minutes=t - 1)


@dataclass(frozen=True)
class WearPolicy:
    """Exclusion rules applied before modeling."""

    max_zero_run_minutes: int = 120
    min_days: int = 5

    def __post_init__(self) -> None:
        if self.max_zero_run_minutes < 1:
            raise ValueError("max_zero_run_minutes must be >= 1")
        if self.min_days < 1:
            raise ValueError("min_days must be >= 1")


@dataclass(frozen=True)
class WearResult:
    """Verdict of validate_wear; ``reason`` is None iff accepted."""

    accepted: bool
    reason: str | None
    max_zero_run: int
    n_minutes: int


def parse_actigraphy(
    path: str | Path,
    *,
    timestamp_column: str = "timestamp",
    vm_column: str = "vm",
    subject_id: str | None = None,
) -> EpochSeries:
    """Parse one subject's CSV into a validated EpochSeries.

    Timestamps must strictly increase in steps of exactly one minute;
    gaps are an error rather than being zero-filled, since fabricated
    "rest" would bias the downstream gamma costs.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (timestamp_column, vm_column):
            if col not in header:
                raise MissingColumnError(f"{path.name}: no column {col!r} in header {header}")

        times: list[datetime] = []
        counts: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            raw_ts = (row[timestamp_column] or "").strip()
            raw_vm = (row[vm_column] or "").strip()
            try:
                ts = datetime.fromisoformat(raw_ts)
            except ValueError as exc:
                raise NonMonotonicTimestampsError(
                    f"{path.name}:{lineno}: unparseable timestamp {raw_ts!r}"
                ) from exc
            try:
                vm = float(raw_vm)
            except ValueError as exc:
                raise NegativeCountError(
                    f"{path.name}:{lineno}: unparseable count {raw_vm!r}"
                ) from exc
            if not math.isfinite(vm):
                raise NegativeCountError(f"{path.name}:{lineno}: non-finite count {raw_vm!r}")
            if vm < 0:
                raise NegativeCountError(f"{path.name}:{lineno}: negative count {vm}")
            if times:
                delta = (ts - times[-1]).total_seconds()
                if delta <= 0:
                    raise NonMonotonicTimestampsError(
                        f"{path.name}:{lineno}: timestamp {raw_ts} does not advance"
                    )
                if delta != 60:
                    raise WrongEpochLengthError(
                        f"{path.name}:{lineno}: {delta:.0f}s step (expected 60s epochs, no gaps)"
                    )
            times.append(ts)
            counts.append(vm)

    if not counts:
        raise NonMonotonicTimestampsError(f"{path.name}: no data rows")
    return EpochSeries(
        subject_id=subject_id if subject_id is not None else path.stem,
        start_time=times[0],
        counts=np.asarray(counts),
    )


def write_actigraphy(
    series: EpochSeries,
    path: str | Path,
    *,
    timestamp_column: str = "timestamp",
    vm_column: str = "vm",
) -> None:
    """Write a series in the same CSV format parse_actigraphy reads.

    Counts are written with repr so a write/parse round trip is exact.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([timestamp_column, vm_column])
        for t, c in enumerate(series.counts, start=1):
            stamp = series.time_at(t).strftime("%Y-%m-%dT%H:%M")
            writer.writerow([stamp, repr(float(c))])


def max_zero_run(counts: np.ndarray) -> int:
    """Length of the longest run of exact zeros."""
    zero = np.concatenate(([0], (np.asarray(counts) == 0).astype(np.int8), [0]))
    edges = np.diff(zero)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    if len(starts) == 0:
        return 0
    return int((ends - starts).max())


def validate_wear(series: EpochSeries, policy: WearPolicy = WearPolicy()) -> WearResult:
    """Apply the non-wear and minimum-duration rules, in that order.

    A zero run of length >= ``max_zero_run_minutes`` rejects the subject
    (inclusive bound); otherwise fewer than ``min_days`` full days rejects.
    """
    zr = max_zero_run(series.counts)
    if zr >= policy.max_zero_run_minutes:
        return WearResult(False, ZERO_RUN, zr, series.n)
    if series.n < policy.min_days * MINUTES_PER_DAY:
        return WearResult(False, TOO_SHORT, zr, series.n)
    return WearResult(True, None, zr, series.n)
