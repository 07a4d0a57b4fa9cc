"""Shared domain types for change points, labels, and the day/night split.

Minute indices are 1-based throughout (t = 1..n, where t = 1 is the first
epoch of the series). A change point marks the first minute of the new
state: a wake onset at index t means minute t is awake and minute t-1 was
asleep.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonAlternatingKindsError


class CpKind(Enum):
    WAKE_ONSET = "wake_onset"
    SLEEP_ONSET = "sleep_onset"

    def opposite(self) -> "CpKind":
        return CpKind.SLEEP_ONSET if self is CpKind.WAKE_ONSET else CpKind.WAKE_ONSET


class CpSource(Enum):
    STC = "stc"
    PELT = "pelt"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class ChangePoint:
    """A typed sleep/wake transition at minute resolution."""

    index: int  # 1-based minute index, first minute of the new state
    kind: CpKind
    source: CpSource = CpSource.STC

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"change point index must be >= 1, got {self.index}")


# An ordered sequence of change points; kept as a plain list.
CpSet = list[ChangePoint]


def check_alternating(cps: CpSet) -> None:
    """Verify indices strictly increase and kinds strictly alternate.

    Raises NonAlternatingKindsError otherwise. An empty or single-element
    set is trivially alternating.
    """
    for prev, cur in zip(cps, cps[1:]):
        if cur.index <= prev.index:
            raise NonAlternatingKindsError(
                f"change point indices not strictly increasing: "
                f"{prev.index} then {cur.index}"
            )
        if cur.kind is prev.kind:
            raise NonAlternatingKindsError(
                f"two consecutive {prev.kind.value} transitions at "
                f"{prev.index} and {cur.index}"
            )


@dataclass(frozen=True)
class LabelVector:
    """Per-minute awake(1)/asleep(0) labels.

    ``degenerate`` marks the all-zero fallback produced when no change
    points were available; such subjects are flagged rather than dropped.
    """

    labels: np.ndarray
    degenerate: bool = False

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.labels, dtype=np.int8)
        if arr.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    def __len__(self) -> int:
        return len(self.labels)

    def complement(self) -> "LabelVector":
        return LabelVector(1 - self.labels, degenerate=self.degenerate)


@dataclass(frozen=True)
class DnSplit:
    """Diurnal/nocturnal activity vectors: D = L*X and N = (1-L)*X."""

    diurnal: np.ndarray
    nocturnal: np.ndarray

    def __post_init__(self) -> None:
        d = np.ascontiguousarray(self.diurnal, dtype=np.float64)
        n = np.ascontiguousarray(self.nocturnal, dtype=np.float64)
        if d.shape != n.shape or d.ndim != 1:
            raise ValueError("diurnal and nocturnal must be 1-d and equal length")
        d.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "diurnal", d)
        object.__setattr__(self, "nocturnal", n)

    def __len__(self) -> int:
        return len(self.diurnal)
