"""Refine coarse STC transitions into precise onsets, then label minutes.

The rigid periodic curve puts every wake/sleep transition at the same
clock time; real onsets drift day to day. Each coarse transition is
therefore re-located by a single gamma change-point search inside a
bounded region: from the previously refined onset up to the next coarse
transition, so consecutive searches can never leapfrog each other. The
first and last transitions get the series edges as their outer bounds.
A region with no usable contrast falls back to its coarse index and is
marked, so a batch never aborts on one flat subject.
"""

from __future__ import annotations

import numpy as np

from .core import ChangePoint, CpKind, CpSource, CpSet, DnSplit, LabelVector, check_alternating
from .cpd import PenaltySchedule, floor_shift, single_cp_search
from .errors import LengthMismatchError, NoChangePointError, TooFewTransitionsError
from .ingest import EpochSeries


def _search_region(
    x: np.ndarray,
    start: int,
    end: int,
    anchor: ChangePoint,
    schedule: PenaltySchedule,
    zero_shift: float,
) -> ChangePoint:
    """Search the inclusive 1-based region [start, end] around one anchor."""
    region = floor_shift(x[start - 1 : end], zero_shift)
    try:
        local = single_cp_search(region, anchor.index - start, schedule)
    except NoChangePointError:
        return ChangePoint(index=anchor.index, kind=anchor.kind, source=CpSource.FALLBACK)
    # ``local`` is the last sample of the left segment; the new state
    # starts one sample later.
    return ChangePoint(index=start + local, kind=anchor.kind, source=CpSource.PELT)


def refine_change_points(
    series: EpochSeries,
    cp_stc: CpSet,
    schedule: PenaltySchedule = PenaltySchedule(),
    zero_shift: float = 1e-3,
) -> CpSet:
    """Refine every coarse transition with a bounded single-CP search.

    Regions: the first transition searches [1, cp2]; interior transition i
    searches [refined_{i-1}, cp_{i+1}]; the last searches from the
    previously refined onset to the series end. Each refined transition
    keeps the kind of the coarse transition it refines; a failed search
    falls back to the coarse index with source FALLBACK.
    """
    if len(cp_stc) < 3:
        raise TooFewTransitionsError(
            f"need >= 3 coarse transitions to bound the search, got {len(cp_stc)}"
        )
    check_alternating(cp_stc)
    x = series.counts
    m = len(cp_stc)

    refined: CpSet = [
        _search_region(x, 1, cp_stc[1].index, cp_stc[0], schedule, zero_shift)
    ]
    for i in range(1, m - 1):
        refined.append(
            _search_region(
                x, refined[i - 1].index, cp_stc[i + 1].index, cp_stc[i], schedule, zero_shift
            )
        )
    refined.append(
        _search_region(x, refined[m - 2].index, series.n, cp_stc[m - 1], schedule, zero_shift)
    )
    check_alternating(refined)
    return refined


def build_label_vector(n: int, cps: CpSet) -> LabelVector:
    """Per-minute labels implied by alternating onsets.

    Minutes from a wake onset (inclusive) to the next sleep onset
    (exclusive) are awake; the state before the first transition is the
    opposite of what that transition switches to. An empty set yields
    all-asleep labels marked degenerate instead of an error.
    """
    if not cps:
        return LabelVector(np.zeros(n, dtype=np.int8), degenerate=True)
    check_alternating(cps)
    if cps[-1].index > n:
        raise ValueError(f"change point {cps[-1].index} beyond series length {n}")

    labels = np.empty(n, dtype=np.int8)
    state = 0 if cps[0].kind is CpKind.WAKE_ONSET else 1
    pos = 0
    for cp in cps:
        labels[pos : cp.index - 1] = state
        state = 1 if cp.kind is CpKind.WAKE_ONSET else 0
        pos = cp.index - 1
    labels[pos:] = state
    return LabelVector(labels)


def split_dn(series: EpochSeries, label_vector: LabelVector) -> DnSplit:
    """Mask counts into diurnal (awake) and nocturnal (asleep) vectors."""
    if series.n != len(label_vector):
        raise LengthMismatchError(
            f"series has {series.n} minutes but labels have {len(label_vector)}"
        )
    labels = label_vector.labels.astype(np.float64)
    return DnSplit(diurnal=labels * series.counts, nocturnal=(1.0 - labels) * series.counts)
