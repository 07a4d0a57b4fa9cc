"""Gamma-likelihood segmentation and the PELT change-point solver.

The activity counts within a search region are modeled as gamma draws with
a shared shape and a per-segment rate. Profiling the rate at its MLE
(rate = shape / segment mean) and dropping every term that is constant
across segmentations of the same region leaves the segment cost

    cost(x) = 2 * len(x) * shape * ln(mean(x))

which is what the dynamic program minimizes, plus a constant penalty per
change point. The solver is PELT (Killick, Fearnhead & Eckley 2012):
optimal partitioning with inequality pruning of candidate split points.
The cost above satisfies cost(A) + cost(B) <= cost(A u B) for any
contiguous split (concavity of the log), so pruning with K = 0 is exact.

``single_cp_search`` is the bounded-region search used by the detector: it
lowers the penalty geometrically until PELT reports at least one change
point, then keeps the one closest to the anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoChangePointError, NonPositiveSampleError, ZeroVarianceError

# Shortest segment the dynamic program will create. Keeps means stable and
# excludes change points at the region endpoints.
MIN_SEGMENT = 2

SHAPE_CLAMP = (0.05, 100.0)


@dataclass(frozen=True)
class GammaSegmentModel:
    """Shared gamma shape for a region, plus the zero floor."""

    shape_alpha: float
    zero_shift: float = 1e-3

    def __post_init__(self) -> None:
        if self.shape_alpha <= 0:
            raise ValueError("shape_alpha must be > 0")
        if self.zero_shift <= 0:
            raise ValueError("zero_shift must be > 0")


@dataclass(frozen=True)
class CpSearchResult:
    """Segmentation returned by pelt.

    ``change_points`` holds the 1-based index of the last sample of each
    left segment, strictly increasing, each in [1, n-1]. ``iterations``
    counts penalty-schedule steps (1 for a direct pelt call).
    """

    change_points: tuple[int, ...]
    total_cost: float
    penalty_used: float
    iterations: int = 1


@dataclass(frozen=True)
class PenaltySchedule:
    """Geometric penalty decrease for the bounded single-CP search.

    The schedule starts at ``initial_factor * shape * ln(n)`` and is
    multiplied by ``decay`` after every empty solve, for at most
    ``max_iterations`` solves.
    """

    initial_factor: float = 10.0
    decay: float = 0.5
    max_iterations: int = 20

    def __post_init__(self) -> None:
        if self.initial_factor <= 0 or not 0 < self.decay < 1 or self.max_iterations < 1:
            raise ValueError("invalid penalty schedule")


def floor_shift(x: np.ndarray, zero_shift: float = 1e-3) -> np.ndarray:
    """Floor the counts at ``zero_shift`` so zeros become small positives.

    Only values below the floor are moved; everything else is unchanged.
    """
    return np.maximum(np.asarray(x, dtype=np.float64), zero_shift)


def _check_positive(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty sample")
    if (x <= 0).any() or not np.isfinite(x).all():
        raise NonPositiveSampleError("samples must be finite and > 0 (apply floor_shift first)")
    return x


def gamma_segment_cost(x: np.ndarray, shape_alpha: float) -> float:
    """Cost of one segment of shifted counts under the shared-shape model."""
    x = _check_positive(x)
    return 2.0 * len(x) * shape_alpha * math.log(float(x.mean()))


def estimate_shape(x: np.ndarray) -> float:
    """Method-of-moments gamma shape, mean^2 / variance, clamped to [0.05, 100].

    Raises ZeroVarianceError for a constant sample instead of clamping.
    """
    x = _check_positive(x)
    if len(x) < 2:
        raise ValueError("need at least 2 samples to estimate a shape")
    var = float(x.var())
    if var == 0.0:
        raise ZeroVarianceError("constant sample has no moment-based shape")
    alpha = float(x.mean()) ** 2 / var
    return min(max(alpha, SHAPE_CLAMP[0]), SHAPE_CLAMP[1])


def pelt(
    x: np.ndarray,
    penalty: float,
    shape_alpha: float,
    min_segment: int = MIN_SEGMENT,
) -> CpSearchResult:
    """Exact penalized segmentation of ``x`` under the gamma cost.

    Minimizes sum of segment costs + penalty * (#change points). Matches
    exhaustive optimal partitioning; pruning only removes candidates that
    can never be optimal. Ties are broken toward the earlier split.
    """
    x = _check_positive(x)
    if penalty < 0:
        raise ValueError("penalty must be >= 0")
    n = len(x)
    if math.isinf(penalty) or n < 2 * min_segment:
        return CpSearchResult((), gamma_segment_cost(x, shape_alpha), penalty, 1)

    prefix = np.concatenate(([0.0], np.cumsum(x)))
    two_alpha = 2.0 * shape_alpha

    # F[t] = best cost of the first t samples, with every segment paying
    # the penalty and F[0] = -penalty, so F[n] = total cost + penalty*#cps.
    F = np.full(n + 1, np.inf)
    F[0] = -penalty
    prev = np.zeros(n + 1, dtype=np.int64)
    cands = np.array([0], dtype=np.int64)
    never = n + 2 * min_segment  # sentinel: not marked for pruning
    prune_from = np.array([never], dtype=np.int64)

    for t in range(min_segment, n + 1):
        live = prune_from > t
        cands = cands[live]
        prune_from = prune_from[live]
        seg_len = t - cands
        seg_cost = two_alpha * seg_len * np.log((prefix[t] - prefix[cands]) / seg_len)
        total = F[cands] + seg_cost + penalty
        j = int(np.argmin(total))  # first minimum: earliest candidate wins ties
        F[t] = total[j]
        prev[t] = cands[j]
        # K = 0 pruning. A dominated candidate only becomes unusable once
        # the dominating path's closing segment reaches min_segment, so
        # removal is delayed by min_segment - 1 steps.
        newly = (F[cands] + seg_cost > F[t]) & (prune_from == never)
        prune_from[newly] = t + min_segment
        cands = np.append(cands, t - min_segment + 1)
        prune_from = np.append(prune_from, never)

    cps: list[int] = []
    t = n
    while prev[t] != 0:
        cps.append(int(prev[t]))
        t = int(prev[t])
    cps.reverse()
    return CpSearchResult(tuple(cps), float(F[n]), penalty, 1)


def single_cp_search(
    region: np.ndarray,
    anchor: int,
    schedule: PenaltySchedule = PenaltySchedule(),
) -> int:
    """Find the change point nearest ``anchor`` inside one bounded region.

    ``region`` holds shifted counts; ``anchor`` is a 1-based index into it.
    The penalty starts high and halves until PELT reports at least one
    change point; among several, the one with minimum |cp - anchor| wins
    (earlier index on ties). Returns the 1-based region-local index of the
    last sample before the change. Raises NoChangePointError when the
    schedule is exhausted or the region has no contrast at all.
    """
    region = np.asarray(region, dtype=np.float64)
    n = len(region)
    if n < 2 * MIN_SEGMENT:
        raise NoChangePointError(f"region of {n} samples is too short to split")
    if not 1 <= anchor <= n:
        raise ValueError(f"anchor {anchor} outside region of length {n}")
    try:
        alpha = estimate_shape(region)
    except ZeroVarianceError as exc:
        raise NoChangePointError("region is flat (zero variance)") from exc

    penalty = schedule.initial_factor * alpha * math.log(n)
    for _ in range(schedule.max_iterations):
        result = pelt(region, penalty, alpha)
        if result.change_points:
            dist = [abs(cp - anchor) for cp in result.change_points]
            return result.change_points[dist.index(min(dist))]
        penalty *= schedule.decay
    raise NoChangePointError(
        f"no change point after {schedule.max_iterations} penalty reductions"
    )
