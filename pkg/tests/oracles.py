"""Independent reference implementations the tests check against.

Everything here is deliberately written the slow, obvious way and shares
no code with the package: plain-Python dynamic programs, full
enumerations, and direct formula transcriptions.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_max_zero_run(counts) -> int:
    best = run = 0
    for c in counts:
        run = run + 1 if c == 0 else 0
        best = max(best, run)
    return best


def seg_cost(x, i: int, j: int, alpha: float) -> float:
    """Gamma segment cost of samples i..j-1 (0-based half-open)."""
    return 2.0 * (j - i) * alpha * math.log(float(np.mean(np.asarray(x)[i:j])))


def optimal_partition(x, penalty: float, alpha: float, min_segment: int = 2):
    """Exhaustive optimal partitioning: O(n^2) DP with no pruning.

    Every admissible previous split is scanned at every step (numpy just
    evaluates the scan in one shot). Returns (change_points, total_cost)
    with change points as 1-based last-of-left-segment indices, matching
    the solver's convention. Cross-validated against enumerate_partition
    for tiny n in the unit tests.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if math.isinf(penalty) or n < 2 * min_segment:
        return (), seg_cost(x, 0, n, alpha)
    prefix = np.concatenate(([0.0], np.cumsum(x)))
    F = np.full(n + 1, math.inf)
    F[0] = -penalty
    arg = np.zeros(n + 1, dtype=int)
    for t in range(min_segment, n + 1):
        taus = np.arange(0, t - min_segment + 1)
        lens = t - taus
        costs = 2.0 * alpha * lens * np.log((prefix[t] - prefix[taus]) / lens)
        total = F[taus] + costs + penalty
        j = int(np.argmin(total))
        F[t] = total[j]
        arg[t] = taus[j]
    cps = []
    t = n
    while arg[t] != 0:
        cps.append(int(arg[t]))
        t = int(arg[t])
    return tuple(reversed(cps)), float(F[n])


def enumerate_partition(x, penalty: float, alpha: float, min_segment: int = 2):
    """Try every admissible change-point set outright (tiny n only)."""
    n = len(x)
    positions = range(min_segment, n - min_segment + 1)
    best_cost, best_set = math.inf, ()
    for k in range(0, n // min_segment + 1):
        for combo in itertools.combinations(positions, k):
            if any(b - a < min_segment for a, b in zip(combo, combo[1:])):
                continue
            bounds = [0, *combo, n]
            cost = sum(seg_cost(x, a, b, alpha) for a, b in zip(bounds, bounds[1:]))
            cost += penalty * k
            if cost < best_cost:
                best_cost, best_set = cost, combo
    return best_set, best_cost


def best_single_split(x, alpha: float, min_segment: int = 2):
    """Minimize cost(left) + cost(right) over all admissible split points.

    Returns (split, cost) with split as the 1-based last index of the left
    segment.
    """
    n = len(x)
    best_cost, best_s = math.inf, None
    for s in range(min_segment, n - min_segment + 1):
        c = seg_cost(x, 0, s, alpha) + seg_cost(x, s, n, alpha)
        if c < best_cost:
            best_cost, best_s = c, s
    return best_s, best_cost
