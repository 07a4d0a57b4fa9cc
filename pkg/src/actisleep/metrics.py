"""Label-free detection scoring and cohort comparison.

Without diaries or polysomnography the only usable signal is the
structure of the detection itself: awake minutes should carry almost all
of the activity variance. The score R is the ratio of squared deviations
of the diurnal vector to those of the nocturnal vector; mislabeling high
daytime activity as sleep inflates the denominator and collapses R.
Subjects whose refined R is small, or barely better than the rigid-curve
baseline, are flagged for manual review instead of silently trusted.

The cohort comparison is a one-sided paired t-test computed from first
principles (regularized incomplete beta via a Lentz continued fraction),
so the package carries no statistics dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CpSet, DnSplit
from .errors import (
    LengthMismatchError,
    TooFewSubjectsError,
    TooShortError,
    ZeroVarianceDifferencesError,
)


@dataclass(frozen=True)
class ScreenConfig:
    """Threshold for the automatic error screen."""

    epsilon: float = 10.0

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


class FlagReason(Enum):
    LOW_R = "low_r"
    SMALL_IMPROVEMENT = "small_improvement"
    FALLBACK = "fallback"
    DEGENERATE = "degenerate"


@dataclass
class SubjectReport:
    """Everything the batch front-end records for one subject."""

    subject_id: str
    r_stc: float
    r_refined: float
    flagged: bool
    flag_reason: FlagReason | None
    cp_refined: CpSet
    cp_stc: CpSet
    runtime_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.flagged != (self.flag_reason is not None):
            raise ValueError("flagged must match the presence of a flag_reason")


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    p_value: float
    df: int


@dataclass(frozen=True)
class CohortSummary:
    """Cohort-level comparison of baseline vs refined detections."""

    n_subjects: int
    n_finite_pairs: int
    n_inf_excluded: int
    flagged_count: int
    delta_r: list[float]
    test: TTestResult | None


def r_metric(split: DnSplit) -> float:
    """Ratio of diurnal to nocturnal squared deviations (means over all n).

    Returns +inf when the nocturnal vector is constant: a perfectly still
    night is a success mode, not an error.
    """
    if len(split) < 2:
        raise TooShortError("R needs at least 2 samples")
    d = split.diurnal
    nn = split.nocturnal
    num = float(((d - d.mean()) ** 2).sum())
    den = float(((nn - nn.mean()) ** 2).sum())
    if den == 0.0:
        return math.inf
    return num / den


def screen(
    r_refined: float, r_stc: float, cfg: ScreenConfig = ScreenConfig()
) -> FlagReason | None:
    """Flag a refined detection that is weak in absolute or relative terms.

    LOW_R when r_refined < epsilon; otherwise SMALL_IMPROVEMENT when
    r_refined - r_stc < epsilon; None means the subject passes. An
    infinite r_refined always passes (IEEE comparisons make both triggers
    false).
    """
    if r_refined < cfg.epsilon:
        return FlagReason.LOW_R
    if r_refined - r_stc < cfg.epsilon:  # inf - inf is nan: comparison is false
        return FlagReason.SMALL_IMPROVEMENT
    return None


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz method."""
    max_iter = 300
    eps = 1e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: int) -> float:
    """Upper-tail probability of Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    ib = _betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return 0.5 * ib if t >= 0 else 1.0 - 0.5 * ib


def paired_one_sided_t(pre, post) -> TTestResult:
    """Paired t-test of the alternative post > pre.

    Identical samples give the symmetric null (t = 0, p = 0.5); any other
    zero-variance difference vector has no defined t and raises.
    """
    pre = np.asarray(pre, dtype=np.float64)
    post = np.asarray(post, dtype=np.float64)
    if pre.shape != post.shape:
        raise LengthMismatchError("pre and post must have equal length")
    n = len(pre)
    if n < 2:
        raise TooShortError("paired t-test needs n >= 2 (df = n - 1)")
    d = post - pre
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t_stat=0.0, p_value=0.5, df=n - 1)
        raise ZeroVarianceDifferencesError("all paired differences are equal and nonzero")
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t_stat=t, p_value=t_sf(t, n - 1), df=n - 1)


def cohort_summary(reports: list[SubjectReport]) -> CohortSummary:
    """Fold subject reports into the cohort-level comparison.

    Subjects with an infinite R on either side are excluded from the
    paired test and counted separately; the fold runs in subject-id order
    so the summary is independent of processing order.
    """
    if len(reports) < 2:
        raise TooFewSubjectsError("cohort summary needs >= 2 reports")
    ordered = sorted(reports, key=lambda r: r.subject_id)
    finite = [r for r in ordered if math.isfinite(r.r_stc) and math.isfinite(r.r_refined)]
    delta = [r.r_refined - r.r_stc for r in finite]

    test: TTestResult | None = None
    if len(finite) >= 2:
        try:
            test = paired_one_sided_t(
                [r.r_stc for r in finite], [r.r_refined for r in finite]
            )
        except ZeroVarianceDifferencesError:
            test = None
    return CohortSummary(
        n_subjects=len(ordered),
        n_finite_pairs=len(finite),
        n_inf_excluded=len(ordered) - len(finite),
        flagged_count=sum(1 for r in ordered if r.flagged),
        delta_r=delta,
        test=test,
    )
