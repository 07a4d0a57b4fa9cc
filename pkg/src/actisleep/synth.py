"""Synthetic actigraphy with known onsets, for end-to-end verification.

Each day gets a wake and a sleep onset jittered around fixed clock times
by a truncated normal, so nights stay at least four hours long and the
wake/sleep alternation the detector assumes is guaranteed. Counts are
gamma draws (high mean awake, low mean asleep) with an optional linear
mixing ramp around each onset; optional non-wear runs overwrite counts
with exact zeros. Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .core import ChangePoint, CpKind, CpSet, LabelVector
from .detect import build_label_vector
from .errors import InvalidConfigError
from .ingest import MINUTES_PER_DAY, EpochSeries

MIN_SLEEP_MINUTES = 240

_START_TIME = datetime(2024, 1, 1, 0, 0)  # synthetic recordings start at midnight


def parse_clock(clock: str | int) -> int:
    """Clock time as minutes since midnight; accepts 'HH:MM' or minutes."""
    if isinstance(clock, str):
        hh, mm = clock.split(":")
        minutes = int(hh) * 60 + int(mm)
    else:
        minutes = int(clock)
    if not 0 <= minutes < MINUTES_PER_DAY:
        raise InvalidConfigError(f"clock time {clock!r} outside one day")
    return minutes


@dataclass(frozen=True)
class GammaSpec:
    """Gamma emission parameters; mean activity is shape / rate."""

    shape: float
    rate: float

    def __post_init__(self) -> None:
        if self.shape <= 0 or self.rate <= 0:
            raise InvalidConfigError("gamma shape and rate must be > 0")

    @property
    def mean(self) -> float:
        return self.shape / self.rate


@dataclass(frozen=True)
class NonwearRun:
    start: int  # 1-based minute index
    length: int


@dataclass(frozen=True)
class SynthConfig:
    days: int = 7
    wake_onset_minute: int = 420  # 07:00
    sleep_onset_minute: int = 1260  # 21:00
    onset_jitter_sd_minutes: float = 30.0
    day_gamma: GammaSpec = GammaSpec(shape=2.0, rate=2.0 / 500.0)
    night_gamma: GammaSpec = GammaSpec(shape=2.0, rate=2.0 / 5.0)
    transition_ramp_minutes: int = 10
    nonwear_runs: tuple[NonwearRun, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.days < 5:
            raise InvalidConfigError("need >= 5 days to satisfy the wear policy")
        if not 0 <= self.wake_onset_minute < self.sleep_onset_minute < MINUTES_PER_DAY:
            raise InvalidConfigError("onsets must satisfy 0 <= wake < sleep < 1440")
        if self.onset_jitter_sd_minutes < 0 or self.transition_ramp_minutes < 0:
            raise InvalidConfigError("jitter sd and ramp must be >= 0")
        if self.day_gamma.mean <= self.night_gamma.mean:
            raise InvalidConfigError("day mean activity must exceed night mean")
        if self.onset_jitter_sd_minutes > 0 and self._jitter_bound() <= 0:
            raise InvalidConfigError("schedule too tight to keep sleep >= 4 h under jitter")

    def _jitter_bound(self) -> float:
        """Truncation half-width keeping sleep >= 4 h and days alternating.

        Also capped so the first wake and last sleep onset stay inside the
        recording.
        """
        sleep_minutes = MINUTES_PER_DAY - (self.sleep_onset_minute - self.wake_onset_minute)
        wake_minutes = self.sleep_onset_minute - self.wake_onset_minute
        slack = min(
            (sleep_minutes - MIN_SLEEP_MINUTES) / 2.0,
            (wake_minutes - 60) / 2.0,
            float(self.wake_onset_minute),
            float(MINUTES_PER_DAY - 1 - self.sleep_onset_minute),
        )
        if self.onset_jitter_sd_minutes == 0:
            return max(slack, 0.0)
        return min(3.0 * self.onset_jitter_sd_minutes, slack)


@dataclass(frozen=True)
class GroundTruth:
    true_cps: CpSet
    true_labels: LabelVector


def _truncated_normal(rng: np.random.Generator, sd: float, bound: float) -> float:
    if sd == 0.0 or bound == 0.0:
        return 0.0
    while True:
        v = rng.normal(0.0, sd)
        if abs(v) <= bound:
            return v


def generate_subject(cfg: SynthConfig) -> tuple[EpochSeries, GroundTruth]:
    """One subject's counts plus its ground-truth onsets and labels."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.days * MINUTES_PER_DAY
    bound = cfg._jitter_bound()

    cps: CpSet = []
    for day in range(cfg.days):
        for minute, kind in (
            (cfg.wake_onset_minute, CpKind.WAKE_ONSET),
            (cfg.sleep_onset_minute, CpKind.SLEEP_ONSET),
        ):
            jitter = _truncated_normal(rng, cfg.onset_jitter_sd_minutes, bound)
            # minute-of-day m is sample index day*1440 + m + 1 (t=1 is midnight)
            index = day * MINUTES_PER_DAY + int(round(minute + jitter)) + 1
            cps.append(ChangePoint(index=index, kind=kind))

    labels = build_label_vector(n, cps)
    day_draws = rng.gamma(cfg.day_gamma.shape, 1.0 / cfg.day_gamma.rate, size=n)
    night_draws = rng.gamma(cfg.night_gamma.shape, 1.0 / cfg.night_gamma.rate, size=n)
    counts = np.where(labels.labels == 1, day_draws, night_draws)

    ramp = cfg.transition_ramp_minutes
    if ramp > 0:
        for cp in cps:
            lo = cp.index - 1 - ramp // 2  # 0-based window start
            for j in range(max(lo, 0), min(lo + ramp, n)):
                w = (j - lo + 0.5) / ramp  # weight of the post-onset state
                if cp.kind is CpKind.WAKE_ONSET:
                    counts[j] = (1.0 - w) * night_draws[j] + w * day_draws[j]
                else:
                    counts[j] = (1.0 - w) * day_draws[j] + w * night_draws[j]

    for run in cfg.nonwear_runs:
        if run.start < 1 or run.length < 1 or run.start + run.length - 1 > n:
            raise InvalidConfigError(f"non-wear run {run} outside the series")
        counts[run.start - 1 : run.start - 1 + run.length] = 0.0

    series = EpochSeries(
        subject_id=f"synth-{cfg.seed:05d}",
        start_time=_START_TIME,
        counts=counts,
    )
    return series, GroundTruth(true_cps=cps, true_labels=labels)
