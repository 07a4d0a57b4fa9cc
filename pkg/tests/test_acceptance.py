"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict
lines; the whole module finishes in a few minutes on one core.
"""

import math
import time
from datetime import datetime

import numpy as np
import pytest
import scipy.stats

from actisleep.cli import RunConfig, generate_corpus, run_batch
from actisleep.core import CpKind
from actisleep.detect import build_label_vector, refine_change_points, split_dn
from actisleep.ingest import EpochSeries
from actisleep.metrics import ScreenConfig, paired_one_sided_t, r_metric, screen
from actisleep.stc import (
    DichotomizeConfig,
    StcParams,
    cosine_eval,
    dichotomize,
    fit_stc,
    hill,
    stc_curve,
)
from actisleep.synth import SynthConfig, generate_subject
from actisleep.core import LabelVector
from actisleep.cpd import pelt
from oracles import optimal_partition


def verdict(num: int, name: str, checks: dict, detail: str = "") -> None:
    failed = [k for k, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL: " + ", ".join(failed)
    line = f"[acceptance] criterion {num} ({name}): {status}"
    if detail:
        line += f"  [{detail}]"
    print("\n" + line)
    assert not failed, line


def detection_run(seed: int, days: int = 7, jitter: float = 45.0):
    """Full pipeline on one synthetic subject; returns accuracy inputs."""
    series, truth = generate_subject(
        SynthConfig(days=days, onset_jitter_sd_minutes=jitter, seed=seed)
    )
    fit = fit_stc(series)
    coarse, cp_stc = dichotomize(fit.predict(series.n))
    refined = refine_change_points(series, cp_stc)
    refined_labels = build_label_vector(series.n, refined)
    r_stc = r_metric(split_dn(series, coarse))
    r_refined = r_metric(split_dn(series, refined_labels))
    return series, truth, refined, refined_labels, r_stc, r_refined


def nearest_same_kind_errors(refined, truth_cps):
    truth = {CpKind.WAKE_ONSET: [], CpKind.SLEEP_ONSET: []}
    for c in truth_cps:
        truth[c.kind].append(c.index)
    return [min(abs(c.index - t) for t in truth[c.kind]) for c in refined]


def test_criterion_1_pelt_oracle_equivalence():
    rng = np.random.default_rng(20240101)
    n_series = 220
    cost_ok = cp_ok = 0
    for _ in range(n_series):
        parts = [
            rng.gamma(rng.uniform(0.5, 5.0), rng.uniform(0.2, 15.0), rng.integers(2, 52))
            for _ in range(rng.integers(1, 6))
        ]
        x = np.maximum(np.concatenate(parts)[:200], 1e-3)
        penalty = float(rng.choice([0.0, 0.5, 2.0, 5.0, 20.0, 100.0, math.inf]))
        alpha = float(rng.uniform(0.1, 5.0))
        res = pelt(x, penalty, alpha)
        o_cps, o_cost = optimal_partition(x, penalty, alpha)
        cost_ok += abs(res.total_cost - o_cost) <= 1e-9
        cp_ok += res.change_points == o_cps
    verdict(
        1,
        "PELT oracle equivalence",
        {"costs within 1e-9": cost_ok == n_series, "cp sets identical": cp_ok == n_series},
        f"{cp_ok}/{n_series} series",
    )


def test_criterion_2_stc_fit_recovery():
    rng = np.random.default_rng(20240102)
    n = 5 * 1440
    worst = 0.0
    for _ in range(20):
        p = StcParams(
            mes=float(rng.uniform(0.0, 0.3)),
            amp=float(rng.uniform(0.5, 1.0)),
            phi=float(rng.uniform(0.0, 1440.0)),
            gamma_hill=float(rng.uniform(0.5, 12.0)),
            m_half=float(rng.uniform(0.3, 1.8)),
        )
        curve = stc_curve(n, p)
        series = EpochSeries("gen", datetime(2024, 1, 1), curve)
        fit = fit_stc(series)
        worst = max(worst, float(np.abs(fit.predict(n) - curve).max()))
    verdict(
        2,
        "STC fit recovery",
        {"20 noiseless curves, max abs error < 1e-6": worst < 1e-6},
        f"worst curve error {worst:.3g}",
    )


def test_criterion_3_unit_identities():
    checks = {
        "hill(m, g, m) = 0.5": all(
            hill(m, g, m) == pytest.approx(0.5, abs=1e-15)
            for g in (0.2, 1.0, 7.0, 33.0)
            for m in (0.01, 0.5, 1.0, 1.9)
        ),
        "hill(0) = 0": hill(0.0, 3.0, 0.7) == 0.0,
        "cosine peak mes+amp": cosine_eval(300.0, 1.5, 2.5, 300.0) == pytest.approx(4.0, abs=1e-15),
        "cosine trough mes-amp": cosine_eval(1020.0, 1.5, 2.5, 300.0)
        == pytest.approx(-1.0, abs=1e-12),
        "threshold 0.1/0.9 -> 0.26": (
            lambda c: float(c.min()) + 0.2 * float(c.max() - c.min())
        )(np.linspace(0.1, 0.9, 33)) == pytest.approx(0.26, abs=1e-15),
    }
    # the dichotomizer applies exactly that threshold
    curve = np.linspace(0.1, 0.9, 33)
    labels, _ = dichotomize(curve, DichotomizeConfig(range_fraction=0.2))
    checks["dichotomize applies theta"] = (
        labels.labels.tolist() == (curve >= 0.26).astype(int).tolist()
    )
    verdict(3, "unit identities", checks)


def test_criterion_4_end_to_end_cohort():
    t0 = time.perf_counter()
    n_subjects = 50
    all_errors = []
    improved = 0
    r_pairs = []
    for i in range(n_subjects):
        _, truth, refined, _, r_stc, r_refined = detection_run(seed=1000 + i)
        all_errors.extend(nearest_same_kind_errors(refined, truth.true_cps))
        improved += r_refined >= r_stc
        if math.isfinite(r_stc) and math.isfinite(r_refined):
            r_pairs.append((r_stc, r_refined))
    within = sum(1 for e in all_errors if e <= 15) / len(all_errors)
    test = paired_one_sided_t([a for a, _ in r_pairs], [b for _, b in r_pairs])
    elapsed = time.perf_counter() - t0
    verdict(
        4,
        "end-to-end synthetic cohort",
        {
            ">= 90% refined CPs within 15 min": within >= 0.90,
            ">= 95% subjects improve R": improved / n_subjects >= 0.95,
            "one-sided paired p < 0.01": test.p_value < 0.01,
            "runtime < 5 min": elapsed < 300.0,
        },
        f"within={within:.1%}, improved={improved}/{n_subjects}, "
        f"p={test.p_value:.3g}, t={test.t_stat:.2f}, {elapsed:.0f}s",
    )


def test_criterion_5_screening_catches_corrupted_detector():
    cfg = ScreenConfig(epsilon=10.0)
    flagged_clean = flagged_corrupt = 0
    for i in range(10):
        series, _, _, refined_labels, r_stc, r_refined = detection_run(seed=2000 + i)
        if screen(r_refined, r_stc, cfg) is not None:
            flagged_clean += 1
        shifted = LabelVector(np.roll(refined_labels.labels, 240))
        r_corrupt = r_metric(split_dn(series, shifted))
        if screen(r_corrupt, r_stc, cfg) is not None:
            flagged_corrupt += 1
    verdict(
        5,
        "epsilon screening",
        {
            "corrupted detector flagged >= 8/10": flagged_corrupt >= 8,
            "clean pipeline flagged <= 1/10": flagged_clean <= 1,
        },
        f"corrupt={flagged_corrupt}/10, clean={flagged_clean}/10",
    )


def test_criterion_6_r_metric_properties():
    rng = np.random.default_rng(20240106)
    counts = rng.gamma(2.0, 8.0, 1200)
    labels = LabelVector(rng.integers(0, 2, 1200).astype(np.int8))
    series = EpochSeries("r", datetime(2024, 1, 1), counts)
    from actisleep.core import DnSplit

    v = rng.gamma(2.0, 3.0, 500)
    r_equal = r_metric(DnSplit(diurnal=v, nocturnal=v.copy()))
    r_base = r_metric(split_dn(series, labels))
    r_flip = r_metric(split_dn(series, labels.complement()))
    scaled = EpochSeries("r2", datetime(2024, 1, 1), counts * 2.0)
    r_scaled = r_metric(split_dn(scaled, labels))
    verdict(
        6,
        "R-metric identities",
        {
            "D = N gives R = 1": abs(r_equal - 1.0) <= 1e-12,
            "complement inverts R": abs(r_flip - 1.0 / r_base) <= 1e-12 * r_flip,
            "count scaling leaves R unchanged": abs(r_scaled - r_base) <= 1e-12 * r_base,
        },
    )


def test_criterion_7_runtime_envelope():
    series, _ = generate_subject(SynthConfig(days=7, onset_jitter_sd_minutes=45.0, seed=3000))
    t0 = time.perf_counter()
    fit = fit_stc(series)
    coarse, cp_stc = dichotomize(fit.predict(series.n))
    refined = refine_change_points(series, cp_stc)
    refined_labels = build_label_vector(series.n, refined)
    r_metric(split_dn(series, coarse))
    r_metric(split_dn(series, refined_labels))
    elapsed = time.perf_counter() - t0
    verdict(
        7,
        "single-subject runtime",
        {"7-day subject <= 30 s": elapsed <= 30.0},
        f"{elapsed:.2f}s (target <= 5s)",
    )


def test_criterion_8_t_test_oracle():
    rng = np.random.default_rng(20240108)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 60))
        pre = rng.normal(0.0, rng.uniform(0.5, 3.0), n)
        post = pre + rng.normal(rng.uniform(-1.0, 1.0), rng.uniform(0.2, 2.0), n)
        ours = paired_one_sided_t(pre, post)
        ref = float(scipy.stats.ttest_rel(post, pre, alternative="greater").pvalue)
        worst = max(worst, abs(ours.p_value - ref))
    verdict(
        8,
        "paired t-test vs oracle",
        {"20 random samples, |dp| <= 1e-9": worst <= 1e-9},
        f"worst |dp| = {worst:.2e}",
    )


def test_criterion_9_batch_determinism(tmp_path):
    corpus = tmp_path / "corpus"
    generate_corpus(corpus, 4, SynthConfig(days=5, onset_jitter_sd_minutes=30.0, seed=4000))

    def run(out, workers):
        cfg = RunConfig(input_dir=corpus, output_dir=out, worker_count=workers)
        assert run_batch(cfg) == 0
        return {
            str(p.relative_to(out)): p.read_bytes()
            for p in sorted(out.rglob("*"))
            if p.is_file() and p.name != "timings.json"
        }

    first = run(tmp_path / "run1", 1)
    second = run(tmp_path / "run2", 1)
    pooled = run(tmp_path / "run3", 2)
    verdict(
        9,
        "batch determinism",
        {
            "repeat run byte-identical": first == second,
            "worker pool byte-identical": first == pooled,
        },
        f"{len(first)} files compared (timings.json excluded: wall-clock)",
    )
