"""Batch front-end: run the pipeline over a directory of subject files.

Subcommands:
    run    ingest -> wear check -> STC fit -> dichotomize -> refine ->
           D/N split -> R metric -> screen, per subject; writes one JSON
           report and two plot CSVs per subject plus a cohort CSV and
           summary JSON.
    synth  generate a seeded synthetic corpus in the same CSV format.
    eval   recompute the cohort summary from existing report JSONs.

All scientific outputs are deterministic for a fixed config and seed,
regardless of worker count; wall-clock timings go to a separate
timings.json so report bytes stay reproducible. Exit codes: 0 success,
1 unusable configuration, 2 at least one subject errored.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import ChangePoint, CpSource, LabelVector
from .cpd import PenaltySchedule
from .detect import build_label_vector, refine_change_points, split_dn
from .errors import ActisleepError, ConfigError, ConstantCurveError, TooFewSubjectsError
from .ingest import EpochSeries, WearPolicy, parse_actigraphy, validate_wear, write_actigraphy
from .metrics import (
    FlagReason,
    ScreenConfig,
    SubjectReport,
    cohort_summary,
    r_metric,
    screen,
)
from .stc import DichotomizeConfig, StcFit, dichotomize, fit_stc
from .synth import GammaSpec, SynthConfig, generate_subject, parse_clock


@dataclass(frozen=True)
class RunConfig:
    """Everything the ``run`` subcommand needs."""

    input_dir: Path
    output_dir: Path
    timestamp_column: str = "timestamp"
    vm_column: str = "vm"
    wear: WearPolicy = WearPolicy()
    dichotomize: DichotomizeConfig = DichotomizeConfig()
    screen: ScreenConfig = ScreenConfig()
    schedule: PenaltySchedule = PenaltySchedule()
    zero_shift: float = 1e-3
    worker_count: int = 1

    def __post_init__(self) -> None:
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.zero_shift <= 0:
            raise ConfigError("zero_shift must be > 0")


@dataclass
class SubjectOutcome:
    """One input file lands in exactly one of: report, rejection, error."""

    source_file: str
    report: SubjectReport | None = None
    series: EpochSeries | None = None
    curve: np.ndarray | None = None
    coarse_labels: LabelVector | None = None
    refined_labels: LabelVector | None = None
    fit: StcFit | None = None
    rejection_reason: str | None = None
    rejected_id: str | None = None
    error: str | None = None


def process_subject(series: EpochSeries, cfg: RunConfig) -> SubjectOutcome:
    """Run the full detection pipeline on one accepted series."""
    t0 = time.perf_counter()
    fit = fit_stc(series)
    curve = fit.predict(series.n)
    degenerate = False
    try:
        coarse_labels, cp_stc = dichotomize(curve, cfg.dichotomize)
    except ConstantCurveError:
        coarse_labels = LabelVector(np.zeros(series.n, dtype=np.int8), degenerate=True)
        cp_stc = []
        degenerate = True

    if len(cp_stc) >= 3:
        refined = refine_change_points(series, cp_stc, cfg.schedule, cfg.zero_shift)
    else:
        # Not enough structure to bound a search; keep the coarse result.
        refined = [replace(cp, source=CpSource.FALLBACK) for cp in cp_stc]
    refined_labels = (
        build_label_vector(series.n, refined) if refined else
        LabelVector(np.zeros(series.n, dtype=np.int8), degenerate=True)
    )
    degenerate = degenerate or refined_labels.degenerate

    r_stc = r_metric(split_dn(series, coarse_labels))
    r_refined = r_metric(split_dn(series, refined_labels))

    if degenerate:
        reason = FlagReason.DEGENERATE
    else:
        reason = screen(r_refined, r_stc, cfg.screen)
        if reason is None and any(cp.source is CpSource.FALLBACK for cp in refined):
            reason = FlagReason.FALLBACK

    report = SubjectReport(
        subject_id=series.subject_id,
        r_stc=r_stc,
        r_refined=r_refined,
        flagged=reason is not None,
        flag_reason=reason,
        cp_refined=refined,
        cp_stc=cp_stc,
        runtime_seconds=time.perf_counter() - t0,
    )
    return SubjectOutcome(
        source_file="",
        report=report,
        series=series,
        curve=curve,
        coarse_labels=coarse_labels,
        refined_labels=refined_labels,
        fit=fit,
    )


def _process_path(path_and_cfg: tuple[str, RunConfig]) -> SubjectOutcome:
    path, cfg = path_and_cfg
    name = Path(path).name
    try:
        series = parse_actigraphy(
            path, timestamp_column=cfg.timestamp_column, vm_column=cfg.vm_column
        )
        verdict = validate_wear(series, cfg.wear)
        if not verdict.accepted:
            return SubjectOutcome(
                source_file=name,
                rejection_reason=verdict.reason,
                rejected_id=series.subject_id,
            )
        outcome = process_subject(series, cfg)
        outcome.source_file = name
        return outcome
    except ActisleepError as exc:
        return SubjectOutcome(source_file=name, error=f"{type(exc).__name__}: {exc}")
    except (OSError, ValueError) as exc:
        return SubjectOutcome(source_file=name, error=f"{type(exc).__name__}: {exc}")


# -- deterministic serialization ----------------------------------------------

def _num(x: float):
    """JSON-safe number: infinities and NaN become strings."""
    return x if math.isfinite(x) else str(x)


def _rle(labels: np.ndarray) -> list[list[int]]:
    out: list[list[int]] = []
    for v in labels:
        v = int(v)
        if out and out[-1][0] == v:
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return out


def _cp_obj(cp: ChangePoint, with_source: bool = True) -> dict:
    obj = {"index": cp.index, "kind": cp.kind.value}
    if with_source:
        obj["source"] = cp.source.value
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def subject_report_json(outcome: SubjectOutcome) -> dict:
    rep = outcome.report
    fit = outcome.fit
    return {
        "subject_id": rep.subject_id,
        "source_file": outcome.source_file,
        "n_minutes": outcome.series.n,
        "start_time": outcome.series.start_time.strftime("%Y-%m-%dT%H:%M"),
        "r_stc": _num(rep.r_stc),
        "r_refined": _num(rep.r_refined),
        "delta_r": _num(rep.r_refined - rep.r_stc),
        "flagged": rep.flagged,
        "flag_reason": rep.flag_reason.value if rep.flag_reason else None,
        "cp_stc": [_cp_obj(cp, with_source=False) for cp in rep.cp_stc],
        "cp_refined": [_cp_obj(cp) for cp in rep.cp_refined],
        "coarse_labels_rle": _rle(outcome.coarse_labels.labels),
        "refined_labels_rle": _rle(outcome.refined_labels.labels),
        "degenerate_labels": outcome.refined_labels.degenerate,
        "fit": {
            "mes": fit.params.mes,
            "amp": fit.params.amp,
            "phi": fit.params.phi,
            "gamma_hill": fit.params.gamma_hill,
            "m_half": fit.params.m_half,
            "rss": fit.rss,
            "n_starts": fit.n_starts,
            "best_start_index": fit.best_start_index,
            "converged": fit.converged,
            "norm_min": fit.norm_min,
            "norm_max": fit.norm_max,
        },
    }


def emit_plot_data(
    outcome: SubjectOutcome, plots_dir: Path
) -> list[Path]:
    """Write plot-ready CSVs for one completed subject.

    ``<id>_curve.csv`` holds (t, count, fitted value, coarse and refined
    labels); ``<id>_activity_split.csv`` holds the D/N vectors under both
    label sets. Together they are enough to redraw the fit, the detected
    onsets, and the residual-activity comparison.
    """
    series = outcome.series
    sid = outcome.report.subject_id
    curve_path = plots_dir / f"{sid}_curve.csv"
    split_path = plots_dir / f"{sid}_activity_split.csv"

    with curve_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "count", "stc_value", "coarse_label", "refined_label"])
        for i in range(series.n):
            w.writerow(
                [
                    i + 1,
                    repr(float(series.counts[i])),
                    repr(float(outcome.curve[i])),
                    int(outcome.coarse_labels.labels[i]),
                    int(outcome.refined_labels.labels[i]),
                ]
            )

    split_stc = split_dn(series, outcome.coarse_labels)
    split_ref = split_dn(series, outcome.refined_labels)
    with split_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "d_stc", "n_stc", "d_refined", "n_refined"])
        for i in range(series.n):
            w.writerow(
                [
                    i + 1,
                    repr(float(split_stc.diurnal[i])),
                    repr(float(split_stc.nocturnal[i])),
                    repr(float(split_ref.diurnal[i])),
                    repr(float(split_ref.nocturnal[i])),
                ]
            )
    return [curve_path, split_path]


def _write_cohort_csv(path: Path, reports: list[SubjectReport]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id", "r_stc", "r_refined", "delta_r", "flagged", "flag_reason"])
        for rep in sorted(reports, key=lambda r: r.subject_id):
            w.writerow(
                [
                    rep.subject_id,
                    repr(rep.r_stc),
                    repr(rep.r_refined),
                    repr(rep.r_refined - rep.r_stc),
                    int(rep.flagged),
                    rep.flag_reason.value if rep.flag_reason else "",
                ]
            )


def _summary_obj(
    reports: list[SubjectReport],
    rejections: list[dict],
    errors: list[dict],
) -> dict:
    obj: dict = {
        "n_reports": len(reports),
        "n_rejected": len(rejections),
        "n_errors": len(errors),
        "rejections": rejections,
        "errors": errors,
    }
    if len(reports) >= 2:
        summary = cohort_summary(reports)
        obj["cohort"] = {
            "n_subjects": summary.n_subjects,
            "n_finite_pairs": summary.n_finite_pairs,
            "n_inf_excluded": summary.n_inf_excluded,
            "flagged_count": summary.flagged_count,
            "delta_r": [_num(d) for d in summary.delta_r],
            "t_stat": summary.test.t_stat if summary.test else None,
            "p_value": summary.test.p_value if summary.test else None,
            "df": summary.test.df if summary.test else None,
        }
    else:
        obj["cohort"] = None
    return obj


def run_batch(cfg: RunConfig) -> int:
    """Process every ``*.csv`` under the input directory; see module doc."""
    if not cfg.input_dir.is_dir():
        print(f"error: input directory {cfg.input_dir} does not exist", file=sys.stderr)
        return 1
    paths = sorted(str(p) for p in cfg.input_dir.glob("*.csv"))
    if not paths:
        print(f"error: no subjects found in {cfg.input_dir}", file=sys.stderr)
        return 1

    reports_dir = cfg.output_dir / "reports"
    plots_dir = cfg.output_dir / "plots"
    reports_dir.mkdir(parents=True, exist_ok=True)
    plots_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(p, cfg) for p in paths]
    if cfg.worker_count > 1:
        with ProcessPoolExecutor(max_workers=cfg.worker_count) as pool:
            outcomes = list(pool.map(_process_path, jobs))
    else:
        outcomes = [_process_path(job) for job in jobs]

    completed = sorted(
        (o for o in outcomes if o.report is not None), key=lambda o: o.report.subject_id
    )
    rejections = sorted(
        (
            {"subject_id": o.rejected_id, "source_file": o.source_file, "reason": o.rejection_reason}
            for o in outcomes
            if o.rejection_reason is not None
        ),
        key=lambda r: r["source_file"],
    )
    errors = sorted(
        (
            {"source_file": o.source_file, "message": o.error}
            for o in outcomes
            if o.error is not None
        ),
        key=lambda e: e["source_file"],
    )

    timings: dict[str, float] = {}
    for outcome in completed:
        rep = outcome.report
        _write_json(reports_dir / f"{rep.subject_id}.json", subject_report_json(outcome))
        emit_plot_data(outcome, plots_dir)
        timings[rep.subject_id] = rep.runtime_seconds
        print(
            f"{rep.subject_id}: r_stc={rep.r_stc:.3g} r_refined={rep.r_refined:.3g}"
            + (f" [{rep.flag_reason.value}]" if rep.flag_reason else "")
        )
    for rej in rejections:
        print(f"{rej['source_file']}: rejected ({rej['reason']})")
    for err in errors:
        print(f"{err['source_file']}: error ({err['message']})", file=sys.stderr)

    reports = [o.report for o in completed]
    _write_cohort_csv(cfg.output_dir / "cohort.csv", reports)
    _write_json(cfg.output_dir / "summary.json", _summary_obj(reports, rejections, errors))
    # Wall-clock is inherently non-reproducible; it lives outside the
    # deterministic report files.
    _write_json(cfg.output_dir / "timings.json", {"per_subject_seconds": timings})

    return 2 if errors else 0


# -- synth subcommand ----------------------------------------------------------

def generate_corpus(
    out_dir: Path, n_subjects: int, base: SynthConfig
) -> list[Path]:
    """Write ``n_subjects`` seeded synthetic subjects as CSV files."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(n_subjects):
        cfg = replace(base, seed=base.seed + i)
        series, _ = generate_subject(cfg)
        path = out_dir / f"{series.subject_id}.csv"
        write_actigraphy(series, path)
        written.append(path)
    return written


# -- eval subcommand -----------------------------------------------------------

def _report_from_json(obj: dict) -> SubjectReport:
    def back(x):
        return float(x) if isinstance(x, str) else float(x)

    reason = FlagReason(obj["flag_reason"]) if obj.get("flag_reason") else None
    return SubjectReport(
        subject_id=obj["subject_id"],
        r_stc=back(obj["r_stc"]),
        r_refined=back(obj["r_refined"]),
        flagged=bool(obj["flagged"]),
        flag_reason=reason,
        cp_refined=[],
        cp_stc=[],
    )


def eval_reports(reports_dir: Path, out_dir: Path) -> int:
    if not reports_dir.is_dir():
        print(f"error: {reports_dir} does not exist", file=sys.stderr)
        return 1
    files = sorted(reports_dir.glob("*.json"))
    reports = [_report_from_json(json.loads(p.read_text())) for p in files]
    if not reports:
        print(f"error: no reports found in {reports_dir}", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_cohort_csv(out_dir / "cohort.csv", reports)
    try:
        _write_json(out_dir / "summary.json", _summary_obj(reports, [], []))
    except TooFewSubjectsError:
        print("error: need >= 2 reports for a cohort summary", file=sys.stderr)
        return 1
    summary = json.loads((out_dir / "summary.json").read_text())
    cohort = summary["cohort"]
    if cohort and cohort["p_value"] is not None:
        print(
            f"{cohort['n_finite_pairs']} finite pairs, "
            f"t={cohort['t_stat']:.4g}, one-sided p={cohort['p_value']:.4g}, "
            f"{cohort['flagged_count']} flagged"
        )
    return 0


# -- argument parsing ----------------------------------------------------------

_CONFIG_TYPES = {
    "input_dir": str,
    "output_dir": str,
    "timestamp_column": str,
    "vm_column": str,
    "max_zero_run": int,
    "min_days": int,
    "range_fraction": float,
    "epsilon": float,
    "penalty_factor": float,
    "penalty_decay": float,
    "penalty_max_iterations": int,
    "zero_shift": float,
    "workers": int,
}


def load_config_file(path: Path) -> dict:
    """Parse a ``key = value`` config file (# starts a comment)."""
    values: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actisleep",
        description="Training-free sleep/wake onset detection from actigraphy CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the detection pipeline over a directory")
    run.add_argument("--config", type=Path, help="key = value config file")
    run.add_argument("--input-dir", type=str, help="directory of per-subject CSVs")
    run.add_argument("--output-dir", type=str, help="where reports and plots go")
    run.add_argument("--timestamp-column", type=str)
    run.add_argument("--vm-column", type=str)
    run.add_argument("--max-zero-run", type=int, help="non-wear zero-run threshold, minutes")
    run.add_argument("--min-days", type=int)
    run.add_argument("--range-fraction", type=float, help="dichotomization threshold fraction")
    run.add_argument("--epsilon", type=float, help="screening threshold for R")
    run.add_argument("--penalty-factor", type=float)
    run.add_argument("--penalty-decay", type=float)
    run.add_argument("--penalty-max-iterations", type=int)
    run.add_argument("--zero-shift", type=float)
    run.add_argument("--workers", type=int)

    synth = sub.add_parser("synth", help="generate a synthetic corpus")
    synth.add_argument("--output-dir", type=str, required=True)
    synth.add_argument("--subjects", type=int, default=10)
    synth.add_argument("--days", type=int, default=7)
    synth.add_argument("--wake-onset", type=str, default="07:00")
    synth.add_argument("--sleep-onset", type=str, default="21:00")
    synth.add_argument("--jitter-sd", type=float, default=30.0)
    synth.add_argument("--day-mean", type=float, default=500.0)
    synth.add_argument("--night-mean", type=float, default=5.0)
    synth.add_argument("--gamma-shape", type=float, default=2.0)
    synth.add_argument("--ramp", type=int, default=10)
    synth.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("eval", help="recompute cohort stats from report JSONs")
    ev.add_argument("--reports-dir", type=str, required=True)
    ev.add_argument("--output-dir", type=str, required=True)
    return parser


_RUN_DEFAULTS = {
    "timestamp_column": "timestamp",
    "vm_column": "vm",
    "max_zero_run": 120,
    "min_days": 5,
    "range_fraction": 0.2,
    "epsilon": 10.0,
    "penalty_factor": 10.0,
    "penalty_decay": 0.5,
    "penalty_max_iterations": 20,
    "zero_shift": 1e-3,
    "workers": 1,
}


def _run_config_from_args(args: argparse.Namespace) -> RunConfig:
    values = dict(_RUN_DEFAULTS)
    if args.config is not None:
        values.update(load_config_file(args.config))
    for key in list(values) + ["input_dir", "output_dir"]:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            values[key] = cli_value
    if not values.get("input_dir") or not values.get("output_dir"):
        raise ConfigError("input_dir and output_dir are required (flag or config file)")
    return RunConfig(
        input_dir=Path(values["input_dir"]),
        output_dir=Path(values["output_dir"]),
        timestamp_column=values["timestamp_column"],
        vm_column=values["vm_column"],
        wear=WearPolicy(
            max_zero_run_minutes=values["max_zero_run"], min_days=values["min_days"]
        ),
        dichotomize=DichotomizeConfig(range_fraction=values["range_fraction"]),
        screen=ScreenConfig(epsilon=values["epsilon"]),
        schedule=PenaltySchedule(
            initial_factor=values["penalty_factor"],
            decay=values["penalty_decay"],
            max_iterations=values["penalty_max_iterations"],
        ),
        zero_shift=values["zero_shift"],
        worker_count=values["workers"],
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_batch(_run_config_from_args(args))
        if args.command == "synth":
            base = SynthConfig(
                days=args.days,
                wake_onset_minute=parse_clock(args.wake_onset),
                sleep_onset_minute=parse_clock(args.sleep_onset),
                onset_jitter_sd_minutes=args.jitter_sd,
                day_gamma=GammaSpec(shape=args.gamma_shape, rate=args.gamma_shape / args.day_mean),
                night_gamma=GammaSpec(
                    shape=args.gamma_shape, rate=args.gamma_shape / args.night_mean
                ),
                transition_ramp_minutes=args.ramp,
                seed=args.seed,
            )
            written = generate_corpus(Path(args.output_dir), args.subjects, base)
            print(f"wrote {len(written)} subjects to {args.output_dir}")
            return 0
        if args.command == "eval":
            return eval_reports(Path(args.reports_dir), Path(args.output_dir))
    except (ConfigError, ActisleepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
