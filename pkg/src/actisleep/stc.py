"""Sigmoidally-transformed cosine (STC) model of circadian activity.

The five-parameter family of Marler et al. (2006): a unit cosine with a
24-hour period, passed through a Hill sigmoid (Hill 1910) so the fitted
rhythm can spend unequal time in its high (awake) and low (asleep) states,
then scaled into the data range:

    f(t) = mes + amp * h(1 + cos((t - phi) * 2*pi / T))
    h(r) = r**gamma / (m**gamma + r**gamma)

The Hill argument is the cosine shifted into [0, 2] so its domain is
always valid; mes and amp act as outer affine parameters on the unit-range
sigmoid output. Fitting happens on min-max normalized counts with a
multistart damped least-squares solver; the result is judged by its fitted
curve, not its parameters (gamma and m trade off near-equivalently).

Dichotomizing the fitted curve at a fixed fraction of its range yields
coarse awake/asleep labels whose transitions seed the change-point
refinement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ChangePoint, CpKind, CpSource, CpSet, LabelVector
from .errors import ConstantCurveError, NonVaryingSeriesError
from .ingest import MINUTES_PER_DAY, EpochSeries

PERIOD_MINUTES = 1440.0

# Projection bounds for the normalized-scale fit, in parameter-vector order
# (mes, amp, phi, gamma_hill, m_half). phi is wrapped modulo the period
# instead of clipped.
_LOWER = np.array([-0.5, 0.0, -np.inf, 0.1, 1e-3])
_UPPER = np.array([1.0, 2.0, np.inf, 50.0, 2.0])

_GRID_PEAK_CLOCKS = (720, 900, 1080)  # 12:00, 15:00, 18:00
_GRID_GAMMAS = (1.0, 3.0, 8.0)
_GRID_M_HALFS = (0.5, 1.0, 1.5)


@dataclass(frozen=True)
class StcParams:
    """The five STC parameters (normalized units) plus the fixed period."""

    mes: float
    amp: float
    phi: float
    gamma_hill: float
    m_half: float
    period_T: float = PERIOD_MINUTES

    def __post_init__(self) -> None:
        if self.amp < 0:
            raise ValueError("amp must be >= 0")
        if self.gamma_hill <= 0:
            raise ValueError("gamma_hill must be > 0")
        if self.m_half <= 0:
            raise ValueError("m_half must be > 0")
        if not 0 <= self.phi < self.period_T:
            raise ValueError(f"phi must lie in [0, {self.period_T})")

    def as_vector(self) -> np.ndarray:
        return np.array([self.mes, self.amp, self.phi, self.gamma_hill, self.m_half])


@dataclass(frozen=True)
class StcFit:
    """Best multistart fit on min-max normalized counts."""

    params: StcParams
    rss: float
    n_starts: int
    best_start_index: int
    converged: bool
    norm_min: float
    norm_max: float

    def predict(self, n: int) -> np.ndarray:
        """Fitted curve for t = 1..n, mapped back to the raw count scale."""
        scale = self.norm_max - self.norm_min
        return self.norm_min + scale * stc_curve(n, self.params)


@dataclass(frozen=True)
class DichotomizeConfig:
    range_fraction: float = 0.2

    def __post_init__(self) -> None:
        if not 0 < self.range_fraction < 1:
            raise ValueError("range_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class SolverConfig:
    """Damped least-squares settings for one local minimization."""

    fd_step: float = 1e-6
    rel_rss_tol: float = 1e-10
    step_tol: float = 1e-8
    max_iter: int = 200
    damping_init: float = 1e-3
    damping_factor: float = 10.0
    damping_max: float = 1e12


def cosine_eval(t, mes: float, amp: float, phi: float, T: float = PERIOD_MINUTES):
    """Plain three-parameter cosine model: mes + amp*cos((t-phi)*2*pi/T)."""
    if T <= 0:
        raise ValueError("period T must be > 0")
    return mes + amp * np.cos((np.asarray(t, dtype=np.float64) - phi) * (2.0 * np.pi / T))


def hill(r, gamma_hill: float, m_half: float):
    """Hill sigmoid r**g / (m**g + r**g), monotone from 0 toward 1."""
    if gamma_hill <= 0 or m_half <= 0:
        raise ValueError("gamma_hill and m_half must be > 0")
    r = np.asarray(r, dtype=np.float64)
    if (r < 0).any():
        raise ValueError("hill is defined for r >= 0 only")
    rg = np.power(r, gamma_hill)
    out = rg / (m_half**gamma_hill + rg)
    return float(out) if out.ndim == 0 else out


def stc_eval(t, p: StcParams):
    """STC value at minute index t (scalar or array)."""
    c = 1.0 + np.cos((np.asarray(t, dtype=np.float64) - p.phi) * (2.0 * np.pi / p.period_T))
    out = p.mes + p.amp * hill(np.maximum(c, 0.0), p.gamma_hill, p.m_half)
    return float(out) if np.ndim(out) == 0 else out


def stc_curve(n: int, p: StcParams) -> np.ndarray:
    """STC values for t = 1..n."""
    return stc_eval(np.arange(1, n + 1, dtype=np.float64), p)


def _normalize(counts: np.ndarray) -> tuple[np.ndarray, float, float]:
    mn = float(counts.min())
    mx = float(counts.max())
    if mx == mn:
        raise NonVaryingSeriesError("all counts identical; nothing to fit")
    return (counts - mn) / (mx - mn), mn, mx


def default_start_grid(series: EpochSeries) -> list[StcParams]:
    """27 starting points: 3 peak clock times x 3 steepnesses x 3 half-points.

    Baseline and amplitude come from the 5th/95th percentiles of the
    normalized counts, which shrugs off isolated count spikes. Peak times
    are anchored to the wall clock of the series start, so two series with
    identical counts get identical grids.
    """
    y, _, _ = _normalize(series.counts)
    p5, p95 = np.percentile(y, (5, 95))
    mes0 = float(p5)
    amp0 = float(p95 - p5)
    start_md = series.start_time.hour * 60 + series.start_time.minute
    phis = [float((peak - start_md + 1) % MINUTES_PER_DAY) for peak in _GRID_PEAK_CLOCKS]
    return [
        StcParams(mes=mes0, amp=amp0, phi=phi, gamma_hill=g, m_half=m)
        for phi, g, m in itertools.product(phis, _GRID_GAMMAS, _GRID_M_HALFS)
    ]


def _model(t: np.ndarray, vec: np.ndarray) -> np.ndarray:
    mes, amp, phi, gam, m = vec
    c = np.maximum(1.0 + np.cos((t - phi) * (2.0 * np.pi / PERIOD_MINUTES)), 0.0)
    cg = np.power(c, gam)
    return mes + amp * cg / (m**gam + cg)


def _project(vec: np.ndarray) -> np.ndarray:
    out = np.clip(vec, _LOWER, _UPPER)
    out[2] = vec[2] % PERIOD_MINUTES
    return out


def _wrapped_step(new: np.ndarray, old: np.ndarray) -> float:
    step = new - old
    half = PERIOD_MINUTES / 2.0
    step[2] = (step[2] + half) % PERIOD_MINUTES - half
    return float(np.abs(step).max())


def _lm_fit(
    t: np.ndarray, y: np.ndarray, start: StcParams, cfg: SolverConfig
) -> tuple[np.ndarray, float, bool]:
    """One damped Gauss-Newton descent from ``start``.

    Forward-difference Jacobian, damping scaled by step acceptance,
    bounds enforced by projecting each accepted step. Returns the
    parameter vector, its RSS, and whether a convergence criterion fired
    before the iteration cap.
    """
    p = _project(start.as_vector())
    resid = y - _model(t, p)
    rss = float(resid @ resid)
    lam = cfg.damping_init

    for _ in range(cfg.max_iter):
        if rss == 0.0:
            return p, rss, True
        jac = np.empty((len(t), 5))
        base = _model(t, p)
        for k in range(5):
            probe = p.copy()
            probe[k] += cfg.fd_step
            jac[:, k] = (_model(t, probe) - base) / cfg.fd_step
        jtj = jac.T @ jac
        g = jac.T @ resid
        diag = np.maximum(np.diag(jtj), 1e-12)

        accepted = False
        while lam <= cfg.damping_max:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= cfg.damping_factor
                continue
            cand = _project(p + delta)
            cand_resid = y - _model(t, cand)
            cand_rss = float(cand_resid @ cand_resid)
            if cand_rss < rss:
                accepted = True
                break
            lam *= cfg.damping_factor
        if not accepted:
            # Damping blew up without an acceptable step: stationary point.
            return p, rss, True

        step_norm = _wrapped_step(cand, p)
        rel_drop = (rss - cand_rss) / rss
        p, resid, rss = cand, cand_resid, cand_rss
        lam = max(lam / cfg.damping_factor, 1e-14)
        if rel_drop < cfg.rel_rss_tol or step_norm < cfg.step_tol:
            return p, rss, True

    return p, rss, False


def fit_stc(
    series: EpochSeries,
    starts: list[StcParams] | None = None,
    solver: SolverConfig = SolverConfig(),
) -> StcFit:
    """Multistart damped least-squares fit on min-max normalized counts.

    Every start is minimized independently; the smallest RSS wins, with
    ties broken toward the lowest start index so the reduction is
    deterministic no matter how starts are scheduled. When no start meets
    a convergence criterion the best effort is still returned, flagged
    ``converged=False``.
    """
    y, mn, mx = _normalize(series.counts)
    if starts is None:
        starts = default_start_grid(series)
    if not starts:
        raise ValueError("starts must be non-empty")
    t = np.arange(1, series.n + 1, dtype=np.float64)

    best: tuple[float, int, np.ndarray, bool] | None = None
    for idx, start in enumerate(starts):
        vec, rss, conv = _lm_fit(t, y, start, solver)
        if best is None or rss < best[0]:
            best = (rss, idx, vec, conv)

    rss, idx, vec, conv = best
    params = StcParams(
        mes=float(vec[0]),
        amp=float(vec[1]),
        phi=float(vec[2] % PERIOD_MINUTES),
        gamma_hill=float(vec[3]),
        m_half=float(vec[4]),
    )
    return StcFit(
        params=params,
        rss=rss,
        n_starts=len(starts),
        best_start_index=idx,
        converged=conv,
        norm_min=mn,
        norm_max=mx,
    )


def dichotomize(
    curve: np.ndarray, cfg: DichotomizeConfig = DichotomizeConfig()
) -> tuple[LabelVector, CpSet]:
    """Threshold a fitted curve into awake/asleep plus its transition set.

    The threshold sits at ``range_fraction`` of the curve's range above
    its minimum; minutes at or above it are awake. Transitions are the
    minutes whose label differs from the previous minute, typed rising
    (wake onset) or falling (sleep onset).
    """
    curve = np.asarray(curve, dtype=np.float64)
    cmin = float(curve.min())
    cmax = float(curve.max())
    if cmax == cmin:
        raise ConstantCurveError("curve has zero range")
    theta = cmin + cfg.range_fraction * (cmax - cmin)
    labels = (curve >= theta).astype(np.int8)
    cps: CpSet = []
    for i in np.flatnonzero(np.diff(labels)):
        kind = CpKind.WAKE_ONSET if labels[i + 1] == 1 else CpKind.SLEEP_ONSET
        cps.append(ChangePoint(index=int(i) + 2, kind=kind, source=CpSource.STC))
    return LabelVector(labels), cps
