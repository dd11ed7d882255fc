"""Parameter and delay recovery from photon-count maps.

Two layers, mirroring the analysis of the measured data:

* a global fit of the cavity linewidth, collective coupling, cavity detuning
  and foil thickness to the per-timestep-normalized count map, plus a global
  scaling factor recovered in closed form, and
* a per-detuning delay fit of the late-time dynamical beat with the global
  scale held fixed, so the arrival delay of the narrowband pulse is the only
  free parameter.

The delay fit is multi-start (the beat pattern makes the cost landscape
multimodal in the delay): a coarse stage scans the delay window, a refinement
stage re-starts around the best coarse minimum, and the refined fits are
filtered back to the window and pooled with inverse-variance weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np

from . import cavity as _cavity
from .cavity import CavityParams
from .core import FrequencyGrid
from .errors import ConfigurationError
from .foil import FoilParams
from .optim import levenberg_marquardt
from .response import GATE_START, r_snxp_analytic
from .synth import CountMatrix, SweepConfig, raw_intensity_matrix


@dataclass(frozen=True)
class FitSettings:
    """Knobs of the two-stage delay fit; times in 1/gamma."""

    gate_start: float = GATE_START
    n_starts_stage1: int = 50
    n_starts_stage2: int = 50
    delay_window: tuple = (-0.1, 0.4)
    refine_halfwidth: float = 0.25
    max_iterations: int = 200
    step_tolerance: float = 1e-8
    min_gated_bins: int = 10
    min_gated_counts: float = 50.0

    def __post_init__(self):
        lo, hi = self.delay_window
        if lo >= hi:
            raise ConfigurationError("delay window must be ordered")
        if self.n_starts_stage1 < 1 or self.n_starts_stage2 < 1:
            raise ConfigurationError("start counts must be positive")
        if self.refine_halfwidth <= 0:
            raise ConfigurationError("refine_halfwidth must be positive")
        if self.min_gated_bins < 3:
            raise ConfigurationError("need at least 3 gated bins")


#: flag values attached to DelayEstimate
FLAG_LOW_AMPLITUDE = "low-amplitude"
FLAG_NO_KEPT_STARTS = "no-kept-starts"


@dataclass(frozen=True)
class DelayEstimate:
    """Fitted arrival delay at one detuning [1/gamma]."""

    detuning: float
    tau_mean: float
    tau_stderr: float
    n_kept_starts: int
    flags: FrozenSet[str] = frozenset()

    @property
    def valid(self) -> bool:
        return not self.flags

    def __float__(self) -> float:
        return self.tau_mean


@dataclass(frozen=True)
class GlobalFitResult:
    cavity: CavityParams
    foil: FoilParams
    scale: float
    residual: float
    converged: bool
    covariance: Optional[np.ndarray] = field(default=None, repr=False)


def normalize_per_timestep(counts: np.ndarray) -> np.ndarray:
    """Divide each time row by its sum over detunings.

    Removes the overall nuclear decay envelope and any global scale, leaving
    only the detuning dependence at each time step.  Zero rows stay zero.
    """
    counts = np.asarray(counts, dtype=float)
    sums = counts.sum(axis=1, keepdims=True)
    out = np.zeros_like(counts)
    np.divide(counts, sums, out=out, where=sums > 0)
    return out


def fit_global(data: CountMatrix, init: GlobalFitResult | None = None,
               settings: FitSettings | None = None,
               grid: FrequencyGrid | None = None,
               max_iterations: int = 60) -> GlobalFitResult:
    """Fit (kappa, g2n, delta_c, effective thickness) to a count map.

    The fit compares per-timestep-normalized maps, which makes it independent
    of the count budget; the overall scaling factor is recovered afterwards in
    closed form against the unnormalized data.

    Scaling (kappa, kappa_r, delta_c, g2n) by a common factor multiplies the
    reflection by that factor and nothing else, so a count map determines only
    g2n/(kappa + i delta_c) and the foil thickness; the overall frequency
    scale of the cavity triple is a gauge choice.  The fit therefore holds
    kappa at its initial value and optimizes (g2n, delta_c, thickness); the
    result is reported in the gauge of the init.
    """
    cfg = data.config
    if settings is None:
        settings = FitSettings()
    if grid is None:
        # coarser than the transform default; enough for a fit model and an
        # order of magnitude faster
        grid = FrequencyGrid(n_samples=2**14, spacing=1024.0 / 2**15)
    counts = data.counts.astype(float)
    target = normalize_per_timestep(counts)
    row_ok = counts.sum(axis=1) > 0
    # Poisson error of a normalized row entry, to first order
    sums = np.where(row_ok, counts.sum(axis=1), 1.0)[:, None]
    sigma = np.sqrt(np.maximum(counts, 1.0)) / sums

    if init is None:
        kappa = 45.0
        start = np.array([3285.0, -28.1, 126.3])
    else:
        kappa = init.cavity.kappa
        start = np.array([init.cavity.g2n, init.cavity.delta_c,
                          init.foil.effective_thickness])

    def build(params):
        g2n, delta_c, thick = params
        p = CavityParams(kappa=kappa, kappa_r=0.5 * kappa, delta_c=delta_c,
                         g2n=g2n)
        f = FoilParams(effective_thickness=thick)
        return p, f

    def residual(params):
        p, f = build(params)
        model = normalize_per_timestep(raw_intensity_matrix(cfg, f, p, grid))
        r = (model - target) / sigma
        return r[row_ok].ravel()

    res = levenberg_marquardt(
        residual, start,
        bounds=[(0.0, None), (None, None), (0.0, None)],
        max_iterations=max_iterations,
        step_tolerance=settings.step_tolerance)
    p, f = build(res.params)
    model = raw_intensity_matrix(cfg, f, p, grid)
    denom = float((model * model).sum())
    scale = float((counts * model).sum() / denom) if denom > 0 else 0.0
    return GlobalFitResult(cavity=p, foil=f, scale=scale, residual=res.cost,
                           converged=res.converged, covariance=res.covariance)


def _beat_model(times, tau, scale, delta_d, f, p):
    amp = r_snxp_analytic(times, delta_d, f, p, tau=tau)
    return scale * np.abs(amp) ** 2


def _single_delay_fit(times, col, tau0, scale, delta_d, f, p, settings):
    # expected-count (Pearson) weighting: weighting by the observed counts
    # instead biases the delay low by ~2 standard errors at the count levels
    # of a typical gated column
    def residual(x):
        model = _beat_model(times, x[0], scale, delta_d, f, p)
        return (model - col) / np.sqrt(np.maximum(model, 1.0))

    return levenberg_marquardt(residual, np.array([tau0]),
                               max_iterations=settings.max_iterations,
                               step_tolerance=settings.step_tolerance)


def fit_delay_column(col: np.ndarray, delta_d: float, cfg: SweepConfig,
                     glob: GlobalFitResult,
                     settings: FitSettings | None = None) -> DelayEstimate:
    """Recover the pulse arrival delay from one detuning column.

    Fits the fixed-scale beat model to the counts after the analysis gate;
    the delay is the only free parameter.  Stage one scans equidistant starts
    across the delay window and keeps the best minimum; stage two re-starts
    around it, keeps only refined fits that land back inside the window, and
    reports their inverse-variance weighted mean.  The standard error
    combines the weighted spread of the kept delays with their typical
    per-fit variance.
    """
    if settings is None:
        settings = FitSettings()
    col = np.asarray(col, dtype=float)
    centers = cfg.time_centers()
    if col.shape != centers.shape:
        raise ConfigurationError("column length does not match the time binning")
    gated = centers >= settings.gate_start
    if int(gated.sum()) < settings.min_gated_bins:
        raise ConfigurationError(
            f"only {int(gated.sum())} bins after the gate; need "
            f"{settings.min_gated_bins}")
    times = centers[gated]
    counts = col[gated]
    f, p = glob.foil, glob.cavity
    scale = glob.scale * cfg.bin_width

    def flagged(flag):
        return DelayEstimate(detuning=delta_d, tau_mean=np.nan,
                             tau_stderr=np.nan, n_kept_starts=0,
                             flags=frozenset({flag}))

    if counts.sum() < settings.min_gated_counts:
        return flagged(FLAG_LOW_AMPLITUDE)
    r0 = _cavity.cavity_reflection(np.array([delta_d]), p)[0]
    r_max = _cavity._max_reflection(p)
    if r_max == 0.0 or abs(r0) < _cavity.RELIABILITY_FLOOR * r_max:
        return flagged(FLAG_LOW_AMPLITUDE)

    lo, hi = settings.delay_window
    stage1 = [_single_delay_fit(times, counts, t0, scale, delta_d,
                                f, p, settings)
              for t0 in np.linspace(lo, hi, settings.n_starts_stage1)]
    tau0 = float(min(stage1, key=lambda r: r.cost).params[0])

    stage2 = [_single_delay_fit(times, counts, t0, scale, delta_d,
                                f, p, settings)
              for t0 in np.linspace(tau0 - settings.refine_halfwidth,
                                    tau0 + settings.refine_halfwidth,
                                    settings.n_starts_stage2)]
    taus, variances = [], []
    for r in stage2:
        tau = float(r.params[0])
        if not (lo <= tau <= hi):
            continue
        var = np.nan
        if r.covariance is not None and np.isfinite(r.covariance[0, 0]) \
                and r.covariance[0, 0] >= 0:
            var = float(r.covariance[0, 0])
        taus.append(tau)
        variances.append(var)
    if not taus:
        return flagged(FLAG_NO_KEPT_STARTS)
    taus = np.asarray(taus)
    variances = np.asarray(variances)
    # a perfect (zero-residual) fit reports zero variance; keep the weights
    # finite so the noiseless case degrades to an unweighted mean
    variances = np.where(np.isfinite(variances), variances, np.inf)
    w = 1.0 / np.maximum(variances, 1e-30)
    if not np.any(w > 0):
        # no fit produced a usable variance: fall back to an unweighted mean
        w = np.ones_like(w)
    w_sum = float(w.sum())
    tau_hat = float(np.sum(w * taus) / w_sum)
    spread = float(np.sum(w * (taus - tau_hat) ** 2) / w_sum)
    finite = np.isfinite(variances)
    var_typ = float(np.mean(variances[finite])) if finite.any() else 0.0
    stderr = float(np.sqrt(spread + var_typ))
    return DelayEstimate(detuning=delta_d, tau_mean=tau_hat,
                         tau_stderr=stderr, n_kept_starts=int(taus.size))


@dataclass(frozen=True)
class DelayCurve:
    estimates: tuple

    def detunings(self) -> np.ndarray:
        return np.array([e.detuning for e in self.estimates])

    def taus(self) -> np.ndarray:
        return np.array([e.tau_mean for e in self.estimates])

    def stderrs(self) -> np.ndarray:
        return np.array([e.tau_stderr for e in self.estimates])

    def valid(self) -> np.ndarray:
        return np.array([e.valid for e in self.estimates])


def delay_curve(data: CountMatrix, glob: GlobalFitResult,
                settings: FitSettings | None = None) -> DelayCurve:
    """fit_delay_column over every detuning column of a count map."""
    cfg = data.config
    ests = tuple(
        fit_delay_column(data.counts[:, k], dd, cfg, glob, settings)
        for k, dd in enumerate(cfg.detunings()))
    return DelayCurve(estimates=ests)
