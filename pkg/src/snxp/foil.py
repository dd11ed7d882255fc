"""Transmission of the resonant 57Fe drive foil and the chopper-gated pulse.

The foil imprints a gamma-wide absorption line on a broadband pulse; gating
away the prompt (delta-like) part of the time response turns that line into a
spectrally narrow pulse.  Both domains are provided, plus the incomplete-gamma
series for the gated spectrum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j1

from .errors import ConfigurationError, TruncationError

#: total resonant cross section of the 14.4 keV transition [m^2]
SIGMA0_M2 = 2.56e-22


@dataclass(frozen=True)
class FoilParams:
    """Resonant foil: dimensionless effective thickness and Doppler detuning."""

    effective_thickness: float = 126.3
    doppler_detuning: float = 0.0
    linewidth: float = 1.0  # gamma, = 1 in natural units

    def __post_init__(self):
        if self.effective_thickness < 0:
            raise ConfigurationError("effective thickness must be >= 0")
        if self.linewidth <= 0:
            raise ConfigurationError("linewidth must be positive")


@dataclass(frozen=True)
class ChopperParams:
    """Time-domain gate opening at t = open_time (tau_chop)."""

    open_time: float = 0.0

    def __post_init__(self):
        if self.open_time < 0:
            raise ConfigurationError("chopper opening time must be >= 0")


def effective_thickness(sigma0_m2: float = SIGMA0_M2,
                        f_lm: float = 0.796,
                        number_density_m3: float = 6.2e28,
                        thickness_m: float = 10e-6) -> float:
    """Effective (optical) thickness sigma0 * f_LM * n * d.

    The defaults reproduce the value 126.3 for a 10 um stainless-steel foil;
    f_LM and the resonant number density are back-derived from that value,
    not independently known quantities.
    """
    for name, v in [("sigma0_m2", sigma0_m2), ("f_lm", f_lm),
                    ("number_density_m3", number_density_m3),
                    ("thickness_m", thickness_m)]:
        if v < 0:
            raise ConfigurationError(f"{name} must be >= 0")
    return sigma0_m2 * f_lm * number_density_m3 * thickness_m


def foil_transmission_freq(delta, p: FoilParams):
    """T_foil(Delta) = exp(-i L gamma/4 / (Delta - Delta_D + i gamma/2))."""
    delta = np.asarray(delta, dtype=float)
    g = p.linewidth
    denom = delta - p.doppler_detuning + 0.5j * g
    return np.exp(-0.25j * p.effective_thickness * g / denom)


def foil_transmission_time_smooth(t, p: FoilParams):
    """Smooth (non-delta) part of the foil's time response.

    The full response is sqrt(2 pi) delta(t) plus this term; the delta spike
    is the untouched broadband pulse and is never sampled numerically.
    """
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g = p.linewidth
    L = p.effective_thickness
    out = np.zeros(t.shape, dtype=complex)
    if L == 0.0:
        return out[0] if scalar else out
    u = L * g * t
    causal = t >= 0.0
    small = causal & (np.abs(u) < 1e-6)
    regular = causal & ~small
    phase = np.zeros(t.shape, dtype=complex)
    phase[causal] = np.exp(-0.5 * g * t[causal] - 1j * p.doppler_detuning * t[causal])
    # removable 1/sqrt(t) singularity: two-term J1 series
    out[small] = -phase[small] * math.sqrt(np.pi / 2.0) * (L * g / 2.0) \
        * (1.0 - u[small] / 8.0)
    tr = t[regular]
    out[regular] = -phase[regular] * np.sqrt(np.pi * L * g / (2.0 * tr)) \
        * j1(np.sqrt(u[regular]))
    return out[0] if scalar else out


def chopper_transmission_time(t, c: ChopperParams, p: FoilParams):
    """theta(t - tau_chop) times the smooth foil response (no delta part survives)."""
    t = np.asarray(t, dtype=float)
    vals = np.asarray(foil_transmission_time_smooth(t, p))
    return np.where(t >= c.open_time, vals, 0.0 + 0.0j)


def incomplete_gamma_int(n: int, z: complex) -> complex:
    """Upper incomplete gamma for integer order:
    Gamma(n, z) = (n-1)! exp(-z) sum_{m<n} z^m / m!.
    """
    if n < 1:
        raise ConfigurationError(f"order must be a positive integer, got {n}")
    z = complex(z)
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for m in range(1, n):
        term *= z / m
        s += term
    if s == 0:
        return 0.0 + 0.0j
    # log-space combination keeps (n-1)! exp(-z) finite for large n
    return cmath.exp(math.lgamma(n) - z + cmath.log(s))


def chopper_transmission_freq(delta, c: ChopperParams, p: FoilParams,
                              tol: float = 1e-12, max_terms: int = 400):
    """Spectrum of the gated foil response.

    Evaluates the incomplete-gamma series

        sum_{n>=1} x^n/n! * Gamma(n, w)/(n-1)!,   x = -i L g/4 / (D - D_D + i g/2),
                                                  w = (g/2 - i(D - D_D)) tau_chop,

    in the cancellation-free resummed form

        (exp(x) - 1) - exp(-w) sum_{n>=1} (x w)^n / (n!)^2 * rho_n(w),
        rho_n(w) = sum_{k>=0} w^k n!/(n+k)!,

    which is exactly equivalent (Gamma(n,w)/(n-1)! = 1 - P(n,w)) but avoids
    the exp(|x|)-sized intermediate terms of the direct sum near resonance.
    Truncated when the next term drops below tol relative to the partial sum,
    with a hard cap of max_terms terms.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    scalar = np.isscalar(delta) or np.ndim(delta) == 0
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    g = p.linewidth
    L = p.effective_thickness
    if L == 0.0:
        out = np.zeros(delta.shape, dtype=complex)
        return out[0] if scalar else out

    denom = delta - p.doppler_detuning + 0.5j * g
    x = -0.25j * L * g / denom
    w = (0.5 * g - 1j * (delta - p.doppler_detuning)) * c.open_time

    if c.open_time == 0.0:
        total = np.exp(x) - 1.0  # tau_chop -> 0 limit: T_foil - 1
        return total[0] if scalar else total

    # |x w| = L g tau_chop / 4 everywhere; large |x| implies small |w| and
    # vice versa, so each regime gets the numerically benign expansion.
    near = np.abs(x) > 8.0
    total = np.empty(delta.shape, dtype=complex)
    total[near] = _chopper_series_resummed(x[near], w[near], tol, max_terms)
    total[~near] = _chopper_series_direct(x[~near], w[~near], tol, max_terms)
    return total[0] if scalar else total


def _chopper_series_direct(x, w, tol, max_terms):
    """sum_n x^n/n! * Q(n, w), Q the regularized upper incomplete gamma.

    Stable for |x| <~ 8 (term cancellation bounded by exp(|x|))."""
    if x.size == 0:
        return x
    total = np.zeros_like(x)
    pn = np.ones_like(x)        # x^n / n!
    qn = np.exp(-w)             # Q(n, w)
    tn = np.exp(-w)             # exp(-w) w^n / n!
    converged = np.zeros(x.shape, dtype=bool)
    last_mag = np.zeros(x.shape, dtype=float)
    for n in range(1, max_terms + 1):
        pn = pn * x / n
        term = pn * qn
        total = np.where(converged, total, total + term)
        last_mag = np.where(converged, last_mag, np.abs(term))
        converged |= last_mag < tol * np.maximum(np.abs(total), 1e-300)
        if converged.all():
            return total
        tn = tn * w / n
        qn = qn + tn
    raise TruncationError(float(np.max(last_mag[~converged])), max_terms)


def _chopper_series_resummed(x, w, tol, max_terms):
    """(exp(x)-1) - exp(-w) sum_n (xw)^n/(n!)^2 rho_n(w), used near resonance.

    Equivalent via Q(n,w) = 1 - P(n,w); avoids the exp(|x|)-sized terms of the
    direct sum.  Requires small |w|, guaranteed by the |x| > 8 regime split."""
    if x.size == 0:
        return x
    total = np.exp(x) - 1.0
    ew = np.exp(-w)
    xw = x * w
    u = np.ones_like(x)  # (x w)^n / (n!)^2
    converged = np.zeros(x.shape, dtype=bool)
    last_mag = np.zeros(x.shape, dtype=float)
    for n in range(1, max_terms + 1):
        u = u * xw / (n * n)
        # rho_n(w) = 1 + w/(n+1) + w^2/((n+1)(n+2)) + ...
        rho = np.ones_like(w)
        term_k = np.ones_like(w)
        for k in range(1, 200):
            term_k = term_k * w / (n + k)
            rho = rho + term_k
            if np.max(np.abs(term_k)) < 1e-18:
                break
        term = -ew * u * rho
        total = np.where(converged, total, total + term)
        last_mag = np.where(converged, last_mag, np.abs(term))
        converged |= last_mag < tol * np.maximum(np.abs(total), 1e-300)
        if converged.all():
            return total
    raise TruncationError(float(np.max(last_mag[~converged])), max_terms)
