"""Reflection of the thin-film cavity with hyperfine-split 57Fe nuclei.

Faraday geometry with crossed polarizers selects the difference of the two
circular-polarization channels, so the reflection coefficient is the
difference of two dressed scattering amplitudes.  The steep phase slope of
that coefficient near resonance is the group delay imposed on a narrow pulse.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DegenerateMappingError

#: relative amplitude floor below which a phase slope is numerically meaningless
RELIABILITY_FLOOR = 1e-6

#: step for the local phase-derivative stencil [gamma]
PHASE_STEP = 1e-3


@dataclass(frozen=True)
class CavityParams:
    """Cavity and nuclear-ensemble parameters, frequencies in gamma.

    Defaults are the values fitted to the measured data.  kappa_r never
    enters any observable except as an overall amplitude (it is absorbed by
    the global scaling factor of the count model), so it is fixed at kappa/2
    for reproducibility.
    """

    kappa: float = 45.0
    kappa_r: float = 22.5
    delta_c: float = -28.1
    g2n: float = 3285.0
    # ground/excited hyperfine splittings of 57Fe at the ~33 T internal field;
    # their ratio is fixed by the known g-factors (g_ground/g_excited ~ 1.75)
    delta_g: float = 39.7
    delta_e: float = 22.4
    linewidth: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ConfigurationError("kappa must be positive")
        if self.kappa_r <= 0:
            raise ConfigurationError("kappa_r must be positive")
        if self.g2n < 0:
            raise ConfigurationError("g2n must be >= 0")
        if self.linewidth <= 0:
            raise ConfigurationError("linewidth must be positive")


@dataclass(frozen=True)
class TwoPoleForm:
    """R(Delta) = [2 (c1/(Delta+delta1+ig/2) + c2/(Delta+delta2+ig/2))^-1 + c0]^-1."""

    c0: complex
    c1: complex
    c2: complex
    delta1: float
    delta2: float
    linewidth: float = 1.0

    @property
    def gamma_tilde(self) -> complex:
        """Complex decay constant of the time response."""
        return (self.linewidth
                - 0.5j * self.c0 * (self.c1 + self.c2)
                - 1j * (self.delta1 + self.delta2))

    @property
    def omega_tilde(self) -> complex:
        """Complex beat constant (either square root; the time response is
        invariant under the branch choice)."""
        d = self.delta1 - self.delta2
        return np.sqrt(d * d
                       + 0.25 * self.c0 ** 2 * (self.c1 + self.c2) ** 2
                       + self.c0 * d * (self.c1 - self.c2) + 0j)

    @property
    def domega_dc0(self) -> complex:
        """Analytic derivative of omega_tilde with respect to c0."""
        om = self.omega_tilde
        if om == 0:
            raise DegenerateMappingError("omega_tilde vanishes; derivative undefined")
        d = self.delta1 - self.delta2
        return (0.5 * self.c0 * (self.c1 + self.c2) ** 2
                + d * (self.c1 - self.c2)) / (2.0 * om)

    def evaluate(self, delta):
        delta = np.asarray(delta, dtype=float)
        ig = 0.5j * self.linewidth
        f = (self.c1 / (delta + self.delta1 + ig)
             + self.c2 / (delta + self.delta2 + ig))
        return f / (2.0 + self.c0 * f)

    def time_response(self, t):
        """Closed-form Fourier transform of evaluate(), zero for t < 0."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        csum = self.c1 + self.c2
        if csum == 0 and self.c0 != 0:
            return out
        causal = t >= 0.0
        tc = t[causal]
        om = self.omega_tilde
        gam = self.gamma_tilde
        pref = np.sqrt(np.pi / 2.0)
        if abs(om) < 1e-12:
            # 2 dOmega/dc0 * sin(Omega t/2) has a finite Omega -> 0 limit
            d = self.delta1 - self.delta2
            num = 0.5 * self.c0 * csum ** 2 + d * (self.c1 - self.c2)
            out[causal] = pref * np.exp(-0.5 * gam * tc) * (
                num * 0.5 * tc - 1j * csum)
            return out
        # combine the damped oscillation into pure decaying exponentials;
        # exp(-gam t/2) sin/cos(om t/2) computed separately overflows at
        # large t when om has an imaginary part
        lam_p = 0.5 * (-gam + 1j * om)
        lam_m = 0.5 * (-gam - 1j * om)
        ep = np.exp(lam_p * tc)
        em = np.exp(lam_m * tc)
        dom = self.domega_dc0
        out[causal] = pref * (2.0 * dom * (ep - em) / 2j
                              - 1j * csum * 0.5 * (ep + em))
        return out


def scattering_amplitudes(delta, p: CavityParams):
    """Nuclear scattering amplitudes (F_plus, F_minus) of the two channels."""
    delta = np.asarray(delta, dtype=float)
    ig = 0.5j * p.linewidth
    f_plus = ((1.0 / 3.0) / (delta + (-0.5 * p.delta_g + 0.5 * p.delta_e) + ig)
              + 1.0 / (delta + (0.5 * p.delta_g + 1.5 * p.delta_e) + ig))
    f_minus = (1.0 / (delta + (-0.5 * p.delta_g - 1.5 * p.delta_e) + ig)
               + (1.0 / 3.0) / (delta + (0.5 * p.delta_g - 0.5 * p.delta_e) + ig))
    return f_plus, f_minus


def _dressed(f, p: CavityParams):
    # R_F(F) = A F / (2 + i B F): no division by F, so F = 0 gives 0 directly
    pole = p.kappa + 1j * p.delta_c
    a = p.kappa_r * p.g2n / pole ** 2
    b = p.g2n / pole
    return a * f / (2.0 + 1j * b * f)


def cavity_reflection(delta, p: CavityParams):
    """R_Cavity(Delta), the crossed-polarizer Faraday reflection coefficient."""
    f_plus, f_minus = scattering_amplitudes(delta, p)
    return _dressed(f_plus, p) - _dressed(f_minus, p)


@lru_cache(maxsize=64)
def _max_reflection(p: CavityParams) -> float:
    scan = np.linspace(-150.0, 150.0, 6001)
    return float(np.max(np.abs(cavity_reflection(scan, p))))


@dataclass(frozen=True)
class GroupDelay:
    """Phase slope of the reflection at one detuning; reliable is False when
    the local amplitude is below the reliability floor."""

    tau: float
    reliable: bool

    def __float__(self) -> float:
        return self.tau


def group_delay(delta_d: float, p: CavityParams, step: float = PHASE_STEP) -> GroupDelay:
    """d arg[R_Cavity] / d Delta at delta_d via a 5-point stencil."""
    pts = delta_d + step * np.arange(-2.0, 3.0)
    r = cavity_reflection(pts, p)
    mags = np.abs(r)
    floor = RELIABILITY_FLOOR * _max_reflection(p)
    reliable = bool(mags[2] >= floor) and floor > 0.0
    if np.any(mags == 0.0):
        return GroupDelay(tau=0.0, reliable=False)
    phase = np.unwrap(np.angle(r))
    tau = (phase[0] - 8.0 * phase[1] + 8.0 * phase[3] - phase[4]) / (12.0 * step)
    return GroupDelay(tau=float(tau), reliable=reliable)


def linearized_reflection(delta, delta_d: float, p: CavityParams):
    """Constant-amplitude, linear-phase approximation around delta_d."""
    delta = np.asarray(delta, dtype=float)
    r0 = cavity_reflection(np.array([delta_d]), p)[0]
    tau = group_delay(delta_d, p).tau
    return r0 * np.exp(1j * (delta - delta_d) * tau)


_BRANCHES = {
    "plus": ((1.0 / 3.0, 1.0), lambda p: (-0.5 * p.delta_g + 0.5 * p.delta_e,
                                          0.5 * p.delta_g + 1.5 * p.delta_e)),
    "minus": ((1.0, 1.0 / 3.0), lambda p: (-0.5 * p.delta_g - 1.5 * p.delta_e,
                                           0.5 * p.delta_g - 0.5 * p.delta_e)),
}


def to_two_pole(p: CavityParams, branch: str) -> TwoPoleForm:
    """Algebraically exact two-pole reduction of one dressed channel.

    With A = kappa_r g2n/(kappa+i delta_c)^2 and B = g2n/(kappa+i delta_c),
    the dressed amplitude A F/(2 + iBF) equals the two-pole form with
    c_i = A a_i and c0 = iB/A = i(kappa+i delta_c)/kappa_r.
    """
    if branch not in _BRANCHES:
        raise ConfigurationError(f"branch must be 'plus' or 'minus', got {branch!r}")
    (a1, a2), offsets = _BRANCHES[branch]
    d1, d2 = offsets(p)
    pole = p.kappa + 1j * p.delta_c
    a = p.kappa_r * p.g2n / pole ** 2
    if p.kappa_r == 0:
        raise DegenerateMappingError("kappa_r = 0 leaves the reduction undefined")
    c0 = 1j * pole / p.kappa_r  # = iB/A, finite even for g2n = 0
    return TwoPoleForm(c0=c0, c1=a * a1, c2=a * a2, delta1=d1, delta2=d2,
                       linewidth=p.linewidth)


SPEED_OF_LIGHT_M_S = 299792458.0


def susceptibility_map(delta0: float, p: CavityParams, medium_length: float,
                       omega0: float):
    """Map the local reflection onto an equivalent medium susceptibility.

    Returns (Im chi(omega0), d Re chi / d omega) for a medium of length
    medium_length [m] and carrier angular frequency omega0 [rad/s]; the
    frequency derivative is per the same unit delta0 is expressed in.
    Defined through exp(i omega0 L/(2c) chi) ~ R.
    """
    k = omega0 * medium_length / (2.0 * SPEED_OF_LIGHT_M_S)
    if k == 0:
        raise ConfigurationError("omega0 and medium_length must be nonzero")
    r0 = cavity_reflection(np.array([delta0]), p)[0]
    if r0 == 0:
        raise ConfigurationError(
            "reflection vanishes at this detuning; log|R| is singular")
    chi_im = -np.log(np.abs(r0)) / k
    dphi = group_delay(delta0, p).tau  # d arg R / d Delta
    dchi_re_dw = dphi / k
    return float(chi_im), float(dchi_re_dw)


def reflection_from_susceptibility(chi_im: float, dchi_re_dw: float,
                                   medium_length: float, omega0: float):
    """Inverse of susceptibility_map: (|R|, d arg R / d omega)."""
    k = omega0 * medium_length / (2.0 * SPEED_OF_LIGHT_M_S)
    return float(np.exp(-k * chi_im)), float(k * dchi_re_dw)
