"""Natural-unit system, sampling grids, and Fourier transforms.

Everything downstream works in natural units: frequencies (detunings from the
nuclear resonance) are measured in multiples of the single-nucleus linewidth
gamma, times in 1/gamma.  One 1/gamma is about 140 ns for the 14.4 keV line
of 57Fe.

The transform convention is fixed to

    T(t) = (2*pi)^(-1/2) * integral s(Delta) exp(-i Delta t) dDelta

with the symmetric normalization, so that a detuning-domain factor
exp(i Delta tau) delays the time signal by tau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularPhaseError

GAMMA_NEV = 4.7
HBAR_NEV_NS = 658.2119569
OMEGA0_KEV = 14.4

#: nanoseconds per one natural time unit 1/gamma (~140.05 ns)
NS_PER_TIME_UNIT = HBAR_NEV_NS / GAMMA_NEV


@dataclass(frozen=True)
class Units:
    """Conversion between natural units (gamma = 1) and lab units."""

    gamma_neV: float = GAMMA_NEV
    hbar_neV_ns: float = HBAR_NEV_NS
    omega0_keV: float = OMEGA0_KEV  # transition energy, metadata only

    @property
    def ns_per_time_unit(self) -> float:
        return self.hbar_neV_ns / self.gamma_neV

    def time_to_ns(self, t):
        return np.asarray(t) * self.ns_per_time_unit

    def time_from_ns(self, t_ns):
        return np.asarray(t_ns) / self.ns_per_time_unit

    def freq_to_neV(self, f):
        return np.asarray(f) * self.gamma_neV

    def freq_from_neV(self, f_neV):
        return np.asarray(f_neV) / self.gamma_neV


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning axis Delta_j = center + (j - n/2) * spacing."""

    n_samples: int
    spacing: float
    center: float = 0.0

    def __post_init__(self):
        if not _is_power_of_two(self.n_samples):
            raise ConfigurationError(
                f"n_samples must be a power of two, got {self.n_samples}"
            )
        if self.spacing <= 0:
            raise ConfigurationError(f"spacing must be positive, got {self.spacing}")

    @classmethod
    def default(cls) -> "FrequencyGrid":
        # +-512 gamma span, 2**16 samples: resolves the gamma-wide resonance
        # with ~64 points while the implied time span (~402/gamma) covers any
        # analysis window of interest.
        return cls(n_samples=2**16, spacing=1024.0 / 2**16, center=0.0)

    @property
    def span(self) -> float:
        return self.n_samples * self.spacing

    @property
    def time_span(self) -> float:
        return 2.0 * np.pi / self.spacing

    def require_time_span(self, window: float) -> "FrequencyGrid":
        """Check that the implied time span covers an analysis window."""
        if self.time_span <= window:
            raise ConfigurationError(
                f"implied time span {self.time_span:.3g} does not exceed the "
                f"requested analysis window {window:.3g}"
            )
        return self

    def deltas(self) -> np.ndarray:
        j = np.arange(self.n_samples)
        return self.center + (j - self.n_samples // 2) * self.spacing

    def conjugate(self) -> "TimeGrid":
        n = self.n_samples
        dt = 2.0 * np.pi / (n * self.spacing)
        return TimeGrid(n_samples=n, spacing=dt, origin=-(n // 2) * dt,
                        freq_center=self.center)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time axis t_k = origin + k * spacing.

    freq_center records the center of the conjugate detuning grid so that the
    inverse transform can restore it; it is 0 for all grids used in practice.
    """

    n_samples: int
    spacing: float
    origin: float
    freq_center: float = 0.0

    def __post_init__(self):
        if not _is_power_of_two(self.n_samples):
            raise ConfigurationError(
                f"n_samples must be a power of two, got {self.n_samples}"
            )
        if self.spacing <= 0:
            raise ConfigurationError(f"spacing must be positive, got {self.spacing}")

    def times(self) -> np.ndarray:
        return self.origin + np.arange(self.n_samples) * self.spacing

    def conjugate(self) -> FrequencyGrid:
        n = self.n_samples
        return FrequencyGrid(n_samples=n, spacing=2.0 * np.pi / (n * self.spacing),
                             center=self.freq_center)

    def is_conjugate_of(self, g: FrequencyGrid, tol: float = 1e-12) -> bool:
        return (self.n_samples == g.n_samples
                and abs(self.spacing * g.spacing * g.n_samples - 2.0 * np.pi) < tol)


@dataclass(frozen=True)
class ComplexSpectrum:
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_samples,):
            raise ConfigurationError(
                f"values shape {v.shape} does not match grid "
                f"({self.grid.n_samples},)"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class TimeTrace:
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_samples,):
            raise ConfigurationError(
                f"values shape {v.shape} does not match grid "
                f"({self.grid.n_samples},)"
            )
        object.__setattr__(self, "values", v)


def forward_transform(s: ComplexSpectrum) -> TimeTrace:
    """Detuning -> time: T_k = (dDelta/sqrt(2 pi)) sum_j s_j exp(-i Delta_j t_k)."""
    g = s.grid
    tg = g.conjugate()
    n = g.n_samples
    j0 = k0 = n // 2
    j = np.arange(n)
    k = np.arange(n)
    pre = s.values * np.exp(2j * np.pi * j * k0 / n)
    raw = np.fft.fft(pre)
    phase = (np.exp(-1j * g.center * tg.times())
             * np.exp(2j * np.pi * j0 * k / n)
             * np.exp(-2j * np.pi * j0 * k0 / n))
    vals = g.spacing / np.sqrt(2.0 * np.pi) * phase * raw
    return TimeTrace(grid=tg, values=vals)


def inverse_transform(t: TimeTrace) -> ComplexSpectrum:
    """Time -> detuning; exact inverse of :func:`forward_transform`."""
    tg = t.grid
    fg = tg.conjugate()
    if not tg.is_conjugate_of(fg):
        raise ConfigurationError("time grid is not conjugate to its frequency grid")
    n = tg.n_samples
    j0 = k0 = n // 2
    k = np.arange(n)
    j = np.arange(n)
    pre = (t.values * np.exp(1j * fg.center * tg.times())
           * np.exp(-2j * np.pi * j0 * k / n))
    raw = n * np.fft.ifft(pre)
    phase = np.exp(-2j * np.pi * j * k0 / n) * np.exp(2j * np.pi * j0 * k0 / n)
    vals = tg.spacing / np.sqrt(2.0 * np.pi) * phase * raw
    return ComplexSpectrum(grid=fg, values=vals)


def unwrap_phase(s: ComplexSpectrum, floor: float = 1e-300) -> np.ndarray:
    """Continuous phase of a sampled spectrum (adjacent jumps folded into (-pi, pi])."""
    mag = np.abs(s.values)
    bad = np.flatnonzero(mag < floor)
    if bad.size:
        raise SingularPhaseError(int(bad[0]))
    return np.unwrap(np.angle(s.values))


def numeric_derivative(f: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """d f / d Delta on the grid: 5-point central stencil inside, order-2 at edges."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_samples,):
        raise ConfigurationError("array length does not match grid")
    h = grid.spacing
    n = f.size
    if n < 5:
        raise ConfigurationError("need at least 5 samples for the stencil")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[1] = (f[2] - f[0]) / (2.0 * h)
    out[-2] = (f[-1] - f[-3]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out
