"""Synthetic photon-count datasets over a (time x Doppler detuning) sweep.

Mimics the measured count map: the full detector intensity (including the
prompt part and its interference with the delayed pulse) is binned in time,
scaled to a requested total count budget, and Poisson-sampled with
per-column random streams so results do not depend on evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cavity as _cavity
from .cavity import CavityParams
from .core import FrequencyGrid
from .errors import ConfigurationError
from .foil import FoilParams
from .response import detector_numeric


@dataclass(frozen=True)
class SweepConfig:
    """Axes and budget of a synthetic dataset; times in 1/gamma."""

    detuning_min: float = -60.0
    detuning_max: float = 60.0
    n_detunings: int = 121
    time_min: float = 0.0
    time_max: float = 200.0 / (658.2119569 / 4.7)  # 200 ns
    n_time_bins: int = 200
    total_expected_counts: float = 1_000_000.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.detuning_min >= self.detuning_max:
            raise ConfigurationError("detuning range must be ordered")
        if self.time_min >= self.time_max:
            raise ConfigurationError("time range must be ordered")
        if self.n_detunings < 1 or self.n_time_bins < 1:
            raise ConfigurationError("counts must be positive")
        if self.total_expected_counts <= 0:
            raise ConfigurationError("total_expected_counts must be positive")

    def detunings(self) -> np.ndarray:
        return np.linspace(self.detuning_min, self.detuning_max, self.n_detunings)

    def time_edges(self) -> np.ndarray:
        return np.linspace(self.time_min, self.time_max, self.n_time_bins + 1)

    def time_centers(self) -> np.ndarray:
        e = self.time_edges()
        return 0.5 * (e[:-1] + e[1:])

    @property
    def bin_width(self) -> float:
        return (self.time_max - self.time_min) / self.n_time_bins


@dataclass(frozen=True)
class DatasetTruth:
    """Generating parameters embedded in synthetic datasets."""

    cavity: CavityParams
    foil: FoilParams
    delays: np.ndarray = field(repr=False)  # group delay per detuning


@dataclass(frozen=True)
class CountMatrix:
    counts: np.ndarray = field(repr=False)  # [n_time_bins, n_detunings]
    config: SweepConfig = SweepConfig()
    truth: Optional[DatasetTruth] = None

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (self.config.n_time_bins, self.config.n_detunings):
            raise ConfigurationError(
                f"counts shape {c.shape} does not match config "
                f"({self.config.n_time_bins}, {self.config.n_detunings})")
        if np.any(c < 0):
            raise ConfigurationError("counts must be non-negative")
        object.__setattr__(self, "counts", c)


def raw_intensity_matrix(cfg: SweepConfig, f: FoilParams, p: CavityParams,
                         grid: FrequencyGrid | None = None) -> np.ndarray:
    """Bin-integrated model intensity without the count-budget scaling.

    Midpoint rule per time bin; the full intensity (prompt + delayed,
    interference included) is interpolated from the transform grid.
    """
    if grid is None:
        grid = FrequencyGrid.default()
    grid.require_time_span(cfg.time_max)
    centers = cfg.time_centers()
    out = np.empty((cfg.n_time_bins, cfg.n_detunings))
    for k, dd in enumerate(cfg.detunings()):
        dec = detector_numeric(dd, f, p, grid)
        out[:, k] = np.interp(centers, dec.times, dec.total_intensity)
    out *= cfg.bin_width
    return out


def expected_intensity_matrix(cfg: SweepConfig, f: FoilParams, p: CavityParams,
                              grid: FrequencyGrid | None = None) -> np.ndarray:
    """raw_intensity_matrix scaled so the matrix sums to the count budget."""
    out = raw_intensity_matrix(cfg, f, p, grid)
    total = out.sum()
    if total <= 0.0:
        warnings.warn("model intensity is identically zero; matrix left empty")
        return out
    out *= cfg.total_expected_counts / total
    return out


def sample_counts(expected: np.ndarray, cfg: SweepConfig,
                  f: FoilParams | None = None, p: CavityParams | None = None,
                  seed: int | None = None) -> CountMatrix:
    """Poisson-sample a count matrix; one RNG stream per detuning column.

    The per-column streams are derived from (seed, column), so identical
    seeds give bit-identical matrices regardless of evaluation order.
    """
    expected = np.asarray(expected, dtype=float)
    if np.any(expected < 0):
        raise ConfigurationError("expected counts must be non-negative")
    if seed is None:
        seed = cfg.rng_seed
    counts = np.empty(expected.shape, dtype=np.int64)
    for k in range(expected.shape[1]):
        rng = np.random.default_rng([seed, k])
        counts[:, k] = rng.poisson(expected[:, k])
    truth = None
    if f is not None and p is not None:
        delays = np.array([_cavity.group_delay(dd, p).tau
                           for dd in cfg.detunings()])
        truth = DatasetTruth(cavity=p, foil=f, delays=delays)
    return CountMatrix(counts=counts, config=cfg, truth=truth)


def synthesize(cfg: SweepConfig, f: FoilParams, p: CavityParams,
               grid: FrequencyGrid | None = None) -> CountMatrix:
    """expected_intensity_matrix + sample_counts with the config's seed."""
    expected = expected_intensity_matrix(cfg, f, p, grid)
    return sample_counts(expected, cfg, f=f, p=p)
