"""Request/response models of the HTTP service.

All quantities are in natural units (frequencies in gamma, times in 1/gamma);
clients convert to physical units themselves.  Defaults mirror the library
defaults, i.e. the parameter values fitted to the measured data.
"""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field


class CavitySpec(BaseModel):
    kappa: float = 45.0
    kappa_r: float = 22.5
    delta_c: float = -28.1
    g2n: float = 3285.0
    delta_g: float = 39.7
    delta_e: float = 22.4
    linewidth: float = 1.0


class FoilSpec(BaseModel):
    effective_thickness: float = 126.3
    doppler_detuning: float = 0.0
    linewidth: float = 1.0


class SweepSpec(BaseModel):
    detuning_min: float = -60.0
    detuning_max: float = 60.0
    n_detunings: int = 121
    time_min: float = 0.0
    time_max: float = 200.0 / (658.2119569 / 4.7)
    n_time_bins: int = 200
    total_expected_counts: float = 1_000_000.0
    rng_seed: int = 0


class FitSettingsSpec(BaseModel):
    gate_start: float = 50.0 / (658.2119569 / 4.7)
    n_starts_stage1: int = 50
    n_starts_stage2: int = 50
    delay_window: tuple[float, float] = (-0.1, 0.4)
    refine_halfwidth: float = 0.25
    max_iterations: int = 200
    step_tolerance: float = 1e-8
    min_gated_bins: int = 10
    min_gated_counts: float = 50.0


class SpectrumRequest(BaseModel):
    foil: FoilSpec = FoilSpec()
    chopper_open_time: float = 0.0
    detuning_min: float = -100.0
    detuning_max: float = 100.0
    n_detunings: int = Field(default=1001, ge=2, le=1_000_000)
    time_min: float = 0.0
    time_max: float = 2.0
    n_times: int = Field(default=1001, ge=2, le=1_000_000)


class SpectrumResponse(BaseModel):
    detunings: List[float]
    foil_abs: List[float]
    foil_phase: List[float]
    chopper_abs: List[float]
    chopper_phase: List[float]
    times: List[float]
    envelope_abs: List[float]


class DelayRequest(BaseModel):
    cavity: CavitySpec = CavitySpec()
    detuning_min: float = -60.0
    detuning_max: float = 60.0
    n_detunings: int = Field(default=241, ge=1, le=1_000_000)


class DelayResponse(BaseModel):
    detunings: List[float]
    taus: List[float]
    reliable: List[bool]


class SynthRequest(BaseModel):
    sweep: SweepSpec = SweepSpec()
    cavity: CavitySpec = CavitySpec()
    foil: FoilSpec = FoilSpec()


class TruthBlock(BaseModel):
    cavity: CavitySpec
    foil: FoilSpec
    delays: List[float]


class SynthResponse(BaseModel):
    config: SweepSpec
    counts: List[List[int]]
    truth: Optional[TruthBlock] = None


class FitRequest(BaseModel):
    config: SweepSpec
    counts: List[List[int]]
    init_cavity: Optional[CavitySpec] = None
    init_thickness: Optional[float] = None
    settings: FitSettingsSpec = FitSettingsSpec()
    fit_delays: bool = True


class GlobalFitBlock(BaseModel):
    cavity: CavitySpec
    effective_thickness: float
    scale: float
    residual: float
    converged: bool


class DelayEstimateBlock(BaseModel):
    detuning: float
    tau_mean: Optional[float]
    tau_stderr: Optional[float]
    n_kept_starts: int
    flags: List[str]


class FitResponse(BaseModel):
    global_fit: GlobalFitBlock
    delay_estimates: List[DelayEstimateBlock]


class HealthResponse(BaseModel):
    status: str
    version: str
