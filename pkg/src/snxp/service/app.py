"""HTTP service exposing the simulation and fitting pipeline.

Thin translation layer: pydantic request models are converted to the library
dataclasses, results back to JSON-friendly response models.  Configuration
errors map to 422, numeric failures to 500 with a structured body.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..cavity import CavityParams, group_delay
from ..errors import ConfigurationError, SnxpError
from ..fit import (DelayEstimate, FitSettings, GlobalFitResult, delay_curve,
                   fit_global)
from ..foil import (ChopperParams, FoilParams, chopper_transmission_freq,
                    chopper_transmission_time, foil_transmission_freq)
from ..synth import CountMatrix, SweepConfig, synthesize
from . import schemas


def _cavity(spec: schemas.CavitySpec) -> CavityParams:
    return CavityParams(**spec.model_dump())


def _foil(spec: schemas.FoilSpec) -> FoilParams:
    return FoilParams(**spec.model_dump())


def _sweep(spec: schemas.SweepSpec) -> SweepConfig:
    return SweepConfig(**spec.model_dump())


def _settings(spec: schemas.FitSettingsSpec) -> FitSettings:
    kw = spec.model_dump()
    kw["delay_window"] = tuple(kw["delay_window"])
    return FitSettings(**kw)


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def create_app() -> FastAPI:
    app = FastAPI(title="snxp", version=__version__)

    @app.exception_handler(ConfigurationError)
    async def _config_error(request: Request, exc: ConfigurationError):
        return JSONResponse(status_code=422,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.exception_handler(SnxpError)
    async def _numeric_error(request: Request, exc: SnxpError):
        return JSONResponse(status_code=500,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    async def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/spectrum", response_model=schemas.SpectrumResponse)
    async def spectrum(req: schemas.SpectrumRequest):
        f = _foil(req.foil)
        c = ChopperParams(open_time=req.chopper_open_time)
        if req.detuning_min >= req.detuning_max:
            raise ConfigurationError("detuning range must be ordered")
        if req.time_min >= req.time_max:
            raise ConfigurationError("time range must be ordered")
        deltas = np.linspace(req.detuning_min, req.detuning_max,
                             req.n_detunings)
        times = np.linspace(req.time_min, req.time_max, req.n_times)
        t_foil = foil_transmission_freq(deltas, f)
        t_chop = chopper_transmission_freq(deltas, c, f)
        env = chopper_transmission_time(times, c, f)
        return schemas.SpectrumResponse(
            detunings=deltas.tolist(),
            foil_abs=np.abs(t_foil).tolist(),
            foil_phase=np.angle(t_foil).tolist(),
            chopper_abs=np.abs(t_chop).tolist(),
            chopper_phase=np.angle(t_chop).tolist(),
            times=times.tolist(),
            envelope_abs=np.abs(env).tolist(),
        )

    @app.post("/delay", response_model=schemas.DelayResponse)
    async def delay(req: schemas.DelayRequest):
        p = _cavity(req.cavity)
        if req.n_detunings > 1 and req.detuning_min >= req.detuning_max:
            raise ConfigurationError("detuning range must be ordered")
        deltas = np.linspace(req.detuning_min, req.detuning_max,
                             req.n_detunings)
        results = [group_delay(float(dd), p) for dd in deltas]
        return schemas.DelayResponse(
            detunings=deltas.tolist(),
            taus=[r.tau for r in results],
            reliable=[r.reliable for r in results],
        )

    @app.post("/synth", response_model=schemas.SynthResponse)
    async def synth(req: schemas.SynthRequest):
        cfg = _sweep(req.sweep)
        m = synthesize(cfg, _foil(req.foil), _cavity(req.cavity))
        truth = None
        if m.truth is not None:
            truth = schemas.TruthBlock(
                cavity=schemas.CavitySpec(**vars(m.truth.cavity)),
                foil=schemas.FoilSpec(**vars(m.truth.foil)),
                delays=m.truth.delays.tolist(),
            )
        return schemas.SynthResponse(config=req.sweep,
                                     counts=m.counts.tolist(), truth=truth)

    @app.post("/fit", response_model=schemas.FitResponse)
    async def fit(req: schemas.FitRequest):
        cfg = _sweep(req.config)
        data = CountMatrix(counts=np.array(req.counts, dtype=np.int64),
                           config=cfg)
        settings = _settings(req.settings)
        init = None
        if req.init_cavity is not None or req.init_thickness is not None:
            init = GlobalFitResult(
                cavity=_cavity(req.init_cavity or schemas.CavitySpec()),
                foil=FoilParams(
                    effective_thickness=(req.init_thickness
                                         if req.init_thickness is not None
                                         else 126.3)),
                scale=1.0, residual=float("nan"), converged=False)
        glob = fit_global(data, init=init, settings=settings)
        estimates: list[DelayEstimate] = []
        if req.fit_delays:
            estimates = list(delay_curve(data, glob, settings).estimates)
        return schemas.FitResponse(
            global_fit=schemas.GlobalFitBlock(
                cavity=schemas.CavitySpec(**vars(glob.cavity)),
                effective_thickness=glob.foil.effective_thickness,
                scale=glob.scale,
                residual=glob.residual,
                converged=glob.converged,
            ),
            delay_estimates=[
                schemas.DelayEstimateBlock(
                    detuning=e.detuning,
                    tau_mean=_finite_or_none(e.tau_mean),
                    tau_stderr=_finite_or_none(e.tau_stderr),
                    n_kept_starts=e.n_kept_starts,
                    flags=sorted(e.flags),
                ) for e in estimates],
        )

    return app


app = create_app()
