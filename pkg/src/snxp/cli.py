"""Command-line front end.

A thin client of the HTTP service: every command builds a JSON request,
posts it (to an in-process application by default, or to a remote server via
--server), and writes plot-ready files from the response.  Exit codes:
0 success, 2 usage or configuration error, 3 numeric failure.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .core import NS_PER_TIME_UNIT
from .errors import FileFormatError


class NumericFailure(click.ClickException):
    exit_code = 3


class ServiceClient:
    """Posts to a remote server when a URL is given, else to the in-process app."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # some starlette builds warn about their own httpx dependency
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        r = self._client.post(path, json=payload)
        if r.status_code == 200:
            return r.json()
        try:
            body = r.json()
        except ValueError:
            body = {"error": "HTTPError", "detail": r.text}
        message = f"{body.get('error', 'error')}: {body.get('detail', '')}"
        if r.status_code == 422:
            raise click.UsageError(message)
        raise NumericFailure(message)


def _client(ctx) -> ServiceClient:
    return ServiceClient(ctx.obj.get("server"))


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Sub-luminal x-ray pulse simulation and fitting."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


_units_option = click.option(
    "--units", type=click.Choice(["natural", "physical"]), default="natural",
    show_default=True,
    help="natural: gamma and 1/gamma; physical: times in ns.")


def _time_scale(units: str) -> float:
    return NS_PER_TIME_UNIT if units == "physical" else 1.0


@main.command()
@click.option("-L", "--thickness", default=126.3, show_default=True,
              help="Effective foil thickness (dimensionless).")
@click.option("--doppler-detuning", default=0.0, show_default=True,
              help="Foil Doppler detuning [gamma].")
@click.option("--chopper-open-time", default=0.0, show_default=True,
              help="Chopper opening time [1/gamma].")
@click.option("--detuning-min", default=-100.0, show_default=True)
@click.option("--detuning-max", default=100.0, show_default=True)
@click.option("--n-detunings", default=1001, show_default=True)
@click.option("--time-min", default=0.0, show_default=True)
@click.option("--time-max", default=2.0, show_default=True)
@click.option("--n-times", default=1001, show_default=True)
@_units_option
@click.option("-o", "--output", default="spectrum", show_default=True,
              metavar="PREFIX", help="Output file prefix.")
@click.pass_context
def spectrum(ctx, thickness, doppler_detuning, chopper_open_time,
             detuning_min, detuning_max, n_detunings,
             time_min, time_max, n_times, units, output):
    """Foil and chopped-pulse spectra plus the time envelope."""
    from .fileio import write_csv

    res = _client(ctx).post("/spectrum", {
        "foil": {"effective_thickness": thickness,
                 "doppler_detuning": doppler_detuning},
        "chopper_open_time": chopper_open_time,
        "detuning_min": detuning_min, "detuning_max": detuning_max,
        "n_detunings": n_detunings,
        "time_min": time_min, "time_max": time_max, "n_times": n_times,
    })
    spec_path = f"{output}_spectrum.csv"
    env_path = f"{output}_envelope.csv"
    write_csv(spec_path,
              ["detuning", "foil_abs", "foil_phase",
               "chopper_abs", "chopper_phase"],
              [res["detunings"], res["foil_abs"], res["foil_phase"],
               res["chopper_abs"], res["chopper_phase"]])
    ts = _time_scale(units)
    time_name = "time_ns" if units == "physical" else "time"
    write_csv(env_path, [time_name, "envelope_abs"],
              [[t * ts for t in res["times"]], res["envelope_abs"]])
    click.echo(f"wrote {spec_path} and {env_path}")


def _cavity_options(fn):
    for name, default, helptext in reversed([
            ("kappa", 45.0, "Cavity linewidth [gamma]."),
            ("kappa-r", 22.5, "Cavity in-coupling strength [gamma]."),
            ("delta-c", -28.1, "Cavity-mode detuning [gamma]."),
            ("g2n", 3285.0, "Collective coupling |g|^2 N [gamma^2]."),
            ("delta-g", 39.7, "Ground-state hyperfine splitting [gamma]."),
            ("delta-e", 22.4, "Excited-state hyperfine splitting [gamma]")]):
        fn = click.option(f"--{name}", default=default, show_default=True,
                          help=helptext)(fn)
    return fn


def _cavity_payload(kw) -> dict:
    return {"kappa": kw["kappa"], "kappa_r": kw["kappa_r"],
            "delta_c": kw["delta_c"], "g2n": kw["g2n"],
            "delta_g": kw["delta_g"], "delta_e": kw["delta_e"]}


@main.command()
@_cavity_options
@click.option("--detuning-min", default=-60.0, show_default=True)
@click.option("--detuning-max", default=60.0, show_default=True)
@click.option("--n-detunings", default=241, show_default=True)
@_units_option
@click.option("-o", "--output", default="delay.csv", show_default=True,
              metavar="FILE")
@click.pass_context
def delay(ctx, detuning_min, detuning_max, n_detunings, units, output,
          **cavity_kw):
    """Group-delay curve of the cavity reflection."""
    from .fileio import write_csv

    res = _client(ctx).post("/delay", {
        "cavity": _cavity_payload(cavity_kw),
        "detuning_min": detuning_min, "detuning_max": detuning_max,
        "n_detunings": n_detunings,
    })
    ts = _time_scale(units)
    tau_name = "tau_ns" if units == "physical" else "tau"
    write_csv(output, ["detuning", tau_name, "reliable"],
              [res["detunings"], [t * ts for t in res["taus"]],
               [1.0 if r else 0.0 for r in res["reliable"]]])
    click.echo(f"wrote {output}")


def _sweep_options(fn):
    for name, default in reversed([
            ("detuning-min", -60.0), ("detuning-max", 60.0),
            ("n-detunings", 121), ("time-min", 0.0),
            ("time-max", 200.0 / NS_PER_TIME_UNIT), ("n-time-bins", 200),
            ("total-counts", 1_000_000.0), ("seed", 0)]):
        fn = click.option(f"--{name}", default=default,
                          show_default=True)(fn)
    return fn


def _sweep_payload(kw) -> dict:
    return {"detuning_min": kw["detuning_min"],
            "detuning_max": kw["detuning_max"],
            "n_detunings": kw["n_detunings"],
            "time_min": kw["time_min"], "time_max": kw["time_max"],
            "n_time_bins": kw["n_time_bins"],
            "total_expected_counts": kw["total_counts"],
            "rng_seed": kw["seed"]}


@main.command()
@_sweep_options
@_cavity_options
@click.option("-L", "--thickness", default=126.3, show_default=True)
@click.option("-o", "--output", default="counts.txt", show_default=True,
              metavar="FILE")
@click.pass_context
def synth(ctx, thickness, output, **kw):
    """Synthetic photon-count dataset with an embedded truth block."""
    import numpy as np

    from .cavity import CavityParams
    from .fileio import write_count_matrix
    from .foil import FoilParams
    from .synth import CountMatrix, DatasetTruth, SweepConfig

    res = _client(ctx).post("/synth", {
        "sweep": _sweep_payload(kw),
        "cavity": _cavity_payload(kw),
        "foil": {"effective_thickness": thickness},
    })
    truth = None
    if res.get("truth"):
        truth = DatasetTruth(cavity=CavityParams(**res["truth"]["cavity"]),
                             foil=FoilParams(**res["truth"]["foil"]),
                             delays=np.array(res["truth"]["delays"]))
    m = CountMatrix(counts=np.array(res["counts"], dtype=np.int64),
                    config=SweepConfig(**res["config"]), truth=truth)
    write_count_matrix(output, m)
    click.echo(f"wrote {output} ({int(m.counts.sum())} counts)")


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--gate-start", default=50.0 / NS_PER_TIME_UNIT,
              show_default=True, help="Analysis gate [1/gamma].")
@click.option("--no-delays", is_flag=True,
              help="Stop after the global parameter fit.")
@_units_option
@click.option("-o", "--output", default="fit", show_default=True,
              metavar="PREFIX")
@click.pass_context
def fit(ctx, dataset, gate_start, no_delays, units, output):
    """Two-stage fit: global parameters, then the per-detuning delay curve."""
    from dataclasses import asdict

    from .fileio import read_count_matrix, write_csv

    try:
        m = read_count_matrix(dataset)
    except FileFormatError as exc:
        raise click.UsageError(str(exc))
    res = _client(ctx).post("/fit", {
        "config": asdict(m.config),
        "counts": m.counts.tolist(),
        "settings": {"gate_start": gate_start},
        "fit_delays": not no_delays,
    })
    global_path = f"{output}_global.json"
    Path(global_path).write_text(json.dumps(res["global_fit"], indent=2)
                                 + "\n")
    click.echo(f"wrote {global_path}")
    if not no_delays:
        ts = _time_scale(units)
        tau_name = "tau_ns" if units == "physical" else "tau"
        est = res["delay_estimates"]
        curve_path = f"{output}_delays.csv"
        write_csv(curve_path,
                  ["detuning", tau_name, f"{tau_name}_stderr",
                   "n_kept_starts", "valid"],
                  [[e["detuning"] for e in est],
                   [(e["tau_mean"] or 0.0) * ts for e in est],
                   [(e["tau_stderr"] or 0.0) * ts for e in est],
                   [e["n_kept_starts"] for e in est],
                   [0.0 if e["flags"] else 1.0 for e in est]])
        diag_path = f"{output}_diagnostics.json"
        Path(diag_path).write_text(json.dumps(est, indent=2) + "\n")
        click.echo(f"wrote {curve_path} and {diag_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
