"""HTTP service wrapping the simulation/reconstruction library.

Every endpoint body is handled by a plain function taking and returning
pydantic models, so the CLI can call the same handlers in process without a
running server.  Artifact-producing endpoints return ready-to-write file
texts (the CSV/JSON formats documented in ``storage``), which keeps output
bytes identical whether a run goes through HTTP, the CLI, or the library.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import __version__
from .analysis import fidelity_between, fit_phase_gradient, fit_sinc_width
from .apparatus import FilterSpec, POLARIZATIONS, run_experiment
from .config import (
    NOISE_MODES,
    RUN_KEYS,
    ScenarioConfig,
    build_state,
    filter_spec,
    gate_spec,
    noise_spec,
    resolved,
    scan_grid,
)
from .errors import ConfigError, DataFormatError, WavegateError
from .reconstruct import reconstruct_envelope, reconstruction_to_spectrum
from .scenarios import list_scenarios, run_scenario, scenario_config
from .storage import (
    COUNTS_FILE,
    PROBABILITY_FILE,
    format_json,
    format_record_csv,
    format_reconstruction_csv,
    format_spectral_csv,
    parse_count_csv,
    parse_probability_csv,
)


class SimulateRequest(BaseModel):
    params: dict = Field(default_factory=dict, description=f"overrides for {RUN_KEYS}")
    noise_mode: str = "noiseless"
    seed: int | None = None


class FileBundle(BaseModel):
    files: dict[str, str]
    metadata: dict = Field(default_factory=dict)


class ReconstructRequest(BaseModel):
    files: dict[str, str] = Field(description="four delay-scan CSVs keyed by file name")
    filter_width_radps: float = 1.08
    filter_center_radps: float = 0.0
    mask_threshold: float = 0.05


class SincFitRequest(BaseModel):
    t_ps: list[float]
    magnitude: list[float]
    init: dict | None = None


class PhaseFitRequest(BaseModel):
    t_ps: list[float]
    re: list[float]
    im: list[float]
    window: tuple[float, float] = (3.75, 5.75)


class Distribution(BaseModel):
    x: list[float]
    values: list[float]


class FidelityRequest(BaseModel):
    p: Distribution
    q: Distribution
    domain: str = "time"


class ScenarioRunRequest(BaseModel):
    noise_mode: str | None = None
    seed: int | None = None
    overrides: dict = Field(default_factory=dict)


def _looks_like_counts(name: str, text: str) -> bool:
    """Counts vs probability files: go by file name, else by the first value."""
    if "counts" in name:
        return True
    if "probability" in name:
        return False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        value = line.split(",")[-1]
        return "." not in value and "e" not in value.lower()
    return False


def handle_simulate(req: SimulateRequest) -> FileBundle:
    if req.noise_mode not in NOISE_MODES:
        raise ConfigError(f"unknown noise mode {req.noise_mode!r}")
    params = resolved(req.params)
    if req.seed is not None:
        params["seed"] = int(req.seed)
    spl = req.noise_mode == "spl"
    run = run_experiment(
        build_state(params),
        filter_spec(params),
        gate_spec(params),
        scan=scan_grid(params),
        noise=noise_spec(params) if spl else None,
        reference_mode=params["reference_mode"],
    )
    records = run.counts if spl else run.distributions
    template = COUNTS_FILE if spl else PROBABILITY_FILE
    files = {template.format(pol=pol): format_record_csv(records[pol]) for pol in POLARIZATIONS}
    return FileBundle(
        files=files,
        metadata={
            "noise_mode": req.noise_mode,
            "low_reference": bool(run.reference.low_reference),
            "n_points": records["D"].grid.n_samples,
        },
    )


def handle_reconstruct(req: ReconstructRequest) -> FileBundle:
    records = {}
    counting = None
    for name, text in req.files.items():
        is_counts = _looks_like_counts(name, text)
        if counting is None:
            counting = is_counts
        elif counting != is_counts:
            raise DataFormatError("cannot mix count and probability files")
        parser = parse_count_csv if is_counts else parse_probability_csv
        rec = parser(text, name)
        records[rec.pol] = rec
    missing = [pol for pol in POLARIZATIONS if pol not in records]
    if missing:
        raise DataFormatError(f"missing polarization(s): {', '.join(missing)}")
    filt = FilterSpec(req.filter_width_radps, req.filter_center_radps)
    result = reconstruct_envelope(
        records["D"], records["A"], records["R"], records["L"],
        filt, threshold=req.mask_threshold,
    )
    spectrum, zero_filled = reconstruction_to_spectrum(result.envelope, result.mask)
    summary = {
        "source": result.source,
        "normalization_scale": result.scale,
        "global_phase_rotation_rad": result.phase,
        "masked_fraction": result.mask.masked_fraction,
        "zero_filled_fraction": zero_filled,
        "mask_threshold": req.mask_threshold,
    }
    return FileBundle(
        files={
            "reconstruction_time.csv": format_reconstruction_csv(result),
            "reconstruction_freq.csv": format_spectral_csv(spectrum),
            "summary.json": format_json(summary),
        },
        metadata=summary,
    )


def handle_fit_sinc(req: SincFitRequest) -> dict:
    report = fit_sinc_width(np.asarray(req.t_ps), np.asarray(req.magnitude), req.init)
    return report.to_dict()


def handle_fit_phase(req: PhaseFitRequest) -> dict:
    amps = np.asarray(req.re) + 1j * np.asarray(req.im)
    report = fit_phase_gradient(np.asarray(req.t_ps), amps, window=req.window)
    return report.to_dict()


def handle_fidelity(req: FidelityRequest) -> dict:
    report = fidelity_between(
        np.asarray(req.p.values),
        np.asarray(req.p.x),
        np.asarray(req.q.values),
        np.asarray(req.q.x),
        domain=req.domain,
    )
    return report.to_dict()


def handle_scenario_run(name: str, req: ScenarioRunRequest) -> FileBundle:
    cfg = scenario_config(name, noise_mode=req.noise_mode or "noiseless", seed=req.seed)
    if req.overrides:
        params = dict(cfg.params)
        params.update(req.overrides)
        cfg = ScenarioConfig(name=cfg.name, params=params, noise_mode=cfg.noise_mode)
    bundle = run_scenario(cfg)
    return FileBundle(files=bundle, metadata={"scenario": name, "noise_mode": cfg.noise_mode})


app = FastAPI(
    title="wavegate",
    version=__version__,
    description="Gate-scanned direct measurement of ultrafast temporal wavefunctions",
)


@app.exception_handler(WavegateError)
async def _wavegate_error(request, exc: WavegateError):
    from fastapi.responses import JSONResponse

    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/scenarios")
def scenarios() -> list:
    return list_scenarios()


@app.post("/simulate", response_model=FileBundle)
def simulate(req: SimulateRequest) -> FileBundle:
    return handle_simulate(req)


@app.post("/reconstruct", response_model=FileBundle)
def reconstruct(req: ReconstructRequest) -> FileBundle:
    return handle_reconstruct(req)


@app.post("/fit/sinc-width")
def fit_sinc(req: SincFitRequest) -> dict:
    return handle_fit_sinc(req)


@app.post("/fit/phase-gradient")
def fit_phase(req: PhaseFitRequest) -> dict:
    return handle_fit_phase(req)


@app.post("/fidelity")
def fidelity(req: FidelityRequest) -> dict:
    return handle_fidelity(req)


@app.post("/scenarios/{name}/run", response_model=FileBundle)
def scenario_run(name: str, req: ScenarioRunRequest) -> FileBundle:
    return handle_scenario_run(name, req)
