"""Registered scenarios: end-to-end runs that write plot-ready artifacts.

Each scenario builds a state, simulates the delay scan, reconstructs the
envelope, and emits CSV/JSON files plus a manifest from which the whole run
can be regenerated byte for byte.

    fig3    slit (w=2.0 mm, s=0.0 mm): reconstruction + fidelities + sinc fit
    fig4    slit sweeps: width law over w, phase-gradient law over s
    fig5    slit + coverglass phase step
    fig6    stripe mask with two coverglass steps
    table1  classical fidelities of the three states, CL and SPL columns
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .analysis import classical_fidelity, fidelity_between, fit_phase_gradient, fit_sinc_width
from .apparatus import POLARIZATIONS, run_experiment
from .config import (
    ScenarioConfig,
    build_state,
    filter_spec,
    gate_spec,
    noise_spec,
    scan_grid,
)
from .errors import ConfigError
from .reconstruct import reconstruct_envelope, reconstruction_to_spectrum
from .storage import (
    COUNTS_FILE,
    PROBABILITY_FILE,
    format_distribution_csv,
    format_json,
    format_record_csv,
    format_reconstruction_csv,
    format_spectral_csv,
    format_sweep_csv,
)

WIDTH_SWEEP_MM = (1.4, 1.7, 2.0, 2.3, 2.6)
DISPLACEMENT_SWEEP_MM = (0.0, 0.2, 0.4, 0.6, 0.8)
PHASE_FIT_WINDOW = (3.75, 5.75)

_STATE_PARAMS = {
    "fig3": {"prep": "slit", "w_mm": 2.0, "s_mm": 0.0},
    "fig5": {"prep": "slit+glass", "w_mm": 2.0, "s_mm": 0.0},
    "fig6": {"prep": "stripe"},
}

SCENARIOS = {
    "fig3": "slit state (w=2.0 mm, s=0.0 mm): scan, reconstruction, fidelities, sinc fit",
    "fig4": "slit sweeps: fitted width vs w and phase gradient vs s, with law regressions",
    "fig5": "slit plus coverglass phase step: reconstruction and fidelities",
    "fig6": "stripe mask with two coverglass steps: reconstruction and fidelities",
    "table1": "classical fidelities of the three states under CL and SPL conditions",
}


def list_scenarios() -> list:
    return [{"name": name, "description": desc} for name, desc in sorted(SCENARIOS.items())]


def scenario_config(name: str, noise_mode: str = "noiseless", seed: int | None = None) -> ScenarioConfig:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; pick one of {sorted(SCENARIOS)}")
    params = dict(_STATE_PARAMS.get(name, {"prep": "slit", "w_mm": 2.0, "s_mm": 0.0}))
    if seed is not None:
        params["seed"] = int(seed)
    return ScenarioConfig(name=name, params=params, noise_mode=noise_mode)


def _acquire(cfg: ScenarioConfig, params: dict | None = None, seed: int | None = None):
    """Run the apparatus for one state; returns (run, records, condition)."""
    params = params if params is not None else cfg.params
    spectrum = build_state(params)
    scan = scan_grid(params)
    spl = cfg.noise_mode == "spl"
    run = run_experiment(
        spectrum,
        filter_spec(params),
        gate_spec(params),
        scan=scan,
        noise=noise_spec(params, seed=seed) if spl else None,
        reference_mode=params["reference_mode"],
    )
    if spl:
        return run, run.counts, "spl"
    return run, run.distributions, "cl"


def _reconstruct(run, records, params):
    recs = [records[pol] for pol in POLARIZATIONS]
    return reconstruct_envelope(
        *recs, filter_spec(params), threshold=float(params["mask_threshold"])
    )


def _scan_truth(run, scan):
    """Ground-truth envelope decimated onto the scan grid."""
    sim = run.truth.grid
    idx = np.rint((scan.times - sim.times[0]) / sim.dt).astype(int)
    return run.truth.amplitudes[idx]


def _fidelities(run, result, params):
    """Time- and frequency-domain fidelities against the prepared state.

    The time-domain comparison is restricted to the valid (measured) mask;
    the frequency comparison rebins the true spectral intensity onto the
    reconstruction's frequency grid.
    """
    scan = result.envelope.grid
    valid = result.mask.valid
    truth_scan = _scan_truth(run, scan)
    ft = classical_fidelity(
        np.abs(result.envelope.amplitudes[valid]) ** 2,
        np.abs(truth_scan[valid]) ** 2,
        domain="time",
    )
    spec, zero_filled = reconstruction_to_spectrum(result.envelope, result.mask)
    ff = fidelity_between(
        np.abs(spec.amplitudes) ** 2,
        spec.grid.freqs,
        np.abs(run.spectrum.amplitudes) ** 2,
        run.spectrum.grid.freqs,
        domain="frequency",
    )
    return ft, ff, spec, zero_filled


def _summary(result, zero_filled, run, condition, params) -> dict:
    return {
        "condition": condition,
        "source": result.source,
        "normalization_scale": result.scale,
        "global_phase_rotation_rad": result.phase,
        "masked_fraction": result.mask.masked_fraction,
        "zero_filled_fraction": zero_filled,
        "mask_threshold": float(params["mask_threshold"]),
        "low_reference": bool(run.reference.low_reference),
        "truth_edge_leakage": run.truth.edge_leakage(),
    }


def _single_state_bundle(cfg: ScenarioConfig) -> dict:
    params = cfg.params
    run, records, condition = _acquire(cfg)
    result = _reconstruct(run, records, params)
    ft, ff, spec, zero_filled = _fidelities(run, result, params)
    scan = result.envelope.grid

    bundle = {}
    template = COUNTS_FILE if condition == "spl" else PROBABILITY_FILE
    for pol in POLARIZATIONS:
        bundle[template.format(pol=pol)] = format_record_csv(records[pol])
    bundle[f"reconstruction_time_{condition}.csv"] = format_reconstruction_csv(result)
    bundle[f"reconstruction_freq_{condition}.csv"] = format_spectral_csv(spec)
    bundle[f"summary_{condition}.json"] = format_json(
        _summary(result, zero_filled, run, condition, params)
    )
    bundle[f"fidelity_{condition}.json"] = format_json(
        {"time": ft.to_dict(), "frequency": ff.to_dict()}
    )
    truth_scan = _scan_truth(run, scan)
    bundle["truth_time.csv"] = format_distribution_csv(
        scan.times, np.abs(truth_scan) ** 2, "t_ps"
    )
    bundle["truth_freq.csv"] = format_distribution_csv(
        run.spectrum.grid.freqs, np.abs(run.spectrum.amplitudes) ** 2, "w_radps"
    )

    if cfg.name == "fig3":
        valid = result.mask.valid
        fit = fit_sinc_width(scan.times[valid], np.abs(result.envelope.amplitudes[valid]))
        bundle[f"fit_sinc_{condition}.json"] = format_json(fit.to_dict())
    return bundle


def _sweep_bundle(cfg: ScenarioConfig) -> dict:
    params = cfg.params
    alpha = float(params["alpha_thz_per_mm"])
    bundle = {}

    width_rows, width_records = [], []
    for w_mm in WIDTH_SWEEP_MM:
        p = dict(params, prep="slit", w_mm=w_mm, s_mm=0.0)
        run, records, _ = _acquire(cfg, params=p)
        result = _reconstruct(run, records, p)
        valid = result.mask.valid
        fit = fit_sinc_width(
            result.envelope.grid.times[valid], np.abs(result.envelope.amplitudes[valid])
        )
        width_rows.append((w_mm, fit.params["width"], fit.residual_rms))
        width_records.append(
            {
                "w_mm": w_mm,
                "fit": fit.to_dict(),
                "theory_width_ps": 4.0 * np.pi / (alpha * w_mm),
            }
        )
    bundle["width_sweep.csv"] = format_sweep_csv(width_rows)
    bundle["width_sweep.json"] = format_json({"points": width_records})

    phase_rows, phase_records, kappas = [], [], []
    for s_mm in DISPLACEMENT_SWEEP_MM:
        p = dict(params, prep="slit", w_mm=2.0, s_mm=s_mm)
        run, records, _ = _acquire(cfg, params=p)
        result = _reconstruct(run, records, p)
        fit = fit_phase_gradient(
            result.envelope.grid.times,
            np.where(result.mask.valid, result.envelope.amplitudes, 0.0),
            window=PHASE_FIT_WINDOW,
        )
        kappa = fit.params["kappa"]
        kappas.append(kappa)
        phase_rows.append((s_mm, kappa, fit.residual_rms))
        phase_records.append(
            {"s_mm": s_mm, "fit": fit.to_dict(), "theory_kappa_radps": alpha * s_mm}
        )
    slope, kappa0 = np.polyfit(DISPLACEMENT_SWEEP_MM, kappas, 1)
    bundle["phase_sweep.csv"] = format_sweep_csv(phase_rows)
    bundle["phase_sweep.json"] = format_json(
        {
            "points": phase_records,
            "regression": {
                "slope_radps_per_mm": float(slope),
                "kappa0_radps": float(kappa0),
                "alpha_radps_per_mm": alpha,
            },
        }
    )
    return bundle


def _table_bundle(cfg: ScenarioConfig) -> dict:
    rows = []
    for state in ("fig3", "fig5", "fig6"):
        params = dict(cfg.params)
        params.update(_STATE_PARAMS[state])
        entry = {"state": state}
        for condition in ("cl", "spl"):
            sub = ScenarioConfig(
                name=state,
                params=params,
                noise_mode="noiseless" if condition == "cl" else "spl",
            )
            run, records, _ = _acquire(sub)
            result = _reconstruct(run, records, sub.params)
            ft, ff, _, _ = _fidelities(run, result, sub.params)
            entry[f"time_{condition}"] = ft.value
            entry[f"freq_{condition}"] = ff.value
        rows.append(entry)
    lines = ["state,time_cl,time_spl,freq_cl,freq_spl"]
    for row in rows:
        lines.append(
            f"{row['state']},{row['time_cl']!r},{row['time_spl']!r},"
            f"{row['freq_cl']!r},{row['freq_spl']!r}"
        )
    return {
        "fidelity_table.csv": "\n".join(lines) + "\n",
        "fidelity_table.json": format_json({"rows": rows}),
    }


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Execute a scenario and return its artifact bundle {path: text}."""
    if cfg.name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.name!r}; pick one of {sorted(SCENARIOS)}")
    if cfg.name == "fig4":
        bundle = _sweep_bundle(cfg)
    elif cfg.name == "table1":
        bundle = _table_bundle(cfg)
    else:
        bundle = _single_state_bundle(cfg)
    manifest = cfg.to_manifest()
    manifest["version"] = __version__
    bundle["manifest.json"] = format_json(manifest)
    return bundle


def run_from_manifest(manifest: dict) -> dict:
    """Regenerate a run from its manifest alone."""
    return run_scenario(ScenarioConfig.from_manifest(manifest))
