"""Configuration: physical defaults, key=value run files, scenario configs.

Every physical constant used anywhere in the pipeline lives in DEFAULTS with
its unit in the key name; run files and scenario manifests override and
record these values, so no module hard-codes a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .apparatus import FilterSpec, GateSpec, NoiseSpec
from .errors import ConfigError
from .grids import SpectralWavefunction, TimeGrid
from .states import (
    PhaseStepSpec,
    SlitSpec,
    StripeMaskSpec,
    apply_phase_step,
    slit_spectrum,
    stripe_mask_spectrum,
)

DEFAULTS = {
    # state preparation
    "prep": "slit",  # slit | slit+glass | stripe
    "w_mm": 2.0,
    "s_mm": 0.0,
    "alpha_thz_per_mm": 2.41,  # interpreted as rad/ps per mm
    "phase_step_rad": math.pi / 2,
    "step_boundary_radps": 0.6,
    "stripe_bands_mm": "-0.95:2.5,1.55:1.5",  # center:width pairs
    "stripe_gap_mm": 0.5,
    "stripe_step1_rad": math.pi / 2,
    "stripe_step1_boundary_radps": 2.41 * -1.2,
    "stripe_step2_rad": 1.0,
    "stripe_step2_boundary_radps": 2.41 * 1.5,
    # simulation grid
    "n": 4096,
    "dt_ps": 0.01,
    # apparatus
    "filter_width_radps": 1.08,
    "filter_center_radps": 0.0,
    "gate_shape": "gaussian",  # gaussian | delta
    "gate_fwhm_ps": 0.0792,
    "reference_mode": "exact",  # exact | constant
    # delay scan
    "scan_n": 585,
    "scan_dt_ps": 0.02,
    # photon counting
    "rep_rate_hz": 1.0e8,
    "exposure_s": 25.0,
    "mean_photons_per_pulse_spl": 0.58,
    "mean_photons_per_pulse_cl": 366.0,
    "efficiency": 1.0e-4,  # absorbs SFG conversion and collection losses
    "seed": 0,
    # reconstruction
    "mask_threshold": 0.05,
}

STATE_KEYS = (
    "prep",
    "w_mm",
    "s_mm",
    "alpha_thz_per_mm",
    "phase_step_rad",
    "step_boundary_radps",
    "stripe_bands_mm",
    "stripe_gap_mm",
    "stripe_step1_rad",
    "stripe_step1_boundary_radps",
    "stripe_step2_rad",
    "stripe_step2_boundary_radps",
    "n",
    "dt_ps",
)

RUN_KEYS = STATE_KEYS + (
    "filter_width_radps",
    "filter_center_radps",
    "gate_shape",
    "gate_fwhm_ps",
    "reference_mode",
    "scan_n",
    "scan_dt_ps",
    "rep_rate_hz",
    "exposure_s",
    "mean_photons_per_pulse_spl",
    "mean_photons_per_pulse_cl",
    "efficiency",
    "seed",
    "mask_threshold",
)

_INT_KEYS = {"n", "scan_n", "seed"}
_STR_KEYS = {"prep", "gate_shape", "reference_mode", "stripe_bands_mm"}

NOISE_MODES = ("noiseless", "cl", "spl")


def parse_config_text(text: str, allowed=RUN_KEYS) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment.  Unknown keys fail."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _STR_KEYS:
            out[key] = value
        elif key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} needs an integer, got {value!r}") from exc
        else:
            try:
                out[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} needs a number, got {value!r}") from exc
    return out


def load_config(path, allowed=RUN_KEYS) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), allowed=allowed)


def resolved(overrides: dict | None = None) -> dict:
    """DEFAULTS with overrides applied; overrides must use known keys."""
    cfg = dict(DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in cfg:
            raise ConfigError(f"unknown configuration key {key!r}")
        cfg[key] = value
    return cfg


def _parse_bands(text: str):
    bands = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            center, width = part.split(":")
            bands.append((float(center), float(width)))
        except ValueError as exc:
            raise ConfigError(
                f"stripe_bands_mm entries must look like 'center:width', got {part!r}"
            ) from exc
    if not bands:
        raise ConfigError("stripe_bands_mm is empty")
    return tuple(bands)


def simulation_grids(cfg: dict):
    """(TimeGrid, FreqGrid) pair of the simulation grid."""
    tgrid = TimeGrid(int(cfg["n"]), float(cfg["dt_ps"]))
    return tgrid, tgrid.conjugate()


def scan_grid(cfg: dict) -> TimeGrid:
    return TimeGrid(int(cfg["scan_n"]), float(cfg["scan_dt_ps"]))


def build_state(cfg: dict) -> SpectralWavefunction:
    """Prepared spectral envelope for the configured ``prep``."""
    _, fgrid = simulation_grids(cfg)
    alpha = float(cfg["alpha_thz_per_mm"])
    prep = cfg["prep"]
    if prep == "slit":
        return slit_spectrum(SlitSpec(cfg["w_mm"], cfg["s_mm"], alpha), fgrid)
    if prep == "slit+glass":
        wf = slit_spectrum(SlitSpec(cfg["w_mm"], cfg["s_mm"], alpha), fgrid)
        step = PhaseStepSpec(cfg["step_boundary_radps"], cfg["phase_step_rad"])
        return apply_phase_step(step, wf)
    if prep == "stripe":
        mask = StripeMaskSpec(
            bands_mm=_parse_bands(cfg["stripe_bands_mm"]),
            steps=(
                PhaseStepSpec(cfg["stripe_step1_boundary_radps"], cfg["stripe_step1_rad"]),
                PhaseStepSpec(cfg["stripe_step2_boundary_radps"], cfg["stripe_step2_rad"]),
            ),
            gap_mm=float(cfg["stripe_gap_mm"]),
            alpha=alpha,
        )
        return stripe_mask_spectrum(mask, fgrid)
    raise ConfigError(f"unknown prep {prep!r} (expected slit, slit+glass, or stripe)")


def filter_spec(cfg: dict) -> FilterSpec:
    return FilterSpec(float(cfg["filter_width_radps"]), float(cfg["filter_center_radps"]))


def gate_spec(cfg: dict) -> GateSpec:
    return GateSpec(cfg["gate_shape"], float(cfg["gate_fwhm_ps"]))


def exposure_pulses(cfg: dict) -> int:
    return int(round(float(cfg["rep_rate_hz"]) * float(cfg["exposure_s"])))


def noise_spec(cfg: dict, seed: int | None = None) -> NoiseSpec:
    """Single-photon-level counting configuration."""
    return NoiseSpec(
        exposure_pulses=exposure_pulses(cfg),
        mean_photons_per_pulse=float(cfg["mean_photons_per_pulse_spl"]),
        efficiency=float(cfg["efficiency"]),
        seed=int(cfg["seed"] if seed is None else seed),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """One reproducible scenario run: name, resolved parameters, noise mode."""

    name: str
    params: dict
    noise_mode: str = "noiseless"

    def __post_init__(self):
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"unknown noise mode {self.noise_mode!r}")
        object.__setattr__(self, "params", resolved(self.params))

    def with_overrides(self, noise_mode: str | None = None, seed: int | None = None) -> "ScenarioConfig":
        params = dict(self.params)
        if seed is not None:
            params["seed"] = int(seed)
        return ScenarioConfig(
            name=self.name,
            params=params,
            noise_mode=noise_mode or self.noise_mode,
        )

    def to_manifest(self) -> dict:
        return {
            "scenario": self.name,
            "noise_mode": self.noise_mode,
            "parameters": dict(self.params),
        }

    @classmethod
    def from_manifest(cls, manifest: dict) -> "ScenarioConfig":
        try:
            return cls(
                name=manifest["scenario"],
                params=dict(manifest["parameters"]),
                noise_mode=manifest["noise_mode"],
            )
        except KeyError as exc:
            raise ConfigError(f"manifest is missing key {exc}") from exc
