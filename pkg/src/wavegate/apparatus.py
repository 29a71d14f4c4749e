"""Measurement-side simulation.

Models the chain that turns a prepared spectral envelope into the four
projection-probability distributions a delay scan records:

1. a polarization-dependent rectangular frequency filter keeps the full
   signal in one polarization and only a narrow band (the self-generated
   reference) in the other;
2. projections onto the D/A/R/L polarization states interfere signal and
   reference with phase offsets 0, pi, pi/2, 3pi/2;
3. the time gate of finite width blurs each distribution (circular
   convolution with a unit-area gate);
4. photon counting draws Poisson counts per (delay, polarization) point
   from a counter-based generator keyed by (seed, polarization, index).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .grids import (
    TWO_PI,
    SpectralWavefunction,
    TemporalEnvelope,
    TimeGrid,
    grids_equal,
    spectrum_to_temporal,
)

POLARIZATIONS = ("D", "A", "R", "L")

#: Interference phase acquired by the reference arm for each projection.
PROJECTION_PHASE = {"D": 0.0, "A": np.pi, "R": np.pi / 2, "L": 3 * np.pi / 2}

#: Reference weaker than this fraction of (peak spectral density x filter
#: width) triggers a low-reference warning.
LOW_REFERENCE_FRACTION = 0.01


@dataclass(frozen=True)
class FilterSpec:
    """Rectangular frequency filter of full width delta_w, offset ``center``."""

    delta_w: float
    center: float = 0.0

    def __post_init__(self):
        if not self.delta_w > 0:
            raise GridError(f"filter width must be positive, got {self.delta_w}")


@dataclass(frozen=True)
class GateSpec:
    """Time gate: 'gaussian' with a FWHM in ps, or the ideal 'delta' gate."""

    shape: str = "gaussian"
    fwhm_ps: float = 0.0792

    def __post_init__(self):
        if self.shape not in ("gaussian", "delta"):
            raise GridError(f"unknown gate shape {self.shape!r}")
        if self.shape == "gaussian" and not self.fwhm_ps > 0:
            raise GridError(f"gaussian gate needs a positive FWHM, got {self.fwhm_ps}")


@dataclass(frozen=True)
class ReferenceEnvelope:
    """Temporal amplitude of the filtered (reference) branch.

    ``low_reference`` flags states with almost no spectral weight inside the
    filter band, for which the interferometric readout degenerates.
    """

    grid: TimeGrid
    amplitudes: np.ndarray
    low_reference: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_samples,):
            raise GridError("reference amplitude length does not match its grid")
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class ProjectionDistribution:
    """P(t, pol): probability density per unit time for one polarization."""

    grid: TimeGrid
    pol: str
    values: np.ndarray

    def __post_init__(self):
        if self.pol not in POLARIZATIONS:
            raise GridError(f"unknown polarization {self.pol!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_samples,):
            raise GridError("distribution length does not match its grid")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class CountRecord:
    """Photon counts per delay point with the exposure metadata needed to
    convert them back into rate estimates."""

    grid: TimeGrid
    pol: str
    counts: np.ndarray
    exposure_pulses: int
    mean_photons_per_pulse: float
    detection_efficiency: float
    seed: int

    def __post_init__(self):
        if self.pol not in POLARIZATIONS:
            raise GridError(f"unknown polarization {self.pol!r}")
        counts = np.asarray(self.counts)
        if counts.shape != (self.grid.n_samples,):
            raise GridError("count array length does not match its grid")
        if np.any(counts < 0):
            raise GridError("counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(np.int64))


def _clamp_nonnegative(values: np.ndarray) -> np.ndarray:
    """Clamp roundoff negatives to zero; anything below -1e-14*peak is a bug."""
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    floor = -1e-14 * max(peak, 1.0)
    if np.any(values < floor):
        raise GridError(f"probability values below the roundoff floor {floor}")
    return np.clip(values, 0.0, None)


def filtered_reference(
    signal: SpectralWavefunction,
    filt: FilterSpec,
    mode: str = "exact",
) -> ReferenceEnvelope:
    """Temporal amplitude of the reference branch after the frequency filter.

    ``mode='exact'`` integrates the filtered spectrum in closed form over
    the band: mask-built states carry their exact piecewise-constant
    continuum description and are integrated segment by segment; spectra
    without one are read as constant over each grid bin.  Either way a state
    that is flat across the band yields a reference proportional to
    sinc(delta_w*t/2) to machine precision.  ``mode='constant'`` applies the
    flat-spectrum approximation instead: the spectral amplitude is frozen at
    its value at the filter center, which makes the downstream sinc
    correction exact by construction and is useful for ideal-limit checks.
    """
    grid = signal.grid
    if filt.delta_w < 2.0 * grid.dw:
        raise GridError(
            f"filter width {filt.delta_w:.4g} rad/ps not resolvable: needs >= 2*dw = {2 * grid.dw:.4g}"
        )
    tgrid = TimeGrid(grid.n_samples, TWO_PI / (grid.n_samples * grid.dw))
    times = tgrid.times
    lo = filt.center - filt.delta_w / 2.0
    hi = filt.center + filt.delta_w / 2.0

    if mode == "constant":
        k0 = int(np.argmin(np.abs(grid.freqs - filt.center)))
        base = signal.amplitudes[k0] * filt.delta_w / np.sqrt(TWO_PI)
        x = filt.delta_w * times / 2.0
        amps = base * np.exp(1j * filt.center * times) * np.sinc(x / np.pi)
    elif mode == "exact":
        if signal.piecewise is not None:
            # the prepared state is exactly piecewise constant: integrate its
            # continuum form over the filter band
            pieces = [
                (max(slo, lo), min(shi, hi), value)
                for slo, shi, value in signal.piecewise
                if min(shi, hi) > max(slo, lo)
            ]
        else:
            # read the sampled spectrum as constant over each bin
            a = np.maximum(grid.freqs - grid.dw / 2.0, lo)
            b = np.minimum(grid.freqs + grid.dw / 2.0, hi)
            seg = np.nonzero(b > a)[0]
            pieces = list(zip(a[seg], b[seg], signal.amplitudes[seg]))
        if not pieces:
            amps = np.zeros(grid.n_samples, dtype=complex)
        else:
            tt = times[:, None]
            aa = np.array([p[0] for p in pieces])[None, :]
            bb = np.array([p[1] for p in pieces])[None, :]
            vals = np.array([p[2] for p in pieces])[None, :]
            with np.errstate(invalid="ignore", divide="ignore"):
                integrals = (np.exp(1j * bb * tt) - np.exp(1j * aa * tt)) / (1j * tt)
            on_zero = np.nonzero(times == 0.0)[0]
            if on_zero.size:
                integrals[on_zero[0], :] = (bb - aa)[0]
            amps = (vals * integrals).sum(axis=1) / np.sqrt(TWO_PI)
    else:
        raise GridError(f"unknown reference mode {mode!r}")

    in_band = np.clip(
        (np.minimum(grid.freqs + grid.dw / 2.0, hi) - np.maximum(grid.freqs - grid.dw / 2.0, lo))
        / grid.dw,
        0.0,
        1.0,
    )
    band_energy = float(np.sum(in_band * np.abs(signal.amplitudes) ** 2) * grid.dw)
    peak_density = float(np.max(np.abs(signal.amplitudes) ** 2))
    # best achievable band energy: peak density over the filter width, capped
    # by the state's total energy
    total_energy = float(np.sum(np.abs(signal.amplitudes) ** 2) * grid.dw)
    achievable = min(peak_density * filt.delta_w, total_energy)
    low = band_energy < LOW_REFERENCE_FRACTION * achievable
    if low:
        warnings.warn(
            "reference branch carries almost no energy: the state has no spectral "
            "weight inside the filter band",
            stacklevel=2,
        )
    return ReferenceEnvelope(tgrid, amps, low_reference=low)


def projection_probabilities(
    signal: TemporalEnvelope,
    ref: ReferenceEnvelope,
    pol: str,
) -> ProjectionDistribution:
    """P(t, pol) = |psi(t) + exp(i*theta_pol) f(t)|^2 / (2N).

    N = integral(|psi|^2 + |f|^2) dt normalizes the joint distribution over
    time x {pol, complementary pol}, so P(.,D)+P(.,A) integrates to one.
    """
    if pol not in POLARIZATIONS:
        raise GridError(f"unknown polarization {pol!r}")
    if not grids_equal(signal.grid, ref.grid):
        raise GridError("signal and reference grids do not match")
    norm = (
        np.sum(np.abs(signal.amplitudes) ** 2) + np.sum(np.abs(ref.amplitudes) ** 2)
    ) * signal.grid.dt
    if norm <= 0:
        raise GridError("signal and reference are both zero")
    theta = PROJECTION_PHASE[pol]
    vals = np.abs(signal.amplitudes + np.exp(1j * theta) * ref.amplitudes) ** 2 / (2.0 * norm)
    return ProjectionDistribution(signal.grid, pol, _clamp_nonnegative(vals))


def projection_set(signal: TemporalEnvelope, ref: ReferenceEnvelope) -> dict:
    """All four projections, keyed by polarization."""
    return {pol: projection_probabilities(signal, ref, pol) for pol in POLARIZATIONS}


def _gate_kernel(grid: TimeGrid, gate: GateSpec) -> np.ndarray:
    """Unit-area gate samples on centered offsets, in wrap-around order."""
    offsets = (np.arange(grid.n_samples) - grid.n_samples // 2) * grid.dt
    sigma = gate.fwhm_ps / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    g /= g.sum() * grid.dt
    return np.fft.ifftshift(g)


def gate_convolve(p: ProjectionDistribution, gate: GateSpec) -> ProjectionDistribution:
    """Blur a distribution with the gate: circular convolution, unit-area kernel.

    The delta gate is the identity.  Total probability mass is preserved
    because the kernel integrates to one.
    """
    if gate.shape == "delta":
        return p
    if gate.fwhm_ps >= p.grid.span / 4.0:
        raise GridError(
            f"gate FWHM {gate.fwhm_ps:.4g} ps too wide for the grid span {p.grid.span:.4g} ps"
        )
    kernel = _gate_kernel(p.grid, gate)
    conv = np.fft.ifft(np.fft.fft(p.values) * np.fft.fft(kernel)).real * p.grid.dt
    return ProjectionDistribution(p.grid, p.pol, _clamp_nonnegative(conv))


def sample_on_grid(p: ProjectionDistribution, scan: TimeGrid) -> ProjectionDistribution:
    """Restrict a distribution to scan delays that coincide with grid samples."""
    src = p.grid
    idx = np.rint((scan.times - src.times[0]) / src.dt).astype(int)
    if np.any(idx < 0) or np.any(idx >= src.n_samples):
        raise GridError("scan grid extends beyond the simulation grid")
    if np.max(np.abs(src.times[idx] - scan.times)) > 1e-9 * src.dt:
        raise GridError("scan delays do not coincide with simulation samples")
    return ProjectionDistribution(scan, p.pol, p.values[idx])


def _point_key(seed: int, pol: str, index: int) -> int:
    """128-bit Philox key for one (seed, polarization, delay) point."""
    pol_code = POLARIZATIONS.index(pol)
    return ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | (pol_code << 48) | (index & 0xFFFFFFFFFFFF)


def sample_counts(
    p: ProjectionDistribution,
    exposure_pulses: int,
    mean_photons_per_pulse: float,
    efficiency: float = 1.0,
    seed: int = 0,
) -> CountRecord:
    """Poisson photon counts: lambda_j = pulses * photons/pulse * eff * P_j * dt.

    Each point draws from its own counter-based stream keyed by
    (seed, polarization, index), so results are independent of evaluation
    order and identical under parallel and serial sweeps.
    """
    if exposure_pulses < 0:
        raise GridError("exposure_pulses must be non-negative")
    if mean_photons_per_pulse < 0:
        raise GridError("mean photons per pulse must be non-negative")
    if not 0 < efficiency <= 1.0:
        raise GridError(f"efficiency must be in (0, 1], got {efficiency}")
    lam = exposure_pulses * mean_photons_per_pulse * efficiency * p.values * p.grid.dt
    if not np.all(np.isfinite(lam)):
        raise GridError("non-finite Poisson rate")
    counts = np.empty(p.grid.n_samples, dtype=np.int64)
    for j in range(p.grid.n_samples):
        if lam[j] == 0.0:
            counts[j] = 0
            continue
        rng = np.random.Generator(np.random.Philox(key=_point_key(seed, p.pol, j)))
        counts[j] = rng.poisson(lam[j])
    return CountRecord(
        grid=p.grid,
        pol=p.pol,
        counts=counts,
        exposure_pulses=int(exposure_pulses),
        mean_photons_per_pulse=float(mean_photons_per_pulse),
        detection_efficiency=float(efficiency),
        seed=int(seed),
    )


@dataclass(frozen=True)
class NoiseSpec:
    """Photon-counting configuration for single-photon-level runs."""

    exposure_pulses: int
    mean_photons_per_pulse: float
    efficiency: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class ExperimentRun:
    """Everything one simulated acquisition produces."""

    spectrum: SpectralWavefunction
    truth: TemporalEnvelope
    reference: ReferenceEnvelope
    distributions: dict
    counts: dict | None


def run_experiment(
    spectrum: SpectralWavefunction,
    filt: FilterSpec,
    gate: GateSpec,
    scan: TimeGrid | None = None,
    noise: NoiseSpec | None = None,
    reference_mode: str = "exact",
) -> ExperimentRun:
    """Full pipeline: state -> reference -> projections -> gate -> scan -> counts.

    With ``noise=None`` the run is noiseless and ``counts`` is None;
    otherwise Poisson counts are drawn for every polarization.
    """
    truth = spectrum_to_temporal(spectrum)
    ref = filtered_reference(spectrum, filt, mode=reference_mode)
    dists = {}
    for pol in POLARIZATIONS:
        p = projection_probabilities(truth, ref, pol)
        p = gate_convolve(p, gate)
        if scan is not None:
            p = sample_on_grid(p, scan)
        dists[pol] = p
    counts = None
    if noise is not None:
        counts = {
            pol: sample_counts(
                dists[pol],
                noise.exposure_pulses,
                noise.mean_photons_per_pulse,
                noise.efficiency,
                noise.seed,
            )
            for pol in POLARIZATIONS
        }
    return ExperimentRun(spectrum, truth, ref, dists, counts)
