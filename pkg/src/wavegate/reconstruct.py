"""Direct reconstruction of the complex temporal envelope.

The four projection probabilities at a single delay determine the envelope
there: ``P(t,D)-P(t,A)`` is proportional to its real part and
``P(t,R)-P(t,L)`` to its imaginary part, both carrying the sinc factor left
by the finite filter bandwidth.  Reconstruction divides out that factor
where it is safely away from zero, normalizes over the surviving samples,
and fixes the (unphysical) global phase so the peak-magnitude sample is
real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .apparatus import CountRecord, FilterSpec, ProjectionDistribution
from .errors import GridError
from .grids import (
    TemporalEnvelope,
    TimeGrid,
    grids_equal,
    temporal_to_spectrum,
)

DEFAULT_MASK_THRESHOLD = 0.05


@dataclass(frozen=True)
class RawReconstruction:
    """Uncorrected real/imaginary parts (common unknown scale) plus, for
    counting data, their per-point shot-noise standard errors."""

    grid: TimeGrid
    re: np.ndarray
    im: np.ndarray
    source: str  # "probability" | "counts"
    sigma_re: np.ndarray | None = None
    sigma_im: np.ndarray | None = None


@dataclass(frozen=True)
class CorrectionMask:
    """Validity mask of the sinc correction: valid[j] iff |sinc_j| >= threshold."""

    grid: TimeGrid
    sinc_values: np.ndarray
    valid: np.ndarray
    threshold: float

    @property
    def masked_fraction(self) -> float:
        return 1.0 - float(np.count_nonzero(self.valid)) / self.valid.size


@dataclass(frozen=True)
class ReconstructionResult:
    """Gauge-fixed reconstructed envelope with its mask and error bars."""

    envelope: TemporalEnvelope
    mask: CorrectionMask
    source: str
    scale: float
    phase: float
    sigma_re: np.ndarray | None = None
    sigma_im: np.ndarray | None = None


def _require_same_grid(records):
    first = records[0].grid
    for rec in records[1:]:
        if not grids_equal(first, rec.grid):
            raise GridError("projection inputs live on different grids")
    return first


def raw_reconstruct(pd, pa, pr, pl) -> RawReconstruction:
    """Difference the four projections into Re/Im estimates.

    Accepts four ProjectionDistribution (noiseless) or four CountRecord
    (counting) inputs ordered D, A, R, L.  Counts are converted to
    probability-density estimates via counts / (pulses * photons * eff * dt)
    and carry sqrt(counts)-based standard errors.
    """
    records = (pd, pa, pr, pl)
    expected = ("D", "A", "R", "L")
    for rec, pol in zip(records, expected):
        if rec.pol != pol:
            raise GridError(f"expected polarization {pol}, got {rec.pol}")
    grid = _require_same_grid(records)

    if all(isinstance(r, ProjectionDistribution) for r in records):
        return RawReconstruction(
            grid=grid,
            re=pd.values - pa.values,
            im=pr.values - pl.values,
            source="probability",
        )

    if all(isinstance(r, CountRecord) for r in records):
        meta = (pd.exposure_pulses, pd.mean_photons_per_pulse, pd.detection_efficiency)
        for rec in records[1:]:
            if (rec.exposure_pulses, rec.mean_photons_per_pulse, rec.detection_efficiency) != meta:
                raise GridError("count records carry inconsistent exposure metadata")
        exposure = pd.exposure_pulses * pd.mean_photons_per_pulse * pd.detection_efficiency
        if exposure <= 0:
            raise GridError("count records have zero effective exposure")
        scale = 1.0 / (exposure * grid.dt)
        cd, ca = pd.counts.astype(float), pa.counts.astype(float)
        cr, cl = pr.counts.astype(float), pl.counts.astype(float)
        return RawReconstruction(
            grid=grid,
            re=(cd - ca) * scale,
            im=(cr - cl) * scale,
            source="counts",
            sigma_re=np.sqrt(cd + ca) * scale,
            sigma_im=np.sqrt(cr + cl) * scale,
        )

    raise GridError("inputs must be four distributions or four count records, not a mix")


def correction_mask(
    grid: TimeGrid, filt: FilterSpec, threshold: float = DEFAULT_MASK_THRESHOLD
) -> CorrectionMask:
    """Sinc factor sinc(delta_w*t/2) and its validity mask on a grid."""
    if not 0.0 < threshold < 1.0:
        raise GridError(f"threshold must be in (0, 1), got {threshold}")
    x = filt.delta_w * grid.times / 2.0
    sinc_values = np.sinc(x / np.pi)
    valid = np.abs(sinc_values) >= threshold
    return CorrectionMask(grid, sinc_values, valid, threshold)


def sinc_correction(
    raw: RawReconstruction,
    filt: FilterSpec,
    threshold: float = DEFAULT_MASK_THRESHOLD,
):
    """Divide out the finite-bandwidth sinc factor where it is resolvable.

    Samples where |sinc| falls below the threshold are zeroed and flagged in
    the returned mask rather than extrapolated; the division there would
    amplify noise without bound.  Returns the unnormalized envelope and the
    mask.  An off-center filter additionally imprints exp(-i*center*t) on
    the raw signal, which is compensated here.
    """
    mask = correction_mask(raw.grid, filt, threshold)
    safe = np.where(mask.valid, mask.sinc_values, 1.0)
    amps = np.where(mask.valid, (raw.re + 1j * raw.im) / safe, 0.0)
    if filt.center != 0.0:
        amps = amps * np.exp(1j * filt.center * raw.grid.times)
    return TemporalEnvelope(raw.grid, amps), mask


def normalize_and_phase(env: TemporalEnvelope, mask: CorrectionMask) -> TemporalEnvelope:
    """Normalize over valid samples and rotate the global phase.

    The returned envelope satisfies sum_valid |psi|^2 dt = 1 and is real and
    positive at its peak-magnitude sample; multiplying the input by any
    nonzero complex constant leaves the output unchanged.
    """
    scale, phase = _gauge(env, mask)
    return TemporalEnvelope(env.grid, env.amplitudes * scale * np.exp(1j * phase))


def _gauge(env: TemporalEnvelope, mask: CorrectionMask):
    """Normalization factor and global-phase rotation for an envelope."""
    if not grids_equal(env.grid, mask.grid):
        raise GridError("envelope and mask grids do not match")
    mags = np.where(mask.valid, np.abs(env.amplitudes), 0.0)
    mass = float(np.sum(mags**2) * env.grid.dt)
    if mass <= 0.0:
        raise GridError("reconstruction has zero mass inside the valid mask")
    peak = int(np.argmax(mags))
    return 1.0 / np.sqrt(mass), float(-np.angle(env.amplitudes[peak]))


def reconstruct_envelope(
    pd, pa, pr, pl,
    filt: FilterSpec,
    threshold: float = DEFAULT_MASK_THRESHOLD,
) -> ReconstructionResult:
    """Full reconstruction driver: difference, correct, normalize, gauge-fix.

    Standard errors (counting inputs) ride through the same sinc division,
    scaling, and phase rotation as the envelope itself.
    """
    raw = raw_reconstruct(pd, pa, pr, pl)
    env, mask = sinc_correction(raw, filt, threshold)
    scale, phase = _gauge(env, mask)
    final = TemporalEnvelope(env.grid, env.amplitudes * scale * np.exp(1j * phase))

    sigma_re = sigma_im = None
    if raw.sigma_re is not None:
        abs_sinc = np.where(mask.valid, np.abs(mask.sinc_values), 1.0)
        sr = np.where(mask.valid, raw.sigma_re / abs_sinc, 0.0) * scale
        si = np.where(mask.valid, raw.sigma_im / abs_sinc, 0.0) * scale
        c, s = abs(np.cos(phase)), abs(np.sin(phase))
        sigma_re = np.sqrt((c * sr) ** 2 + (s * si) ** 2)
        sigma_im = np.sqrt((s * sr) ** 2 + (c * si) ** 2)

    return ReconstructionResult(
        envelope=final,
        mask=mask,
        source=raw.source,
        scale=scale,
        phase=phase,
        sigma_re=sigma_re,
        sigma_im=sigma_im,
    )


def _next_power_of_two(n: int) -> int:
    p = 2
    while p < n:
        p *= 2
    return p


def reconstruction_to_spectrum(
    env: TemporalEnvelope,
    mask: CorrectionMask,
    pad_grid: TimeGrid | None = None,
):
    """Transform a masked reconstruction to the frequency domain.

    Invalid samples are zero-filled.  Envelopes on non-power-of-two grids
    (delay scans) are embedded into a power-of-two grid of at least twice
    their length before transforming; ``pad_grid`` overrides the default
    embedding.  Returns (spectrum, zero_filled_fraction) where the fraction
    counts transform samples that carried no valid data.
    """
    if not grids_equal(env.grid, mask.grid):
        raise GridError("envelope and mask grids do not match")
    amps = np.where(mask.valid, env.amplitudes, 0.0)
    n = env.grid.n_samples

    if pad_grid is None:
        if n & (n - 1) == 0:
            pad_grid = env.grid
        else:
            pad_grid = TimeGrid(_next_power_of_two(2 * n), env.grid.dt, env.grid.t_center)

    if pad_grid.n_samples < n:
        raise GridError("padding grid is shorter than the reconstruction")
    idx = np.rint((env.grid.times - pad_grid.times[0]) / pad_grid.dt).astype(int)
    if (
        np.any(idx < 0)
        or np.any(idx >= pad_grid.n_samples)
        or np.max(np.abs(pad_grid.times[idx] - env.grid.times)) > 1e-9 * pad_grid.dt
    ):
        raise GridError("reconstruction samples do not align with the padding grid")
    padded = np.zeros(pad_grid.n_samples, dtype=complex)
    padded[idx] = amps

    spectrum = temporal_to_spectrum(TemporalEnvelope(pad_grid, padded))
    zero_filled = 1.0 - float(np.count_nonzero(mask.valid)) / pad_grid.n_samples
    return spectrum, zero_filled
