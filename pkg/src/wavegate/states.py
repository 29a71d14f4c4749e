"""State preparation: spectral envelopes shaped by slits, coverglass phase
steps, and stripe masks placed in the Fourier plane of a pulse shaper.

The shaper maps transverse position x (mm) to angular frequency via
``w = alpha * x`` with alpha in rad/ps per mm, so a slit of gap width w_mm
displaced by s_mm passes the band of full width ``alpha*w_mm`` centered at
``alpha*s_mm``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .grids import FreqGrid, SpectralWavefunction, TemporalEnvelope, spectrum_to_temporal

#: Frequency-plane dispersion constant of the default shaper geometry,
#: rad/ps per mm of transverse displacement.
DEFAULT_ALPHA = 2.41


def _canonical_phase(step: float) -> float:
    """Wrap a phase jump into the canonical range (-pi, pi]."""
    wrapped = np.mod(step + np.pi, 2.0 * np.pi) - np.pi
    if wrapped == -np.pi:
        wrapped = np.pi
    return float(wrapped)


@dataclass(frozen=True)
class SlitSpec:
    """Variable slit: gap width and displacement in mm, mapped by ``alpha``."""

    w_mm: float
    s_mm: float = 0.0
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not self.w_mm > 0:
            raise GridError(f"slit width must be positive, got {self.w_mm}")
        if not self.alpha > 0:
            raise GridError(f"alpha must be positive, got {self.alpha}")

    @property
    def band_width(self) -> float:
        """Passed spectral full width, rad/ps."""
        return self.alpha * self.w_mm

    @property
    def band_center(self) -> float:
        """Passed band center, rad/ps from the carrier."""
        return self.alpha * self.s_mm


@dataclass(frozen=True)
class PhaseStepSpec:
    """Half-plane phase jump: amplitudes at w >= boundary gain exp(i*step).

    The step is stored in the canonical range (-pi, pi].
    """

    boundary: float
    step: float

    def __post_init__(self):
        object.__setattr__(self, "step", _canonical_phase(self.step))


@dataclass(frozen=True)
class StripeMaskSpec:
    """Multiple disjoint pass-bands plus coverglass phase steps.

    ``bands_mm`` holds (center, width) pairs in mm, ordered by center and
    non-overlapping.  ``gap_mm`` is the opaque stripe width of the default
    geometry and is informational once explicit bands are given.
    """

    bands_mm: tuple = ()
    steps: tuple = ()
    gap_mm: float = 0.5
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        bands = tuple((float(c), float(w)) for c, w in self.bands_mm)
        if not bands:
            raise GridError("stripe mask needs at least one pass-band")
        for _, w in bands:
            if not w > 0:
                raise GridError(f"pass-band width must be positive, got {w}")
        edges = [(c - w / 2, c + w / 2) for c, w in bands]
        if sorted(edges) != list(edges):
            raise GridError("pass-bands must be ordered by center")
        for (lo1, hi1), (lo2, hi2) in zip(edges, edges[1:]):
            if hi1 > lo2:
                raise GridError(
                    f"pass-bands overlap: [{lo1}, {hi1}] and [{lo2}, {hi2}] mm"
                )
        object.__setattr__(self, "bands_mm", bands)
        object.__setattr__(self, "steps", tuple(self.steps))

    @classmethod
    def default(cls, alpha: float = DEFAULT_ALPHA) -> "StripeMaskSpec":
        """Two pass-bands separated by a 0.5 mm opaque stripe.

        The carrier position is kept open so the frequency filter can
        self-generate its reference, and two coverglass edges sit inside the
        bands, away from the filter window.
        """
        return cls(
            bands_mm=((-0.95, 2.5), (1.55, 1.5)),
            steps=(
                PhaseStepSpec(boundary=alpha * -1.2, step=np.pi / 2),
                PhaseStepSpec(boundary=alpha * 1.5, step=1.0),
            ),
            gap_mm=0.5,
            alpha=alpha,
        )


def _band_occupancy(grid: FreqGrid, center: float, width: float) -> np.ndarray:
    """Fraction of each grid bin covered by the band [center +- width/2].

    Interior samples get 1, exterior 0, and edge bins their covered
    fraction; a sample sitting exactly on a band edge gets 1/2, the midpoint
    convention.  Fractional edge occupancy keeps the discretized band width
    and centroid exact instead of quantizing them to whole bins.
    """
    half = width / 2.0
    lo, hi = center - half, center + half
    freqs = grid.freqs
    a = np.maximum(freqs - grid.dw / 2.0, lo)
    b = np.minimum(freqs + grid.dw / 2.0, hi)
    return np.clip((b - a) / grid.dw, 0.0, 1.0)


def _check_band(grid: FreqGrid, center: float, width: float):
    if width < 4.0 * grid.dw:
        raise GridError(
            f"grid too coarse: band width {width:.4g} rad/ps < 4*dw = {4 * grid.dw:.4g}"
        )
    freqs = grid.freqs
    if center - width / 2.0 < freqs[0] - grid.dw / 2.0 or center + width / 2.0 > freqs[-1] + grid.dw / 2.0:
        raise GridError(
            f"band [{center - width / 2:.4g}, {center + width / 2:.4g}] rad/ps "
            "extends beyond the frequency grid"
        )


def slit_spectrum(spec: SlitSpec, grid: FreqGrid) -> SpectralWavefunction:
    """Normalized rectangular spectral envelope cut by a variable slit.

    Raises GridError when the mapped band width ``alpha*w_mm`` is narrower
    than four grid steps.
    """
    width = spec.band_width
    center = spec.band_center
    _check_band(grid, center, width)
    amps = _band_occupancy(grid, center, width).astype(complex)
    segments = ((center - width / 2.0, center + width / 2.0, 1.0 + 0.0j),)
    return SpectralWavefunction(grid, amps, segments).normalized()


def apply_phase_step(spec: PhaseStepSpec, wf: SpectralWavefunction) -> SpectralWavefunction:
    """Multiply amplitudes at w >= boundary by exp(i*step).

    Pointwise magnitudes are untouched, so normalization is preserved
    exactly.
    """
    freqs = wf.grid.freqs
    if spec.boundary < freqs[0] or spec.boundary > freqs[-1]:
        raise GridError(
            f"phase-step boundary {spec.boundary:.4g} rad/ps lies outside the grid span "
            f"[{freqs[0]:.4g}, {freqs[-1]:.4g}]"
        )
    amps = wf.amplitudes.copy()
    amps[freqs >= spec.boundary] *= np.exp(1j * spec.step)
    segments = None
    if wf.piecewise is not None:
        factor = np.exp(1j * spec.step)
        segments = []
        for lo, hi, value in wf.piecewise:
            if hi <= spec.boundary:
                segments.append((lo, hi, value))
            elif lo >= spec.boundary:
                segments.append((lo, hi, value * factor))
            else:
                segments.append((lo, spec.boundary, value))
                segments.append((spec.boundary, hi, value * factor))
        segments = tuple(segments)
    return SpectralWavefunction(wf.grid, amps, segments)


def stripe_mask_spectrum(spec: StripeMaskSpec, grid: FreqGrid) -> SpectralWavefunction:
    """Normalized sum of disjoint pass-bands with coverglass phase steps."""
    total = np.zeros(grid.n_samples)
    segments = []
    for center_mm, width_mm in spec.bands_mm:
        center = spec.alpha * center_mm
        width = spec.alpha * width_mm
        _check_band(grid, center, width)
        total = total + _band_occupancy(grid, center, width)
        segments.append((center - width / 2.0, center + width / 2.0, 1.0 + 0.0j))
    wf = SpectralWavefunction(grid, total.astype(complex), tuple(segments))
    for step in spec.steps:
        wf = apply_phase_step(step, wf)
    return wf.normalized()


def temporal_truth(wf: SpectralWavefunction) -> TemporalEnvelope:
    """Ground-truth temporal envelope of a prepared state."""
    return spectrum_to_temporal(wf)
