"""Uniform time/frequency grids and the Fourier transforms pairing them.

Units are picoseconds for time and rad/ps for angular frequency; frequency
axes are offsets from the optical carrier, which is factored out of every
envelope.  The transform convention used throughout the package is

    psi(t)       = (2*pi)**-0.5 * integral psi_tilde(w) * exp(+i*w*t) dw
    psi_tilde(w) = (2*pi)**-0.5 * integral psi(t)       * exp(-i*w*t) dt

so a spectrum centered at +w_c produces an envelope with phase slope +w_c.
Both directions are unitary on conjugate grids (discrete Parseval holds to
machine precision), implemented with FFTs plus the phase factors required
for grids whose centers are not at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError

TWO_PI = 2.0 * np.pi


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time axis: ``t_j = t_center + (j - n//2) * dt``.

    Transform pairing (``conjugate`` / the FFT helpers) requires a
    power-of-two ``n_samples``; measurement grids such as a gate-delay scan
    may have any length >= 2.
    """

    n_samples: int
    dt: float
    t_center: float = 0.0

    def __post_init__(self):
        if self.n_samples < 2:
            raise GridError(f"n_samples must be >= 2, got {self.n_samples}")
        if not self.dt > 0:
            raise GridError(f"dt must be positive, got {self.dt}")

    @property
    def times(self) -> np.ndarray:
        j = np.arange(self.n_samples) - self.n_samples // 2
        return self.t_center + j * self.dt

    @property
    def span(self) -> float:
        return self.n_samples * self.dt

    def conjugate(self) -> "FreqGrid":
        """Conjugate frequency grid with dw = 2*pi / (n * dt), centered at 0."""
        if not _is_power_of_two(self.n_samples):
            raise GridError(
                f"transform pairing requires a power-of-two length, got {self.n_samples}"
            )
        return FreqGrid(self.n_samples, TWO_PI / (self.n_samples * self.dt))


@dataclass(frozen=True)
class FreqGrid:
    """Uniform angular-frequency axis (rad/ps), offset from the carrier."""

    n_samples: int
    dw: float
    w_center: float = 0.0

    def __post_init__(self):
        if self.n_samples < 2:
            raise GridError(f"n_samples must be >= 2, got {self.n_samples}")
        if not self.dw > 0:
            raise GridError(f"dw must be positive, got {self.dw}")

    @property
    def freqs(self) -> np.ndarray:
        k = np.arange(self.n_samples) - self.n_samples // 2
        return self.w_center + k * self.dw

    @property
    def span(self) -> float:
        return self.n_samples * self.dw

    def conjugate(self) -> TimeGrid:
        if not _is_power_of_two(self.n_samples):
            raise GridError(
                f"transform pairing requires a power-of-two length, got {self.n_samples}"
            )
        return TimeGrid(self.n_samples, TWO_PI / (self.n_samples * self.dw))


@dataclass(frozen=True)
class SpectralWavefunction:
    """Complex spectral envelope sampled on a FreqGrid.

    States carved out of a continuum by masks are exactly piecewise constant
    in frequency; builders that know this attach the underlying segments as
    ``piecewise``, a tuple of (lo, hi, value) intervals.  Consumers that
    integrate the spectrum (the frequency filter) use the segments when
    present instead of re-deriving the profile from the samples.
    """

    grid: FreqGrid
    amplitudes: np.ndarray
    piecewise: tuple | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_samples,):
            raise GridError(
                f"amplitudes shape {amps.shape} does not match grid length {self.grid.n_samples}"
            )
        object.__setattr__(self, "amplitudes", amps)
        if self.piecewise is not None:
            segments = tuple(
                (float(lo), float(hi), complex(value)) for lo, hi, value in self.piecewise
            )
            for lo, hi, _ in segments:
                if hi <= lo:
                    raise GridError(f"empty piecewise segment [{lo}, {hi}]")
            object.__setattr__(self, "piecewise", segments)

    def norm_squared(self) -> float:
        """sum |psi_tilde|^2 * dw."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dw)

    def normalized(self) -> "SpectralWavefunction":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise GridError("cannot normalize a zero spectral wavefunction")
        scale = 1.0 / np.sqrt(n2)
        segments = None
        if self.piecewise is not None:
            segments = tuple((lo, hi, value * scale) for lo, hi, value in self.piecewise)
        return SpectralWavefunction(self.grid, self.amplitudes * scale, segments)


@dataclass(frozen=True)
class TemporalEnvelope:
    """Complex temporal envelope (carrier removed) sampled on a TimeGrid."""

    grid: TimeGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_samples,):
            raise GridError(
                f"amplitudes shape {amps.shape} does not match grid length {self.grid.n_samples}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        """sum |psi|^2 * dt."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dt)

    def normalized(self) -> "TemporalEnvelope":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise GridError("cannot normalize a zero envelope")
        return TemporalEnvelope(self.grid, self.amplitudes / np.sqrt(n2))

    def edge_leakage(self) -> float:
        """Magnitude at the grid edges relative to the peak magnitude.

        Envelopes with rectangular spectra decay only like 1/t, so some edge
        leakage is unavoidable; callers use this as a diagnostic rather than
        a hard invariant.
        """
        mags = np.abs(self.amplitudes)
        peak = float(mags.max())
        if peak == 0:
            return 0.0
        return float(max(mags[0], mags[-1]) / peak)


def spectrum_to_temporal(spec: SpectralWavefunction, t_center: float = 0.0) -> TemporalEnvelope:
    """Inverse transform (kernel exp(+i*w*t)) onto the conjugate time grid."""
    g = spec.grid
    if not _is_power_of_two(g.n_samples):
        raise GridError(
            f"transform requires a power-of-two length, got {g.n_samples}"
        )
    n = g.n_samples
    tgrid = TimeGrid(n, TWO_PI / (n * g.dw), t_center)
    phased = spec.amplitudes * np.exp(1j * (g.freqs - g.w_center) * t_center)
    inner = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(phased))) * n
    amps = (g.dw / np.sqrt(TWO_PI)) * np.exp(1j * g.w_center * tgrid.times) * inner
    return TemporalEnvelope(tgrid, amps)


def temporal_to_spectrum(env: TemporalEnvelope, w_center: float = 0.0) -> SpectralWavefunction:
    """Forward transform (kernel exp(-i*w*t)) onto the conjugate frequency grid."""
    g = env.grid
    if not _is_power_of_two(g.n_samples):
        raise GridError(
            f"transform requires a power-of-two length, got {g.n_samples}"
        )
    n = g.n_samples
    fgrid = FreqGrid(n, TWO_PI / (n * g.dt), w_center)
    phased = env.amplitudes * np.exp(-1j * w_center * (g.times - g.t_center))
    inner = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(phased)))
    amps = (g.dt / np.sqrt(TWO_PI)) * np.exp(-1j * fgrid.freqs * g.t_center) * inner
    return SpectralWavefunction(fgrid, amps)


def grids_equal(a, b, rtol: float = 1e-12) -> bool:
    """Tolerant equality for grids of the same kind."""
    if type(a) is not type(b) or a.n_samples != b.n_samples:
        return False
    if isinstance(a, TimeGrid):
        steps = (a.dt, b.dt)
        centers = (a.t_center, b.t_center)
    else:
        steps = (a.dw, b.dw)
        centers = (a.w_center, b.w_center)
    scale = max(abs(steps[0]), abs(steps[1]))
    return (
        abs(steps[0] - steps[1]) <= rtol * scale
        and abs(centers[0] - centers[1]) <= rtol * scale * a.n_samples
    )
