import numpy as np
import pytest

from oracles import slow_forward_transform, slow_inverse_transform
from wavegate.errors import GridError
from wavegate.grids import (
    FreqGrid,
    SpectralWavefunction,
    TemporalEnvelope,
    TimeGrid,
    spectrum_to_temporal,
    temporal_to_spectrum,
)


def random_spectrum(grid, seed=0):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=grid.n_samples) + 1j * rng.normal(size=grid.n_samples)
    # taper so the envelope is concentrated and wrap effects are negligible
    amps *= np.exp(-0.5 * (grid.freqs / (grid.span / 16.0)) ** 2)
    return SpectralWavefunction(grid, amps).normalized()


def test_grid_axes():
    tg = TimeGrid(8, 0.5, t_center=1.0)
    assert tg.times[4] == 1.0
    assert np.allclose(np.diff(tg.times), 0.5)
    fg = tg.conjugate()
    assert fg.n_samples == 8
    assert np.isclose(fg.dw, 2 * np.pi / (8 * 0.5))
    assert fg.freqs[4] == 0.0


def test_grid_validation():
    with pytest.raises(GridError):
        TimeGrid(1, 0.1)
    with pytest.raises(GridError):
        TimeGrid(8, -0.1)
    with pytest.raises(GridError):
        FreqGrid(8, 0.0)


def test_measurement_grids_may_have_any_length():
    scan = TimeGrid(585, 0.02)
    assert scan.times[292] == 0.0
    with pytest.raises(GridError):
        scan.conjugate()


def test_transform_requires_power_of_two():
    fg = FreqGrid(100, 0.1)
    wf = SpectralWavefunction(fg, np.ones(100, dtype=complex))
    with pytest.raises(GridError):
        spectrum_to_temporal(wf)


def test_round_trip_identity():
    wf = random_spectrum(FreqGrid(256, 0.15), seed=1)
    back = temporal_to_spectrum(spectrum_to_temporal(wf))
    peak = np.abs(wf.amplitudes).max()
    assert np.max(np.abs(back.amplitudes - wf.amplitudes)) < 1e-10 * peak

    env = spectrum_to_temporal(wf)
    again = spectrum_to_temporal(temporal_to_spectrum(env))
    assert np.max(np.abs(again.amplitudes - env.amplitudes)) < 1e-10 * np.abs(env.amplitudes).max()


def test_parseval():
    for seed in range(4):
        wf = random_spectrum(FreqGrid(512, 0.2), seed=seed)
        env = spectrum_to_temporal(wf)
        assert abs(env.norm_squared() - wf.norm_squared()) < 1e-10


def test_inverse_transform_matches_slow_sum():
    grid = FreqGrid(128, 0.3)
    wf = random_spectrum(grid, seed=2)
    env = spectrum_to_temporal(wf)
    slow = slow_inverse_transform(wf.amplitudes, grid.freqs, grid.dw, env.grid.times)
    assert np.max(np.abs(env.amplitudes - slow)) < 1e-11 * np.abs(slow).max()


def test_forward_transform_matches_slow_sum():
    grid = FreqGrid(128, 0.3)
    wf = random_spectrum(grid, seed=3)
    env = spectrum_to_temporal(wf)
    spec = temporal_to_spectrum(env)
    slow = slow_forward_transform(env.amplitudes, env.grid.times, env.grid.dt, spec.grid.freqs)
    assert np.max(np.abs(spec.amplitudes - slow)) < 1e-11 * np.abs(slow).max()


def test_offset_centers_round_trip():
    grid = FreqGrid(256, 0.15, w_center=2.0)
    wf = random_spectrum(grid, seed=4)
    env = spectrum_to_temporal(wf, t_center=1.5)
    assert env.grid.t_center == 1.5
    back = temporal_to_spectrum(env, w_center=2.0)
    assert np.max(np.abs(back.amplitudes - wf.amplitudes)) < 1e-10 * np.abs(wf.amplitudes).max()

    slow = slow_inverse_transform(wf.amplitudes, grid.freqs, grid.dw, env.grid.times)
    assert np.max(np.abs(env.amplitudes - slow)) < 1e-11 * np.abs(slow).max()


def test_normalization_helpers():
    grid = FreqGrid(64, 0.5)
    wf = SpectralWavefunction(grid, np.ones(64, dtype=complex) * 3.0)
    assert np.isclose(wf.normalized().norm_squared(), 1.0)
    env = TemporalEnvelope(TimeGrid(64, 0.1), np.ones(64, dtype=complex))
    assert np.isclose(env.normalized().norm_squared(), 1.0)
    with pytest.raises(GridError):
        SpectralWavefunction(grid, np.zeros(64, dtype=complex)).normalized()


def test_amplitude_length_must_match_grid():
    with pytest.raises(GridError):
        SpectralWavefunction(FreqGrid(64, 0.5), np.ones(32, dtype=complex))
    with pytest.raises(GridError):
        TemporalEnvelope(TimeGrid(64, 0.5), np.ones(63, dtype=complex))
