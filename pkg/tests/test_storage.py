import numpy as np
import pytest

from wavegate.apparatus import (
    FilterSpec,
    GateSpec,
    NoiseSpec,
    POLARIZATIONS,
    run_experiment,
)
from wavegate.config import (
    DEFAULTS,
    STATE_KEYS,
    ScenarioConfig,
    build_state,
    parse_config_text,
    resolved,
)
from wavegate.errors import ConfigError, DataFormatError
from wavegate.grids import TimeGrid
from wavegate.reconstruct import reconstruct_envelope
from wavegate.states import SlitSpec, slit_spectrum
from wavegate.storage import (
    format_record_csv,
    format_reconstruction_csv,
    ingest_counts,
    parse_count_csv,
    parse_distribution_csv,
    parse_probability_csv,
    parse_reconstruction_csv,
    write_bundle,
)


@pytest.fixture
def spl_records(scan):
    fgrid = TimeGrid(4096, 0.01).conjugate()
    state = slit_spectrum(SlitSpec(w_mm=2.0, s_mm=0.0), fgrid)
    run = run_experiment(
        state,
        FilterSpec(1.08),
        GateSpec("gaussian", 0.0792),
        scan=scan,
        noise=NoiseSpec(exposure_pulses=2_500_000_000, mean_photons_per_pulse=0.58,
                        efficiency=1e-4, seed=11),
    )
    return run


def test_config_parsing_round_trip():
    text = """
    # state under test
    prep = slit+glass
    w_mm = 2.0
    s_mm = 0.4
    alpha_thz_per_mm = 2.41
    phase_step_rad = 1.5707963267948966
    step_boundary_radps = 0.6
    n = 2048
    dt_ps = 0.02
    """
    cfg = parse_config_text(text, allowed=STATE_KEYS)
    assert cfg["prep"] == "slit+glass"
    assert cfg["n"] == 2048
    assert cfg["s_mm"] == 0.4


def test_config_unknown_key_and_bad_values():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("frobnicate = 1\n")
    with pytest.raises(ConfigError, match="integer"):
        parse_config_text("n = 2048.5\n")
    with pytest.raises(ConfigError, match="number"):
        parse_config_text("w_mm = wide\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("just some words\n")
    with pytest.raises(ConfigError):
        resolved({"nonsense": 1})


def test_build_state_variants():
    for prep in ("slit", "slit+glass", "stripe"):
        wf = build_state(resolved({"prep": prep}))
        assert np.isclose(wf.norm_squared(), 1.0)
    with pytest.raises(ConfigError):
        build_state(resolved({"prep": "prism"}))
    with pytest.raises(ConfigError):
        build_state(resolved({"prep": "stripe", "stripe_bands_mm": "bad"}))


def test_count_csv_round_trip(spl_records, tmp_path):
    """write -> ingest returns bit-identical records and bytes."""
    bundle = {
        f"counts_{pol}.csv": format_record_csv(spl_records.counts[pol])
        for pol in POLARIZATIONS
    }
    write_bundle(bundle, tmp_path)
    records = ingest_counts(tmp_path)
    for pol in POLARIZATIONS:
        original = spl_records.counts[pol]
        loaded = records[pol]
        assert loaded.grid == original.grid
        assert np.array_equal(loaded.counts, original.counts)
        assert loaded.exposure_pulses == original.exposure_pulses
        assert loaded.mean_photons_per_pulse == original.mean_photons_per_pulse
        assert loaded.detection_efficiency == original.detection_efficiency
        assert loaded.seed == original.seed
        assert format_record_csv(loaded) == bundle[f"counts_{pol}.csv"]


def test_probability_csv_round_trip(scan):
    fgrid = TimeGrid(4096, 0.01).conjugate()
    state = slit_spectrum(SlitSpec(w_mm=2.0, s_mm=0.0), fgrid)
    run = run_experiment(state, FilterSpec(1.08), GateSpec("delta", 1.0), scan=scan)
    text = format_record_csv(run.distributions["D"])
    rec = parse_probability_csv(text)
    assert rec.grid == scan
    assert np.array_equal(rec.values, run.distributions["D"].values)


def test_ingest_missing_polarization(spl_records, tmp_path):
    bundle = {
        f"counts_{pol}.csv": format_record_csv(spl_records.counts[pol])
        for pol in ("D", "A", "R")
    }
    write_bundle(bundle, tmp_path)
    with pytest.raises(DataFormatError, match="missing polarization L"):
        ingest_counts(tmp_path)


def test_ingest_non_uniform_grid(spl_records, tmp_path):
    bundle = {}
    for pol in POLARIZATIONS:
        text = format_record_csv(spl_records.counts[pol])
        if pol == "R":
            lines = text.splitlines()
            t, v = lines[40].split(",")
            lines[40] = f"{float(t) * 1.01!r},{v}"  # perturb one sample by 1%
            text = "\n".join(lines) + "\n"
        bundle[f"counts_{pol}.csv"] = text
    write_bundle(bundle, tmp_path)
    with pytest.raises(DataFormatError, match="uniform"):
        ingest_counts(tmp_path)


def test_parse_count_csv_errors():
    good_header = "# pol=D exposure_pulses=10 mean_photons=0.58 efficiency=1.0 seed=0"
    with pytest.raises(DataFormatError, match="metadata header"):
        parse_count_csv("0.0,1\n0.02,2\n")
    with pytest.raises(DataFormatError, match="missing 'seed'"):
        parse_count_csv("# pol=D exposure_pulses=10 mean_photons=0.58 efficiency=1.0\n0.0,1\n")
    with pytest.raises(DataFormatError, match="unknown polarization"):
        parse_count_csv(good_header.replace("pol=D", "pol=Q") + "\n0.0,1\n")
    with pytest.raises(DataFormatError, match="integers"):
        parse_count_csv(good_header + "\n0.0,1.5\n0.02,2\n")
    with pytest.raises(DataFormatError, match="negative count"):
        parse_count_csv(good_header + "\n0.0,-1\n0.02,2\n")
    with pytest.raises(DataFormatError, match="expected 't_ps,value'"):
        parse_count_csv(good_header + "\n0.0,1,9\n")


def test_reconstruction_csv_round_trip(spl_records):
    result = reconstruct_envelope(
        *[spl_records.counts[pol] for pol in POLARIZATIONS], FilterSpec(1.08)
    )
    text = format_reconstruction_csv(result)
    t, amps, sig_re, sig_im, valid = parse_reconstruction_csv(text)
    assert np.array_equal(t, result.envelope.grid.times)
    assert np.array_equal(amps, result.envelope.amplitudes)
    assert np.array_equal(sig_re, result.sigma_re)
    assert np.array_equal(valid, result.mask.valid)
    with pytest.raises(DataFormatError):
        parse_reconstruction_csv("nope\n1,2\n")


def test_distribution_csv_accepts_both_layouts(spl_records):
    result = reconstruct_envelope(
        *[spl_records.counts[pol] for pol in POLARIZATIONS], FilterSpec(1.08)
    )
    x, v = parse_distribution_csv(format_reconstruction_csv(result))
    assert np.allclose(v, np.abs(result.envelope.amplitudes) ** 2)
    simple = "t_ps,value\n0.0,1.5\n0.02,2.5\n"
    x2, v2 = parse_distribution_csv(simple)
    assert np.allclose(x2, [0.0, 0.02])
    assert np.allclose(v2, [1.5, 2.5])
    with pytest.raises(DataFormatError):
        parse_distribution_csv("t_ps,value\n")


def test_scenario_config_manifest_round_trip():
    cfg = ScenarioConfig(name="fig3", params={"w_mm": 1.7, "seed": 9}, noise_mode="spl")
    manifest = cfg.to_manifest()
    again = ScenarioConfig.from_manifest(manifest)
    assert again == cfg
    assert manifest["parameters"]["w_mm"] == 1.7
    # every physical default is recorded
    assert set(DEFAULTS) <= set(manifest["parameters"])
    with pytest.raises(ConfigError):
        ScenarioConfig.from_manifest({"scenario": "fig3"})
    with pytest.raises(ConfigError):
        ScenarioConfig(name="fig3", params={}, noise_mode="loud")
