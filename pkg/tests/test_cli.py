import json
import os

import numpy as np

from wavegate.cli import main


def run_cli(*argv):
    return main(list(argv))


def test_list_scenarios(capsys):
    assert run_cli("list-scenarios") == 0
    out = capsys.readouterr().out
    assert "fig3" in out and "table1" in out


def test_simulate_reconstruct_fit_chain(tmp_path, capsys):
    sim_dir = tmp_path / "scan"
    assert run_cli("simulate", "--noise", "spl", "--seed", "4", "--out", str(sim_dir)) == 0
    assert sorted(os.listdir(sim_dir)) == [
        "counts_A.csv", "counts_D.csv", "counts_L.csv", "counts_R.csv",
    ]

    rec_dir = tmp_path / "rec"
    assert run_cli("reconstruct", "--in", str(sim_dir), "--out", str(rec_dir)) == 0
    assert (rec_dir / "reconstruction_time.csv").exists()
    assert (rec_dir / "reconstruction_freq.csv").exists()

    fit_path = tmp_path / "fit.json"
    assert run_cli(
        "fit", "--in", str(rec_dir / "reconstruction_time.csv"),
        "--kind", "sinc", "--out", str(fit_path),
    ) == 0
    report = json.loads(fit_path.read_text())
    assert abs(report["params"]["width"] - 2.6071) / 2.6071 < 0.05

    capsys.readouterr()  # flush output of the previous commands
    assert run_cli(
        "fit", "--in", str(rec_dir / "reconstruction_time.csv"), "--kind", "phase"
    ) == 0
    phase_report = json.loads(capsys.readouterr().out)
    # phase of the centered slit is flat; the tail window is noisy at SPL
    assert abs(phase_report["params"]["kappa"]) < 0.5


def test_simulate_with_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("prep = slit\nw_mm = 1.7\ns_mm = 0.2\nseed = 6\n")
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", str(cfg), "--out", str(out)) == 0
    assert (out / "probability_D.csv").exists()


def test_fidelity_command(tmp_path, capsys):
    run_dir = tmp_path / "fig3"
    assert run_cli("scenario", "fig3", "--out", str(run_dir)) == 0
    capsys.readouterr()
    assert run_cli(
        "fidelity",
        "--p", str(run_dir / "reconstruction_time_cl.csv"),
        "--q", str(run_dir / "truth_time.csv"),
    ) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["value"] > 0.99


def test_scenario_writes_manifest(tmp_path):
    out = tmp_path / "t1"
    assert run_cli("scenario", "fig4", "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scenario"] == "fig4"
    assert (out / "width_sweep.csv").exists()
    assert (out / "phase_sweep.csv").exists()


def test_exit_codes(tmp_path, capsys):
    # unknown scenario: config error
    assert run_cli("scenario", "fig9", "--out", str(tmp_path / "x")) == 2
    assert "error:" in capsys.readouterr().err

    # bad config file key: config error
    bad = tmp_path / "bad.cfg"
    bad.write_text("wibble = 3\n")
    assert run_cli("simulate", "--config", str(bad), "--out", str(tmp_path / "y")) == 2

    # missing config file: config error
    assert run_cli("simulate", "--config", str(tmp_path / "nope.cfg")) == 2

    # missing input data: data error
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run_cli("reconstruct", "--in", str(empty), "--out", str(tmp_path / "z")) == 3

    # malformed counts file: data error
    broken = tmp_path / "broken"
    broken.mkdir()
    for pol in "DARL":
        (broken / f"counts_{pol}.csv").write_text("# pol=D exposure_pulses=1\n0.0,1\n")
    assert run_cli("reconstruct", "--in", str(broken), "--out", str(tmp_path / "w")) == 3


def test_deterministic_cli_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli("scenario", "fig3", "--noise", "spl", "--seed", "9", "--out", str(out)) == 0
    for name in os.listdir(a):
        assert (a / name).read_bytes() == (b / name).read_bytes()
