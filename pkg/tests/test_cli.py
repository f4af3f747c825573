"""End-to-end CLI coverage; everything in-process except one script check."""
import json
import subprocess
import sys

import numpy as np
import pytest

import momentbc
from momentbc.cli import main

from conftest import cached_system


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, *argv):
    rc, out, err = run_cli(capsys, *argv)
    assert rc == 0, err
    return json.loads(out)


def load_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def test_version(capsys):
    rc, out, _ = run_cli(capsys, "--version")
    assert rc == 0
    assert out.strip() == f"momentbc {momentbc.__version__}"
    rep = run_json(capsys, "--version", "--json")
    assert rep == {"name": "momentbc", "version": momentbc.__version__}


def test_assemble_report(capsys):
    rep = run_json(capsys, "assemble", "--theory", "G20")
    assert rep["version"] == momentbc.__version__
    assert rep["theory"] == "G20"
    assert rep["moments"] == 13
    assert rep["n_odd"] == 5
    assert rep["n_even"] == 8
    assert rep["char_counts"] == {"neg": 5, "zero": 3, "pos": 5}
    assert rep["checks"]["orthogonality_defect"] < 1e-12
    assert rep["checks"]["symmetrizer_min_eig"] > 0
    assert max(rep["checks"]["flux_asymmetry"].values()) < 1e-10
    assert rep["config"]["subcommand"] == "assemble"
    assert len(rep["names"]) == 13


def test_assemble_custom_matches_named(capsys):
    rep = run_json(capsys, "assemble", "--theory", "custom",
                   "--nd", "3", "--m", "2,2,1,1")
    assert rep["theory"] == "G20"
    assert rep["moments"] == 13


def test_assemble_dump_matrix(capsys, tmp_path):
    out = tmp_path / "s.csv"
    rc, _, _ = run_cli(capsys, "assemble", "--theory", "G20",
                       "--dump", "s-matrix", "--out", str(out))
    assert rc == 0
    S = np.loadtxt(out, delimiter=",")
    assert np.abs(S - cached_system(3).S).max() == 0.0
    first = out.read_bytes()
    run_cli(capsys, "assemble", "--theory", "G20",
            "--dump", "s-matrix", "--out", str(out))
    assert out.read_bytes() == first


def test_assemble_dump_to_stdout(capsys):
    rc, out, _ = run_cli(capsys, "assemble", "--theory", "G20", "--dump", "p-bgk")
    assert rc == 0
    lines = out.strip().splitlines()
    assert len(lines) == 13
    P = np.array([[float(tok) for tok in line.split(",")] for line in lines])
    assert np.abs(P - cached_system(3).P_bgk).max() == 0.0


@pytest.mark.parametrize("argv", [
    ("assemble",),
    ("assemble", "--theory", "G999"),
    ("assemble", "--theory", "custom", "--nd", "3"),
    ("assemble", "--theory", "custom", "--nd", "2", "--m", "1,1,1"),
    ("assemble", "--theory", "custom", "--nd", "3", "--m", "2,x"),
    ("assemble", "--theory", "custom", "--nd", "3", "--m", "0,1"),
    ("check-stability", "--theory", "G20", "--scan-chi", "0.5:1.0"),
    ("check-stability", "--theory", "G20", "--scan-chi", "0.5:1.0:0"),
    ("solve-channel", "--theory", "G20", "--kn", "-1"),
])
def test_usage_errors_exit_one(capsys, argv):
    rc, _, err = run_cli(capsys, *argv)
    assert rc == 1
    assert "error" in err


def test_unknown_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_check_stability_single_kind(capsys):
    rep = run_json(capsys, "check-stability", "--theory", "G20", "--bc", "mbc")
    assert rep["verdict"] == "unstable"
    assert rep["stable"] is False
    assert rep["kernel_ok"] is False
    rep = run_json(capsys, "check-stability", "--theory", "G20", "--bc", "obc")
    assert rep["verdict"] == "stable"
    assert rep["kernel_residual"] < 1e-9
    assert rep["details"]["n_neg"] == 5


def test_check_stability_combined(capsys):
    rep = run_json(capsys, "check-stability", "--theory", "G20")
    assert rep["mbc_stable"] is False
    assert rep["obc_stable"] is True
    assert rep["min_eig_L"] >= -1e-9
    assert rep["kernel_residuals"]["mbc"] > 0.1
    assert rep["kernel_residuals"]["obc"] < 1e-9


def test_check_stability_scan(capsys):
    rep = run_json(capsys, "check-stability", "--theory", "G20",
                   "--scan-chi", "0.5:1.0:3")
    scan = rep["scan"]
    assert len(scan) == 3
    assert [s["chi"] for s in scan] == [0.5, 0.75, 1.0]
    assert all(s["obc_stable"] for s in scan)


def test_solve_channel_csv(capsys, tmp_path):
    out = tmp_path / "chan.csv"
    rep = run_json(capsys, "solve-channel", "--theory", "G20",
                   "--grid", "64", "--out", str(out))
    assert rep["diagnostics"]["max_v_y"] < 1e-6
    header, data = load_csv(out)
    assert header[:6] == ["y", "rho", "v_y", "theta", "sigma_yy", "q_y"]
    assert len(header) == 6 + 13
    assert data.shape == (64, 19)
    theta = data[:, header.index("theta")]
    assert np.abs(theta - theta[::-1]).max() < 1e-9
    assert np.abs(data[:, header.index("v_y")]).max() < 1e-6
    # rerun is byte identical
    first = out.read_bytes()
    run_json(capsys, "solve-channel", "--theory", "G20",
             "--grid", "64", "--out", str(out))
    assert out.read_bytes() == first


def test_solve_channel_reference_fields_only(capsys, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    ref = tmp_path / "ref.csv"
    run_json(capsys, "solve-channel", "--theory", "G20", "--grid", "48",
             "--out", str(a))
    run_json(capsys, "solve-channel", "--theory", "G35", "--grid", "48",
             "--out", str(b))
    rep = run_json(capsys, "solve-channel", "--theory", "G20", "--grid", "48",
                   "--reference", "G20,G35", "--out", str(ref))
    assert rep["diagnostics"]["theories"] == ["G20", "G35"]
    header, data = load_csv(ref)
    assert len(header) == 6
    ha, da = load_csv(a)
    hb, db = load_csv(b)
    for col in ("theta", "sigma_yy"):
        mean = 0.5 * (da[:, ha.index(col)] + db[:, hb.index(col)])
        assert np.abs(data[:, header.index(col)] - mean).max() < 1e-12


def test_compare_reports_errors(capsys, tmp_path):
    left = tmp_path / "left.csv"
    right = tmp_path / "right.csv"
    run_json(capsys, "solve-channel", "--theory", "G20", "--grid", "48",
             "--out", str(left))
    run_json(capsys, "solve-channel", "--theory", "G35", "--grid", "48",
             "--out", str(right))
    joined = tmp_path / "joined.csv"
    plot = tmp_path / "plot.gp"
    rep = run_json(capsys, "compare", str(left), str(right),
                   "--out", str(joined), "--plot", str(plot))
    header, data = load_csv(joined)
    assert header == ["y", "theta_left", "theta_right",
                      "sigma_yy_left", "sigma_yy_right", "e_theta", "e_sigma"]
    e_theta = np.abs(data[:, 1] - data[:, 2])
    assert np.abs(data[:, 5] - e_theta).max() < 1e-15
    assert rep["max_e_theta"] == pytest.approx(data[:, 5].max())
    assert rep["max_e_theta"] > 0.001
    script = plot.read_text()
    assert "multiplot" in script
    assert str(joined) in script


def test_compare_grid_mismatch_exits_one(capsys, tmp_path):
    left = tmp_path / "left.csv"
    right = tmp_path / "right.csv"
    run_json(capsys, "solve-channel", "--theory", "G20", "--grid", "48",
             "--out", str(left))
    run_json(capsys, "solve-channel", "--theory", "G20", "--grid", "32",
             "--out", str(right))
    rc, _, err = run_cli(capsys, "compare", str(left), str(right))
    assert rc == 1
    assert "different grids" in err


def test_energy_march_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    rep = run_json(capsys, "energy-march", "--theory", "G20", "--homogeneous",
                   "--init", "random", "--grid", "32", "--t-final", "0.5",
                   "--out", str(trace))
    assert rep["blowup"] is False
    assert rep["relative_growth"] <= 1e-6
    assert rep["energy_final"] < rep["energy_initial"]
    assert rep["config"]["homogeneous"] is True
    header, data = load_csv(trace)
    assert header == ["t", "energy"]
    assert data[0, 0] == 0.0
    assert data[-1, 0] == pytest.approx(0.5)
    assert np.all(np.diff(data[:, 1]) <= 1e-9)


def test_energy_march_reports_blowup_with_exit_zero(capsys):
    rep = run_json(capsys, "energy-march", "--theory", "G20", "--grid", "32",
                   "--t-final", "0.5", "--cfl", "5.0", "--init", "random")
    assert rep["blowup"] is True


def test_solve_channel_underresolved_theory_exits_two(capsys):
    rc, _, err = run_cli(capsys, "solve-channel", "--theory", "G10",
                         "--grid", "32")
    assert rc == 2
    assert "numerical verification failure" in err


def test_outdir_env_resolves_relative_paths(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("MOMENTBC_OUTDIR", str(tmp_path))
    run_cli(capsys, "assemble", "--theory", "G20",
            "--dump", "s-matrix", "--out", "rel.csv")
    assert (tmp_path / "rel.csv").exists()


def test_config_file_defaults_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"theory": "G20", "grid": 32}))
    out = tmp_path / "a.csv"
    rep = run_json(capsys, "solve-channel", "--config", str(cfg),
                   "--out", str(out))
    assert rep["config"]["grid"] == 32
    _, data = load_csv(out)
    assert data.shape[0] == 32
    rep = run_json(capsys, "solve-channel", "--config", str(cfg),
                   "--grid", "24", "--out", str(out))
    assert rep["config"]["grid"] == 24
    _, data = load_csv(out)
    assert data.shape[0] == 24


def test_config_file_must_be_json_object(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    rc, _, err = run_cli(capsys, "solve-channel", "--config", str(cfg),
                         "--theory", "G20")
    assert rc == 1
    assert "JSON object" in err


def test_installed_script_runs():
    proc = subprocess.run(["momentbc", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("momentbc ")
