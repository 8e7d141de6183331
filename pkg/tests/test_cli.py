import json
import subprocess
import sys

import numpy as np
import pytest

from semistiff import cli
from semistiff.io import OUT_ENV, read_csv


def run(argv, capsys):
    code = cli.dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_thresholds_table(tmp_path, capsys):
    code, out, _ = run(["thresholds", "--pmax", "6", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "thresholds.csv")
    assert rows[0] == ["p", "rho_prime"] and len(rows) == 6
    assert float(rows[1][1]) == pytest.approx(0.41421356, abs=1e-8)
    assert out.startswith("thresholds:")


def test_json_summary(tmp_path, capsys):
    code, out, _ = run(["thresholds", "--pmax", "3", "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["status"] == "ok"
    assert data["rho_prime"]["3"] == pytest.approx(0.5)
    assert data["files"] == [str(tmp_path / "thresholds.csv")]


def test_out_env_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert run(["thresholds", "--pmax", "2"], capsys)[0] == 0
    assert (tmp_path / "thresholds.csv").exists()


def test_verify_radial(tmp_path, capsys):
    code, _, _ = run(["verify", "--suite", "radial", "--rho", "0.5", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "verify_radial.csv")
    assert all(r[2] == "pass" for r in rows[1:]) and len(rows) > 10


def test_verify_all(tmp_path, capsys):
    code, out, _ = run(["verify", "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"] == data["checks"]


def test_radial_command(tmp_path, capsys):
    code, out, _ = run(["radial", "--p", "2", "--rho", "0.5", "--grid", "101x64",
                        "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["energy_closed_form"] == pytest.approx(2.4 * np.pi)
    assert data["hopf_c_estimate"] == pytest.approx(-0.64)
    assert data["minimality"] == "inconclusive"


def test_radial_helicoidal_alpha(tmp_path, capsys):
    code, out, _ = run(["radial", "--p", "1", "--rho", "0.3", "--kind", "hel", "--alpha", "1i",
                        "--grid", "101x32", "--out", str(tmp_path), "--json"], capsys)
    assert code == 0 and json.loads(out)["hopf_c_estimate"] > 0


def test_holo_command(tmp_path, capsys):
    code, out, _ = run(["holo", "--p", "2", "--q", "-1", "--rho", "0.3", "--grid", "101x64",
                        "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["zero_count"] == 3
    zs = json.loads((tmp_path / "zeroset.json").read_text())
    assert zs["p"] == 2 and len(zs["zeros"]) == 3
    rows = read_csv(tmp_path / "holo_validation.csv")
    assert rows[0][-1] == "pass" and all(r[-1] in ("pass", "") for r in rows[1:])


def test_holo_seeds_and_random(tmp_path, capsys):
    code, _, _ = run(["holo", "--p", "1", "--q", "-1", "--rho", "0.5", "--grid", "101x64",
                      "--seeds", "0.8+0.1j;-0.6j", "--out", str(tmp_path)], capsys)
    assert code == 0
    code, _, _ = run(["holo", "--p", "1", "--q", "-1", "--rho", "0.5", "--grid", "101x64",
                      "--random-seeds", "--seed", "3", "--out", str(tmp_path)], capsys)
    assert code == 0


def test_holo_infeasible_is_usage_error(tmp_path, capsys):
    code, _, err = run(["holo", "--p", "1", "--q", "-1", "--rho", "0.5",
                        "--seeds", "0.45;0.99", "--out", str(tmp_path)], capsys)
    assert code == 64 and "seed 0" in err


def test_spectrum_and_instants(tmp_path, capsys):
    code, _, _ = run(["spectrum", "--p", "2", "--t", "1.0", "--eigs", "3", "--grid", "401",
                      "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "spectrum_p2_t1.0.csv")
    assert rows[0] == ["index", "mu", "refinement_estimate"] and len(rows) == 4
    code, out, _ = run(["instants", "--p", "3", "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and len(data["instants"]) == 3
    assert data["transversality"] < 0 and data["mu2_positive"]


def test_spectrum_bad_grid(capsys):
    assert run(["spectrum", "--p", "2", "--t", "1", "--grid", "200"], capsys)[0] == 64


def test_bifurcate_command(tmp_path, capsys):
    code, out, _ = run(["bifurcate", "--p", "2", "--steps", "2", "--grid", "17x16",
                        "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["both_signs"] and data["boundary_ok"]
    rows = read_csv(tmp_path / "branch_p2.csv")
    assert rows[0] == ["step", "t", "amplitude", "residual", "nonsymmetry"] and len(rows) == 4
    assert (tmp_path / "surface_p2.obj").exists() and (tmp_path / "surface_p2.obj.json").exists()


def test_bifurcate_p1_is_usage_error(tmp_path, capsys):
    assert run(["bifurcate", "--p", "1", "--out", str(tmp_path)], capsys)[0] == 64


def test_lift_command(tmp_path, capsys):
    code, out, _ = run(["lift", "--p", "2", "--rho", "0.5", "--grid", "41x32", "--format", "ply",
                        "--out", str(tmp_path), "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["conformality_residual"] < 1e-6
    assert (tmp_path / "lift_p2_catenoidal.ply").exists()
    code, _, _ = run(["lift", "--p", "1", "--rho", "0.5", "--kind", "hel", "--grid", "41x32",
                      "--out", str(tmp_path)], capsys)
    assert code == 0


def test_repro_figure(tmp_path, capsys):
    code, out, _ = run(["repro", "--figure", "bifurcation-p2", "--steps", "2", "--grid", "17x16",
                        "--out", str(tmp_path), "--json"], capsys)
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"branch_p2.csv", "catenoid_p2.obj", "bifurcated_p2.obj", "mid_parallel_p2.csv"} <= names


def test_unknown_flag_and_subcommand(capsys):
    assert run(["thresholds", "--bogus"], capsys)[0] == 64
    assert run(["nope"], capsys)[0] == 64
    assert run(["radial", "--p", "1", "--rho", "2.0"], capsys)[0] == 64
    assert run(["radial", "--p", "0", "--rho", "0.5"], capsys)[0] == 64
    assert run(["holo", "--p", "1", "--q", "1", "--rho", "0.5"], capsys)[0] == 64


def test_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["thresholds", "--out", str(blocker / "sub")], capsys)[0] == 74


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise cli.spectrum.SpectrumError("forced")
    monkeypatch.setattr(cli.spectrum, "radial_spectrum", boom)
    assert run(["spectrum", "--p", "2", "--t", "1", "--out", str(tmp_path)], capsys)[0] == 2


def test_validation_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "SUITES", {**cli.SUITES, "radial": lambda rho: [("forced", False)]})
    assert run(["verify", "--suite", "radial", "--out", str(tmp_path)], capsys)[0] == 1


def test_help_for_every_subcommand(capsys):
    for name in ("radial", "thresholds", "holo", "spectrum", "instants", "bifurcate", "lift",
                 "verify", "repro"):
        code, out, _ = run([name, "--help"], capsys)
        assert code == 0 and "usage:" in out


def test_deterministic_csv(tmp_path, capsys):
    for d in ("a", "b"):
        run(["holo", "--p", "2", "--q", "-1", "--rho", "0.5", "--random-seeds", "--seed", "7",
             "--grid", "61x32", "--out", str(tmp_path / d)], capsys)
    for name in ("holo_validation.csv", "zeroset.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "semistiff", "thresholds", "--pmax", "2",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0 and "thresholds" in res.stdout
