import json
import subprocess
import sys

import numpy as np
import pytest

from ldg import cli, suite
from ldg.directors import radial_hedgehog_angles
from ldg.grids import SphericalGrid, write_field_csv, write_manifest


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    return code, summary, out


def test_hedgehog_summary_and_outputs(tmp_path):
    code, summary, out = run(tmp_path, "hedgehog", "--t", "1,0", "--L2", "0,1")
    assert code == 0 and summary["schema"] == 1 and summary["status"] == "ok"
    runs = summary["results"]["runs"]
    assert [(r["t"], r["L2"]) for r in runs] == [(1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.0, 1.0)]
    assert all(abs(r["order"] - 2) < 0.2 for r in runs)
    assert "scaling_max_diff" in runs[1] and "scaling_max_diff" not in runs[0]
    assert (out / "profiles" / "hedgehog_t1_L20.csv").exists()
    assert "seconds" in json.loads((out / "timings.json").read_text())


def test_summary_is_byte_identical_across_runs(tmp_path):
    a = run(tmp_path, "hedgehog", name="a")[2] / "summary.json"
    b = run(tmp_path, "hedgehog", name="b")[2] / "summary.json"
    assert a.read_bytes() == b.read_bytes()
    c = run(tmp_path, "identities", "--seed", "5", name="c")[2] / "summary.json"
    d = run(tmp_path, "identities", "--seed", "5", name="d")[2] / "summary.json"
    assert c.read_bytes() == d.read_bytes()


@pytest.mark.parametrize("argv, message", [
    (["hedgehog", "--t", "1.5"], "t = 1.5"),
    (["hedgehog", "--L2", "-1.5"], "L2 = -1.5"),
    (["hedgehog", "--N", "50"], "N >= 200"),
    (["audit-director", "vortex"], "unknown family"),
    (["audit-director", "angles-file"], "needs --angles-file"),
    (["minimize", "--grid", "12x8x7"], "n_theta must be even"),
])
def test_validation_errors_exit_two(tmp_path, argv, message):
    code, summary, _ = run(tmp_path, *argv)
    assert code == 2
    assert summary["status"] == "invalid" and message in summary["error"]


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["hedgehog", "--out", str(blocker / "sub")]) == 2


def test_toml_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('command = "hedgehog"\nt = [0.5]\nL2 = 2.0\nN = 300\n')
    code, summary, _ = run(tmp_path, "hedgehog", "--config", str(cfg), "--L2", "0")
    assert code == 0
    assert summary["config"]["t"] == [0.5]
    assert summary["config"]["L2"] == [0.0]
    assert summary["config"]["N"] == 300


@pytest.mark.parametrize("family, classification, verdict", [
    ("radial", "admissible", "compatible"),
    ("escape", "admissible", "incompatible"),
    ("constant", "admissible", "compatible"),
    ("helical", "inadmissible", "incompatible"),
])
def test_audit_director_families(tmp_path, family, classification, verdict):
    code, summary, _ = run(tmp_path, "audit-director", family, "--fit-s")
    res = summary["results"]
    assert code == 0
    assert res["classification"] == classification
    assert res["fit_s"]["verdict"] == verdict
    if verdict == "incompatible":
        assert res["fit_s"]["nontrivial_floor"] > 0.01


def test_helical_residual_is_reported(tmp_path):
    _, summary, _ = run(tmp_path, "audit-director", "helical")
    assert summary["results"]["extra_eq_residual"] == pytest.approx(np.sqrt(2), rel=1e-12)


def test_flipped_sign_breaks_audit(tmp_path):
    code, summary, _ = run(tmp_path, "audit-director", "radial", "--flip-extra-sign")
    assert code == 1 and summary["results"]["classification"] == "inadmissible"


def _angles_manifest(tmp_path, corrupt=False):
    g = SphericalGrid(np.linspace(1, 3, 16), 10, 8, order=4)
    a = radial_hedgehog_angles(g)
    write_field_csv(tmp_path / "angles.csv", g, {"f": a.f, "g": a.g})
    write_manifest(tmp_path / "manifest.json", g, {"angles": "angles.csv"})
    m = json.loads((tmp_path / "manifest.json").read_text())
    m["winding"] = 1
    if corrupt:
        m["grid"]["r_nodes"] = [2 * v for v in m["grid"]["r_nodes"]]
    (tmp_path / "manifest.json").write_text(json.dumps(m))
    return tmp_path / "manifest.json"


def test_angles_file_audit(tmp_path):
    path = _angles_manifest(tmp_path)
    code, summary, _ = run(tmp_path, "audit-director", "angles-file", "--angles-file", str(path),
                           "--fit-s")
    res = summary["results"]
    assert code == 0 and res["path"] == "finite-difference"
    assert res["classification"] == "admissible"
    assert res["fit_s"]["verdict"] == "compatible"


def test_malformed_angles_file(tmp_path):
    path = _angles_manifest(tmp_path, corrupt=True)
    code, summary, _ = run(tmp_path, "audit-director", "angles-file", "--angles-file", str(path))
    assert code == 2 and "malformed angles file" in summary["error"]
    (tmp_path / "broken.json").write_text("{")
    code, _, _ = run(tmp_path, "audit-director", "angles-file", "--angles-file",
                     str(tmp_path / "broken.json"), name="b")
    assert code == 2


def test_identities_pass_and_sign_probe_fails(tmp_path):
    code, summary, _ = run(tmp_path, "identities", "--seed", "3")
    assert code == 0 and all(summary["checks"].values())
    code, summary, _ = run(tmp_path, "identities", "--seed", "3", "--flip-extra-sign", name="f")
    assert code == 1
    failing = sorted(k for k, v in summary["checks"].items() if not v)
    assert failing == ["extra_equation_escape", "extra_equation_radial"]


def test_minimize_constant_boundary(tmp_path):
    code, summary, out = run(tmp_path, "minimize", "--boundary", "constant", "--grid", "12x8x12",
                             "--dump-fields")
    assert code == 0 and summary["results"]["converged"]
    assert (out / "profiles" / "energy.csv").exists()
    assert (out / "fields" / "manifest.json").exists()


def test_minimize_coarse_grid_stalls_with_hint(tmp_path):
    code, summary, out = run(tmp_path, "minimize", "--grid", "16x8x16", "--r-outer", "4",
                             "--tol", "1e-12")
    res = summary["results"]
    assert code == 1 and res["stalled"] and res["monotone"]
    assert "refine the grid" in res["hint"]
    assert len(list((out / "profiles").glob("ray_*.csv"))) == 3


def test_acceptance_suite_flag(tmp_path, monkeypatch, capsys):
    real = suite.run_all
    monkeypatch.setattr(suite, "run_all", lambda echo=None: real(numbers=[1, 2], echo=echo))
    assert cli.main(["--paper-suite", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split()[:3] for l in lines] == [["criterion", "1", "PASS"], ["criterion", "2", "PASS"]]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["seed"] == suite.SEED and summary["status"] == "ok"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ldg", "hedgehog", "--t", "2",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2 and "invalid configuration" in proc.stderr
