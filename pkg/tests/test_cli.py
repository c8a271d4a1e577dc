"""End-to-end CLI contract: exit codes, formats, determinism, config."""

import json
import os
import subprocess
import sys

import pytest

from msf.cli import RunConfig, _parse_grid, report_json, verify_suite


def run_cli(args, env=None, cwd=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run([sys.executable, "-m", "msf.cli", *args],
                          capture_output=True, text=True, env=full_env, cwd=cwd)


def test_exit_code_pass():
    res = run_cli(["verify", "--suite", "moments"])
    assert res.returncode == 0
    assert json.loads(res.stdout)["records"][0]["status"] == "pass"


def test_exit_code_usage_error():
    assert run_cli(["verify", "--suite", "unknown"]).returncode == 2
    assert run_cli(["bogus-command"]).returncode == 2
    assert run_cli(["tabulate", "weight", "--u", "bad"]).returncode == 2


def test_exit_code_check_failure():
    # the fractional-flux exponential sum rule genuinely fails at mu=0.25,
    # so this suite must exit 1 and list the failing records
    res = run_cli(["verify", "--suite", "cs-normalization", "--mu", "0.25"])
    assert res.returncode == 1
    assert "FAIL" in res.stderr


def test_verify_report_schema(tmp_path):
    out = tmp_path / "rep.json"
    res = run_cli(["verify", "--suite", "weights", "--out", str(out)])
    assert res.returncode == 0
    rep = json.loads(out.read_text())
    assert set(rep) == {"meta", "records"}
    assert rep["meta"]["suite"] == "weights"
    for rec in rep["records"]:
        assert set(rec) == {"name", "parameters", "achieved_error", "tolerance", "status"}
        assert (rec["achieved_error"] <= rec["tolerance"]) == (rec["status"] == "pass")


def test_report_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli(["verify", "--suite", "g-matrix", "--out", str(a)])
    run_cli(["verify", "--suite", "g-matrix", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_tabulate_weight_csv(tmp_path):
    out = tmp_path / "w.csv"
    res = run_cli(["tabulate", "weight", "--mu", "0.5", "--u", "0:4:0.5",
                   "--v", "0:4:0.5", "--format", "csv", "--out", str(out)])
    assert res.returncode == 0
    lines = out.read_text().split("\n")
    assert lines[0] == "u,v,w0,w1"
    assert len([ln for ln in lines if ln]) == 82  # header + 81 grid points
    # LF endings, no CR
    assert "\r" not in out.read_text()


def test_tabulate_spectrum_shows_flux_splitting(tmp_path):
    out = tmp_path / "s.csv"
    run_cli(["tabulate", "spectrum", "--mu", "0.3", "--lmax", "2", "--mmax", "1",
             "--format", "csv", "--out", str(out)])
    rows = [ln.split(",") for ln in out.read_text().strip().split("\n")[1:]]
    energies = {(int(r[0]), int(r[1]), int(r[2])): float(r[4]) for r in rows}
    # branch-1 levels carry the flux shift, branch-0 levels do not
    assert energies[(1, 1, 0)] == pytest.approx(1.0 + 0.3 + 0.5)
    assert energies[(0, -1, 0)] == pytest.approx(0.5)


def test_tabulate_kernel(tmp_path):
    out = tmp_path / "k.csv"
    res = run_cli(["tabulate", "kernel", "--l", "-1", "--mu", "0.3", "--tau", "0.05",
                   "--rho", "1.0", "--rhop", "0:6:0.05", "--format", "csv",
                   "--out", str(out)])
    assert res.returncode == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "rhop,re,im"
    assert len(lines) == 122


def test_tabulate_json_schema(tmp_path):
    out = tmp_path / "t.json"
    run_cli(["tabulate", "state", "--j", "1", "--l", "1", "--m", "0",
             "--rhop", "0:2:0.5", "--out", str(out)])
    obj = json.loads(out.read_text())
    assert set(obj) == {"meta", "records"}
    assert obj["meta"]["columns"] == ["rho", "re", "im"]
    assert len(obj["records"]) == 5


def test_config_file_and_cli_precedence(tmp_path):
    cfgfile = tmp_path / "msf.cfg"
    cfgfile.write_text("mu = 0.25\ngamma = 2.0\n")
    out = tmp_path / "o.json"
    run_cli(["tabulate", "spectrum", "--lmax", "1", "--mmax", "0", "--out", str(out)],
            env={"MSF_CONFIG": str(cfgfile)})
    obj = json.loads(out.read_text())
    assert obj["meta"]["config"]["mu"] == 0.25
    assert obj["meta"]["config"]["gamma"] == 2.0
    # command line wins over the file
    run_cli(["tabulate", "spectrum", "--lmax", "1", "--mmax", "0", "--mu", "0.75",
             "--out", str(out)], env={"MSF_CONFIG": str(cfgfile)})
    obj = json.loads(out.read_text())
    assert obj["meta"]["config"]["mu"] == 0.75


def test_bad_config_file(tmp_path):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("nonsense value\n")
    res = run_cli(["verify", "--suite", "moments"], env={"MSF_CONFIG": str(cfgfile)})
    assert res.returncode == 2


def test_grid_parse():
    grid = _parse_grid("0:4:0.5")
    assert len(grid) == 9 and grid[0] == 0.0 and grid[-1] == 4.0


def test_verify_suite_api():
    rep = verify_suite(RunConfig(), "moments")
    assert rep.passed
    text = report_json(rep)
    assert json.loads(text)["meta"]["suite"] == "moments"
