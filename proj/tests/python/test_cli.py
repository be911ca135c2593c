import json
import os
import subprocess

import pytest

CLI = os.environ.get("GMCLAB_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="GMCLAB_CLI not set")


def run(args, cwd):
    return subprocess.run([CLI, *args], cwd=cwd, capture_output=True, text=True)


def test_invalid_gamma_exit_code(tmp_path):
    r = run(["scaling", "--gamma", "2.5"], tmp_path)
    assert r.returncode == 2
    assert "(0,2)" in r.stderr


def test_ineq_summary(tmp_path):
    r = run(["ineq", "--cases", "1000", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    s = json.loads((tmp_path / "o" / "ineq" / "summary.json").read_text())
    assert s["schema_version"] == 1
    assert s["passed"] and s["experiment"] == "ineq"
    for key in ("version", "config", "seed", "workers", "wall_time_seconds", "assertions", "outputs"):
        assert key in s
    fuzz = (tmp_path / "o" / "ineq" / "ineq_fuzz.csv").read_text().splitlines()
    assert fuzz[0] == "proposition,cases,violations,worst_relative_slack"
    assert len(fuzz) == 5


def test_config_file_and_flag_precedence(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"gamma": 1.9, "seed": 5, "first-moment": {}}))
    r = run(["--config", "cfg.json", "first-moment", "--gamma", "1.8", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    s = json.loads((tmp_path / "o" / "first-moment" / "summary.json").read_text())
    assert s["config"]["gamma"] == 1.8
    assert s["seed"] == 5


def test_unknown_config_key_is_rejected(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"gamam": 1.0}))
    r = run(["--config", "cfg.json", "first-moment"], tmp_path)
    assert r.returncode == 2


def test_csv_identical_across_workers(tmp_path):
    common = ["cross", "--mode", "sokoban", "--samples", "200", "--epsilon", "0.0625"]
    a = run([*common, "--workers", "1", "--out", "a"], tmp_path)
    b = run([*common, "--workers", "3", "--out", "b"], tmp_path)
    assert a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr
    ca = (tmp_path / "a" / "cross" / "sokoban.csv").read_bytes()
    cb = (tmp_path / "b" / "cross" / "sokoban.csv").read_bytes()
    assert ca == cb
