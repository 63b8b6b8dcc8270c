import io
import json
import subprocess
import sys

import numpy as np
import pytest

from commfactor import jsonio
from commfactor.cli import ConfigError, RunConfig, main
from commfactor.pathfun import MatrixPath

from conftest import random_sl, random_special_unitary, rng_for


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def write_matrix(tmp_path, name, x):
    return write(tmp_path, name, jsonio.matrix_to_json(x))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_det_identity(tmp_path, capsys):
    code, out, _ = run(["det", write_matrix(tmp_path, "i.json", np.eye(3))], capsys)
    assert code == 0
    assert json.loads(out)["is_zero"] is True


def test_det_nontrivial(tmp_path, capsys):
    code, out, _ = run(["det", write_matrix(tmp_path, "d.json", np.diag([2.0, 1.0]))], capsys)
    assert code == 3
    assert json.loads(out)["is_zero"] is False


def test_det_loop_path(tmp_path, capsys):
    p = MatrixPath.from_function(lambda t: np.diag([np.exp(2j * np.pi * t), 1]), 257)
    code, out, _ = run(["det", write(tmp_path, "p.json", jsonio.path_to_json(p))], capsys)
    assert code == 0
    assert json.loads(out)["raw"][0] == pytest.approx(0.5, abs=1e-9)


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["det", str(bad)], capsys)[0] == 1
    assert run(["det", str(tmp_path / "missing.json")], capsys)[0] == 1
    assert run(["det", write(tmp_path, "x.json", {"dim": 2})], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1


def test_factor_su4(tmp_path, capsys):
    src = write_matrix(tmp_path, "u.json", random_special_unitary(rng_for(4), 4))
    out_path = tmp_path / "f.json"
    code, _, _ = run(["factor", src, "--out", str(out_path)], capsys)
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["certificate"]["count"] <= 4
    assert doc["strategy"] == "paper_ldu"


def test_factor_obstruction(tmp_path, capsys):
    src = write_matrix(tmp_path, "d.json", np.diag([2.0, 1.0]))
    code, _, err = run(["factor", src], capsys)
    assert code == 3
    assert "residue" in err


def test_factor_path(tmp_path, capsys):
    p = MatrixPath.from_function(lambda s: np.diag(np.exp([1j * s, -1j * s])), 65)
    src = write(tmp_path, "p.json", jsonio.path_to_json(p))
    code, out, _ = run(["factor", src, "--strategy", "paper"], capsys)
    assert code == 0
    assert json.loads(out)["certificate"]["count"] in (4, 16)
    code, out, _ = run(["factor", src, "--grid", "33"], capsys)
    assert code == 0
    assert len(json.loads(out)["pairs"][0]["x"]["grid"]) == 33
    assert run(["factor", src, "--strategy", "norm_controlled"], capsys)[0] == 1


def test_factor_numeric_failure(tmp_path, capsys):
    src = write_matrix(tmp_path, "u.json", random_special_unitary(rng_for(1), 3))
    code, _, err = run(["factor", src, "--strategy", "norm_controlled"], capsys)
    assert code == 2
    assert "StrategyPreconditionViolated" in err


def test_k_must_fit_dimension(tmp_path, capsys):
    src = write_matrix(tmp_path, "u.json", random_special_unitary(rng_for(1), 3))
    assert run(["factor", src, "--k", "5"], capsys)[0] == 1
    assert run(["factor", src, "--k", "3"], capsys)[0] == 0


def test_stdin_input(tmp_path, capsys, monkeypatch):
    x = random_sl(rng_for(9), 3)
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(jsonio.matrix_to_json(x))))
    code, out, _ = run(["factor", "-", "--strategy", "cyclic"], capsys)
    assert code == 0
    assert json.loads(out)["strategy"] == "cyclic"


def test_env_override(tmp_path, capsys, monkeypatch):
    src = write_matrix(tmp_path, "x.json", random_sl(rng_for(2), 3))
    monkeypatch.setenv("COMMFACTOR_STRATEGY", "cyclic")
    code, out, _ = run(["factor", src], capsys)
    assert code == 0 and json.loads(out)["strategy"] == "cyclic"
    code, out, _ = run(["factor", src, "--strategy", "paper_ldu"], capsys)
    assert json.loads(out)["strategy"] == "paper_ldu"
    monkeypatch.setenv("COMMFACTOR_K", "many")
    assert run(["factor", src], capsys)[0] == 1


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(tol=0)
    with pytest.raises(ConfigError):
        RunConfig(grid=1)
    with pytest.raises(ConfigError):
        RunConfig(k=1)
    with pytest.raises(ConfigError):
        RunConfig(strategy="other")


def factor_then_verify(tmp_path, capsys, x, name="x"):
    src = write_matrix(tmp_path, f"{name}.json", x)
    fac = tmp_path / f"{name}.fac.json"
    assert run(["factor", src, "--out", str(fac)], capsys)[0] == 0
    return src, fac


def test_verify_roundtrip_and_tampering(tmp_path, capsys):
    src, fac = factor_then_verify(tmp_path, capsys, random_sl(rng_for(5), 4))
    code, out, _ = run(["verify", str(fac), src], capsys)
    assert code == 0 and json.loads(out)["ok"]

    doc = json.loads(fac.read_text())
    doc["pairs"][0]["x"]["entries"][0][0] += 1e-3
    tampered = write(tmp_path, "t.json", doc)
    code, out, _ = run(["verify", tampered, src], capsys)
    assert code == 4
    assert "recon_err" in json.loads(out)["mismatched"]

    doc = json.loads(fac.read_text())
    doc["certificate"]["max_factor_dist_to_1"] *= 0.5
    code, out, _ = run(["verify", write(tmp_path, "t2.json", doc), src], capsys)
    assert code == 4
    assert json.loads(out)["mismatched"] == ["max_factor_dist_to_1"]


def test_verify_wrong_original(tmp_path, capsys):
    _, fac = factor_then_verify(tmp_path, capsys, random_sl(rng_for(5), 4))
    other = write_matrix(tmp_path, "other.json", random_sl(rng_for(6), 4))
    code, out, _ = run(["verify", str(fac), other], capsys)
    assert code == 4
    assert "recon_err" in json.loads(out)["mismatched"]


def test_demo_descent(tmp_path, capsys):
    out_path = tmp_path / "d.json"
    code, out, _ = run(["demo-descent", "--stages", "3", "--seed", "1", "--out", str(out_path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["ranks"] == [64, 32, 16]
    doc = json.loads(out_path.read_text())
    assert doc["strategy"] == "descent" and len(doc["schedule"]) == 3
    assert run(["demo-descent", "--stages", "8"], capsys)[0] == 2


def test_console_entry_point(tmp_path):
    src = write_matrix(tmp_path, "i.json", np.eye(2))
    proc = subprocess.run([sys.executable, "-m", "commfactor", "det", src], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["is_zero"] is True
