import json

import numpy as np
import pytest

from kernelseries.cli import main
from kernelseries.examples import example_json


@pytest.fixture
def files(tmp_path):
    (tmp_path / "ex1.json").write_text(example_json("example1"))
    (tmp_path / "c3.json").write_text(example_json("example1", lam=3.0, order=3))
    (tmp_path / "ex5.json").write_text(example_json("example5"))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_writes_outputs(files, capsys):
    out = files / "o"
    code, stdout, _ = run(capsys, "solve", files / "ex1.json", "--order", 25, "--grid", 51, "--out", out)
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["coeffs.csv", "gain.csv", "report.json"]
    assert "sparsity 0.9820" in stdout and "WARNING" not in stdout
    assert len((out / "gain.csv").read_text().splitlines()) == 52


def test_solve_is_byte_deterministic(files, capsys):
    for d in ("a", "b"):
        run(capsys, "solve", files / "ex1.json", "--order", 15, "--grid", 31, "--out", files / d)
    for name in ("coeffs.csv", "gain.csv", "report.json"):
        assert (files / "a" / name).read_bytes() == (files / "b" / name).read_bytes()


def test_solve_exit_codes(files, capsys):
    assert run(capsys, "solve", files / "missing.json")[0] == 3
    (files / "broken.json").write_text("{")
    assert run(capsys, "solve", files / "broken.json")[0] == 3
    doc = json.loads(example_json("example1"))
    del doc["domain_length"]
    (files / "nolen.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", files / "nolen.json")
    assert code == 3 and "$.domain_length" in err
    doc = json.loads(example_json("example2"))
    doc["pdes"][0]["terms"][2]["b"] = {"op": "div", "args": [{"op": "const", "value": 1.0}, {"op": "var"}]}
    (files / "pole.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", files / "pole.json", "--out", files / "p")
    assert code == 2 and "numerical failure" in err


def test_divergence_warning(files, capsys):
    code, stdout, _ = run(capsys, "solve", files / "ex5.json", "--center", 0, 0, "--order", 50,
                          "--grid", 21, "--out", files / "o")
    assert code == 0 and "WARNING" in stdout and "divergence" in stdout
    code, stdout, _ = run(capsys, "solve", files / "ex5.json", "--order", 40, "--grid", 21,
                          "--out", files / "o")
    assert "WARNING" not in stdout


def test_eval(files, capsys):
    run(capsys, "solve", files / "c3.json", "--out", files / "o", "--grid", 11)
    code, stdout, _ = run(capsys, "eval", files / "o" / "coeffs.csv", "--point", 1, 0.5, "--point", 0, 0)
    assert code == 0
    assert stdout.splitlines() == ["x,xi,K0", "1.0,0.5,-2.34375", "0.0,0.0,0.0"]
    assert run(capsys, "eval", files / "o" / "coeffs.csv", "--order", 4, "--point", 1, 1)[0] == 3
    assert run(capsys, "eval", files / "nothing.csv", "--point", 1, 1)[0] == 3


def test_eval_gain_matches_solve(files, capsys):
    run(capsys, "solve", files / "ex1.json", "--order", 20, "--grid", 41, "--out", files / "o")
    run(capsys, "eval", files / "o" / "coeffs.csv", "--gain", "--grid", 41, "--out", files / "g.csv")
    assert (files / "g.csv").read_text() == (files / "o" / "gain.csv").read_text()
    code, stdout, _ = run(capsys, "eval", files / "o" / "coeffs.csv", "--grid", 5)
    assert code == 0 and len(stdout.splitlines()) == 1 + 15


def test_validate(files, capsys):
    code, stdout, _ = run(capsys, "validate", files / "ex1.json")
    assert code == 0 and "square after 1 duplicate removal" in stdout
    doc = json.loads(example_json("example1"))
    doc["pdes"][0]["terms"][0]["deriv"] = [1, 2]
    (files / "bad.json").write_text(json.dumps(doc))
    code, stdout, _ = run(capsys, "validate", files / "bad.json")
    assert code == 1 and "error:" in stdout


def test_validate_with_solution(files, capsys):
    run(capsys, "solve", files / "c3.json", "--out", files / "o", "--grid", 11)
    code, stdout, _ = run(capsys, "validate", files / "c3.json", "--solution", files / "o" / "coeffs.csv",
                          "--grid", 11)
    assert code == 0 and "pde[0]" in stdout and "ABOVE" not in stdout


def test_validate_example3_solve(files, capsys):
    (files / "ex3.json").write_text(example_json("example3"))
    code, stdout, _ = run(capsys, "validate", files / "ex3.json", "--solve", "--grid", 41)
    assert code == 0
    for label in ("pde[0]", "pde[1]", "bc[0]", "bc[1]"):
        assert label in stdout
    assert "ABOVE TOLERANCE" not in stdout


def _sweep_spec(path, **kw):
    doc = {"example": "example1", "params": [{"name": "c", "low": 3, "high": 3, "samples": 1}],
           "order": 25, "grid_n": 201} | kw
    path.write_text(json.dumps(doc))
    return path


def test_sweep_single_sample_matches_solve(files, capsys):
    spec = _sweep_spec(files / "s.json")
    assert run(capsys, "sweep", spec, "--out", files / "sw")[0] == 0
    run(capsys, "solve", files / "ex1.json", "--out", files / "o")
    assert (files / "sw" / "sample_00000.csv").read_bytes() == (files / "o" / "coeffs.csv").read_bytes()


def test_sweep_seeded_rerun_identical(files, capsys):
    spec = _sweep_spec(files / "s.json", mode="random", seed=5, order=10, grid_n=11,
                       params=[{"name": "c", "low": 0, "high": 9, "samples": 6}])
    run(capsys, "sweep", spec, "--out", files / "a")
    run(capsys, "sweep", spec, "--out", files / "b")
    for f in sorted((files / "a").iterdir()):
        assert f.read_bytes() == (files / "b" / f.name).read_bytes()
    run(capsys, "sweep", spec, "--seed", 6, "--out", files / "c")
    assert (files / "c" / "dataset.jsonl").read_bytes() != (files / "a" / "dataset.jsonl").read_bytes()


def test_sweep_failures(files, capsys):
    spec = _sweep_spec(files / "s.json", params=[{"name": "eps", "low": -2, "high": -1, "samples": 2}],
                       order=6, grid_n=11)
    code, stdout, err = run(capsys, "sweep", spec, "--out", files / "f")
    assert code == 2 and "0 ok, 2 failed" in stdout and "ParamError" in err
    bad = files / "bad.json"
    bad.write_text(json.dumps({"example": "example9", "params": []}))
    assert run(capsys, "sweep", bad)[0] == 3


def test_example_command(files, capsys):
    code, stdout, _ = run(capsys, "example", "example4")
    assert code == 0 and json.loads(stdout)["order"] == [8, 40]
    code, stdout, _ = run(capsys, "example", "--list")
    assert stdout.split() == [f"example{k}" for k in range(1, 6)]
    assert run(capsys, "example", "example4", "--set", "mu1=0.1")[0] == 1
    assert run(capsys, "example", "example1", "--set", "bogus=1")[0] == 1
