import json

import numpy as np
import pytest

from kernelseries.assembler import solve_problem
from kernelseries.errors import SchemaError
from kernelseries.examples import example1, example4
from kernelseries.outputs import (coefficients_csv, fmt, gain_csv, gain_table, read_coefficients_csv,
                                  report_json, write_coefficients_csv, write_jsonl)


@pytest.fixture(scope="module")
def rep1():
    return solve_problem(example1(), 12, grid_n=21)


@pytest.fixture(scope="module")
def rep4():
    return solve_problem(example4(), None, {0: 6, 2: 12}, grid_n=21)


def test_fmt_roundtrip():
    for v in (0.1, 1 / 3, -2.5e-300, 1e22, -0.0, np.float64(7.25)):
        assert float(fmt(v)) == float(v)
    assert fmt(-0.0) == "0.0"


def test_coefficient_csv_roundtrip(tmp_path, rep1, rep4):
    for rep in (rep1, rep4):
        path = tmp_path / "c.csv"
        write_coefficients_csv(path, rep)
        series, L = read_coefficients_csv(path)
        assert L == 1.0
        for s in rep.kernels:
            np.testing.assert_array_equal(series[(s.kernel, s.region)].coeffs, s.series.coeffs)
            assert series[(s.kernel, s.region)].center == s.series.center


def test_coefficient_csv_header(rep1):
    lines = coefficients_csv(rep1).splitlines()
    assert lines[:4] == ["# kernelseries coefficients", "# domain_length 1.0",
                         "# K0 order 12 center 0.0 0.0", "kernel,region,i,j,K_ij"]
    assert len(lines) == 4 + 91


def test_read_rejects_mismatch(tmp_path, rep1):
    path = tmp_path / "c.csv"
    write_coefficients_csv(path, rep1)
    with pytest.raises(SchemaError):
        read_coefficients_csv(path, order=13)
    text = path.read_text()
    (tmp_path / "short.csv").write_text("\n".join(text.splitlines()[:-1]) + "\n")
    with pytest.raises(SchemaError):
        read_coefficients_csv(tmp_path / "short.csv")
    (tmp_path / "nometa.csv").write_text("\n".join(l for l in text.splitlines() if "order" not in l))
    with pytest.raises(SchemaError):
        read_coefficients_csv(tmp_path / "nometa.csv")
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        read_coefficients_csv(tmp_path / "bad.csv")


def test_gain_matches_eval_exactly(rep1, rep4):
    xi, cols = gain_table(rep1, 33)
    np.testing.assert_array_equal(cols["K0"], rep1.kernel(0)(np.ones(33), xi))
    xi, cols = gain_table(rep4, 41)
    below = xi <= 0.2
    l12 = np.where(below, rep4.kernel(1, "a")(np.ones(41), xi), rep4.kernel(1, "b")(np.ones(41), xi))
    np.testing.assert_array_equal(cols["K1"], l12)
    assert list(cols) == ["K0", "K1", "K2", "K3"]
    rows = gain_csv(rep1, 5).splitlines()
    assert rows[0] == "xi,K0" and len(rows) == 6


def test_report_json_is_deterministic(rep1):
    again = solve_problem(example1(), 12, grid_n=21)
    assert report_json(rep1) == report_json(again)
    doc = json.loads(report_json(rep1))
    assert "wall_time" not in doc and doc["sparsity"] == rep1.sparsity
    assert doc["groups"][0]["removed_rows"][0]["tag"] == "bc[1]"


def test_jsonl(tmp_path):
    write_jsonl(tmp_path / "d.jsonl", [{"b": np.float64(1.5), "a": np.int64(2)}, {"x": float("nan")}])
    lines = (tmp_path / "d.jsonl").read_text().splitlines()
    assert lines == ['{"a": 2, "b": 1.5}', '{"x": "nan"}']
