import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from kernelseries import linsys
from kernelseries.assembler import assemble
from kernelseries.errors import DimensionMismatch, SingularSystem
from kernelseries.examples import example1
from kernelseries.linsys import (SparseSystem, append_block, dedup_rows, drop_dependent_rows, finalize,
                                 solve, sparsity, to_matrix_market)
from kernelseries.triseries import idx_l


def system(rows, rhs):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return append_block(SparseSystem(rows.shape[1]), rows, rhs, "test")


def test_append_block():
    s = SparseSystem(3)
    s = append_block(s, np.eye(3)[:2], [1, 2], "a")
    s = append_block(s, np.zeros((0, 3)), [], "empty")
    assert s.n_rows == 2 and s.tags == ["a", "a"]
    s = append_block(s, np.ones((1, 3)), [5], "b")
    assert s.tags == ["a", "a", "b"]
    with pytest.raises(DimensionMismatch):
        append_block(s, np.ones((2, 3)), [1], "bad")
    with pytest.raises(DimensionMismatch):
        append_block(s, np.ones((1, 4)), [1], "bad")


def test_dedup():
    s = system([[1, 2, 0], [0, 0, 0], [1, 2, 0], [0, 0, 0], [1, 2, 0]], [1, 0, 1, 0, 2])
    d = dedup_rows(s)
    assert d.n_rows == 3
    assert [r[1] for r in d.removed] == [2, 3]
    np.testing.assert_array_equal(d.rhs, [1, 0, 2])
    clean = system(np.eye(3), [1, 2, 3])
    assert dedup_rows(clean).n_rows == 3 and not dedup_rows(clean).removed


@pytest.mark.parametrize("N", [4, 10, 25])
def test_example1_duplicate_row(N):
    raw = assemble(example1(), N, finalize=False)
    assert raw.n_rows == idx_l(N) + 1
    assert raw.n_rows == idx_l(N - 2) + (N + 1) + (N + 1)
    done = finalize(raw)
    assert done.shape == (idx_l(N), idx_l(N))
    assert [r[0] for r in done.removed] == ["duplicate"]


def test_drop_dependent_rows_only_surplus():
    a = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1]])
    s = drop_dependent_rows(system(a, [1, 2, 3, 4]))
    assert s.shape == (3, 3)
    x = solve(s).coeffs
    np.testing.assert_allclose(x, [1, 2, 4])


def test_solve_trivial():
    r = solve(system(np.eye(4), [1, 0, 0, 0]))
    np.testing.assert_array_equal(r.coeffs, [1, 0, 0, 0])
    assert r.residual_norm == 0.0 and not r.rank_deficient and r.method == "splu"
    r = solve(system([[2, 0], [0, 4]], [2, 8]))
    np.testing.assert_allclose(r.coeffs, [1, 2], rtol=1e-15)


def test_solve_rectangular_minimum_norm():
    r = solve(system([[1.0, 1.0]], [2.0]))
    np.testing.assert_allclose(r.coeffs, [1, 1], rtol=1e-14)
    assert r.rank_deficient and r.method == "lstsq"


def test_singular_square_raises_with_tags():
    s = append_block(SparseSystem(2), np.array([[1.0, 1.0]]), [1.0], "first")
    s = append_block(s, np.array([[1.0, 1.0]]), [3.0], "second")
    with pytest.raises(SingularSystem) as err:
        solve(s)
    assert set(err.value.tags) <= {"first", "second"} and err.value.tags


def test_consistent_singular_square_is_rank_deficient():
    s = system([[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
    r = solve(s)
    assert r.rank_deficient
    np.testing.assert_allclose(r.coeffs, [0.5, 0.5], rtol=1e-12)


def test_sparsity():
    assert sparsity(system(np.eye(4), np.zeros(4))) == 0.75
    assert sparsity(SparseSystem(3)) == 0.0


def test_matrix_market_dump():
    a, b = to_matrix_market(system([[2, 0], [1, 4]], [2, 8]))
    assert a.startswith("%%MatrixMarket matrix coordinate real")
    assert b.startswith("%%MatrixMarket matrix array real")


def test_determinism():
    a = finalize(assemble(example1(), 12, finalize=False))
    b = finalize(assemble(example1(), 12, finalize=False))
    assert sparsity(a) == sparsity(b) and a.n_rows == b.n_rows
    assert (a.matrix != b.matrix).nnz == 0


@given(st.integers(0, 2**31 - 1), st.integers(2, 12))
def test_solve_then_substitute(seed, n):
    r = np.random.default_rng(seed)
    a = r.normal(size=(n, n)) + n * np.eye(n)
    b = r.normal(size=n)
    res = solve(system(a, b))
    assert res.rank_deficient or res.residual_norm <= 1e-10
    assert np.linalg.norm(a @ res.coeffs - b) / max(np.linalg.norm(b), 1) <= 1e-10


@given(st.integers(0, 2**31 - 1), st.integers(2, 10), st.floats(1e-3, 1e3), st.booleans())
def test_row_scaling_equivariance(seed, n, s, neg):
    r = np.random.default_rng(seed)
    a = r.normal(size=(n, n)) + n * np.eye(n)
    b = r.normal(size=n)
    k = int(r.integers(n))
    factor = -s if neg else s
    a2, b2 = a.copy(), b.copy()
    a2[k] *= factor
    b2[k] *= factor
    x1, x2 = solve(system(a, b)).coeffs, solve(system(a2, b2)).coeffs
    np.testing.assert_allclose(x2, x1, rtol=1e-12, atol=1e-12 * np.abs(x1).max())
