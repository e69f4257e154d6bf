import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kernelseries._backend import compiled_kernels
from kernelseries.errors import DimensionMismatch, OrderError
from kernelseries.taylor import UniSeries, series_eval
from kernelseries.triseries import (TriSeries, build_dx, build_dxi, build_mul_x, build_mul_xi,
                                    build_partial, build_second_order, build_trace,
                                    build_truncation, build_uni_derivative, build_uni_mul,
                                    degree_of, evaluate, idx_l, idx_m, truncate)

BACKENDS = ["python"] + (["cython"] if compiled_kernels is not None else [])


def poly(terms, N, center=(0.0, 0.0)):
    return TriSeries.from_terms(terms, N, center)


def as_terms(s):
    """``{(xpow, xipow): value}`` of the nonzero coefficients."""
    return {(i - j, j): v for i, j, v in s.to_csv_rows() if v != 0.0}


def test_index_maps():
    assert idx_l(-1) == 0 and idx_l(3) == 10 and idx_l(100) == 5151
    assert idx_m(0, 0) == 1 and idx_m(2, 1) == 5
    assert all(idx_m(n, n) == idx_l(n) for n in range(20))
    assert [degree_of(k) for k in range(4)] == [(0, 0), (1, 0), (1, 1), (2, 0)]


def test_truncate():
    s = poly({(2, 1): 1.0, (0, 0): 4.0, (1, 0): 2.0}, 3)
    np.testing.assert_array_equal(truncate(s, 3).coeffs, s.coeffs)
    np.testing.assert_array_equal(truncate(s, 0).coeffs, [4.0])
    np.testing.assert_array_equal(truncate(poly({(2, 1): 1.0}, 3), 2).coeffs, np.zeros(6))
    with pytest.raises(OrderError):
        truncate(s, 4)


def test_eval_examples():
    assert evaluate(poly({(1, 1): 1.0}, 2), 2.0, 3.0) == 6.0
    s = poly({(0, 0): 1.5, (1, 1): 2.0}, 3, (0.5, 0.7))
    assert evaluate(s, 0.5, 0.7) == 1.5
    with pytest.raises(DimensionMismatch):
        TriSeries(np.zeros(5), 2)


@pytest.mark.parametrize("backend", BACKENDS)
def test_derivative_examples(backend):
    dx = build_dx(3, backend)
    # first-order derivative matrices are square so they compose
    assert as_terms(TriSeries(poly({(2, 1): 1.0}, 3).apply(dx), 3)) == {(1, 1): 2.0}
    assert not as_terms(TriSeries(poly({(0, 2): 1.0, (0, 1): 3.0}, 3).apply(dx), 3))
    dxi = build_dxi(3, backend)
    assert as_terms(TriSeries(poly({(1, 2): 1.0}, 3).apply(dxi), 3)) == {(1, 1): 2.0}
    assert not as_terms(TriSeries(poly({(3, 0): 1.0}, 3).apply(dxi), 3))
    xx = build_second_order(3, "xx", backend)
    assert as_terms(TriSeries(poly({(2, 0): 1.0}, 3).apply(xx), 1)) == {(0, 0): 2.0}
    xixi = build_second_order(3, "xixi", backend)
    assert not as_terms(TriSeries(poly({(2, 1): 1.0}, 3).apply(xixi), 1))
    wave = poly({(2, 0): 1.0, (0, 2): 1.0}, 3)
    np.testing.assert_array_equal(wave.apply(xx) - wave.apply(xixi), np.zeros(3))


@pytest.mark.parametrize("backend", BACKENDS)
def test_multiplication_examples(backend):
    one = poly({(0, 0): 1.0}, 2)
    xi_ser = UniSeries([0.0, 1.0, 0.0])
    assert as_terms(TriSeries(one.apply(build_mul_xi(xi_ser, 2, 2, backend=backend)), 2)) == {(0, 1): 1.0}
    m6 = build_mul_xi(UniSeries([6.0, 0.0, 0.0]), 2, 1, backend=backend)
    np.testing.assert_array_equal(m6.toarray(), 6.0 * build_truncation(2, 1).toarray())
    assert as_terms(TriSeries(poly({(0, 1): 1.0}, 2).apply(m6), 1)) == {(0, 1): 6.0}
    x_ser = UniSeries([0.0, 1.0, 0.0])
    mx = build_mul_x(x_ser, 2, 2, backend=backend)
    assert as_terms(TriSeries(poly({(0, 1): 1.0}, 2).apply(mx), 2)) == {(1, 1): 1.0}
    m1 = build_mul_x(UniSeries([1.0, 0.0, 0.0]), 2, 1, backend=backend)
    np.testing.assert_array_equal(m1.toarray(), build_truncation(2, 1).toarray())
    x2 = build_mul_x(UniSeries([0.0, 0.0, 1.0, 0.0]), 3, 3, backend=backend)
    assert as_terms(TriSeries(poly({(1, 0): 1.0}, 3).apply(x2), 3)) == {(3, 0): 1.0}


@pytest.mark.parametrize("backend", BACKENDS)
def test_trace_examples(backend):
    np.testing.assert_array_equal(poly({(1, 1): 1.0}, 2).apply(build_trace(1, 0, 2, backend)), [0, 0, 1])
    s = poly({(0, 0): 1.0, (1, 0): 2.0, (2, 0): 3.0, (1, 1): 5.0, (0, 2): 7.0}, 2)
    np.testing.assert_array_equal(s.apply(build_trace(0, 0, 2, backend)), [1, 2, 3])
    np.testing.assert_allclose(poly({(0, 2): 1.0}, 2).apply(build_trace(0, -0.7, 2, backend)),
                               [0.49, 0, 0], rtol=1e-15)
    d = build_uni_derivative(2)
    np.testing.assert_array_equal(np.array([0, 0, 1.0]) @ d.toarray(), [0, 2, 0])
    np.testing.assert_array_equal(np.array([4.0, 0, 0]) @ d.toarray(), [0, 0, 0])


def test_uni_mul():
    m = build_uni_mul(UniSeries([1.0, 2.0, 0.0]), 2, 2)
    np.testing.assert_array_equal(np.array([0.0, 1.0, 1.0]) @ m.toarray(), [0, 1, 3])


def test_sparsity_counts():
    for N in (1, 5, 12, 30):
        assert build_dx(N).nnz == idx_l(N - 1)
        assert build_trace(0.4, 0.0, N).nnz == idx_l(N)


def test_opmatrix_dimension_errors():
    with pytest.raises(DimensionMismatch):
        build_dx(3).apply(np.zeros(9))
    with pytest.raises(DimensionMismatch):
        build_dx(3) @ build_trace(1, 0, 2)


@pytest.mark.parametrize("N", [0, 1, 2, 7, 33, 60])
def test_dimension_law(N):
    kappa = np.ones(idx_l(N))
    assert build_trace(0.3, -0.2, N).apply(kappa).shape == (N + 1,)
    assert build_mul_xi(UniSeries(np.ones(N + 1)), N, N).apply(kappa).shape == (idx_l(N),)
    assert build_mul_x(UniSeries(np.ones(N + 1)), N, max(N - 1, 0)).apply(kappa).shape == (idx_l(max(N - 1, 0)),)
    if N >= 1:
        assert build_dxi(N).apply(kappa).shape == (idx_l(N),)
        assert build_uni_derivative(N).shape == (N + 1, N + 1)
    if N >= 2:
        assert build_second_order(N, "xxi").apply(kappa).shape == (idx_l(N - 2),)


@pytest.mark.skipif(compiled_kernels is None, reason="compiled kernels not built")
@pytest.mark.parametrize("N", [3, 17, 40])
def test_backends_agree_exactly(N, rng):
    lam = UniSeries(rng.normal(size=N + 1))
    args = [(build_mul_xi, (lam, N, N - 1)), (build_mul_x, (lam, N, N - 2)),
            (build_trace, (0.37, -0.61, N)), (build_partial, (N, 1, 1))]
    for fn, a in args:
        p = fn(*a, backend="python").matrix
        c = fn(*a, backend="cython").matrix
        assert (p != c).nnz == 0
    kappa = rng.normal(size=idx_l(N))
    s = TriSeries(kappa, N, (0.3, 0.1))
    x, xi = rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)
    np.testing.assert_array_equal(evaluate(s, x, xi, backend="python"), evaluate(s, x, xi, backend="cython"))


# property tests on random polynomials

GRID = np.linspace(-0.9, 0.9, 17)
XX, YY = [a.ravel() for a in np.meshgrid(GRID, GRID, indexing="ij")]

orders = st.integers(2, 9)
seeds = st.integers(0, 2**31 - 1)


def _rand(N, seed, center=(0.0, 0.0)):
    r = np.random.default_rng(seed)
    return TriSeries(r.normal(size=idx_l(N)), N, center), r


def _close(a, b):
    scale = max(1.0, np.abs(b).max())
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * scale)


def _direct_partial(s, p, q, x, xi):
    """Termwise derivative of the monomial sum, no matrices."""
    out = np.zeros_like(x)
    for (a, b), v in as_terms(s).items():
        if a < p or b < q:
            continue
        fa = np.prod(np.arange(a - p + 1, a + 1)) if p else 1
        fb = np.prod(np.arange(b - q + 1, b + 1)) if q else 1
        out += v * fa * fb * x ** (a - p) * xi ** (b - q)
    return out


@pytest.mark.parametrize("backend", BACKENDS)
@given(N=orders, seed=seeds)
def test_partials_exact_on_polynomials(backend, N, seed):
    s, _ = _rand(N, seed)
    for p, q in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        d = TriSeries(s.apply(build_partial(N, p, q, backend)), N - p - q)
        _close(d(XX, YY), _direct_partial(s, p, q, XX, YY))


@pytest.mark.parametrize("backend", BACKENDS)
@given(N=orders, seed=seeds)
def test_multiplication_exact_on_polynomials(backend, N, seed):
    s, r = _rand(N, seed)
    lam = UniSeries(r.normal(size=N + 1))
    # degree bound so truncation is exact: multiply a degree-(N-k) series by a degree-k factor
    k = int(r.integers(0, N + 1))
    low = truncate(s, N - k)
    low = TriSeries(np.r_[low.coeffs, np.zeros(idx_l(N) - idx_l(N - k))], N)
    fac = UniSeries(np.r_[lam.coeffs[: k + 1], np.zeros(N - k)])
    got = TriSeries(low.apply(build_mul_xi(fac, N, N, backend=backend)), N)
    _close(got(XX, YY), low(XX, YY) * series_eval(fac, YY))
    got = TriSeries(low.apply(build_mul_x(fac, N, N, backend=backend)), N)
    _close(got(XX, YY), low(XX, YY) * series_eval(fac, XX))


@given(N=orders, seed=seeds)
def test_dx_dxi_commute(N, seed):
    s, _ = _rand(N, seed)
    a = (build_dx(N) @ build_dxi(N)).apply(s.coeffs)
    b = (build_dxi(N) @ build_dx(N)).apply(s.coeffs)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a[: idx_l(N - 2)], s.apply(build_partial(N, 1, 1)))
    assert not a[idx_l(N - 2):].any()
    xx = (build_dx(N) @ build_dx(N)).apply(s.coeffs)
    np.testing.assert_array_equal(xx[: idx_l(N - 2)], s.apply(build_second_order(N, "xx")))


@pytest.mark.parametrize("backend", BACKENDS)
@given(N=orders, seed=seeds, alpha=st.floats(-1, 1), gamma=st.floats(-1, 1), x=st.floats(-0.8, 0.8))
def test_trace_matches_eval(backend, N, seed, alpha, gamma, x):
    s, _ = _rand(N, seed)
    tr = UniSeries(s.apply(build_trace(alpha, gamma, N, backend)))
    v = float(s(x, alpha * x + gamma))
    assert series_eval(tr, x) == pytest.approx(v, rel=1e-12, abs=1e-12 * np.abs(s.coeffs).sum())


@given(N=orders, seed=seeds)
def test_trace_derivative_is_chain_rule(N, seed):
    s, _ = _rand(N, seed)
    lhs = s.apply(build_trace(1, 0, N)) @ build_uni_derivative(N).toarray()
    kx = (build_dx(N) @ build_trace(1, 0, N)).apply(s.coeffs)
    kxi = (build_dxi(N) @ build_trace(1, 0, N)).apply(s.coeffs)
    np.testing.assert_allclose(lhs, kx + kxi, rtol=1e-13, atol=1e-13)
    assert lhs[N] == 0.0
