import json

import numpy as np
import pytest

from kernelseries.assembler import solve_problem
from kernelseries.errors import DomainError, ParamError
from kernelseries.examples import (BUILDERS, DEFAULT_ORDERS, example1, example2, example3, example4,
                                   example5, example_json)
from kernelseries.problem import IntegralRhs, parse_problem
from kernelseries.taylor import X, cos, sin


def test_example1_structure():
    p = example1()
    assert p.n_kernels == 1 and len(p.pdes) == 1 and len(p.pdes[0].terms) == 3
    diag, axis = p.bcs
    assert (diag.line.alpha, diag.line.gamma) == (1.0, 0.0)
    assert isinstance(diag.rhs, IntegralRhs) and diag.rhs.scale == -0.5 and diag.rhs.lower == 0.0
    assert (axis.line.alpha, axis.line.gamma) == (0.0, 0.0) and axis.rhs is None
    with pytest.raises(ParamError):
        example1(eps=0.0)
    with pytest.raises(ParamError):
        example1(L=-1.0)


def test_example2_structure_and_errors():
    p = example2()
    diag = p.bcs[0]
    assert [t.trace_deriv for t in diag.terms] == [1, 0]
    with pytest.raises(DomainError):
        example2(eps=-1 + X)


@pytest.mark.parametrize("eps", [1.0, 2.5])
def test_example2_constant_eps_reduces_to_example1(eps):
    lam = 2 + X**2 * cos(6 * X**2)
    a = solve_problem(example2(lam, eps + 0 * X, 3.0), 30, grid_n=None).kernel(0).coeffs
    b = solve_problem(example1(lam, eps, 3.0), 30, grid_n=None).kernel(0).coeffs
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10 * max(1.0, np.abs(b).max()))


def test_example3_zero_data_gives_zero_kernels():
    z = 0 * X
    rep = solve_problem(example3(c1=z, c2=z, c3=z, c4=z), 12, grid_n=None)
    for s in rep.kernels:
        assert np.abs(s.series.coeffs).max() == 0.0


def test_example3_constant_trace():
    # eps + mu = 3 and c3 = 2 give K^vu(x, x) = -2/3
    rep = solve_problem(example3(eps=1.0 + X, mu=2.0 - X, c3=2.0), 16, grid_n=None)
    d = np.linspace(0, 1, 21)
    np.testing.assert_allclose(rep.kernel(1)(d, d), -2.0 / 3.0, rtol=0, atol=1e-12)


def test_example3_errors():
    with pytest.raises(DomainError):
        example3(mu=X)


def test_example4_structure():
    p = example4()
    assert p.split is not None and p.split.beta == pytest.approx(0.2)
    assert p.split.kernels == (0, 1)
    assert [m.kernel_a for m in p.split.matching] == [0]
    with pytest.raises(ParamError):
        example4(mu1=0.2, mu2=1.0)
    with pytest.raises(ParamError):
        example4(mu2=0.0)


def test_example4_zero_coupling():
    rep = solve_problem(example4(s12=0.0, s21=0.0), None, {0: 8, 2: 20}, grid_n=None)
    assert len(rep.kernels) == 6
    for s in rep.kernels:
        assert np.abs(s.series.coeffs).max() == 0.0


def test_example4_trace_values():
    rep = solve_problem(example4(), None, {0: 8, 2: 40}, grid_n=None)
    d = np.linspace(0.2, 1, 11)  # region b reaches the diagonal
    np.testing.assert_allclose(rep.kernel(1, "b")(d, d), -6.25, rtol=0, atol=1e-10)
    a = np.linspace(0, 1, 11)
    np.testing.assert_allclose(rep.kernel(0, "a")(a, 0 * a), 0.0, atol=1e-12)
    np.testing.assert_allclose(rep.kernel(1, "a")(a, 0 * a), 0.0, atol=1e-12)
    # the L2 group's coefficients reach ~1e10, so evaluation rounding is eps * sum|K_ij|
    l22 = rep.kernel(3)
    np.testing.assert_allclose(l22(a, 0 * a), 0.0, atol=1e-15 * np.abs(l22.coeffs).sum())
    # L11 is continuous across the characteristic, L12 may jump
    la, lb = rep.kernel(0, "a"), rep.kernel(0, "b")
    np.testing.assert_allclose(la(a, 0.2 * a), lb(a, 0.2 * a), rtol=0, atol=1e-12)


def test_example5_is_localized_example1():
    p = example5()
    assert p.center == (0.5, 0.7) and p.name == "example5"
    assert p.bcs[1].line.gamma == -0.7


def test_example_json_roundtrip():
    for name in BUILDERS:
        doc = json.loads(example_json(name))
        assert parse_problem(example_json(name)).name == name
        n = DEFAULT_ORDERS[name]
        assert doc["order"] == (n if isinstance(n, int) else list(n))
    with pytest.raises(KeyError):
        example_json("example9")
