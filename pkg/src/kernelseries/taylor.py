"""Univariate truncated Taylor series and a small expression language.

Coefficient functions of the kernel equations (reaction terms, diffusivities,
transport speeds, couplings) are written as :class:`CoeffExpr` trees and
expanded numerically with Taylor-mode recurrences, so no symbolic package is
needed::

    >>> from kernelseries.taylor import X, sin, expand
    >>> lam = 3 + X**2 * sin(3 * X)
    >>> expand(lam, 0.0, 5).coeffs
    array([ 3. ,  0. ,  0. ,  3. ,  0. , -4.5])

Only constants, the variable, ``+ - * /``, integer powers, ``sin``, ``cos``,
``exp`` and ``sqrt`` are supported.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field

import numpy as np

from .errors import CenterMismatch, DivisionByZeroSeries, DomainError, OrderError, SchemaError

__all__ = [
    "CoeffExpr", "UniSeries", "X", "const", "var", "sin", "cos", "exp", "sqrt",
    "expand", "series_add", "series_sub", "series_mul", "series_div", "series_scale",
    "series_derivative", "series_antiderivative", "series_eval", "series_shift",
    "series_compose_affine", "expr_from_json", "expr_to_json",
]

_UNARY = ("sin", "cos", "exp", "sqrt")
_NARY = ("add", "mul")
_BINARY = ("sub", "div")


# ---------------------------------------------------------------------------
# expression trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoeffExpr:
    """Node of an analytic coefficient expression in one real variable.

    ``op`` is one of ``const``, ``var``, ``add``, ``sub``, ``mul``, ``div``,
    ``sin``, ``cos``, ``exp``, ``sqrt``, ``pow``. ``value`` is used by
    ``const`` and ``exponent`` (an integer, possibly negative) by ``pow``.
    """

    op: str
    args: tuple = ()
    value: float | None = None
    exponent: int | None = None

    # arithmetic sugar -----------------------------------------------------
    def __add__(self, other):
        return CoeffExpr("add", (self, _wrap(other)))

    def __radd__(self, other):
        return CoeffExpr("add", (_wrap(other), self))

    def __sub__(self, other):
        return CoeffExpr("sub", (self, _wrap(other)))

    def __rsub__(self, other):
        return CoeffExpr("sub", (_wrap(other), self))

    def __mul__(self, other):
        return CoeffExpr("mul", (self, _wrap(other)))

    def __rmul__(self, other):
        return CoeffExpr("mul", (_wrap(other), self))

    def __truediv__(self, other):
        return CoeffExpr("div", (self, _wrap(other)))

    def __rtruediv__(self, other):
        return CoeffExpr("div", (_wrap(other), self))

    def __neg__(self):
        return CoeffExpr("mul", (const(-1.0), self))

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral):
            raise TypeError("only integer powers are supported")
        return CoeffExpr("pow", (self,), exponent=int(n))

    def __call__(self, x):
        return evaluate(self, x)

    def __str__(self):
        return _to_str(self)

    # structure ----------------------------------------------------------------
    def is_const(self):
        return self.op == "const"

    def derivative(self):
        """Symbolic derivative, built from the same node kinds."""
        return diff(self)


def const(value) -> CoeffExpr:
    return CoeffExpr("const", value=float(value))


def var() -> CoeffExpr:
    return CoeffExpr("var")


X = var()


def _wrap(obj) -> CoeffExpr:
    if isinstance(obj, CoeffExpr):
        return obj
    if isinstance(obj, numbers.Real):
        return const(obj)
    raise TypeError(f"cannot use {type(obj).__name__} in a coefficient expression")


def as_expr(obj) -> CoeffExpr:
    """Coerce a real number or expression to :class:`CoeffExpr`."""
    return _wrap(obj)


def sin(u) -> CoeffExpr:
    return CoeffExpr("sin", (_wrap(u),))


def cos(u) -> CoeffExpr:
    return CoeffExpr("cos", (_wrap(u),))


def exp(u) -> CoeffExpr:
    return CoeffExpr("exp", (_wrap(u),))


def sqrt(u) -> CoeffExpr:
    return CoeffExpr("sqrt", (_wrap(u),))


def _to_str(e: CoeffExpr) -> str:
    if e.op == "const":
        return repr(e.value)
    if e.op == "var":
        return "x"
    if e.op in _UNARY:
        return f"{e.op}({_to_str(e.args[0])})"
    if e.op == "pow":
        return f"({_to_str(e.args[0])})**{e.exponent}"
    sym = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[e.op]
    return "(" + sym.join(_to_str(a) for a in e.args) + ")"


def evaluate(e: CoeffExpr, x):
    """Pointwise value of ``e`` (numpy-vectorised)."""
    x = np.asarray(x, dtype=float)
    op = e.op
    if op == "const":
        return np.full_like(x, e.value) if x.ndim else float(e.value)
    if op == "var":
        return x if x.ndim else float(x)
    vals = [evaluate(a, x) for a in e.args]
    if op == "add":
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out
    if op == "mul":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if op == "sub":
        return vals[0] - vals[1]
    if op == "div":
        return vals[0] / vals[1]
    if op == "pow":
        return vals[0] ** float(e.exponent)
    return getattr(np, op)(vals[0])


def diff(e: CoeffExpr) -> CoeffExpr:
    """Derivative of ``e`` with respect to its variable."""
    op = e.op
    if op == "const":
        return const(0.0)
    if op == "var":
        return const(1.0)
    if op == "add":
        return CoeffExpr("add", tuple(diff(a) for a in e.args))
    if op == "sub":
        return CoeffExpr("sub", (diff(e.args[0]), diff(e.args[1])))
    if op == "mul":
        terms = []
        for k in range(len(e.args)):
            factors = list(e.args)
            factors[k] = diff(factors[k])
            terms.append(CoeffExpr("mul", tuple(factors)))
        return terms[0] if len(terms) == 1 else CoeffExpr("add", tuple(terms))
    if op == "div":
        u, v = e.args
        return (diff(u) * v - u * diff(v)) / v**2
    if op == "pow":
        u, n = e.args[0], e.exponent
        if n == 0:
            return const(0.0)
        return const(n) * u ** (n - 1) * diff(u)
    u = e.args[0]
    if op == "sin":
        return cos(u) * diff(u)
    if op == "cos":
        return -sin(u) * diff(u)
    if op == "exp":
        return exp(u) * diff(u)
    if op == "sqrt":
        return diff(u) / (2.0 * sqrt(u))
    raise ValueError(f"unknown op {op!r}")


# JSON ----------------------------------------------------------------------

def expr_to_json(e: CoeffExpr | None):
    if e is None:
        return None
    if e.op == "const":
        return {"op": "const", "value": e.value}
    if e.op == "var":
        return {"op": "var"}
    node = {"op": e.op, "args": [expr_to_json(a) for a in e.args]}
    if e.op == "pow":
        node["exponent"] = e.exponent
    return node


def expr_from_json(doc, path="$") -> CoeffExpr:
    if isinstance(doc, bool):
        raise SchemaError(path, "expected an expression node")
    if isinstance(doc, numbers.Real):
        return const(doc)
    if not isinstance(doc, dict) or "op" not in doc:
        raise SchemaError(path, "expected an expression node with an 'op' field")
    op = doc["op"]
    if op == "const":
        value = doc.get("value")
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise SchemaError(f"{path}.value", "expected a real number")
        return const(value)
    if op == "var":
        return var()
    args = doc.get("args")
    if not isinstance(args, list):
        raise SchemaError(f"{path}.args", "expected a list")
    kids = tuple(expr_from_json(a, f"{path}.args[{k}]") for k, a in enumerate(args))
    if op in _UNARY or op == "pow":
        if len(kids) != 1:
            raise SchemaError(f"{path}.args", f"'{op}' takes one argument")
    elif op in _BINARY:
        if len(kids) != 2:
            raise SchemaError(f"{path}.args", f"'{op}' takes two arguments")
    elif op in _NARY:
        if len(kids) < 1:
            raise SchemaError(f"{path}.args", f"'{op}' needs at least one argument")
    else:
        raise SchemaError(f"{path}.op", f"unknown operation {op!r}")
    if op == "pow":
        n = doc.get("exponent")
        if isinstance(n, bool) or not isinstance(n, numbers.Integral):
            raise SchemaError(f"{path}.exponent", "expected an integer")
        return CoeffExpr("pow", kids, exponent=int(n))
    return CoeffExpr(op, kids)


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniSeries:
    """Truncated series ``sum_i coeffs[i] * (x - center)**i``."""

    coeffs: np.ndarray
    center: float = 0.0
    order: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise OrderError("a series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "order", c.size - 1)

    def __add__(self, other):
        return series_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return series_sub(self, other)

    def __mul__(self, other):
        return series_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return series_div(self, other)

    def __neg__(self):
        return series_scale(self, -1.0)

    def __call__(self, x):
        return series_eval(self, x)

    def truncated(self, order):
        if order < 0:
            raise OrderError(f"order must be nonnegative, got {order}")
        c = np.zeros(order + 1)
        n = min(order, self.order) + 1
        c[:n] = self.coeffs[:n]
        return UniSeries(c, self.center)


def _check_pair(a, b):
    if not isinstance(b, UniSeries):
        b = UniSeries(np.r_[float(b), np.zeros(a.order)], a.center)
    if a.center != b.center:
        raise CenterMismatch(f"centers differ: {a.center} vs {b.center}")
    n = min(a.order, b.order)
    return a.coeffs[: n + 1], b.coeffs[: n + 1], b


def series_add(a: UniSeries, b) -> UniSeries:
    x, y, _ = _check_pair(a, b)
    return UniSeries(x + y, a.center)


def series_sub(a: UniSeries, b) -> UniSeries:
    x, y, _ = _check_pair(a, b)
    return UniSeries(x - y, a.center)


def series_scale(a: UniSeries, s: float) -> UniSeries:
    return UniSeries(a.coeffs * float(s), a.center)


def _cauchy(x, y):
    n = len(x)
    return np.convolve(x, y)[:n]


def _divide(x, y):
    if y[0] == 0.0:
        raise DivisionByZeroSeries("divisor has zero constant term")
    n = len(x)
    out = np.zeros(n)
    for k in range(n):
        out[k] = (x[k] - np.dot(out[:k], y[k:0:-1])) / y[0]
    return out


def series_mul(a: UniSeries, b) -> UniSeries:
    x, y, _ = _check_pair(a, b)
    return UniSeries(_cauchy(x, y), a.center)


def series_div(a: UniSeries, b) -> UniSeries:
    x, y, _ = _check_pair(a, b)
    return UniSeries(_divide(x, y), a.center)


def series_derivative(a: UniSeries) -> UniSeries:
    if a.order < 1:
        raise OrderError("derivative needs a series of order >= 1")
    k = np.arange(1, a.order + 1)
    return UniSeries(k * a.coeffs[1:], a.center)


def series_antiderivative(a: UniSeries, lower: float = 0.0) -> UniSeries:
    """Antiderivative vanishing at ``lower``.

    ``lower`` is measured in the shifted coordinate ``x - center``.
    """
    k = np.arange(1, a.order + 2)
    tail = a.coeffs / k
    lower = float(lower)
    c0 = 0.0 if lower == 0.0 else -_horner(np.r_[0.0, tail], lower)
    return UniSeries(np.r_[c0 + 0.0, tail], a.center)


def _horner(c, t):
    acc = 0.0 * t
    for v in c[::-1]:
        acc = acc * t + v
    return acc


def series_eval(a: UniSeries, x):
    return _horner(a.coeffs, np.asarray(x, dtype=float) - a.center)


def _affine_power_table(alpha, gamma, n):
    """Rows ``j`` hold the coefficients of ``(alpha*t + gamma)**j``, ``j <= n``."""
    table = np.zeros((n + 1, n + 1))
    table[0, 0] = 1.0
    for j in range(1, n + 1):
        table[j, 1:] = alpha * table[j - 1, :-1]
        table[j, :] += gamma * table[j - 1, :]
    return table


def series_compose_affine(a: UniSeries, alpha: float, gamma: float,
                          center: float = 0.0, order: int | None = None) -> UniSeries:
    """Coefficients of ``t -> a(alpha*t + gamma)`` with ``a`` in its own shifted
    coordinate; the result is tagged with ``center`` and truncated to ``order``."""
    order = a.order if order is None else order
    table = _affine_power_table(float(alpha), float(gamma), a.order)
    c = a.coeffs @ table
    out = np.zeros(order + 1)
    n = min(order, a.order) + 1
    out[:n] = c[:n]
    return UniSeries(out, center)


def series_shift(a: UniSeries, new_center: float) -> UniSeries:
    """Re-expand ``a`` about ``new_center`` (exact for polynomials)."""
    return series_compose_affine(a, 1.0, new_center - a.center, new_center)


# ---------------------------------------------------------------------------
# Taylor-mode expansion
# ---------------------------------------------------------------------------

def _exp_series(u):
    n = len(u)
    out = np.zeros(n)
    out[0] = math.exp(u[0])
    ku = np.arange(n) * u
    for k in range(1, n):
        out[k] = np.dot(ku[1 : k + 1], out[k - 1 :: -1][:k]) / k
    return out


def _sincos_series(u):
    n = len(u)
    s = np.zeros(n)
    c = np.zeros(n)
    s[0], c[0] = math.sin(u[0]), math.cos(u[0])
    ku = np.arange(n) * u
    for k in range(1, n):
        s[k] = np.dot(ku[1 : k + 1], c[k - 1 :: -1][:k]) / k
        c[k] = -np.dot(ku[1 : k + 1], s[k - 1 :: -1][:k]) / k
    return s, c


def _sqrt_series(u):
    if u[0] <= 0.0:
        raise DomainError(f"sqrt radicand is {u[0]!r} at the expansion point")
    n = len(u)
    r = np.zeros(n)
    r[0] = math.sqrt(u[0])
    for k in range(1, n):
        r[k] = (u[k] - np.dot(r[1:k], r[k - 1 : 0 : -1])) / (2.0 * r[0])
    return r


def _pow_series(u, p):
    if p < 0:
        if u[0] == 0.0:
            raise DomainError("negative power of an expression vanishing at the expansion point")
        return _divide(np.r_[1.0, np.zeros(len(u) - 1)], _pow_series(u, -p))
    out = np.r_[1.0, np.zeros(len(u) - 1)]
    base = u
    while p:
        if p & 1:
            out = _cauchy(out, base)
        p >>= 1
        if p:
            base = _cauchy(base, base)
    return out


def _expand(e: CoeffExpr, center, n, memo):
    key = id(e)
    if key in memo:
        return memo[key][1]
    op = e.op
    if op == "const":
        out = np.zeros(n + 1)
        out[0] = e.value
    elif op == "var":
        out = np.zeros(n + 1)
        out[0] = center
        if n >= 1:
            out[1] = 1.0
    else:
        kids = [_expand(a, center, n, memo) for a in e.args]
        if op == "add":
            out = np.sum(kids, axis=0)
        elif op == "sub":
            out = kids[0] - kids[1]
        elif op == "mul":
            out = kids[0]
            for k in kids[1:]:
                out = _cauchy(out, k)
        elif op == "div":
            if kids[1][0] == 0.0:
                raise DomainError(f"denominator of {_to_str(e)} vanishes at {center}")
            out = _divide(kids[0], kids[1])
        elif op == "pow":
            out = _pow_series(kids[0], e.exponent)
        elif op == "exp":
            out = _exp_series(kids[0])
        elif op in ("sin", "cos"):
            s, c = _sincos_series(kids[0])
            out = s if op == "sin" else c
        elif op == "sqrt":
            out = _sqrt_series(kids[0])
        else:
            raise ValueError(f"unknown op {op!r}")
    memo[key] = (e, out)
    return out


def expand(expr, center: float, order: int) -> UniSeries:
    """Taylor coefficients of ``expr`` about ``center`` up to ``order``."""
    if order < 0:
        raise OrderError(f"order must be nonnegative, got {order}")
    expr = _wrap(expr)
    coeffs = _expand(expr, float(center), int(order), {})
    if not np.all(np.isfinite(coeffs)):
        raise DomainError(f"{_to_str(expr)} is not analytic at {center}")
    return UniSeries(coeffs, center)
