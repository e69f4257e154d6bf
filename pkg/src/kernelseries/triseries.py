"""Truncated double power series on the triangular index set.

A kernel ``K(x, xi) ~ sum_{i<=N} sum_{j<=i} K_ij (x-x0)**(i-j) (xi-xi0)**j`` is
stored as a flat coefficient vector ``kappa`` in graded order
``[K00, K10, K11, K20, K21, K22, ...]``. Linear operators on the series
(derivatives, multiplication by a coefficient function, restriction to a
line) become sparse matrices acting on ``kappa`` from the right, i.e. the
coefficients of ``f(K)`` are ``kappa @ R``.

Index helpers :func:`idx_l` and :func:`idx_m` use the 1-based convention for
external reporting; internally everything is 0-based (``idx_m(i, j) - 1``).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._backend import get_kernels
from .errors import CenterMismatch, DimensionMismatch, OrderError
from .taylor import UniSeries

__all__ = [
    "idx_l", "idx_m", "TriSeries", "OpMatrix", "truncate", "evaluate",
    "build_dx", "build_dxi", "build_partial", "build_second_order",
    "build_mul_xi", "build_mul_x", "build_trace", "build_uni_derivative",
    "build_uni_mul", "build_truncation",
]


def idx_l(i: int) -> int:
    """Number of coefficients of a series of order ``i``."""
    if i < -1:
        raise ValueError(f"idx_l needs i >= -1, got {i}")
    return (i + 1) * (i + 2) // 2


def idx_m(i: int, j: int) -> int:
    """1-based position of ``K_ij`` in the coefficient vector."""
    if j < 0 or j > i:
        raise IndexError(f"no coefficient K_{i},{j}: need 0 <= j <= i")
    return idx_l(i - 1) + j + 1


def _m0(i, j):
    return i * (i + 1) // 2 + j


def degree_of(k: int) -> tuple[int, int]:
    """Inverse of the 0-based index map: ``k -> (i, j)``."""
    i = int((np.sqrt(8 * k + 1) - 1) // 2)
    while _m0(i + 1, 0) <= k:
        i += 1
    while _m0(i, 0) > k:
        i -= 1
    return i, k - _m0(i, 0)


@dataclass(frozen=True)
class TriSeries:
    """Truncated bivariate series about ``center = (x0, xi0)``."""

    coeffs: np.ndarray
    order: int
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if self.order < 0 or c.size != idx_l(self.order):
            raise DimensionMismatch(
                f"order {self.order} needs {idx_l(max(self.order, 0))} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @classmethod
    def zeros(cls, order, center=(0.0, 0.0)):
        return cls(np.zeros(idx_l(order)), order, center)

    @classmethod
    def from_terms(cls, terms: dict, order: int, center=(0.0, 0.0)):
        """Build from ``{(xpow, xipow): value}`` in shifted coordinates."""
        c = np.zeros(idx_l(order))
        for (a, b), v in terms.items():
            if a + b > order:
                continue
            c[_m0(a + b, b)] += v
        return cls(c, order, center)

    def coeff(self, i: int, j: int) -> float:
        return float(self.coeffs[idx_m(i, j) - 1])

    def __call__(self, x, xi):
        return evaluate(self, x, xi)

    def eval(self, x, xi):
        return evaluate(self, x, xi)

    def apply(self, op: "OpMatrix") -> np.ndarray:
        return op.apply(self.coeffs)

    def partial(self, p: int, q: int) -> "TriSeries":
        """Exact ``d^p/dx^p d^q/dxi^q`` as a series of order ``N - p - q``."""
        if p + q > self.order:
            return TriSeries.zeros(0, self.center)
        op = build_partial(self.order, p, q)
        return TriSeries(op.apply(self.coeffs), self.order - p - q, self.center)

    def to_csv_rows(self):
        rows = []
        for i in range(self.order + 1):
            for j in range(i + 1):
                rows.append((i, j, float(self.coeffs[_m0(i, j)])))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("i", "j", "K_ij"))
        for i, j, v in self.to_csv_rows():
            w.writerow((i, j, repr(v)))
        return buf.getvalue()


def truncate(s: TriSeries, r: int) -> TriSeries:
    if r < 0 or r > s.order:
        raise OrderError(f"cannot truncate order {s.order} series to {r}")
    return TriSeries(s.coeffs[: idx_l(r)], r, s.center)


def evaluate(s: TriSeries, x, xi, backend=None):
    """Evaluate ``s`` at points given in original coordinates."""
    xt = np.asarray(x, dtype=float) - s.center[0]
    xit = np.asarray(xi, dtype=float) - s.center[1]
    out = get_kernels(backend).tri_eval(s.coeffs, s.order, xt, xit)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class OpMatrix:
    """Sparse transformation matrix in row-vector orientation.

    ``matrix`` has shape ``(rows, cols)``; ``kappa @ matrix`` is the
    coefficient vector of the transformed series.
    """

    matrix: sp.csr_matrix
    kind: str
    meta: dict = field(default_factory=dict)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def apply(self, kappa) -> np.ndarray:
        kappa = np.asarray(kappa, dtype=float)
        if kappa.shape[-1] != self.rows:
            raise DimensionMismatch(f"vector of length {kappa.shape[-1]} vs {self.rows} rows")
        return np.asarray(self.matrix.T @ kappa)

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot compose {self.shape} with {other.shape}")
        return OpMatrix((self.matrix @ other.matrix).tocsr(), f"{self.kind}*{other.kind}")

    def __mul__(self, s: float) -> "OpMatrix":
        return OpMatrix((self.matrix * float(s)).tocsr(), self.kind, self.meta)

    __rmul__ = __mul__

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        return self.matrix.toarray()

    def triplets(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return list(zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist()))

    def to_csv(self) -> str:
        """Triplet dump using the 1-based paper indices."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("row", "col", "value"))
        for r, c, v in self.triplets():
            w.writerow((r + 1, c + 1, repr(v)))
        return buf.getvalue()


def _from_triplets(trip, shape, kind, meta=None):
    src, dst, val = trip
    m = sp.csr_matrix((val, (src, dst)), shape=shape)
    m.sum_duplicates()
    m.eliminate_zeros()
    return OpMatrix(m, kind, meta or {})


def build_partial(N: int, p: int, q: int, backend=None) -> OpMatrix:
    """``d^p/dx^p d^q/dxi^q`` mapping order ``N`` to order ``N - p - q``."""
    if p < 0 or q < 0 or N - p - q < 0:
        raise OrderError(f"cannot take a ({p}, {q}) derivative of an order-{N} series")
    trip = get_kernels(backend).partial_triplets(N, p, q)
    return _from_triplets(trip, (idx_l(N), idx_l(N - p - q)), f"d{p}{q}", {"p": p, "q": q})


def build_dx(N: int, backend=None) -> OpMatrix:
    """First ``x`` derivative as a square ``l(N) x l(N)`` matrix."""
    if N < 1:
        raise OrderError("build_dx needs N >= 1")
    trip = get_kernels(backend).partial_triplets(N, 1, 0)
    return _from_triplets(trip, (idx_l(N), idx_l(N)), "derivative-x")


def build_dxi(N: int, backend=None) -> OpMatrix:
    """First ``xi`` derivative as a square ``l(N) x l(N)`` matrix."""
    if N < 1:
        raise OrderError("build_dxi needs N >= 1")
    trip = get_kernels(backend).partial_triplets(N, 0, 1)
    return _from_triplets(trip, (idx_l(N), idx_l(N)), "derivative-xi")


def build_second_order(N: int, which: str, backend=None) -> OpMatrix:
    if N < 2:
        raise OrderError("second-order derivatives need N >= 2")
    pq = {"xx": (2, 0), "xixi": (0, 2), "xxi": (1, 1)}
    if which not in pq:
        raise ValueError(f"which must be one of {sorted(pq)}")
    op = build_partial(N, *pq[which], backend=backend)
    return OpMatrix(op.matrix, f"derivative-{which}", op.meta)


def _check_uni(series: UniSeries, center, out_order):
    if center is not None and series.center != float(center):
        raise CenterMismatch(f"series centered at {series.center}, kernel at {center}")
    if series.order < out_order:
        raise OrderError(f"coefficient series of order {series.order} < {out_order}")


def build_mul_xi(lam: UniSeries, N: int, out_order: int, center=None, backend=None) -> OpMatrix:
    """Multiplication by ``lam(xi)`` followed by truncation to ``out_order``.

    ``center`` is the kernel's ``xi`` expansion point, checked against ``lam``.
    """
    if out_order > N or out_order < 0:
        raise OrderError(f"out_order {out_order} outside [0, {N}]")
    _check_uni(lam, center, out_order)
    c = np.ascontiguousarray(lam.coeffs[: out_order + 1])
    trip = get_kernels(backend).mul_xi_triplets(c, N, out_order)
    return _from_triplets(trip, (idx_l(N), idx_l(out_order)), "mul-xi")


def build_mul_x(a: UniSeries, N: int, out_order: int, center=None, backend=None) -> OpMatrix:
    """Multiplication by ``a(x)`` followed by truncation to ``out_order``."""
    if out_order > N or out_order < 0:
        raise OrderError(f"out_order {out_order} outside [0, {N}]")
    _check_uni(a, center, out_order)
    c = np.ascontiguousarray(a.coeffs[: out_order + 1])
    trip = get_kernels(backend).mul_x_triplets(c, N, out_order)
    return _from_triplets(trip, (idx_l(N), idx_l(out_order)), "mul-x")


def build_truncation(N: int, r: int) -> OpMatrix:
    if r < 0 or r > N:
        raise OrderError(f"cannot truncate order {N} to {r}")
    n = idx_l(r)
    m = sp.eye(idx_l(N), n, format="csr")
    return OpMatrix(m, "truncate")


def build_trace(alpha: float, gamma: float, N: int, backend=None) -> OpMatrix:
    """Restriction to the line ``xi = alpha*x + gamma`` (shifted coordinates).

    Columns are the coefficients of ``x**0 .. x**N`` of ``K(x, alpha*x + gamma)``.
    """
    if N < 0:
        raise OrderError("build_trace needs N >= 0")
    trip = get_kernels(backend).trace_triplets(float(alpha), float(gamma), N)
    return _from_triplets(trip, (idx_l(N), N + 1), "trace",
                          {"alpha": float(alpha), "gamma": float(gamma)})


def build_uni_derivative(N: int) -> OpMatrix:
    """``d/dx`` on an ``(N+1)``-long univariate coefficient vector."""
    if N < 1:
        raise OrderError("build_uni_derivative needs N >= 1")
    k = np.arange(1, N + 1)
    m = sp.csr_matrix((k.astype(float), (k, k - 1)), shape=(N + 1, N + 1))
    return OpMatrix(m, "uni-derivative")


def build_uni_mul(c: UniSeries, N: int, out_order: int) -> OpMatrix:
    """Multiplication of a degree-``N`` univariate polynomial by ``c``, truncated."""
    if out_order > N or out_order < 0:
        raise OrderError(f"out_order {out_order} outside [0, {N}]")
    if c.order < out_order:
        raise OrderError(f"coefficient series of order {c.order} < {out_order}")
    src, dst, val = [], [], []
    for q in range(out_order + 1):
        if c.coeffs[q] == 0.0:
            continue
        s = np.arange(0, out_order - q + 1)
        src.append(s)
        dst.append(s + q)
        val.append(np.full(s.size, c.coeffs[q]))
    if src:
        trip = (np.concatenate(src), np.concatenate(dst), np.concatenate(val))
    else:
        trip = (np.zeros(0, int), np.zeros(0, int), np.zeros(0))
    return _from_triplets(trip, (N + 1, out_order + 1), "uni-mul")
