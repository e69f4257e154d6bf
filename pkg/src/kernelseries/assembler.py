"""Assemble, solve and check the coefficient system of a kernel problem.

Every PDE constraint with highest derivative order ``d`` contributes the
``l(N - d)`` coefficients of its truncated left-hand side; every boundary
constraint contributes the ``N + 1 - t`` coefficients (``t`` the trace
derivative order) of its trace polynomial. Independent kernel groups are
assembled and solved separately, each with its own truncation order.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from fractions import Fraction
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import linsys
from .errors import KernelSeriesError, OrderError, ValidationError
from .problem import (BoundaryConstraint, IntegralRhs, KernelProblem, PdeConstraint, TraceTerm,
                      kernel_groups, resolve_orders, validate_problem)
from .taylor import (UniSeries, evaluate as expr_eval, expand, series_antiderivative,
                     series_compose_affine)
from .triseries import (TriSeries, build_mul_x, build_mul_xi, build_partial, build_trace,
                        build_truncation, build_uni_derivative, build_uni_mul, idx_l)

log = logging.getLogger(__name__)

__all__ = [
    "assemble", "assemble_group", "solve_problem", "report_from_series", "SolveReport",
    "KernelSolution",
    "residual_grid", "recursion_oracle_ex1", "divergence_diagnostic", "gain",
    "SweepSpec", "SweepParam", "sweep",
]


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

class _Expander:
    """Memoised Taylor expansion of coefficient expressions."""

    def __init__(self):
        self._memo = {}

    def __call__(self, expr, center, order) -> UniSeries:
        key = (id(expr), float(center), int(order))
        hit = self._memo.get(key)
        if hit is None:
            hit = (expr, expand(expr, center, order))
            self._memo[key] = hit
        return hit[1]


@dataclass
class GroupLayout:
    """Column layout of one kernel group: ``slots[(kernel, region)] -> block``."""

    kernels: tuple
    split: bool
    order: int
    slots: dict

    @property
    def n_unknowns(self):
        return len(self.slots) * idx_l(self.order)

    def offset(self, kernel, region=None):
        return self.slots[(kernel, region if self.split else None)] * idx_l(self.order)


def _layout(kernels, split, order):
    if split:
        slots = {(k, r): n for n, (r, k) in enumerate(itertools.product("ab", kernels))}
    else:
        slots = {(k, None): n for n, k in enumerate(kernels)}
    return GroupLayout(tuple(kernels), split, order, slots)


def _place(blocks, n_rows, n_unknowns):
    """Stack per-kernel row blocks (``(offset, csr)``) into one row block."""
    if not blocks:
        return sp.csr_matrix((n_rows, n_unknowns))
    rows, cols, vals = [], [], []
    for off, m in blocks:
        coo = m.tocoo()
        rows.append(coo.row)
        cols.append(coo.col + off)
        vals.append(coo.data)
    out = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n_rows, n_unknowns))
    out.sum_duplicates()
    out.eliminate_zeros()
    return out


def _const_value(e):
    return 1.0 if e is None else (e.value if e.is_const() else None)


def pde_rows(pde: PdeConstraint, N, center, offset_of, n_unknowns, expander=None):
    """Coefficient rows of a PDE constraint: ``(A_block, rhs, out_order)``."""
    expander = expander or _Expander()
    out = N - pde.order
    if out < 0:
        return sp.csr_matrix((0, n_unknowns)), np.zeros(0), out
    cx, cxi = center
    blocks = []
    for t in pde.terms:
        p_, q_ = t.deriv
        m = N - p_ - q_
        op = build_partial(N, p_, q_)
        scale = t.weight
        b = _const_value(t.b)
        if b is None:
            op = op @ build_mul_xi(expander(t.b, cxi, out), m, out, center=cxi)
        else:
            scale *= b
            op = op @ build_truncation(m, out)
        a = _const_value(t.a)
        if a is None:
            op = op @ build_mul_x(expander(t.a, cx, out), out, out, center=cx)
        else:
            scale *= a
        blocks.append((offset_of(t.kernel), (op.matrix.T * scale).tocsr()))
    return _place(blocks, idx_l(out), n_unknowns), np.zeros(idx_l(out)), out


def bc_rows(bc: BoundaryConstraint, N, center, offset_of, n_unknowns, expander=None):
    """Coefficient rows of a boundary constraint: ``(A_block, rhs, out_order)``."""
    expander = expander or _Expander()
    out = N - bc.trace_order
    if out < 0:
        return sp.csr_matrix((0, n_unknowns)), np.zeros(0), out
    cx, cxi = center
    alpha, gamma = bc.line.alpha, bc.line.gamma
    trace = build_trace(alpha, gamma, N)
    blocks = []
    for t in bc.terms:
        op = trace
        if t.trace_deriv:
            op = op @ build_uni_derivative(N)
        c = _const_value(t.c)
        if c is None:
            mat = (op @ build_uni_mul(expander(t.c, cx, out), N, out)).matrix
            c = 1.0
        else:
            mat = op.matrix[:, : out + 1]
        blocks.append((offset_of(t.kernel), (mat.T * c).tocsr()))
    rhs = bc.rhs
    if rhs is None:
        b = np.zeros(out + 1)
    elif isinstance(rhs, IntegralRhs):
        f = expander(rhs.integrand, cxi, N)
        prim = series_antiderivative(f, rhs.lower)
        b = series_compose_affine(prim, alpha, gamma, cx, out).coeffs * rhs.scale
    else:
        b = np.array(expander(rhs, cx, out).coeffs)
    return _place(blocks, out + 1, n_unknowns), b + 0.0, out


def _group_constraints(p: KernelProblem, layout: GroupLayout):
    """``(label, constraint, offset_of)`` for every constraint of a group."""
    ks = set(layout.kernels)
    if not layout.split:
        off = layout.offset
        for n, c in enumerate(p.pdes):
            if c.kernels & ks:
                yield f"pde[{n}]", c, off, None
        for n, c in enumerate(p.bcs):
            if c.kernels & ks:
                yield f"bc[{n}]", c, off, None
        return
    s = p.split
    for region, reg in (("a", s.region_a), ("b", s.region_b)):
        off = (lambda r: (lambda k: layout.offset(k, r)))(region)
        for n, c in enumerate(reg.pdes):
            yield f"{region}.pde[{n}]", c, off, region
        for n, c in enumerate(reg.bcs):
            yield f"{region}.bc[{n}]", c, off, region
    for n, m in enumerate(s.matching):
        # the two traces live in different regions: kernels are keyed (kernel, region)
        bc = BoundaryConstraint(m.line, (TraceTerm((m.kernel_b, "b")),
                                         TraceTerm((m.kernel_a, "a"), -1.0)), m.jump)
        yield f"match[{n}]", bc, (lambda key: layout.offset(*key)), "match"


def assemble_group(p: KernelProblem, kernels, order, expander=None):
    """Assemble one kernel group; returns ``(system, layout)`` before dedup."""
    expander = expander or _Expander()
    split = p.split is not None and bool(set(kernels) & set(p.split.kernels))
    layout = _layout(kernels, split, order)
    system = linsys.SparseSystem(layout.n_unknowns)
    for label, con, off, _ in _group_constraints(p, layout):
        if isinstance(con, PdeConstraint):
            a, b, _ = pde_rows(con, order, p.center, off, layout.n_unknowns, expander)
        else:
            a, b, _ = bc_rows(con, order, p.center, off, layout.n_unknowns, expander)
        system = linsys.append_block(system, a, b, label)
    return system, layout


def _check(p, order, group_orders):
    rep = validate_problem(p, order, group_orders)
    if not rep.ok:
        raise ValidationError("; ".join(rep.errors))
    for w in rep.warnings:
        log.warning(w)
    return rep


def assemble(p: KernelProblem, order=None, group_orders=None, finalize=True) -> linsys.SparseSystem:
    """Assembled (and by default deduplicated) system for the whole problem.

    Independent kernel groups occupy disjoint column blocks.
    """
    _check(p, order, group_orders)
    orders = resolve_orders(p, order, group_orders)
    expander = _Expander()
    systems = []
    for g in kernel_groups(p):
        s, _ = assemble_group(p, g, orders[g], expander)
        systems.append(linsys.finalize(s) if finalize else s)
    if len(systems) == 1:
        return systems[0]
    matrix = sp.block_diag([s.matrix for s in systems], format="csr")
    return linsys.SparseSystem(
        matrix.shape[1], matrix, np.concatenate([s.rhs for s in systems]),
        [t for s in systems for t in s.tags], [r for s in systems for r in s.removed])


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

@dataclass
class KernelSolution:
    kernel: int
    region: str | None
    series: TriSeries

    @property
    def label(self):
        return f"K{self.kernel}" + (f"/{self.region}" if self.region else "")


@dataclass
class GroupSolution:
    kernels: tuple
    split: bool
    order: int
    system: linsys.SparseSystem
    result: linsys.SolveResult
    layout: GroupLayout
    sparsity: float


@dataclass
class SolveReport:
    kernels: list
    residual_linear: float
    sparsity: float
    rank_deficient: bool
    rows_removed: int
    wall_time: float
    orders: dict
    groups: list = field(default_factory=list)
    residual_grid: dict = field(default_factory=dict)
    divergence: dict = field(default_factory=dict)
    domain_length: float | None = None
    split_beta: float | None = None

    def kernel(self, k, region=None) -> TriSeries:
        for s in self.kernels:
            if s.kernel == k and s.region == region:
                return s.series
        raise KeyError((k, region))

    @property
    def coefficient_scale(self) -> float:
        return max([1.0] + [float(np.abs(s.series.coeffs).max()) for s in self.kernels])

    def to_dict(self, include_time=False):
        doc = {
            "orders": {",".join(map(str, g)): n for g, n in self.orders.items()},
            "residual_linear": self.residual_linear,
            "sparsity": self.sparsity,
            "rank_deficient": self.rank_deficient,
            "rows_removed": self.rows_removed,
            "groups": [{
                "kernels": list(g.kernels), "split": g.split, "order": g.order,
                "rows": g.system.n_rows, "unknowns": g.system.n_unknowns,
                "nnz": g.system.nnz, "sparsity": g.sparsity,
                "residual_linear": g.result.residual_norm, "method": g.result.method,
                "rank": g.result.rank, "rank_deficient": g.result.rank_deficient,
                "removed_rows": [{"kind": r[0], "row": r[1], "tag": r[2]} for r in g.system.removed],
            } for g in self.groups],
            "residual_grid": self.residual_grid,
            "divergence": self.divergence,
            "kernels": [{"kernel": s.kernel, "region": s.region, "order": s.series.order,
                         "center": list(s.series.center)} for s in self.kernels],
        }
        if include_time:
            doc["wall_time"] = self.wall_time
        return doc


def solve_problem(p: KernelProblem, order=None, group_orders=None, grid_n=201,
                  tol=linsys.DEFAULT_TOL) -> SolveReport:
    """Assemble and solve every kernel group, then fill residual diagnostics.

    ``grid_n=None`` skips the grid residuals. ``wall_time`` covers assembly
    and solve only.
    """
    _check(p, order, group_orders)
    orders = resolve_orders(p, order, group_orders)
    expander = _Expander()
    t0 = time.perf_counter()
    groups, kernels = [], []
    for g in kernel_groups(p):
        n = orders[g]
        system, layout = assemble_group(p, g, n, expander)
        system = linsys.finalize(system)
        try:
            result = linsys.solve(system, tol)
        except linsys.SingularSystem as exc:
            raise linsys.SingularSystem(f"kernels {list(g)}: {exc}", exc.tags) from None
        groups.append(GroupSolution(g, layout.split, n, system, result, layout,
                                    linsys.sparsity(system)))
        size = idx_l(n)
        for (k, region), slot in sorted(layout.slots.items(), key=lambda kv: kv[1]):
            coeffs = result.coeffs[slot * size : (slot + 1) * size]
            kernels.append(KernelSolution(k, region, TriSeries(coeffs, n, p.center)))
    wall = time.perf_counter() - t0
    kernels.sort(key=lambda s: (s.kernel, s.region or ""))
    nnz = sum(g.system.nnz for g in groups)
    cells = sum(g.system.n_rows * g.system.n_unknowns for g in groups)
    report = SolveReport(
        kernels=kernels,
        residual_linear=max((g.result.residual_norm for g in groups), default=0.0),
        sparsity=1.0 - nnz / cells if cells else 0.0,
        rank_deficient=any(g.result.rank_deficient for g in groups),
        rows_removed=sum(len(g.system.removed) for g in groups),
        wall_time=wall,
        orders=orders,
        groups=groups,
        domain_length=p.domain_length,
        split_beta=p.split.beta if p.split is not None else None,
    )
    for s in kernels:
        if s.series.order >= 10:
            report.divergence[s.label] = divergence_diagnostic(s.series, p.domain_length)
    if grid_n:
        report.residual_grid = residual_grid(report, p, grid_n)
    return report


def report_from_series(p: KernelProblem, series: dict) -> SolveReport:
    """Rebuild a report around given kernels, keyed ``(kernel, region)``.

    Used to check coefficients loaded from disk against a problem; each kernel
    group takes the order of its series, and the linear residual is that of
    the reassembled system.
    """
    expander = _Expander()
    groups, kernels = [], []
    orders = {}
    for g in kernel_groups(p):
        split = p.split is not None and bool(set(g) & set(p.split.kernels))
        keys = [(k, r) for r in (("a", "b") if split else (None,)) for k in g]
        missing = [key for key in keys if key not in series]
        if missing:
            raise ValueError(f"no coefficients for kernel(s) {missing}")
        ns = {series[key].order for key in keys}
        if len(ns) != 1:
            raise ValueError(f"kernels of group {list(g)} have different orders {sorted(ns)}")
        n = ns.pop()
        orders[g] = n
        system, layout = assemble_group(p, g, n, expander)
        system = linsys.finalize(system)
        coeffs = np.concatenate([series[key].coeffs for key, _ in
                                 sorted(layout.slots.items(), key=lambda kv: kv[1])])
        res = float(np.linalg.norm(system.matrix @ coeffs - system.rhs)
                    / max(np.linalg.norm(system.rhs), 1.0))
        result = linsys.SolveResult(coeffs, res, False, "loaded", None)
        groups.append(GroupSolution(g, split, n, system, result, layout, linsys.sparsity(system)))
        kernels += [KernelSolution(k, r if split else None, series[(k, r)]) for k, r in keys]
    kernels.sort(key=lambda s: (s.kernel, s.region or ""))
    return SolveReport(
        kernels=kernels,
        residual_linear=max((g.result.residual_norm for g in groups), default=0.0),
        sparsity=0.0, rank_deficient=False,
        rows_removed=sum(len(g.system.removed) for g in groups),
        wall_time=0.0, orders=orders, groups=groups,
        domain_length=p.domain_length,
        split_beta=p.split.beta if p.split is not None else None,
    )


# ---------------------------------------------------------------------------
# grid residuals
# ---------------------------------------------------------------------------

def _region_grid(L, grid_n, region, beta):
    x = np.linspace(0.0, L, grid_n)
    s = np.linspace(0.0, 1.0, grid_n)
    xx, ss = np.meshgrid(x, s, indexing="ij")
    if region == "a":
        xi = ss * beta * xx
    elif region == "b":
        xi = beta * xx + ss * (1.0 - beta) * xx
    else:
        xi = ss * xx
    return xx.ravel(), xi.ravel()


def _value(expr, pts):
    if expr is None:
        return 1.0
    return expr_eval(expr, pts)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _integral(expr, lo, hi):
    """Vectorised Gauss-Legendre quadrature of an analytic integrand."""
    lo, hi = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[..., None] + half[..., None] * _GL_NODES
    return half * (np.asarray(expr_eval(expr, pts)) * _GL_WEIGHTS).sum(axis=-1)


def _derivs_cache(series_of):
    cache = {}

    def get(key, p_, q_):
        if (key, p_, q_) not in cache:
            cache[(key, p_, q_)] = series_of(key).partial(p_, q_)
        return cache[(key, p_, q_)]

    return get


def residual_grid(report: SolveReport, p: KernelProblem, grid_n: int = 201) -> dict:
    """Max absolute residual of every constraint on a grid.

    ``band`` evaluates only the enforced coefficients (total degree up to
    ``N - d``); ``full`` plugs the truncated kernels into the exact equations.
    """
    out = {}
    L = p.domain_length
    cx, cxi = p.center
    beta = p.split.beta if p.split is not None else None
    x_line = np.linspace(0.0, L, grid_n)
    for g in report.groups:
        layout, n = g.layout, g.order
        kappa = g.result.coeffs

        def series_of(key, _g=g):
            k, region = key
            return report.kernel(k, region if _g.split else None)

        deriv = _derivs_cache(series_of)
        for label, con, off, region in _group_constraints(p, layout):
            if isinstance(con, PdeConstraint):
                a, b, out_order = pde_rows(con, n, p.center, off, layout.n_unknowns)
                if out_order < 0:
                    continue
                xs, xis = _region_grid(L, grid_n, region, beta)
                band = TriSeries(a @ kappa - b, out_order, p.center)(xs, xis)
                full = np.zeros_like(xs)
                for t in con.terms:
                    d = deriv((t.kernel, region), *t.deriv)
                    full = full + t.weight * _value(t.a, xs) * _value(t.b, xis) * d(xs, xis)
            else:
                a, b, out_order = bc_rows(con, n, p.center, off, layout.n_unknowns)
                if out_order < 0:
                    continue
                xt = x_line - cx
                band = UniSeries(a @ kappa - b, cx)(x_line)
                alpha, gamma = con.line.alpha, con.line.gamma
                xis = alpha * xt + gamma + cxi
                lhs = np.zeros_like(x_line)
                for t in con.terms:
                    key = t.kernel if isinstance(t.kernel, tuple) else (t.kernel, region)
                    if t.trace_deriv:
                        val = (deriv(key, 1, 0)(x_line, xis) + alpha * deriv(key, 0, 1)(x_line, xis))
                    else:
                        val = deriv(key, 0, 0)(x_line, xis)
                    lhs = lhs + _value(t.c, x_line) * val
                rhs = con.rhs
                if rhs is None:
                    target = 0.0
                elif isinstance(rhs, IntegralRhs):
                    target = rhs.scale * _integral(rhs.integrand, rhs.lower + cxi, xis)
                else:
                    target = _value(rhs, x_line)
                full = lhs - target
            out[label] = {"band": float(np.max(np.abs(band))), "full": float(np.max(np.abs(full)))}
    return out


# ---------------------------------------------------------------------------
# independent recursion for the constant-diffusion reaction kernel
# ---------------------------------------------------------------------------

def recursion_oracle_ex1(lam, N: int, exact: bool = False) -> np.ndarray:
    """Coefficients of the reaction-diffusion kernel by degree-wise back-substitution.

    ``lam`` holds the Maclaurin coefficients of ``(lambda(xi) + c) / eps`` and
    must reach order ``N - 1``. Solves ``K_xx - K_xixi = lam(xi) K``,
    ``K(x, x) = -1/2 int_0^x lam``, ``K(x, 0) = 0`` without any matrices:
    at degree ``i`` the even-``j`` chain follows from ``K_i0 = 0`` and the odd
    chain is linear in ``K_i1``, which the diagonal condition fixes.
    """
    if isinstance(lam, UniSeries):
        if lam.center != 0.0:
            raise ValueError("the recursion oracle needs an origin-centred series")
        lam = lam.coeffs
    num = Fraction if exact else float
    lam = [num(float(v)) for v in lam]
    if N >= 1 and len(lam) < N:
        raise OrderError(f"need lambda coefficients up to order {N - 1}")
    K = {}

    def B(i, j):  # coefficient (i, j) of lam(xi) * K
        return sum(K[(i - q, j - q)] * lam[q] for q in range(j + 1))

    for i in range(N + 1):
        K[(i, 0)] = num(0)
        if i == 0:
            continue
        # even chain from K_i0 = 0
        for j in range(0, i - 1, 2):
            K[(i, j + 2)] = ((i - j) * (i - j - 1) * K[(i, j)] - B(i - 2, j)) / ((j + 2) * (j + 1))
        # odd chain: K_i,(2m+1) = slope_m * t + shift_m with t = K_i1
        slope, shift = {1: num(1)}, {1: num(0)}
        for j in range(1, i - 1, 2):
            f = num((i - j) * (i - j - 1)) / ((j + 2) * (j + 1))
            slope[j + 2] = f * slope[j]
            shift[j + 2] = f * shift[j] - B(i - 2, j) / ((j + 2) * (j + 1))
        target = -lam[i - 1] / (2 * i)
        even_sum = sum(K[(i, j)] for j in range(0, i + 1, 2))
        t = (target - even_sum - sum(shift.values())) / sum(slope.values())
        for j in slope:
            K[(i, j)] = slope[j] * t + shift[j]
    out = np.zeros(idx_l(N))
    for (i, j), v in K.items():
        out[i * (i + 1) // 2 + j] = float(v)
    return out


# ---------------------------------------------------------------------------
# divergence heuristic
# ---------------------------------------------------------------------------

def divergence_diagnostic(s: TriSeries, L: float) -> dict:
    """Root-test style growth estimate of the coefficients.

    Fits ``log max_j |K_ij|`` against ``i`` over the top half of the degrees;
    the exponentiated slope is the growth rate. The series is flagged when the
    growth rate times the farthest reach of the triangle from the expansion
    point exceeds one. Advisory only.
    """
    if s.order < 10:
        raise OrderError("divergence diagnostic needs order >= 10")
    degs, logs = [], []
    for i in range(s.order // 2, s.order + 1):
        m = float(np.abs(s.coeffs[i * (i + 1) // 2 : (i + 1) * (i + 2) // 2]).max())
        if m > 0.0:
            degs.append(i)
            logs.append(math.log(m))
    if len(degs) < 2:
        rate = 0.0
    else:
        slope = np.polyfit(degs, logs, 1)[0]
        rate = float(math.exp(slope))
    x0, xi0 = s.center
    reach = max(abs(x0), abs(L - x0), abs(xi0), abs(L - xi0))
    return {"growth_rate": rate, "reach": reach, "flag": bool(rate * reach > 1.0)}


def gain(s: TriSeries, L: float, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """``(xi, K(L, xi))`` on a uniform grid of ``[0, L]``."""
    xi = np.linspace(0.0, L, n_points)
    return xi, np.asarray(s(np.full_like(xi, L), xi))


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepParam:
    name: str
    low: float
    high: float
    samples: int = 1


@dataclass
class SweepSpec:
    """Family of problems produced by ``builder(**base_args, **sample)``."""

    builder: object
    base_args: dict
    params: list
    order: int | None = None
    mode: str = "grid"
    seed: int = 0
    samples: int | None = None
    out_dir: str | None = None
    grid_n: int | None = 51
    workers: int = 1
    group_orders: dict | None = None

    def __post_init__(self):
        if not self.params:
            raise ValueError("a sweep needs at least one parameter")
        if self.mode not in ("grid", "random"):
            raise ValueError("mode must be 'grid' or 'random'")
        for prm in self.params:
            if prm.samples < 1:
                raise ValueError(f"parameter {prm.name!r} needs at least one sample")

    def n_samples(self) -> int:
        if self.mode == "grid":
            return math.prod(prm.samples for prm in self.params)
        return int(self.samples if self.samples is not None else self.params[0].samples)

    def sample(self, k: int) -> dict:
        """Parameter values of sample ``k``, reproducible in isolation."""
        if self.mode == "grid":
            sizes = [prm.samples for prm in self.params]
            idx = np.unravel_index(k, sizes)
            out = {}
            for prm, i in zip(self.params, idx):
                grid = np.linspace(prm.low, prm.high, prm.samples)
                out[prm.name] = float(grid[i])
            return out
        rng = np.random.default_rng(np.random.SeedSequence([int(self.seed), int(k)]))
        return {prm.name: float(rng.uniform(prm.low, prm.high)) for prm in self.params}


def _run_sample(spec: SweepSpec, k: int) -> dict:
    values = spec.sample(k)
    record = {"index": k, "params": values}
    try:
        problem = spec.builder(**{**spec.base_args, **values})
        report = solve_problem(problem, spec.order, spec.group_orders, grid_n=spec.grid_n)
    except (KernelSeriesError, ValueError, ArithmeticError) as exc:
        record.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return record
    record.update(
        status="ok",
        residual_linear=report.residual_linear,
        sparsity=report.sparsity,
        rank_deficient=report.rank_deficient,
        residual_grid_max={"band": max((v["band"] for v in report.residual_grid.values()), default=0.0),
                           "full": max((v["full"] for v in report.residual_grid.values()), default=0.0)},
        kernels=[{"kernel": s.kernel, "region": s.region, "order": s.series.order,
                  "coeffs": s.series.coeffs.tolist()} for s in report.kernels],
    )
    record["_report"] = report
    return record


def sweep(spec: SweepSpec) -> list[dict]:
    """Solve every sample; records come back (and are written) in sample order.

    Failed samples carry ``status="error"`` and the error text. When
    ``out_dir`` is set, writes ``dataset.jsonl`` plus one coefficient CSV per
    successful sample.
    """
    n = spec.n_samples()
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_run_sample, itertools.repeat(spec, n), range(n)))
    else:
        records = [_run_sample(spec, k) for k in range(n)]
    if spec.out_dir is not None:
        from .outputs import write_coefficients_csv, write_jsonl

        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec in records:
            if rec["status"] == "ok":
                name = f"sample_{rec['index']:05d}.csv"
                write_coefficients_csv(out / name, rec["_report"])
                rec["coeffs_file"] = name
        write_jsonl(out / "dataset.jsonl", [{k: v for k, v in r.items() if k != "_report"}
                                            for r in records])
    return records
