"""Declarative description of coupled kernel PDEs on the triangle.

A :class:`KernelProblem` lists linear PDE constraints (sums of terms
``weight * a(x) * b(xi) * d^p/dx^p d^q/dxi^q K_k``) and boundary constraints
posed along straight lines ``xi = alpha*x + gamma``. Lines, integral limits and
series are all expressed in coordinates shifted by the problem's ``center``;
:func:`localize` moves the center and rewrites the lines accordingly.

A problem may additionally split a group of kernels across the characteristic
line ``xi = beta*x``; each side gets its own series and the two are tied
together by matching conditions along the line.
"""
from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, SchemaError
from .taylor import CoeffExpr, as_expr, expand, expr_from_json, expr_to_json
from .triseries import idx_l

__all__ = [
    "PdeTerm", "PdeConstraint", "Line", "TraceTerm", "IntegralRhs",
    "BoundaryConstraint", "MatchingConstraint", "Region", "Split", "KernelProblem",
    "localize", "validate_problem", "ValidationReport", "kernel_groups",
    "parse_problem", "serialize_problem", "problem_to_dict", "problem_from_dict",
]


def _expr_or_none(e):
    return None if e is None else as_expr(e)


@dataclass(frozen=True)
class PdeTerm:
    """``weight * a(x) * b(xi) * d^p/dx^p d^q/dxi^q K_kernel``."""

    kernel: int
    deriv: tuple = (0, 0)
    weight: float = 1.0
    a: CoeffExpr | None = None
    b: CoeffExpr | None = None

    def __post_init__(self):
        object.__setattr__(self, "deriv", tuple(int(v) for v in self.deriv))
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "a", _expr_or_none(self.a))
        object.__setattr__(self, "b", _expr_or_none(self.b))

    @property
    def total_order(self):
        return sum(self.deriv)


@dataclass(frozen=True)
class PdeConstraint:
    """``sum(terms) = 0`` on the (sub)triangle."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def order(self) -> int:
        return max((t.total_order for t in self.terms), default=0)

    @property
    def kernels(self):
        return {t.kernel for t in self.terms}


@dataclass(frozen=True)
class Line:
    """``xi = alpha * x + gamma`` in shifted coordinates."""

    alpha: float
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gamma", float(self.gamma))

    def shifted(self, x0, xi0) -> "Line":
        return Line(self.alpha, self.alpha * x0 + self.gamma - xi0)


@dataclass(frozen=True)
class TraceTerm:
    """``c(x) * (d/dx)^trace_deriv K_kernel(x, alpha*x + gamma)``."""

    kernel: int
    c: CoeffExpr | None = None
    trace_deriv: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c", _expr_or_none(self.c))
        object.__setattr__(self, "trace_deriv", int(self.trace_deriv))


@dataclass(frozen=True)
class IntegralRhs:
    """``scale * integral_{lower}^{xi(x)} integrand(s) ds`` along the line.

    ``lower`` is in the shifted ``xi`` coordinate; the integrand is a
    function of the original ``xi``.
    """

    integrand: CoeffExpr
    lower: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "integrand", as_expr(self.integrand))
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "scale", float(self.scale))


@dataclass(frozen=True)
class BoundaryConstraint:
    line: Line
    terms: tuple
    rhs: CoeffExpr | IntegralRhs | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.rhs is not None and not isinstance(self.rhs, IntegralRhs):
            object.__setattr__(self, "rhs", as_expr(self.rhs))

    @property
    def kernels(self):
        return {t.kernel for t in self.terms}

    @property
    def trace_order(self) -> int:
        return max((t.trace_deriv for t in self.terms), default=0)


@dataclass(frozen=True)
class MatchingConstraint:
    """``K_kernel_b - K_kernel_a = jump(x)`` along ``line``."""

    line: Line
    kernel_a: int
    kernel_b: int
    jump: CoeffExpr | None = None

    def __post_init__(self):
        object.__setattr__(self, "jump", _expr_or_none(self.jump))

    def as_boundary(self, offset_a: int, offset_b: int) -> BoundaryConstraint:
        return BoundaryConstraint(
            self.line,
            (TraceTerm(self.kernel_b + offset_b), TraceTerm(self.kernel_a + offset_a, -1.0)),
            self.jump,
        )


@dataclass(frozen=True)
class Region:
    pdes: tuple = ()
    bcs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pdes", tuple(self.pdes))
        object.__setattr__(self, "bcs", tuple(self.bcs))


@dataclass(frozen=True)
class Split:
    """Two-region treatment of ``kernels`` across ``xi = beta*x``.

    Region ``a`` is the wedge below the line (``0 <= xi <= beta*x``), region
    ``b`` the wedge above it.
    """

    beta: float
    kernels: tuple
    region_a: Region
    region_b: Region
    matching: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "kernels", tuple(int(k) for k in self.kernels))
        object.__setattr__(self, "matching", tuple(self.matching))


@dataclass(frozen=True)
class KernelProblem:
    n_kernels: int
    domain_length: float
    center: tuple = (0.0, 0.0)
    pdes: tuple = ()
    bcs: tuple = ()
    split: Split | None = None
    order: int | tuple | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "domain_length", float(self.domain_length))
        object.__setattr__(self, "pdes", tuple(self.pdes))
        object.__setattr__(self, "bcs", tuple(self.bcs))
        if isinstance(self.order, list):
            object.__setattr__(self, "order", tuple(self.order))

    def with_order(self, order):
        return replace(self, order=order)


# ---------------------------------------------------------------------------
# grouping
# ---------------------------------------------------------------------------

def _all_constraints(p: KernelProblem):
    yield from p.pdes
    yield from p.bcs
    if p.split is not None:
        for region in (p.split.region_a, p.split.region_b):
            yield from region.pdes
            yield from region.bcs


def kernel_groups(p: KernelProblem) -> list[tuple]:
    """Connected components of the kernel-coupling graph, sorted by smallest index."""
    parent = list(range(p.n_kernels))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(ks):
        ks = [k for k in ks if 0 <= k < p.n_kernels]
        for k in ks[1:]:
            ra, rb = find(ks[0]), find(k)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    for con in _all_constraints(p):
        union(sorted(con.kernels))
    if p.split is not None:
        union(list(p.split.kernels))
        for m in p.split.matching:
            union([m.kernel_a, m.kernel_b])
    groups = {}
    for k in range(p.n_kernels):
        groups.setdefault(find(k), []).append(k)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def resolve_orders(p: KernelProblem, order=None, group_orders=None) -> dict:
    """Truncation order per kernel group.

    ``order`` overrides every group; ``group_orders`` maps any kernel index of
    a group to that group's order and takes precedence.
    """
    groups = kernel_groups(p)
    base = p.order if order is None else order
    out = {}
    for n, g in enumerate(groups):
        if isinstance(base, tuple):
            if len(base) != len(groups):
                raise ValueError(f"{len(base)} orders given for {len(groups)} kernel groups")
            out[g] = int(base[n])
        elif base is not None:
            out[g] = int(base)
    for k, v in (group_orders or {}).items():
        for g in groups:
            if int(k) in g:
                out[g] = int(v)
    missing = [g for g in groups if g not in out]
    if missing:
        raise ValueError(f"no truncation order for kernel group(s) {missing}")
    return out


# ---------------------------------------------------------------------------
# localization
# ---------------------------------------------------------------------------

def _check_expr(e, point, what):
    if e is None:
        return
    try:
        expand(e, point, 0)
    except (DomainError, ZeroDivisionError, ValueError) as exc:
        raise DomainError(f"{what} is singular at {point}: {exc}") from None


def _shift_bc(bc: BoundaryConstraint, x0, xi0) -> BoundaryConstraint:
    rhs = bc.rhs
    if isinstance(rhs, IntegralRhs):
        rhs = IntegralRhs(rhs.integrand, rhs.lower - xi0, rhs.scale)
    return BoundaryConstraint(bc.line.shifted(x0, xi0), bc.terms, rhs)


def _check_centers(p: KernelProblem):
    cx, cxi = p.center
    for con in _all_constraints(p):
        if isinstance(con, PdeConstraint):
            for t in con.terms:
                _check_expr(t.a, cx, "PDE coefficient a(x)")
                _check_expr(t.b, cxi, "PDE coefficient b(xi)")
        else:
            for t in con.terms:
                _check_expr(t.c, cx, "boundary coefficient c(x)")
            if isinstance(con.rhs, IntegralRhs):
                _check_expr(con.rhs.integrand, cxi, "boundary integrand")
            else:
                _check_expr(con.rhs, cx, "boundary data")
    if p.split is not None:
        for m in p.split.matching:
            _check_expr(m.jump, cx, "matching jump")


def localize(p: KernelProblem, x0: float, xi0: float) -> KernelProblem:
    """Move the expansion point by ``(x0, xi0)``.

    Lines ``xi = alpha*x + gamma`` become ``alpha*x + (alpha*x0 + gamma - xi0)``
    and integral lower limits shift by ``-xi0``.
    """
    x0, xi0 = float(x0), float(xi0)
    if not (math.isfinite(x0) and math.isfinite(xi0)):
        raise ValueError("expansion point must be finite")
    split = p.split
    if split is not None:
        shift_region = lambda r: Region(r.pdes, tuple(_shift_bc(b, x0, xi0) for b in r.bcs))
        split = Split(
            split.beta, split.kernels, shift_region(split.region_a), shift_region(split.region_b),
            tuple(replace(m, line=m.line.shifted(x0, xi0)) for m in split.matching),
        )
    out = replace(
        p,
        center=(p.center[0] + x0, p.center[1] + xi0),
        bcs=tuple(_shift_bc(b, x0, xi0) for b in p.bcs),
        split=split,
    )
    _check_centers(out)
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class GroupCount:
    kernels: tuple
    split: bool
    order: int | None
    unknowns: int = 0
    rows: int = 0
    expected_duplicates: int = 0

    @property
    def rows_after_dedup(self):
        return self.rows - self.expected_duplicates

    def describe(self) -> str:
        if self.order is None:
            return f"kernels {list(self.kernels)}: no order given"
        net = self.rows_after_dedup - self.unknowns
        dup = self.expected_duplicates
        tail = f" after {dup} duplicate removal" if dup else ""
        if net == 0:
            state = "square" + tail
        elif net > 0:
            state = f"overdetermined by {net}" + tail
        else:
            state = f"underdetermined by {-net}" + tail
        return (f"kernels {list(self.kernels)}{' (split)' if self.split else ''}, N={self.order}: "
                f"{self.unknowns} unknowns, {self.rows} rows -> {state}")


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    groups: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def counts_ok(self) -> bool:
        return all(g.order is None or g.rows_after_dedup == g.unknowns for g in self.groups)

    @property
    def summary(self) -> str:
        return "; ".join(g.describe() for g in self.groups)

    def lines(self):
        out = [g.describe() for g in self.groups]
        out += [f"warning: {w}" for w in self.warnings]
        out += [f"error: {e}" for e in self.errors]
        return out


def _pde_rows(pde, n):
    return idx_l(n - pde.order) if n - pde.order >= 0 else 0


def _bc_rows(bc, n):
    return max(n + 1 - bc.trace_order, 0)


def _corner_duplicates(bcs):
    """Pairs of plain trace conditions on the same kernels along crossing lines.

    Both pin the kernel at the crossing point, so one equation is redundant.
    """
    simple = [b for b in bcs
              if b.trace_order == 0 and all(t.c is None or t.c.is_const() for t in b.terms)]
    dups = 0
    for a in range(len(simple)):
        for b in range(a + 1, len(simple)):
            ba, bb = simple[a], simple[b]
            if ba.kernels == bb.kernels and ba.line.alpha != bb.line.alpha:
                dups += 1
    return dups


def _check_constraints(pdes, bcs, n_kernels, where, rep):
    for ip, pde in enumerate(pdes):
        if not pde.terms:
            rep.errors.append(f"{where}pdes[{ip}]: no terms")
        for it, t in enumerate(pde.terms):
            p_, q_ = t.deriv
            if p_ < 0 or q_ < 0 or p_ + q_ > 2:
                rep.errors.append(f"{where}pdes[{ip}].terms[{it}]: derivative order {list(t.deriv)} "
                                  "outside 0 <= p, q and p + q <= 2")
            if not 0 <= t.kernel < n_kernels:
                rep.errors.append(f"{where}pdes[{ip}].terms[{it}]: kernel {t.kernel} out of range")
    for ib, bc in enumerate(bcs):
        if not bc.terms:
            rep.errors.append(f"{where}bcs[{ib}]: no terms")
        for it, t in enumerate(bc.terms):
            if t.trace_deriv not in (0, 1):
                rep.errors.append(f"{where}bcs[{ib}].terms[{it}]: trace_deriv must be 0 or 1")
            if not 0 <= t.kernel < n_kernels:
                rep.errors.append(f"{where}bcs[{ib}].terms[{it}]: kernel {t.kernel} out of range")


def validate_problem(p: KernelProblem, order=None, group_orders=None) -> ValidationReport:
    """Structural checks and equation/unknown counts per kernel group. Never raises."""
    rep = ValidationReport()
    if not p.domain_length > 0:
        rep.errors.append("domain_length must be positive")
    if p.n_kernels < 1:
        rep.errors.append("need at least one kernel")
    _check_constraints(p.pdes, p.bcs, p.n_kernels, "", rep)
    split_kernels = set()
    if p.split is not None:
        s = p.split
        split_kernels = set(s.kernels)
        if not 0 < s.beta < 1:
            rep.errors.append("split.beta must lie in (0, 1)")
        for name, region in (("a", s.region_a), ("b", s.region_b)):
            _check_constraints(region.pdes, region.bcs, p.n_kernels, f"split.region_{name}.", rep)
            for con in list(region.pdes) + list(region.bcs):
                if not con.kernels <= split_kernels:
                    rep.errors.append(f"split.region_{name}: constraint touches unsplit kernels")
        for m in s.matching:
            if m.kernel_a not in split_kernels or m.kernel_b not in split_kernels:
                rep.errors.append("split.matching: kernels must belong to the split")
        for con in list(p.pdes) + list(p.bcs):
            if con.kernels & split_kernels:
                rep.errors.append("top-level constraint touches split kernels; put it in a region")
    if not p.pdes and (p.split is None or not (p.split.region_a.pdes or p.split.region_b.pdes)):
        rep.warnings.append("no PDE constraints; system holds boundary rows only")
    in_pde = set()
    for con in _all_constraints(p):
        if isinstance(con, PdeConstraint):
            in_pde |= con.kernels
    for k in range(p.n_kernels):
        if k not in in_pde:
            rep.warnings.append(f"kernel {k} appears in no PDE constraint")

    try:
        orders = resolve_orders(p, order, group_orders)
    except (ValueError, TypeError) as exc:
        rep.warnings.append(str(exc))
        orders = {}
    for g in kernel_groups(p):
        is_split = bool(set(g) & split_kernels)
        if is_split and not set(g) <= split_kernels:
            rep.errors.append(f"kernel group {list(g)} mixes split and unsplit kernels")
        n = orders.get(g)
        gc = GroupCount(g, is_split, n)
        if n is not None:
            if n < 0:
                rep.errors.append(f"negative order {n}")
                n = 0
            if is_split:
                regions = (p.split.region_a, p.split.region_b)
                gc.unknowns = 2 * len(g) * idx_l(n)
                gc.rows = sum(_pde_rows(c, n) for r in regions for c in r.pdes)
                gc.rows += sum(_bc_rows(c, n) for r in regions for c in r.bcs)
                gc.rows += (n + 1) * len(p.split.matching)
                gc.expected_duplicates = sum(_corner_duplicates(r.bcs) for r in regions)
            else:
                pdes = [c for c in p.pdes if c.kernels & set(g)]
                bcs = [c for c in p.bcs if c.kernels & set(g)]
                gc.unknowns = len(g) * idx_l(n)
                gc.rows = sum(_pde_rows(c, n) for c in pdes) + sum(_bc_rows(c, n) for c in bcs)
                gc.expected_duplicates = _corner_duplicates(bcs)
            if gc.rows_after_dedup != gc.unknowns:
                rep.warnings.append(f"kernels {list(g)}: {gc.rows_after_dedup} equations for {gc.unknowns} unknowns")
        rep.groups.append(gc)
    return rep


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _req(doc, key, path):
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "required field is missing")
    return doc[key]


def _num(v, path, integer=False):
    if isinstance(v, bool) or not isinstance(v, numbers.Real):
        raise SchemaError(path, "expected a number")
    if integer:
        if not float(v).is_integer():
            raise SchemaError(path, "expected an integer")
        return int(v)
    return float(v)


def _list(v, path):
    if not isinstance(v, list):
        raise SchemaError(path, "expected a list")
    return v


def _opt_expr(v, path):
    return None if v is None else expr_from_json(v, path)


def _line_from(doc, path):
    return Line(_num(_req(doc, "alpha", path), f"{path}.alpha"),
                _num(doc.get("gamma", 0.0), f"{path}.gamma"))


def _pdes_from(doc, path):
    out = []
    for ip, pd in enumerate(_list(doc, path)):
        pp = f"{path}[{ip}]"
        terms = []
        for it, t in enumerate(_list(_req(pd, "terms", pp), f"{pp}.terms")):
            tp = f"{pp}.terms[{it}]"
            deriv = _list(_req(t, "deriv", tp), f"{tp}.deriv")
            if len(deriv) != 2:
                raise SchemaError(f"{tp}.deriv", "expected [p, q]")
            terms.append(PdeTerm(
                kernel=_num(_req(t, "kernel", tp), f"{tp}.kernel", integer=True),
                deriv=(_num(deriv[0], f"{tp}.deriv[0]", True), _num(deriv[1], f"{tp}.deriv[1]", True)),
                weight=_num(t.get("weight", 1.0), f"{tp}.weight"),
                a=_opt_expr(t.get("a"), f"{tp}.a"),
                b=_opt_expr(t.get("b"), f"{tp}.b"),
            ))
        out.append(PdeConstraint(tuple(terms)))
    return tuple(out)


def _bcs_from(doc, path):
    out = []
    for ib, bd in enumerate(_list(doc, path)):
        bp = f"{path}[{ib}]"
        line = _line_from(_req(bd, "line", bp), f"{bp}.line")
        terms = []
        for it, t in enumerate(_list(_req(bd, "terms", bp), f"{bp}.terms")):
            tp = f"{bp}.terms[{it}]"
            terms.append(TraceTerm(
                kernel=_num(_req(t, "kernel", tp), f"{tp}.kernel", integer=True),
                c=_opt_expr(t.get("c"), f"{tp}.c"),
                trace_deriv=_num(t.get("trace_deriv", 0), f"{tp}.trace_deriv", integer=True),
            ))
        rhs_doc = bd.get("rhs")
        if isinstance(rhs_doc, dict) and "integral" in rhs_doc:
            ip = f"{bp}.rhs.integral"
            idoc = rhs_doc["integral"]
            rhs = IntegralRhs(
                expr_from_json(_req(idoc, "integrand", ip), f"{ip}.integrand"),
                _num(idoc.get("lower", 0.0), f"{ip}.lower"),
                _num(idoc.get("scale", 1.0), f"{ip}.scale"),
            )
        else:
            rhs = _opt_expr(rhs_doc, f"{bp}.rhs")
        out.append(BoundaryConstraint(line, tuple(terms), rhs))
    return tuple(out)


def problem_from_dict(doc) -> KernelProblem:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    n_k = _num(_req(doc, "kernels", "$"), "$.kernels", integer=True)
    length = _num(_req(doc, "domain_length", "$"), "$.domain_length")
    center = doc.get("center", [0.0, 0.0])
    if not isinstance(center, list) or len(center) != 2:
        raise SchemaError("$.center", "expected [x0, xi0]")
    center = (_num(center[0], "$.center[0]"), _num(center[1], "$.center[1]"))
    order = doc.get("order")
    if isinstance(order, list):
        order = tuple(_num(v, f"$.order[{k}]", integer=True) for k, v in enumerate(order))
    elif order is not None:
        order = _num(order, "$.order", integer=True)
    pdes = _pdes_from(doc.get("pdes", []), "$.pdes")
    bcs = _bcs_from(doc.get("bcs", []), "$.bcs")
    split = None
    sd = doc.get("split")
    if sd is not None:
        regions = []
        for name in ("region_a", "region_b"):
            rd = _req(sd, name, "$.split")
            regions.append(Region(_pdes_from(rd.get("pdes", []), f"$.split.{name}.pdes"),
                                  _bcs_from(rd.get("bcs", []), f"$.split.{name}.bcs")))
        matching = []
        for im, md in enumerate(_list(sd.get("matching", []), "$.split.matching")):
            mp = f"$.split.matching[{im}]"
            matching.append(MatchingConstraint(
                _line_from(_req(md, "line", mp), f"{mp}.line"),
                _num(_req(md, "kernel_a", mp), f"{mp}.kernel_a", integer=True),
                _num(_req(md, "kernel_b", mp), f"{mp}.kernel_b", integer=True),
                _opt_expr(md.get("jump"), f"{mp}.jump"),
            ))
        split = Split(
            _num(_req(sd, "beta", "$.split"), "$.split.beta"),
            tuple(_num(k, f"$.split.kernels[{i}]", True)
                  for i, k in enumerate(_list(_req(sd, "kernels", "$.split"), "$.split.kernels"))),
            regions[0], regions[1], tuple(matching),
        )
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise SchemaError("$.name", "expected a string")
    return KernelProblem(n_k, length, center, pdes, bcs, split, order, name)


def parse_problem(text: str) -> KernelProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    return problem_from_dict(doc)


def _pdes_to(pdes):
    return [{"terms": [{"kernel": t.kernel, "a": expr_to_json(t.a), "b": expr_to_json(t.b),
                        "deriv": list(t.deriv), "weight": t.weight} for t in pd.terms]}
            for pd in pdes]


def _bcs_to(bcs):
    out = []
    for bc in bcs:
        if isinstance(bc.rhs, IntegralRhs):
            rhs = {"integral": {"integrand": expr_to_json(bc.rhs.integrand),
                                "lower": bc.rhs.lower, "scale": bc.rhs.scale}}
        else:
            rhs = expr_to_json(bc.rhs)
        out.append({
            "line": {"alpha": bc.line.alpha, "gamma": bc.line.gamma},
            "terms": [{"kernel": t.kernel, "c": expr_to_json(t.c), "trace_deriv": t.trace_deriv}
                      for t in bc.terms],
            "rhs": rhs,
        })
    return out


def problem_to_dict(p: KernelProblem) -> dict:
    doc = {}
    if p.name is not None:
        doc["name"] = p.name
    doc.update({
        "kernels": p.n_kernels,
        "domain_length": p.domain_length,
        "center": list(p.center),
        "order": list(p.order) if isinstance(p.order, tuple) else p.order,
        "pdes": _pdes_to(p.pdes),
        "bcs": _bcs_to(p.bcs),
    })
    if p.split is not None:
        s = p.split
        doc["split"] = {
            "beta": s.beta,
            "kernels": list(s.kernels),
            "region_a": {"pdes": _pdes_to(s.region_a.pdes), "bcs": _bcs_to(s.region_a.bcs)},
            "region_b": {"pdes": _pdes_to(s.region_b.pdes), "bcs": _bcs_to(s.region_b.bcs)},
            "matching": [{"line": {"alpha": m.line.alpha, "gamma": m.line.gamma},
                          "kernel_a": m.kernel_a, "kernel_b": m.kernel_b,
                          "jump": expr_to_json(m.jump)} for m in s.matching],
        }
    return doc


def serialize_problem(p: KernelProblem, indent=2) -> str:
    return json.dumps(problem_to_dict(p), indent=indent)
