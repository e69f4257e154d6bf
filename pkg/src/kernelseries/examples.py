"""Builders for the five reference kernel problems.

Kernel indices are zero-based. Coefficient arguments accept anything
``taylor.as_expr`` understands (numbers or ``CoeffExpr``).
"""
from __future__ import annotations

import json
from dataclasses import replace

from .errors import DomainError, ParamError
from .problem import (BoundaryConstraint, IntegralRhs, KernelProblem, Line, MatchingConstraint,
                      PdeConstraint, PdeTerm, Region, Split, TraceTerm, localize, problem_to_dict)
from .taylor import X, as_expr, cos, diff, exp, evaluate, sin, sqrt

__all__ = [
    "example1", "example2", "example3", "example4", "example5",
    "default_lambda1", "BUILDERS", "example_json",
]

DIAGONAL = Line(1.0, 0.0)
AXIS = Line(0.0, 0.0)


def _positive(v, name):
    if not v > 0:
        raise ParamError(f"{name} must be positive, got {v}")
    return float(v)


def default_lambda1():
    return 3 + X ** 2 * sin(3 * X)


def example1(lam=None, eps=1.0, c=3.0, L=1.0, order=None) -> KernelProblem:
    """Constant-diffusion reaction kernel.

    ``K_xx - K_xixi = (lam(xi) + c) / eps * K`` with
    ``K(x, x) = -1/(2 eps) * int_0^x (lam + c)`` and ``K(x, 0) = 0``.
    """
    eps = _positive(eps, "eps")
    L = _positive(L, "L")
    lam = default_lambda1() if lam is None else as_expr(lam)
    react = lam + float(c)
    pde = PdeConstraint((
        PdeTerm(0, (2, 0)),
        PdeTerm(0, (0, 2), -1.0),
        PdeTerm(0, (0, 0), -1.0, b=react / eps),
    ))
    bcs = (
        BoundaryConstraint(DIAGONAL, (TraceTerm(0),), IntegralRhs(react, 0.0, -0.5 / eps)),
        BoundaryConstraint(AXIS, (TraceTerm(0),), None),
    )
    return KernelProblem(1, L, (0.0, 0.0), (pde,), bcs, order=order, name="example1")


def example2(lam=None, eps=None, c=3.0, L=1.0, order=None) -> KernelProblem:
    """Space-varying diffusion kernel.

    ``eps(x) K_xx - eps(xi) K_xixi = (lam(xi) + c) K`` with
    ``2 eps(x) d/dx K(x, x) + eps'(x) K(x, x) = -lam(x) - c`` and ``K(x, 0) = 0``.
    """
    L = _positive(L, "L")
    lam = 2 + X ** 2 * cos(6 * X ** 2) if lam is None else as_expr(lam)
    eps = 3 + 2 * X ** 3 if eps is None else as_expr(eps)
    if not evaluate(eps, 0.0) > 0:
        raise DomainError("eps must be positive at the expansion point")
    pde = PdeConstraint((
        PdeTerm(0, (2, 0), a=eps),
        PdeTerm(0, (0, 2), -1.0, b=eps),
        PdeTerm(0, (0, 0), -1.0, b=lam + float(c)),
    ))
    bcs = (
        BoundaryConstraint(DIAGONAL, (TraceTerm(0, 2 * eps, 1), TraceTerm(0, diff(eps), 0)),
                           -lam - float(c)),
        BoundaryConstraint(AXIS, (TraceTerm(0),), None),
    )
    return KernelProblem(1, L, (0.0, 0.0), (pde,), bcs, order=order, name="example2")


def example3(eps=None, mu=None, c1=None, c2=None, c3=None, c4=None, q=1.0, L=1.0,
             order=None) -> KernelProblem:
    """Coupled 2x2 hyperbolic kernels; kernel 0 is ``K^vv``, kernel 1 is ``K^vu``."""
    L = _positive(L, "L")
    eps = 1.3 + X ** 2 if eps is None else as_expr(eps)
    mu = 1.4 + X ** 3 if mu is None else as_expr(mu)
    c1 = 3 * exp(3 * X) if c1 is None else as_expr(c1)
    c2 = sin(3 * X) if c2 is None else as_expr(c2)
    c3 = 1 + 2 * cos(2 * X) if c3 is None else as_expr(c3)
    c4 = 1 / (3 + 1.5 * X ** 3) if c4 is None else as_expr(c4)
    mu0 = float(evaluate(mu, 0.0))
    if mu0 == 0.0:
        raise DomainError("mu(0) must be nonzero")
    vv, vu = 0, 1
    pde_vv = PdeConstraint((
        PdeTerm(vv, (1, 0), a=mu),
        PdeTerm(vv, (0, 1), b=mu),
        PdeTerm(vv, (0, 0), b=diff(mu)),
        PdeTerm(vu, (0, 0), -1.0, b=c2),
        PdeTerm(vu, (0, 0), -1.0, a=c4),
        PdeTerm(vu, (0, 0), 1.0, b=c4),
    ))
    pde_vu = PdeConstraint((
        PdeTerm(vu, (1, 0), a=mu),
        PdeTerm(vu, (0, 1), -1.0, b=eps),
        PdeTerm(vu, (0, 0), -1.0, b=diff(eps)),
        PdeTerm(vv, (0, 0), -1.0, b=c3),
        PdeTerm(vv, (0, 0), -1.0, a=c4),
        PdeTerm(vv, (0, 0), 1.0, b=c1),
    ))
    ratio = float(q) * float(evaluate(eps, 0.0)) / mu0
    bcs = (
        BoundaryConstraint(AXIS, (TraceTerm(vv), TraceTerm(vu, -ratio)), None),
        BoundaryConstraint(DIAGONAL, (TraceTerm(vu, eps + mu),), -c3),
    )
    return KernelProblem(2, L, (0.0, 0.0), (pde_vv, pde_vu), bcs, order=order, name="example3")


def example4(mu1=1.0, mu2=0.2, s12=5.0, s21=2.0, L=1.0, order=None) -> KernelProblem:
    """Four motion-planning kernels ``L11, L12, L21, L22`` (indices 0..3).

    ``(L11, L12)`` is split along the characteristic ``xi = (mu2/mu1) x``:
    below it both vanish on ``xi = 0``; above it ``L12`` takes its diagonal
    value and ``L11`` continues from below. ``(L21, L22)`` is a plain
    single-region problem.
    """
    mu1, mu2 = float(mu1), float(mu2)
    if not mu1 > mu2 > 0:
        raise ParamError(f"need mu1 > mu2 > 0, got mu1={mu1}, mu2={mu2}")
    L = _positive(L, "L")
    s12, s21 = as_expr(s12), as_expr(s21)
    l11, l12, l21, l22 = 0, 1, 2, 3
    l1_pdes = (
        PdeConstraint((PdeTerm(l11, (1, 0), mu1), PdeTerm(l11, (0, 1), mu1),
                       PdeTerm(l12, (0, 0), -1.0, b=s21))),
        PdeConstraint((PdeTerm(l12, (1, 0), mu1), PdeTerm(l12, (0, 1), mu2),
                       PdeTerm(l11, (0, 0), -1.0, b=s12))),
    )
    beta = mu2 / mu1
    split = Split(
        beta, (l11, l12),
        Region(l1_pdes, (BoundaryConstraint(AXIS, (TraceTerm(l11),), None),
                            BoundaryConstraint(AXIS, (TraceTerm(l12),), None))),
        Region(l1_pdes, (BoundaryConstraint(DIAGONAL, (TraceTerm(l12),), s12 / (mu2 - mu1)),)),
        (MatchingConstraint(Line(beta, 0.0), l11, l11, None),),
    )
    pdes = (
        PdeConstraint((PdeTerm(l21, (1, 0), mu2), PdeTerm(l21, (0, 1), mu1),
                       PdeTerm(l22, (0, 0), -1.0, b=s21))),
        PdeConstraint((PdeTerm(l22, (1, 0), mu2), PdeTerm(l22, (0, 1), mu2),
                       PdeTerm(l21, (0, 0), -1.0, b=s12))),
    )
    bcs = (
        BoundaryConstraint(DIAGONAL, (TraceTerm(l21),), s21 / (mu1 - mu2)),
        BoundaryConstraint(AXIS, (TraceTerm(l22),), None),
    )
    return KernelProblem(4, L, (0.0, 0.0), pdes, bcs, split, order=order, name="example4")


def example5(lam=None, eps=1.0, c=3.0, L=1.0, x0=0.5, xi0=0.7, order=None) -> KernelProblem:
    """Constant-diffusion reaction kernel expanded about ``(x0, xi0)``.

    Defaults to ``lam = sqrt(0.5 + x^2)``, whose branch points at
    ``x = +-i/sqrt(2)`` limit an origin-centred series.
    """
    lam = sqrt(0.5 + X ** 2) if lam is None else lam
    p = localize(example1(lam, eps, c, L, order), x0, xi0)
    return replace(p, name="example5")


BUILDERS = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
    "example5": example5,
}

# orders used by the reference runs
DEFAULT_ORDERS = {
    "example1": 25,
    "example2": 40,
    "example3": 40,
    "example4": (8, 40),
    "example5": 50,
}


def example_json(name: str, **kwargs) -> str:
    """Canonical problem JSON of a builder with its reference order."""
    if name not in BUILDERS:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(BUILDERS)}")
    kwargs.setdefault("order", DEFAULT_ORDERS[name])
    return json.dumps(problem_to_dict(BUILDERS[name](**kwargs)), indent=2, sort_keys=True) + "\n"
