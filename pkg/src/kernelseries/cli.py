"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 numerical failure,
3 I/O or schema failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .assembler import (SweepParam, SweepSpec, report_from_series, residual_grid, solve_problem,
                        sweep)
from .errors import (DomainError, KernelSeriesError, OrderError, ParamError, SchemaError,
                     SingularSystem, ValidationError)
from .examples import BUILDERS, example_json
from .outputs import fmt, read_coefficients_csv, write_coefficients_csv, write_gain_csv, write_report_json
from .problem import localize, parse_problem, validate_problem

log = logging.getLogger("kernelseries")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _err(msg):
    print(f"kernelseries: {msg}", file=sys.stderr)


def _parse_orders(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--orders expects k=N, got {item!r}")
        out[int(key)] = int(val)
    return out


def _load_problem(path, center=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read: {exc.strerror or exc}") from None
    p = parse_problem(text)
    if center is not None:
        x0, xi0 = center
        p = localize(p, x0 - p.center[0], xi0 - p.center[1])
    return p


def _summary(name, report):
    band = max((v["band"] for v in report.residual_grid.values()), default=0.0)
    full = max((v["full"] for v in report.residual_grid.values()), default=0.0)
    orders = ",".join(str(n) for n in report.orders.values())
    line = (f"{name}: order {orders}  residual {report.residual_linear:.2e}  "
            f"band {band:.2e}  full {full:.2e}  sparsity {report.sparsity:.4f}  "
            f"time {report.wall_time:.3f}s")
    if report.rank_deficient:
        line += "  [numerically rank-deficient]"
    flagged = [f"{k} growth {d['growth_rate']:.3g} x reach {d['reach']:.3g}"
               for k, d in report.divergence.items() if d["flag"]]
    if flagged:
        line += "  WARNING: coefficients suggest divergence on the domain (" + "; ".join(flagged) + ")"
    return line


def cmd_solve(args) -> int:
    p = _load_problem(args.problem, args.center)
    report = solve_problem(p, args.order, _parse_orders(args.orders), grid_n=args.grid, tol=args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(out / "report.json", report)
    write_coefficients_csv(out / "coeffs.csv", report)
    write_gain_csv(out / "gain.csv", report, args.grid)
    print(_summary(p.name or Path(args.problem).stem, report))
    return EXIT_OK


def _sweep_spec(doc, args):
    for key in ("example", "params"):
        if key not in doc:
            raise SchemaError(f"$.{key}", "required field is missing")
    if doc["example"] not in BUILDERS:
        raise SchemaError("$.example", f"unknown example {doc['example']!r}")
    params = []
    for n, prm in enumerate(doc["params"]):
        try:
            params.append(SweepParam(str(prm["name"]), float(prm["low"]), float(prm["high"]),
                                     int(prm.get("samples", 1))))
        except (KeyError, TypeError, ValueError):
            raise SchemaError(f"$.params[{n}]", "needs name, low, high and optional samples") from None
    order = args.order if args.order is not None else doc.get("order")
    if isinstance(order, list):
        order = tuple(order)
    try:
        return SweepSpec(
            builder=BUILDERS[doc["example"]],
            base_args=dict(doc.get("args", {})),
            params=params,
            order=order,
            mode=doc.get("mode", "grid"),
            seed=args.seed if args.seed is not None else int(doc.get("seed", 0)),
            samples=doc.get("samples"),
            out_dir=args.out,
            grid_n=args.grid if args.grid is not None else doc.get("grid_n", 51),
            workers=args.workers if args.workers is not None else int(doc.get("workers", 1)),
            group_orders=_parse_orders(args.orders) or None,
        )
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from None


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text())
    except OSError as exc:
        raise SchemaError(str(args.spec), f"cannot read: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(str(args.spec), f"invalid JSON: {exc}") from None
    spec = _sweep_spec(doc, args)
    records = sweep(spec)
    ok = sum(r["status"] == "ok" for r in records)
    print(f"sweep: {len(records)} samples, {ok} ok, {len(records) - ok} failed -> {args.out}")
    for r in records:
        if r["status"] != "ok":
            _err(f"sample {r['index']}: {r['error']}")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_eval(args) -> int:
    series, length = read_coefficients_csv(args.coeffs, args.order)
    if args.kernel is not None:
        series = {k: v for k, v in series.items() if k[0] == args.kernel}
        if not series:
            raise SchemaError(str(args.coeffs), f"no kernel {args.kernel}")
    keys = sorted(series, key=lambda k: (k[0], k[1] or ""))
    labels = [f"K{k}" + (f"/{r}" if r else "") for k, r in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.gain:
        L = args.length if args.length is not None else length
        if L is None:
            raise SchemaError(str(args.coeffs), "no domain_length metadata; pass --length")
        xi = np.linspace(0.0, L, args.grid)
        x = np.full_like(xi, L)
        w.writerow(["xi"] + labels)
        vals = [np.asarray(series[k](x, xi)) for k in keys]
        for r in range(xi.size):
            w.writerow([fmt(xi[r])] + [fmt(v[r]) for v in vals])
    else:
        if args.point:
            pts = np.array(args.point, dtype=float)
            x, xi = pts[:, 0], pts[:, 1]
        else:
            L = args.length if args.length is not None else length
            if L is None:
                raise SchemaError(str(args.coeffs), "no domain_length metadata; pass --length or --point")
            g = np.linspace(0.0, L, args.grid)
            xx, yy = np.meshgrid(g, g, indexing="ij")
            keep = yy <= xx
            x, xi = xx[keep], yy[keep]
        w.writerow(["x", "xi"] + labels)
        vals = [np.atleast_1d(series[k](x, xi)) for k in keys]
        for r in range(x.size):
            w.writerow([fmt(x[r]), fmt(xi[r])] + [fmt(v[r]) for v in vals])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_validate(args) -> int:
    p = _load_problem(args.problem, args.center)
    group_orders = _parse_orders(args.orders)
    rep = validate_problem(p, args.order, group_orders)
    for line in rep.lines():
        print(line)
    status = EXIT_OK if rep.ok and rep.counts_ok else EXIT_VALIDATION
    if status != EXIT_OK or not (args.solve or args.solution):
        return status
    if args.solution:
        series, _ = read_coefficients_csv(args.solution)
        try:
            report = report_from_series(p, series)
        except ValueError as exc:
            raise SchemaError(str(args.solution), str(exc)) from None
        report.residual_grid = residual_grid(report, p, args.grid)
    else:
        report = solve_problem(p, args.order, group_orders, grid_n=args.grid, tol=args.tol)
    scale = report.coefficient_scale
    print(f"linear residual {report.residual_linear:.3e}  coefficient scale {scale:.3e}")
    for label, v in report.residual_grid.items():
        mark = "ok" if v["band"] <= args.band_tol * scale else "ABOVE TOLERANCE"
        print(f"  {label:12s} band {v['band']:.3e}  full {v['full']:.3e}  {mark}")
    return status


def cmd_example(args) -> int:
    if args.list:
        for name in BUILDERS:
            print(name)
        return EXIT_OK
    if args.name is None:
        raise ParamError("name an example or pass --list")
    kwargs = {}
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ParamError(f"--set expects name=value, got {item!r}")
        kwargs[key] = float(val)
    if args.order is not None:
        kwargs["order"] = args.order
    try:
        text = example_json(args.name, **kwargs)
    except KeyError as exc:
        raise ParamError(str(exc.args[0])) from None
    except TypeError as exc:
        raise ParamError(str(exc)) from None
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _pair(text):
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kernelseries",
                                 description="Power-series solver for backstepping kernel equations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver decisions to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, grid_default=201):
        sp.add_argument("--order", type=int, help="truncation order for every kernel group")
        sp.add_argument("--orders", action="append", metavar="K=N",
                        help="order N for the group containing kernel K (repeatable)")
        sp.add_argument("--grid", type=int, default=grid_default,
                        help="grid size for residuals and gain output (default %(default)s)")
        sp.add_argument("--tol", type=float, default=1e-10, help="linear residual tolerance")

    sp = sub.add_parser("solve", help="solve a problem JSON file")
    sp.add_argument("problem")
    common(sp)
    sp.add_argument("--center", nargs=2, type=_pair, metavar=("X0", "XI0"),
                    help="expand about this point instead of the file's center")
    sp.add_argument("--out", default="out", help="output directory (default %(default)s)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="solve a family of example problems")
    sp.add_argument("spec", help="sweep spec JSON")
    common(sp, grid_default=None)
    sp.add_argument("--seed", type=int, help="override the spec's seed")
    sp.add_argument("--workers", type=int, help="parallel worker processes")
    sp.add_argument("--out", default="sweep", help="output directory (default %(default)s)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("eval", help="evaluate a coefficient CSV")
    sp.add_argument("coeffs")
    sp.add_argument("--order", type=int, help="expected order; mismatching files are rejected")
    sp.add_argument("--point", nargs=2, type=float, action="append", metavar=("X", "XI"),
                    help="evaluation point (repeatable)")
    sp.add_argument("--gain", action="store_true", help="evaluate K(L, xi) on a uniform xi grid")
    sp.add_argument("--grid", type=int, default=201, help="grid size (default %(default)s)")
    sp.add_argument("--length", type=float, help="domain length if not in the file")
    sp.add_argument("--kernel", type=int, help="only this kernel")
    sp.add_argument("--out", help="write CSV here instead of standard output")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("validate", help="count equations and unknowns; optionally check residuals")
    sp.add_argument("problem")
    common(sp)
    sp.add_argument("--center", nargs=2, type=_pair, metavar=("X0", "XI0"))
    sp.add_argument("--solve", action="store_true", help="solve and report grid residuals")
    sp.add_argument("--solution", help="coefficient CSV to check instead of solving")
    sp.add_argument("--band-tol", type=float, default=1e-9,
                    help="enforced-band residual tolerance relative to coefficient scale")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("example", help="print a reference problem as JSON")
    sp.add_argument("name", nargs="?", choices=sorted(BUILDERS))
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--order", type=int)
    sp.add_argument("--set", action="append", metavar="NAME=VALUE",
                    help="override a numeric builder argument (repeatable)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_example)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SchemaError as exc:
        _err(f"schema error: {exc}")
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    except (ValidationError, ParamError) as exc:
        _err(f"invalid problem: {exc}")
        return EXIT_VALIDATION
    except (SingularSystem, DomainError, OrderError, ArithmeticError) as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except (KernelSeriesError, ValueError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
