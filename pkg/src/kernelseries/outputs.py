"""Deterministic file outputs: coefficient/gain CSVs, report JSON, JSON lines.

Floats are written in shortest round-trip form (``repr``), so reading a file
back reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .triseries import TriSeries, idx_l

__all__ = [
    "fmt", "coefficients_csv", "write_coefficients_csv", "read_coefficients_csv",
    "gain_table", "gain_csv", "write_gain_csv", "report_json", "write_report_json",
    "write_jsonl",
]


def fmt(v) -> str:
    return repr(float(v) + 0.0)


def _label(kernel, region):
    return f"K{kernel}" + (f"/{region}" if region else "")


def coefficients_csv(report) -> str:
    """``kernel,region,i,j,K_ij`` rows preceded by ``#`` metadata lines."""
    buf = io.StringIO()
    buf.write("# kernelseries coefficients\n")
    if report.domain_length is not None:
        buf.write(f"# domain_length {fmt(report.domain_length)}\n")
    for s in report.kernels:
        x0, xi0 = s.series.center
        buf.write(f"# {_label(s.kernel, s.region)} order {s.series.order} center {fmt(x0)} {fmt(xi0)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("kernel", "region", "i", "j", "K_ij"))
    for s in report.kernels:
        for i, j, v in s.series.to_csv_rows():
            w.writerow((s.kernel, s.region or "", i, j, fmt(v)))
    return buf.getvalue()


def write_coefficients_csv(path, report):
    Path(path).write_text(coefficients_csv(report))


def read_coefficients_csv(path, order=None) -> tuple[dict, float | None]:
    """Load a coefficient CSV as ``({(kernel, region): TriSeries}, domain_length)``.

    Raises ``SchemaError`` when the rows disagree with the metadata or with a
    requested ``order``.
    """
    text = Path(path).read_text()
    meta, body, length = {}, [], None
    for n, line in enumerate(text.splitlines(), 1):
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["domain_length"] and len(parts) == 2:
                length = float(parts[1])
            elif len(parts) == 6 and parts[1] == "order" and parts[3] == "center":
                try:
                    meta[parts[0]] = (int(parts[2]), float(parts[4]), float(parts[5]))
                except ValueError:
                    raise SchemaError(f"{path}:{n}", "malformed metadata line") from None
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows or rows[0] != ["kernel", "region", "i", "j", "K_ij"]:
        raise SchemaError(str(path), "missing header kernel,region,i,j,K_ij")
    values = {}
    for n, row in enumerate(rows[1:], 2):
        if len(row) != 5:
            raise SchemaError(f"{path}:row {n}", "expected 5 columns")
        try:
            key = (int(row[0]), row[1] or None)
            values.setdefault(key, {})[(int(row[2]), int(row[3]))] = float(row[4])
        except ValueError:
            raise SchemaError(f"{path}:row {n}", "non-numeric entry") from None
    out = {}
    for key, vals in values.items():
        label = _label(*key)
        if label not in meta:
            raise SchemaError(str(path), f"no metadata line for {label}")
        n_meta, x0, xi0 = meta[label]
        if order is not None and n_meta != order:
            raise SchemaError(str(path), f"{label} has order {n_meta}, expected {order}")
        if len(vals) != idx_l(n_meta) or any(i > n_meta or j > i for i, j in vals):
            raise SchemaError(str(path), f"{label}: rows do not match order {n_meta}")
        coeffs = np.zeros(idx_l(n_meta))
        for (i, j), v in vals.items():
            coeffs[i * (i + 1) // 2 + j] = v
        out[key] = TriSeries(coeffs, n_meta, (x0, xi0))
    return out, length


def gain_table(report, n_points, L=None):
    """``xi`` grid on ``[0, L]`` and one ``K(L, xi)`` column per kernel.

    Split kernels are reported piecewise: region ``a`` for ``xi <= beta*L``,
    region ``b`` above.
    """
    L = report.domain_length if L is None else L
    beta = report.split_beta
    xi = np.linspace(0.0, L, n_points)
    xs = np.full_like(xi, L)
    cols = {}
    for s in report.kernels:
        if s.region is None:
            cols[f"K{s.kernel}"] = np.asarray(s.series(xs, xi))
    for s in report.kernels:
        if s.region is not None:
            name = f"K{s.kernel}"
            vals = np.asarray(s.series(xs, xi))
            below = xi <= beta * L
            mask = below if s.region == "a" else ~below
            col = cols.setdefault(name, np.zeros_like(xi))
            col[mask] = vals[mask]
    return xi, dict(sorted(cols.items(), key=lambda kv: int(kv[0][1:])))


def gain_csv(report, n_points, L=None) -> str:
    xi, cols = gain_table(report, n_points, L)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi"] + list(cols))
    for r in range(xi.size):
        w.writerow([fmt(xi[r])] + [fmt(c[r]) for c in cols.values()])
    return buf.getvalue()


def write_gain_csv(path, report, n_points, L=None):
    Path(path).write_text(gain_csv(report, n_points, L))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def report_json(report, **extra) -> str:
    """Report as JSON; wall time is left out so reruns are byte-identical."""
    doc = report.to_dict()
    doc.update(extra)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def write_report_json(path, report, **extra):
    Path(path).write_text(report_json(report, **extra))


def write_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")
