"""Result rows and their table / comma-separated rendering."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

HEADER = ("test_id", "inputs", "value", "residual", "tolerance", "pass")


@dataclass(frozen=True)
class ResultRow:
    test_id: str
    inputs: str = ""
    value: float | None = None
    residual: float | None = None
    tolerance: float | None = None
    passed: bool | str | None = None


def fmt_float(x, digits=17):
    if x is None:
        return ""
    return format(float(x) + 0.0, f".{digits}g")  # + 0.0 drops the sign of -0.0


def fmt_vector(v, digits=17):
    return "(" + ",".join(fmt_float(c, digits) for c in np.asarray(v, dtype=float)) + ")"


def _fmt_pass(p):
    if p is None:
        return ""
    if isinstance(p, str):
        return p
    return "true" if p else "false"


def _cells(row, digits):
    return [
        row.test_id,
        row.inputs,
        fmt_float(row.value, digits),
        fmt_float(row.residual, digits),
        fmt_float(row.tolerance, digits),
        _fmt_pass(row.passed),
    ]


def emit_results(rows, format="csv"):
    """Render rows. ``csv`` uses a fixed header, 17 significant digits and LF endings."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(_cells(row, 17))
        return buf.getvalue()
    if format == "table":
        table = [list(HEADER)] + [_cells(row, 10) for row in rows]
        widths = [max(len(r[i]) for r in table) for i in range(len(HEADER))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")


def check_rows(reports, prefix="check"):
    rows = []
    for rep in reports:
        where = "" if rep.where is None else "at " + ",".join(str(w) for w in rep.where)
        rows.append(ResultRow(f"{prefix}.{rep.name}", where, rep.residual, rep.residual, rep.tolerance, rep.passed))
    return rows


def geodesic_rows(report):
    inputs = "X=" + fmt_vector(report.vector)
    fin_pass = "degenerate" if report.degenerate else report.is_geodesic_finsler
    return [
        ResultRow("gv.riemannian", inputs, report.riemannian_residual, report.riemannian_residual,
                  report.tolerance, report.is_geodesic_riemannian),
        ResultRow(f"gv.finsler.over_{report.quantifier}", inputs, report.finsler_residual,
                  report.finsler_residual, report.tolerance, fin_pass),
    ]
