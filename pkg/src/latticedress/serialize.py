"""Byte-stable renderings of verification reports.

Both writers consume the ``records()`` view of a report and emit exactly
the same bytes for the same records.  Wall times and other run metadata
stay out on purpose.  Non-finite residuals (a check that raised instead
of producing a number) serialize as null / empty so the output stays
standard JSON and CSV.
"""

from __future__ import annotations

import io
import json
import math
from typing import Iterable, Mapping


def _clean(records: Iterable[Mapping]) -> list:
    out = []
    for rec in records:
        residual = rec["residual"]
        if residual is not None and not math.isfinite(residual):
            residual = None
        out.append(
            {
                "name": str(rec["name"]),
                "residual": residual,
                "tol": rec["tol"],
                "pass": bool(rec["pass"]),
            }
        )
    return out


def report_to_json(report) -> str:
    """Flat list of check records, two-space indent, trailing newline."""
    return json.dumps(_clean(report.records()), indent=2) + "\n"


def _csv_float(x) -> str:
    if x is None:
        return ""
    return "%.17e" % float(x)


def report_to_csv(report) -> str:
    """CSV with header name,residual,tol,pass at full double precision."""
    buf = io.StringIO()
    buf.write("name,residual,tol,pass\n")
    for rec in _clean(report.records()):
        buf.write(
            "%s,%s,%s,%s\n"
            % (
                rec["name"],
                _csv_float(rec["residual"]),
                _csv_float(rec["tol"]),
                "true" if rec["pass"] else "false",
            )
        )
    return buf.getvalue()


def render_report(report, fmt: str) -> str:
    if fmt == "json":
        return report_to_json(report)
    if fmt == "csv":
        return report_to_csv(report)
    raise ValueError("unknown report format: %r" % (fmt,))
