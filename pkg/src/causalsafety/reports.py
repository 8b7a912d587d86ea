"""Report emission: metric tables as JSON/CSV, tornado charts as SVG.

Infinity is written as the string "inf" in both JSON and CSV so ranked
reports stay parseable; undefined (0/0) values become null / "undefined".
All emitters are deterministic functions of their inputs.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

from causalsafety.analysis import MetricReport
from causalsafety.metrics import MetricValue, TornadoRow


def _json_value(value: float | None):
    if value is None:
        return None
    if math.isinf(value):
        return "inf"
    return value


def _csv_value(value: float | None) -> str:
    if value is None:
        return "undefined"
    if math.isinf(value):
        return "inf"
    return repr(value)


def metric_values_to_json(values: Sequence[MetricValue]) -> list[dict]:
    return [{
        "metric": v.metric,
        "variable": v.variable,
        "state_or_path": v.detail,
        "value": _json_value(v.value),
        "numerator": _json_value(v.numerator),
        "denominator": _json_value(v.denominator),
        "queries": {k: _json_value(x) for k, x in v.queries},
    } for v in values]


def report_to_json(report: MetricReport) -> str:
    doc = {
        "target": {"variable": report.target.variable, "state": report.target.state},
        "baseline": report.baseline,
        "metrics": metric_values_to_json(report.values),
        "errors": [{"subject": s, "message": m} for s, m in report.errors],
    }
    return json.dumps(doc, indent=2)


def metric_values_to_csv(values: Sequence[MetricValue]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "variable", "state_or_path", "value", "numerator", "denominator"])
    for v in values:
        writer.writerow([v.metric, v.variable, v.detail, _csv_value(v.value),
                         _csv_value(v.numerator) if v.numerator is not None else "",
                         _csv_value(v.denominator) if v.denominator is not None else ""])
    return buf.getvalue()


def report_to_csv(report: MetricReport) -> str:
    return metric_values_to_csv(report.values)


def tornado_to_json(rows: Sequence[TornadoRow]) -> str:
    return json.dumps([{
        "variable": r.variable,
        "state": r.state,
        "conditional": r.conditional,
        "interventional": r.interventional,
        "baseline": r.baseline,
    } for r in rows], indent=2)


def tornado_to_csv(rows: Sequence[TornadoRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variable", "state", "conditional", "interventional", "baseline"])
    for r in rows:
        writer.writerow([r.variable, r.state, repr(r.conditional),
                         repr(r.interventional), repr(r.baseline)])
    return buf.getvalue()


def tornado_to_svg(rows: Sequence[TornadoRow], title: str = "") -> str:
    """Standalone SVG bar chart: per subject one conditional and one
    interventional bar anchored at the baseline line."""
    width, row_height, label_width, pad = 760, 34, 190, 14
    chart_w = width - label_width - 2 * pad
    height = 2 * pad + row_height * len(rows) + 40
    top_pad = pad + 24
    if rows:
        span = max(max(r.conditional, r.interventional, r.baseline) for r in rows)
    else:
        span = 1.0
    span = span * 1.05 or 1.0

    def x(p: float) -> float:
        return label_width + pad + chart_w * (p / span)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{pad}" y="{pad + 4}" font-weight="bold">{title or "Tornado chart"}</text>',
    ]
    if rows:
        bx = x(rows[0].baseline)
        parts.append(f'<line x1="{bx:.2f}" y1="{top_pad - 6}" x2="{bx:.2f}" '
                     f'y2="{top_pad + row_height * len(rows)}" stroke="#444" stroke-dasharray="4 3"/>')
        parts.append(f'<text x="{bx:.2f}" y="{top_pad + row_height * len(rows) + 16}" '
                     f'text-anchor="middle" fill="#444">baseline {rows[0].baseline:.3e}</text>')
    for i, r in enumerate(rows):
        y0 = top_pad + i * row_height
        base_x = x(r.baseline)
        for j, (prob, color) in enumerate(((r.conditional, "#888888"),
                                           (r.interventional, "#1f77b4"))):
            px = x(prob)
            yb = y0 + 4 + j * 12
            left, bar_w = (min(px, base_x), abs(px - base_x))
            parts.append(f'<rect x="{left:.2f}" y="{yb}" width="{max(bar_w, 0.5):.2f}" '
                         f'height="10" fill="{color}"/>')
        parts.append(f'<text x="{label_width}" y="{y0 + 18}" text-anchor="end">{r.label}</text>')
    legend_y = height - 8
    parts.append(f'<rect x="{label_width + pad}" y="{legend_y - 10}" width="10" height="10" fill="#888888"/>')
    parts.append(f'<text x="{label_width + pad + 14}" y="{legend_y}">conditional</text>')
    parts.append(f'<rect x="{label_width + pad + 110}" y="{legend_y - 10}" width="10" height="10" fill="#1f77b4"/>')
    parts.append(f'<text x="{label_width + pad + 124}" y="{legend_y}">interventional</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def cut_sets_to_json(cut_sets) -> str:
    ordered = sorted(sorted(s) for s in cut_sets)
    return json.dumps([list(s) for s in ordered], indent=2)
