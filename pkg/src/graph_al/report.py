"""CSV and SVG output for experiment results."""

from __future__ import annotations

import csv
import io
import json
import math
from html import escape

import numpy as np

RESULT_COLUMNS = ("graph", "method", "budget", "run", "seed", "micro_f1", "macro_f1")


def ci_halfwidth(values) -> float:
    """95% normal-approximation half-width, ``1.96 * s / sqrt(n)`` with sample std ``s``."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    return float(1.96 * v.std(ddof=1) / math.sqrt(v.size))


def header_comments(config: dict) -> str:
    lines = [f"# seed={config.get('seed')}"]
    lines.append("# config=" + json.dumps(config, sort_keys=True, default=str))
    return "\n".join(lines) + "\n"


def write_csv(stream, rows, columns, config: dict | None = None) -> None:
    if config is not None:
        stream.write(header_comments(config))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def read_csv(text: str) -> list[dict]:
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def result_rows(graph: str, method: str, budget: int, result) -> list[dict]:
    return [{"graph": graph, "method": method, "budget": budget, "run": r, "seed": result.seeds[r],
             "micro_f1": float(result.micro[r]), "macro_f1": float(result.macro[r])}
            for r in range(len(result.seeds))]


def summary_rows(graph: str, method: str, budget: int, result) -> list[dict]:
    return [
        {"graph": graph, "method": method, "budget": budget, "run": "mean", "seed": "",
         "micro_f1": result.mean_micro, "macro_f1": result.mean_macro},
        {"graph": graph, "method": method, "budget": budget, "run": "std", "seed": "",
         "micro_f1": result.std_micro, "macro_f1": result.std_macro},
    ]


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")


def line_chart_svg(series: dict, xlabel: str = "budget", ylabel: str = "micro-F1",
                   width: int = 640, height: int = 420) -> str:
    """Mean curves with shaded confidence bands.

    ``series`` maps a label to ``(xs, means, halfwidths)``. Each series is one
    ``<polyline>``; bands are ``<polygon>`` elements.
    """
    left, right, top, bottom = 60, 140, 20, 50
    xs_all = [x for xs, _, _ in series.values() for x in xs]
    lo = [m - h for _, ms, hs in series.values() for m, h in zip(ms, hs)]
    hi = [m + h for _, ms, hs in series.values() for m, h in zip(ms, hs)]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(lo), max(hi)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1e-3
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for x in sorted(set(xs_all)):
        out.append(f'<text x="{px(x):.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">{x:g}</text>')
    for i in range(5):
        y = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{left - 6}" y="{py(y) + 4:.2f}" font-size="11" text-anchor="end">{y:.3f}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>')
    for i, (name, (xs, ms, hs)) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        upper = [f"{px(x):.2f},{py(m + h):.2f}" for x, m, h in zip(xs, ms, hs)]
        lower = [f"{px(x):.2f},{py(m - h):.2f}" for x, m, h in zip(xs, ms, hs)]
        out.append(f'<polygon points="{" ".join(upper + lower[::-1])}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{px(x):.2f},{py(m):.2f}" for x, m in zip(xs, ms))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 16 * (i + 1)
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
