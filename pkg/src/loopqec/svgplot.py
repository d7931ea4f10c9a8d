"""A small SVG line-chart writer for CSV curves."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
W, H, PAD = 640, 420, 60


def read_curves(path: str, x: str, y: str, group: str | None = None) -> dict:
    curves = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = row[group] if group else y
            curves[key].append((float(row[x]), float(row[y])))
    return {k: sorted(v) for k, v in curves.items()}


def _scale(lo, hi, log):
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    span = (hi - lo) or 1.0
    return lambda v: ((math.log10(v) if log else v) - lo) / span


def line_chart(curves: dict, xlabel: str = "", ylabel: str = "", title: str = "", logy: bool = False) -> str:
    pts = [p for c in curves.values() for p in c if not (logy and p[1] <= 0)]
    if not pts:
        raise ValueError("nothing to plot")
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    fx, fy = _scale(min(xs), max(xs), False), _scale(min(ys), max(ys), logy)

    def px(x, y):
        return PAD + fx(x) * (W - 2 * PAD), H - PAD - fy(y) * (H - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{PAD / 2}" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="15" y="{H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {H / 2})">{escape(ylabel)}</text>',
    ]
    for v, anchor in ((min(xs), "start"), (max(xs), "end")):
        x, _ = px(v, min(ys) if not logy else min(ys))
        out.append(f'<text x="{x:.1f}" y="{H - PAD + 18}" text-anchor="{anchor}" font-size="11">{v:g}</text>')
    for v in (min(ys), max(ys)):
        _, y = px(min(xs), v)
        out.append(f'<text x="{PAD - 5}" y="{y:.1f}" text-anchor="end" font-size="11">{v:.3g}</text>')
    for i, (name, curve) in enumerate(sorted(curves.items(), key=lambda kv: str(kv[0]))):
        colour = PALETTE[i % len(PALETTE)]
        coords = " ".join("%.1f,%.1f" % px(x, y) for x, y in curve if not (logy and y <= 0))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{coords}"/>')
        ly = PAD + 18 * i
        out.append(f'<text x="{W - PAD + 5}" y="{ly}" font-size="12" fill="{colour}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
