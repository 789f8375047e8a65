"""Minimal SVG line charts for rejection-rate tables (no plotting dependency)."""
from __future__ import annotations

import csv
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

W, H = 480, 320
LEFT, RIGHT, TOP, BOTTOM = 56, 120, 20, 44


def read_rates(path, x_col: str | None = None) -> tuple[str, dict[str, list[tuple[float, float]]]]:
    """Read ``x,method,reject_rate,...`` rows, skipping ``#`` comment lines.

    The x column is the first column unless ``x_col`` is given.
    """
    with open(path, newline="") as f:
        lines = [ln for ln in f if ln.strip() and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    cols = list(rows[0].keys())
    x_col = x_col or cols[0]
    for need in (x_col, "method", "reject_rate"):
        if need not in cols:
            raise ValueError(f"{path}: missing column {need!r}")
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        series.setdefault(r["method"], []).append((float(r[x_col]), float(r["reject_rate"])))
    for pts in series.values():
        pts.sort()
    return x_col, series


def render_svg(series: dict[str, list[tuple[float, float]]], xlabel: str = "delta",
               ylabel: str = "rejection rate", title: str = "", alpha: float | None = None) -> str:
    if not series or not any(series.values()):
        raise ValueError("nothing to plot")
    xs = [x for pts in series.values() for x, _ in pts]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + (1.0 - y) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{LEFT + pw / 2:.1f}" y="14" text-anchor="middle">{escape(title)}</text>')
    # axes and ticks
    out.append(f'<line x1="{LEFT}" y1="{sy(0):.1f}" x2="{LEFT + pw}" y2="{sy(0):.1f}" stroke="black"/>')
    out.append(f'<line x1="{LEFT}" y1="{sy(0):.1f}" x2="{LEFT}" y2="{sy(1):.1f}" stroke="black"/>')
    for k in range(6):
        y = k / 5
        out.append(f'<line x1="{LEFT - 4}" y1="{sy(y):.1f}" x2="{LEFT}" y2="{sy(y):.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 7}" y="{sy(y) + 4:.1f}" text-anchor="end">{y:.1f}</text>')
    for x in sorted(set(xs)):
        out.append(f'<line x1="{sx(x):.1f}" y1="{sy(0):.1f}" x2="{sx(x):.1f}" y2="{sy(0) + 4:.1f}" stroke="black"/>')
        out.append(f'<text x="{sx(x):.1f}" y="{sy(0) + 16:.1f}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>')
    if alpha is not None:
        out.append(f'<line x1="{LEFT}" y1="{sy(alpha):.1f}" x2="{LEFT + pw}" y2="{sy(alpha):.1f}" '
                   'stroke="gray" stroke-dasharray="4 3"/>')
    # one polyline per method, or a marker when it has a single point
    for i, (name, pts) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        if len(pts) > 1:
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
        ly = TOP + 14 + 18 * i
        lx = LEFT + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
