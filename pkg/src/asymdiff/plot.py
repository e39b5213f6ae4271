"""Deterministic SVG line plots of MSD learning curves."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .metrics import ZERO_MSD_DB, read_msd_csv

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

WIDTH, HEIGHT = 720, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 50


def _nice_ticks(lo, hi, count=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def _fmt(v):
    return f"{v:.2f}"


def render_svg(series, title="Network MSD"):
    """SVG text for ``{algorithm: (iterations, msd_db)}``.

    Colors follow the sorted algorithm names so a given name always gets the
    same color for the same set of series.
    """
    if not series:
        raise ValueError("no data rows")
    names = sorted(series)
    colors = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(names)}

    xs = np.concatenate([np.asarray(series[n][0], dtype=float) for n in names])
    ys = np.concatenate([np.asarray(series[n][1], dtype=float) for n in names])
    finite = ys[np.isfinite(ys) & (ys > ZERO_MSD_DB)]
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (-1.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    yticks = _nice_ticks(y_lo, y_hi)
    y_lo, y_hi = min(y_lo, yticks[0]), max(y_hi, yticks[-1])
    xticks = _nice_ticks(x_lo, x_hi)

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.2f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xticks:
        if x_lo <= t <= x_hi:
            x = px(t)
            out.append(f'<line x1="{_fmt(x)}" y1="{TOP + ph}" x2="{_fmt(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(x)}" y="{TOP + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in yticks:
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{_fmt(y)}" x2="{LEFT + pw}" y2="{_fmt(y)}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">iteration</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">MSD (dB)</text>')

    for name in names:
        it, db = (np.asarray(a, dtype=float) for a in series[name])
        keep = np.isfinite(db) & (db > ZERO_MSD_DB)
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(it[keep], db[keep]))
        if pts:
            out.append(f'<polyline fill="none" stroke="{colors[name]}" stroke-width="1.5" points="{pts}"/>')

    for i, name in enumerate(names):
        y = TOP + 10 + 18 * i
        x = LEFT + pw + 15
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{colors[name]}" stroke-width="2"/>')
        out.append(f'<text x="{x + 26}" y="{y + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path, title="Network MSD"):
    with open(csv_path, newline="", encoding="utf-8") as fh:
        series = read_msd_csv(fh)
    return render_svg(series, title)
