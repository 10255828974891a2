"""Minimal deterministic SVG line plots and heatmaps."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(step))
    for m in (1, 2, 5, 10):
        if step <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    x = start
    while x <= hi + 1e-12 * abs(hi):
        out.append(round(x, 12))
        x += step
    return out


def _label(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e5 or abs(x) < 1e-3:
        return f"{x:.1e}"
    return f"{x:g}"


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], title: str = "",
              xlabel: str = "", ylabel: str = "", logy: bool = False, width: int = 640,
              height: int = 400, markers: bool = False) -> str:
    """Render ``(label, xs, ys)`` series as an SVG document.

    With ``logy`` the y axis is log10 and nonpositive values are skipped.
    """
    ml, mr, mt, mb = 70, 20, 40, 50
    pts = []
    for label, xs, ys in series:
        pp = []
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y):
                continue
            if logy:
                if y <= 0:
                    continue
                y = math.log10(y)
            pp.append((float(x), float(y)))
        pts.append((label, pp))
    allx = [p[0] for _, pp in pts for p in pp] or [0.0, 1.0]
    ally = [p[1] for _, pp in pts for p in pp] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    W, H = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * W

    def sy(y):
        return mt + H - (y - y0) / (y1 - y0) * H

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{ml}" y="{mt}" width="{W}" height="{H}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{_fmt(sx(t))}" y1="{mt + H}" x2="{_fmt(sx(t))}" y2="{mt + H + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(t))}" y="{mt + H + 16}" text-anchor="middle">{_label(t)}</text>')
    for t in _ticks(y0, y1):
        lab = _label(10**t) if logy else _label(t)
        out.append(f'<line x1="{ml - 4}" y1="{_fmt(sy(t))}" x2="{ml}" y2="{_fmt(sy(t))}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{ml + W / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    ylab = ylabel + (" (log scale)" if logy else "")
    out.append(f'<text x="16" y="{mt + H / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + H / 2:.1f})">{escape(ylab)}</text>')
    for k, (label, pp) in enumerate(pts):
        col = _COLORS[k % len(_COLORS)]
        if pp:
            d = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pp)
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{d}"/>')
            if markers:
                for x, y in pp:
                    out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2" fill="{col}"/>')
        out.append(f'<text x="{ml + 10}" y="{mt + 16 + 14 * k}" fill="{col}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmaps(grids: Sequence[tuple[str, dict]], title: str = "", cell: int = 3) -> str:
    """Side-by-side heatmaps of ``{(x, y): value}`` grids (log color scale)."""
    panels = []
    for label, g in grids:
        xs = [p[0] for p in g] or [0]
        ys = [p[1] for p in g] or [0]
        panels.append((label, g, max(xs) + 1, max(ys) + 1))
    gap = 30
    width = sum(w * cell for _, _, w, _ in panels) + gap * (len(panels) + 1)
    height = max((h * cell for _, _, _, h in panels), default=10) + 80
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x_off = gap
    for label, g, w, h in panels:
        vals = [math.log(float(v)) for v in g.values() if v > 0]
        lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
        span = hi - lo or 1.0
        base = 50 + h * cell
        out.append(f'<text x="{x_off}" y="40">{escape(label)}</text>')
        for (x, y) in sorted(g):
            v = g[(x, y)]
            if v <= 0:
                continue
            s = (math.log(float(v)) - lo) / span
            r = int(255 * s)
            b = int(255 * (1 - s))
            out.append(f'<rect x="{x_off + x * cell}" y="{base - (y + 1) * cell}" width="{cell}" '
                       f'height="{cell}" fill="rgb({r},40,{b})"/>')
        x_off += w * cell + gap
    out.append("</svg>")
    return "\n".join(out) + "\n"
