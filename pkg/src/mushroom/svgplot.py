"""Static SVG 1.1 line/scatter plots with no external renderer.

Deterministic output: same table in, same bytes out.
"""

from __future__ import annotations

import math


def _ticks(lo: float, hi: float, n: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(round(v, 12))
        v += step
    return out


def render_plot(xs, ys_list, labels, kind: str = "line",
                xlabel: str = "x", ylabel: str = "y",
                title: str = "", width: int = 640, height: int = 440,
                hline: float | None = None) -> str:
    """SVG text for one or more series sharing the x grid.

    ``ys_list`` is a list of y arrays; empty series produce axes only.
    ``hline`` draws a horizontal reference line (e.g. an asymptote).
    """
    ml, mr, mt, mb = 64, 20, 28, 48
    plot_w = width - ml - mr
    plot_h = height - mt - mb
    flat = [v for ys in ys_list for v in ys if math.isfinite(v)]
    if hline is not None:
        flat.append(hline)
    if xs is not None and len(xs) and flat:
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(flat), max(flat)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def X(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * plot_w

    def Y(v):
        return mt + (y_hi - v) / (y_hi - y_lo) * plot_h

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
              "#e377c2", "#7f7f7f"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for tv in _ticks(x_lo, x_hi):
        px = X(tv)
        parts.append(f'<line x1="{px:.2f}" y1="{mt + plot_h}" x2="{px:.2f}" '
                     f'y2="{mt + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{mt + plot_h + 18}" '
                     f'text-anchor="middle" font-size="11">{tv:g}</text>')
    for tv in _ticks(y_lo, y_hi):
        py = Y(tv)
        parts.append(f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" '
                     f'y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py + 4:.2f}" text-anchor="end" '
                     f'font-size="11">{tv:g}</text>')
    parts.append(f'<text x="{ml + plot_w / 2:.1f}" y="{height - 10}" '
                 f'text-anchor="middle" font-size="12">{xlabel}</text>')
    parts.append(f'<text x="16" y="{mt + plot_h / 2:.1f}" text-anchor="middle" '
                 f'font-size="12" transform="rotate(-90 16 {mt + plot_h / 2:.1f})"'
                 f'>{ylabel}</text>')
    if hline is not None:
        py = Y(hline)
        parts.append(f'<line x1="{ml}" y1="{py:.2f}" x2="{ml + plot_w}" '
                     f'y2="{py:.2f}" stroke="#888" stroke-dasharray="6,4"/>')
    for si, ys in enumerate(ys_list):
        color = colors[si % len(colors)]
        pts = [(X(x), Y(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
        if not pts:
            continue
        if kind == "line":
            d = "M " + " L ".join(f"{px:.2f} {py:.2f}" for px, py in pts)
            parts.append(f'<path d="{d}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        else:
            for px, py in pts:
                parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" '
                             f'fill="{color}"/>')
        if labels and si < len(labels) and labels[si]:
            parts.append(f'<text x="{ml + plot_w - 6}" '
                         f'y="{mt + 16 + 14 * si}" text-anchor="end" '
                         f'font-size="11" fill="{color}">{labels[si]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
