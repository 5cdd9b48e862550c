"""Static SVG line plots of a sweep, written by hand so output is byte-stable."""
from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional
from xml.sax.saxutils import escape

import numpy as np

from ..errors import EmptyResult

WIDTH, HEIGHT = 760, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 220, 40, 60
FONT = "DejaVu Sans, Arial, sans-serif"
PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
DASH = {"exact": "", "simulate": "6,3", "no_mobility_reference": "2,3"}
MARKERS = ("circle", "square", "triangle", "diamond")


def _nice_ticks(lo, hi, count=5) -> List[float]:
    if hi <= lo:
        hi = lo + (abs(lo) or 1.0)
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(t, 12))
    return ticks


def _fmt(v) -> str:
    return f"{v:.2f}"


def _label(v) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


def _marker(shape, x, y, color, size=4.0) -> str:
    if shape == "circle":
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(size)}" fill="none" stroke="{color}" stroke-width="1.5"/>'
    if shape == "square":
        return (f'<rect x="{_fmt(x - size)}" y="{_fmt(y - size)}" width="{_fmt(2 * size)}" '
                f'height="{_fmt(2 * size)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    if shape == "triangle":
        pts = [(x, y - size * 1.2), (x - size, y + size * 0.8), (x + size, y + size * 0.8)]
    else:
        pts = [(x, y - size * 1.2), (x - size, y), (x, y + size * 1.2), (x + size, y)]
    p = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
    return f'<polygon points="{p}" fill="none" stroke="{color}" stroke-width="1.5"/>'


def render_svg(result, *, xscale: Optional[str] = None, title: Optional[str] = None) -> str:
    """SVG text for ``result``; bound engines are drawn as markers, all others as lines."""
    cfg = result.config
    xscale = xscale or cfg.xscale
    keys = []
    for r in result.rows:
        if r.error is None and math.isfinite(r.value) and (r.engine, r.target) not in keys:
            keys.append((r.engine, r.target))
    if not keys:
        raise EmptyResult("nothing to plot: the result has no finite values")
    series = [(eng, tgt, *result.series(eng, tgt)) for eng, tgt in keys]
    xs = np.concatenate([s[2] for s in series])
    ys = np.concatenate([s[3] for s in series])
    logx = xscale == "log" and bool(np.all(xs > 0))

    tx = np.log10 if logx else (lambda a: np.asarray(a, dtype=float))
    if logx:
        lo, hi = math.floor(math.log10(xs.min())), math.ceil(math.log10(xs.max()))
        if lo == hi:
            hi += 1
        xticks = [10.0**k for k in range(lo, hi + 1)]
        xlo, xhi = float(lo), float(hi)
    else:
        xticks = _nice_ticks(float(xs.min()), float(xs.max()))
        xlo, xhi = xticks[0], xticks[-1]
    yticks = _nice_ticks(float(ys.min()), float(ys.max()))
    ylo, yhi = yticks[0], yticks[-1]
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (float(tx(x)) - xlo) / (xhi - xlo) * pw

    def py(y):
        return TOP + ph - (y - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="{FONT}" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xticks:
        x = px(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{TOP + ph}" x2="{_fmt(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{TOP + ph + 18}" text-anchor="middle">{escape(_label(t))}</text>')
    for t in yticks:
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{_fmt(y)}" x2="{LEFT + pw}" y2="{_fmt(y)}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end">{escape(_label(t))}</text>')
    xlabel = cfg.sweep_parameter + (" (log scale)" if logx else "")
    out.append(f'<text x="{_fmt(LEFT + pw / 2)}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{_fmt(TOP + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_fmt(TOP + ph / 2)})">version age</text>')
    heading = title if title is not None else (cfg.name or cfg.scenario)
    out.append(f'<text x="{_fmt(LEFT + pw / 2)}" y="{TOP - 14}" text-anchor="middle" font-size="14">{escape(heading)}</text>')

    n_marker = 0
    for k, (eng, tgt, x, y) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        order = np.argsort(x, kind="stable")
        pts = [(px(a), py(b)) for a, b in zip(x[order], y[order])]
        ly = TOP + 10 + 18 * k
        lx = LEFT + pw + 15
        if eng == "bounds":
            shape = MARKERS[n_marker % len(MARKERS)]
            n_marker += 1
            out.extend(_marker(shape, a, b, color) for a, b in pts)
            out.append(_marker(shape, lx + 12, ly, color))
        else:
            dash = DASH.get(eng, "")
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            p = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
            out.append(f'<polyline points="{p}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>')
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>')
        label = f"{eng} {tgt}".strip()
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(result, path=None, **style) -> str:
    """Render ``result`` and optionally write it to ``path``; returns the SVG text."""
    svg = render_svg(result, **style)
    if path is not None:
        Path(path).write_text(svg)
    return svg
