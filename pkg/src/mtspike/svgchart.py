"""Minimal static SVG line charts, no plotting dependency."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence, Tuple

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"]

Series = Tuple[str, Sequence[Tuple[float, float]]]


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
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


def _panel(lines, x0, y0, w, h, title, x_label, y_label, series, log_x):
    xs = [p[0] for _, pts in series for p in pts]
    ys = [p[1] for _, pts in series for p in pts]
    if not xs:
        return
    fx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    x_lo, x_hi = min(fx(v) for v in xs), max(fx(v) for v in xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v):
        return x0 + (fx(v) - x_lo) / (x_hi - x_lo) * w

    def py(v):
        return y0 + h - (v - y_lo) / (y_hi - y_lo) * h

    lines.append(
        f'<text x="{x0 + w / 2:.1f}" y="{y0 - 14}" text-anchor="middle" '
        f'font-size="15" font-family="sans-serif">{_escape(title)}</text>'
    )
    lines.append(
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#000"/>'
    )
    for tv in _ticks(y_lo, y_hi):
        y = py(tv)
        lines.append(f'<line x1="{x0}" y1="{y:.1f}" x2="{x0 + w}" y2="{y:.1f}" stroke="#e0e0e0"/>')
        lines.append(
            f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{tv:g}</text>'
        )
    x_tick_vals = sorted(set(xs)) if len(set(xs)) <= 9 else _ticks(x_lo, x_hi)
    for tv in x_tick_vals:
        x = px(tv) if len(set(xs)) <= 9 else x0 + (tv - x_lo) / (x_hi - x_lo) * w
        label = f"{tv:.3g}" if len(set(xs)) <= 9 else f"{10 ** tv:.3g}" if log_x else f"{tv:g}"
        lines.append(
            f'<line x1="{x:.1f}" y1="{y0 + h}" x2="{x:.1f}" y2="{y0 + h + 5}" stroke="#000"/>'
        )
        lines.append(
            f'<text x="{x:.1f}" y="{y0 + h + 18}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{label}</text>'
        )
    for idx, (label, pts) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        pts = sorted(pts)
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{path}"/>')
        for x, y in pts:
            lines.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly = y0 + 16 + idx * 18
        lines.append(
            f'<line x1="{x0 + w - 130}" y1="{ly}" x2="{x0 + w - 108}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{x0 + w - 102}" y="{ly + 4}" font-size="12" '
            f'font-family="sans-serif">{_escape(label)}</text>'
        )
    lines.append(
        f'<text x="{x0 + w / 2:.1f}" y="{y0 + h + 36}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{_escape(x_label)}</text>'
    )
    lines.append(
        f'<text x="{x0 - 52}" y="{y0 + h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 {x0 - 52} {y0 + h / 2:.1f})">'
        f"{_escape(y_label)}</text>"
    )


def write_line_chart(path, title, x_label, y_label, series: Sequence[Series], log_x=False) -> None:
    """One-panel line chart."""
    write_panels(path, [(title, x_label, y_label, series)], log_x=log_x)


def write_panels(path, panels, log_x=False) -> None:
    """Side-by-side line-chart panels: (title, x_label, y_label, series) each."""
    n = len(panels)
    pw, ph = 420, 300
    width = 90 + n * (pw + 70)
    height = ph + 110
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    for i, (title, x_label, y_label, series) in enumerate(panels):
        _panel(lines, 90 + i * (pw + 70), 40, pw, ph, title, x_label, y_label, series, log_x)
    lines.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
