"""Minimal log2-log2 line plots written directly as SVG markup."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 420, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def loglog_svg(
    series: dict,
    title: str = "",
    xlabel: str = "R",
    ylabel: str = "value",
    predicted_slope: float | None = None,
) -> str:
    """SVG text for ``{label: (xs, ys)}`` on log2 axes.

    With ``predicted_slope`` a dashed reference line of that slope is drawn
    through the geometric mean of the first series.
    """
    lines = {k: (np.log2(np.asarray(x, float)), np.log2(np.asarray(y, float))) for k, (x, y) in series.items()}
    lines = {k: v for k, v in lines.items() if len(v[0])}
    ref = None
    if predicted_slope is not None and lines:
        lx, ly = next(iter(lines.values()))
        x0, y0 = lx.mean(), ly.mean()
        xs = np.array([lx.min(), lx.max()])
        ref = (xs, y0 + predicted_slope * (xs - x0))
    every = list(lines.values()) + ([ref] if ref is not None else [])
    if every:
        xall = np.concatenate([v[0] for v in every])
        yall = np.concatenate([v[1] for v in every])
        xlo, xhi = math.floor(xall.min()), math.ceil(xall.max())
        ylo, yhi = math.floor(yall.min()), math.ceil(yall.max())
    else:
        xlo, xhi, ylo, yhi = 0, 1, 0, 1
    xhi = max(xhi, xlo + 1)
    yhi = max(yhi, ylo + 1)

    def px(x):
        return MARGIN + (x - xlo) / (xhi - xlo) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - ylo) / (yhi - ylo) * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    xstep = max(1, (xhi - xlo) // 10)
    for k in range(xlo, xhi + 1, xstep):
        out.append(f'<text x="{px(k):.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">2^{k}</text>')
    ystep = max(1, (yhi - ylo) // 10)
    for k in range(ylo, yhi + 1, ystep):
        out.append(f'<text x="{MARGIN - 6}" y="{py(k) + 4:.1f}" text-anchor="end">2^{k}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)} (log2)</text>')
    out.append(
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 15 {HEIGHT / 2})">'
        f"{escape(ylabel)} (log2)</text>"
    )
    for i, (label, (lx, ly)) in enumerate(lines.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in zip(lx, ly):
            out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 * i}" text-anchor="end" fill="{color}">{escape(str(label))}</text>')
    if ref is not None:
        (a0, a1), (b0, b1) = ref
        out.append(
            f'<line x1="{px(a0):.2f}" y1="{py(b0):.2f}" x2="{px(a1):.2f}" y2="{py(b1):.2f}" '
            f'stroke="gray" stroke-dasharray="6,4"/>'
        )
        out.append(
            f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 * len(lines)}" text-anchor="end" fill="gray">'
            f"predicted slope {predicted_slope:.4g}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
