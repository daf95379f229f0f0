"""Minimal SVG line plots, enough to eyeball the CSV outputs."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def line_plot(path, x, series: dict, xlabel: str = "", ylabel: str = "", width=640, height=400):
    """Write ``series`` (label -> y array) against ``x``; NaN samples break the line."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    y_lo, y_hi = float(finite.min()), float(finite.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    margin = 50
    pw, ph = width - 2 * margin, height - 2 * margin

    def sx(v):
        return margin + pw * (v - x[0]) / (x[-1] - x[0])

    def sy(v):
        return margin + ph * (y_hi - v) / (y_hi - y_lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if y_lo < 0 < y_hi:
        parts.append(
            f'<line x1="{margin}" x2="{margin + pw}" y1="{sy(0):.2f}" y2="{sy(0):.2f}" stroke="#999" stroke-dasharray="4"/>'
        )
    for i, (label, y) in enumerate(ys.items()):
        color = COLORS[i % len(COLORS)]
        runs, current = [], []
        for xv, yv in zip(x, y):
            if np.isfinite(yv):
                current.append(f"{sx(xv):.2f},{sy(yv):.2f}")
            elif current:
                runs.append(current)
                current = []
        if current:
            runs.append(current)
        for run in runs:
            parts.append(f'<polyline fill="none" stroke="{color}" points="{" ".join(run)}"/>')
        parts.append(
            f'<text x="{margin + 10}" y="{margin + 18 * (i + 1)}" fill="{color}" font-size="12">{escape(label)}</text>'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})">{escape(ylabel)}</text>'
    )
    parts.append(
        f'<text x="{margin}" y="{margin - 6}" font-size="10">y: [{y_lo:.3g}, {y_hi:.3g}]  x: [{x[0]:.3g}, {x[-1]:.3g}]</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
