"""Dependency-free SVG scatter of projected valuations with cluster boxes."""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#2ca02c", "#ff7f0e", "#d62728", "#1f77b4", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def color(label: int) -> str:
    return PALETTE[(int(label) - 1) % len(PALETTE)]


def scatter_svg(points, labels, names: Sequence[str], bounds: Sequence[tuple[float, float]],
                boxes: Mapping[int, Sequence] | None = None, title: str = "",
                width: int = 520, height: int = 420) -> str:
    """Scatter of the first two parameters, colored by label, with box outlines.

    One-parameter data is drawn on a horizontal strip.  ``boxes`` maps labels to
    objects with ``lo``/``hi`` arrays (e.g. :class:`~strel_miner.boxtree.HyperBox`).
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[0] == 1 and X.shape[1] != len(names):
        X = X.T
    m, pad = 60, 20
    pw, ph = width - m - pad, height - m - pad
    (x0, x1) = bounds[0]
    (y0, y1) = bounds[1] if len(bounds) > 1 else (0.0, 1.0)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return m + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return pad + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{m}" y="{pad}" width="{pw}" height="{ph}" fill="white" stroke="black"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="14" text-anchor="middle">{escape(title)}</text>')
    for label, bs in (boxes or {}).items():
        for b in bs:
            bx0, bx1 = sx(b.lo[0]), sx(b.hi[0])
            by0, by1 = (sy(b.hi[1]), sy(b.lo[1])) if len(b.lo) > 1 else (pad, pad + ph)
            out.append(f'<rect x="{bx0:.2f}" y="{by0:.2f}" width="{bx1 - bx0:.2f}" '
                       f'height="{by1 - by0:.2f}" fill="{color(label)}" fill-opacity="0.12" '
                       f'stroke="{color(label)}" stroke-dasharray="4 2"/>')
    for p, lab in zip(X, labels):
        py = sy(p[1]) if X.shape[1] > 1 else pad + ph / 2
        out.append(f'<circle cx="{sx(p[0]):.2f}" cy="{py:.2f}" r="4" fill="{color(lab)}" '
                   f'stroke="black" stroke-width="0.5"/>')
    for k in range(5):
        v = x0 + (x1 - x0) * k / 4
        out.append(f'<text x="{sx(v):.1f}" y="{pad + ph + 14}" text-anchor="middle">{v:.4g}</text>')
        if len(names) > 1:
            w = y0 + (y1 - y0) * k / 4
            out.append(f'<text x="{m - 4}" y="{sy(w) + 4:.1f}" text-anchor="end">{w:.4g}</text>')
    out.append(f'<text x="{m + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">'
               f'{escape(names[0])}</text>')
    if len(names) > 1:
        out.append(f'<text x="14" y="{pad + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {pad + ph / 2:.1f})">{escape(names[1])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
