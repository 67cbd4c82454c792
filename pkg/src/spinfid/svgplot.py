"""Minimal hand-rolled SVG charts: polylines, scatters, and a fitted line.

Text-only output so sweep results render anywhere; no drawing library.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 860, 560
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 30, 50, 60
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f"]


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0]
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    span = hi - lo
    raw = span / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks or [lo]


class Chart:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.series = []   # (label, xs, ys, mode)

    def add_line(self, label, xs, ys):
        self.series.append((label, list(xs), list(ys), "line"))

    def add_points(self, label, xs, ys):
        self.series.append((label, list(xs), list(ys), "points"))

    def _extent(self):
        xs = [x for _, sx, _, _ in self.series for x in sx]
        ys = [y for _, _, sy, _ in self.series for y in sy]
        if not xs:
            raise ValueError("nothing to plot")
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        x0, x1, y0, y1 = self._extent()
        iw = WIDTH - MARGIN_L - MARGIN_R
        ih = HEIGHT - MARGIN_T - MARGIN_B

        def px(x):
            return MARGIN_L + (x - x0) / (x1 - x0) * iw

        def py(y):
            return MARGIN_T + (y1 - y) / (y1 - y0) * ih

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="17">'
            f'{self.title}</text>',
        ]
        for t in _nice_ticks(x0, x1):
            if not x0 <= t <= x1:
                continue
            out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN_T}" x2="{px(t):.2f}" '
                       f'y2="{HEIGHT - MARGIN_B}" stroke="#e0e0e0"/>')
            out.append(f'<text x="{px(t):.2f}" y="{HEIGHT - MARGIN_B + 20}" '
                       f'text-anchor="middle" font-size="12">{t:g}</text>')
        for t in _nice_ticks(y0, y1):
            if not y0 <= t <= y1:
                continue
            out.append(f'<line x1="{MARGIN_L}" y1="{py(t):.2f}" x2="{WIDTH - MARGIN_R}" '
                       f'y2="{py(t):.2f}" stroke="#e0e0e0"/>')
            out.append(f'<text x="{MARGIN_L - 8}" y="{py(t) + 4:.2f}" '
                       f'text-anchor="end" font-size="12">{t:g}</text>')
        out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{iw}" height="{ih}" '
                   f'fill="none" stroke="#333"/>')
        out.append(f'<text x="{MARGIN_L + iw / 2:.1f}" y="{HEIGHT - 14}" '
                   f'text-anchor="middle" font-size="14">{self.xlabel}</text>')
        out.append(f'<text x="20" y="{MARGIN_T + ih / 2:.1f}" text-anchor="middle" '
                   f'font-size="14" transform="rotate(-90 20 {MARGIN_T + ih / 2:.1f})">'
                   f'{self.ylabel}</text>')

        for si, (label, xs, ys, mode) in enumerate(self.series):
            color = PALETTE[si % len(PALETTE)]
            if mode == "line":
                pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                           f'stroke-width="1.8"/>')
            else:
                for x, y in zip(xs, ys):
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" '
                               f'fill="{color}"/>')
            ly = MARGIN_T + 16 + 18 * si
            out.append(f'<line x1="{WIDTH - MARGIN_R - 150}" y1="{ly - 4}" '
                       f'x2="{WIDTH - MARGIN_R - 122}" y2="{ly - 4}" stroke="{color}" '
                       f'stroke-width="3"/>')
            out.append(f'<text x="{WIDTH - MARGIN_R - 116}" y="{ly}" font-size="12">'
                       f'{label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
