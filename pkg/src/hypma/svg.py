"""Minimal standalone SVG output for diagnostic plots."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

WIDTH = 640
HEIGHT = 480
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class _Frame:
    """Maps data coordinates into the plot area; optional log axes."""

    def __init__(self, xs, ys, logx=False, logy=False, equal=False):
        self.logx, self.logy = logx, logy
        x = self._t(np.concatenate([np.ravel(v) for v in xs]), logx)
        y = self._t(np.concatenate([np.ravel(v) for v in ys]), logy)
        x, y = x[np.isfinite(x)], y[np.isfinite(y)]
        self.x0, self.x1 = (x.min(), x.max()) if x.size else (0.0, 1.0)
        self.y0, self.y1 = (y.min(), y.max()) if y.size else (0.0, 1.0)
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5
        self.sx = (WIDTH - 2 * MARGIN) / (self.x1 - self.x0)
        self.sy = (HEIGHT - 2 * MARGIN) / (self.y1 - self.y0)
        if equal:
            self.sx = self.sy = min(self.sx, self.sy)

    @staticmethod
    def _t(v, log):
        v = np.asarray(v, dtype=float)
        if not log:
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log10(v), np.nan)

    def map(self, x, y):
        px = MARGIN + (self._t(x, self.logx) - self.x0) * self.sx
        py = HEIGHT - MARGIN - (self._t(y, self.logy) - self.y0) * self.sy
        return px, py


def _path(px, py, color, width=1.0):
    ok = np.isfinite(px) & np.isfinite(py)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px[ok], py[ok]))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
            f'points="{pts}"/>')


def _doc(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    frame = (f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
             f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#999"/>')
    text = f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{title}</text>'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', frame, text, *body, "</svg>\n"])


def _ticks(fr: _Frame) -> list[str]:
    out = []
    for lo, hi, log, horiz in ((fr.x0, fr.x1, fr.logx, True), (fr.y0, fr.y1, fr.logy, False)):
        if log:
            vals = range(math.floor(lo), math.ceil(hi) + 1)
            labels = [(v, f"1e{v}") for v in vals if lo - 1e-9 <= v <= hi + 1e-9]
        else:
            labels = [(v, f"{v:.3g}") for v in np.linspace(lo, hi, 5)]
        for v, lab in labels:
            if horiz:
                px = MARGIN + (v - fr.x0) * fr.sx
                out.append(f'<text x="{px:.1f}" y="{HEIGHT - MARGIN + 16}" font-size="10" '
                           f'text-anchor="middle">{lab}</text>')
            else:
                py = HEIGHT - MARGIN - (v - fr.y0) * fr.sy
                out.append(f'<text x="{MARGIN - 4}" y="{py:.1f}" font-size="10" '
                           f'text-anchor="end">{lab}</text>')
    return out


def mapped_grid(path, m: np.ndarray, target_polyline: np.ndarray | None = None,
                stride: int = 1, title: str = "mapped grid") -> Path:
    """Images of grid rows and columns under ``m`` (shape ``(2, nx1, nx2)``)."""
    xs = [m[0]] + ([target_polyline[:, 0]] if target_polyline is not None else [])
    ys = [m[1]] + ([target_polyline[:, 1]] if target_polyline is not None else [])
    fr = _Frame(xs, ys, equal=True)
    body = []
    nx1, nx2 = m.shape[1:]
    for i in list(range(0, nx1, stride)) + ([nx1 - 1] if (nx1 - 1) % stride else []):
        body.append(_path(*fr.map(m[0, i, :], m[1, i, :]), "#555", 0.5))
    for j in list(range(0, nx2, stride)) + ([nx2 - 1] if (nx2 - 1) % stride else []):
        body.append(_path(*fr.map(m[0, :, j], m[1, :, j]), "#555", 0.5))
    if target_polyline is not None:
        closed = np.vstack([target_polyline, target_polyline[:1]])
        body.append(_path(*fr.map(closed[:, 0], closed[:, 1]), COLORS[1], 1.5))
    p = Path(path)
    p.write_text(_doc(body, title))
    return p


def line_plot(path, series: dict, logx: bool = False, logy: bool = True,
              title: str = "", xlabel: str = "", ylabel: str = "") -> Path:
    """``series`` maps a label to ``(x, y)``; drawn on shared axes with a legend."""
    series = {k: (np.asarray(x, float), np.asarray(y, float)) for k, (x, y) in series.items()}
    fr = _Frame([x for x, _ in series.values()], [y for _, y in series.values()], logx, logy)
    body = _ticks(fr)
    for k, (label, (x, y)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        body.append(_path(*fr.map(x, y), color, 1.5))
        ly = MARGIN + 14 + 14 * k
        body.append(f'<text x="{WIDTH - MARGIN - 4}" y="{ly}" font-size="11" fill="{color}" '
                    f'text-anchor="end">{label}</text>')
    body.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{xlabel}</text>')
    body.append(f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
                f'transform="rotate(-90 14 {HEIGHT / 2})">{ylabel}</text>')
    p = Path(path)
    p.write_text(_doc(body, title))
    return p
