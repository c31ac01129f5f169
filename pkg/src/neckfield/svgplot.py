"""Hand-emitted SVG log-log plots (data points, fitted line, predicted-slope
guide line, verdict caption). No plotting dependency; output is a pure
function of its inputs so rendered artifacts are reproducible.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 72, 24, 40, 56


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _decade_ticks(lo: float, hi: float) -> list[float]:
    lo_e = int(np.floor(lo))
    hi_e = int(np.ceil(hi))
    return [float(e) for e in range(lo_e, hi_e + 1)]


def log_log_plot(x: Sequence[float], y: Sequence[float],
                 fit_slope: Optional[float] = None,
                 fit_intercept: Optional[float] = None,
                 guide_slope: Optional[float] = None,
                 title: str = "", x_label: str = "", y_label: str = "",
                 caption: str = "") -> str:
    """Render points (x, y) on log-log axes with an optional fitted line and
    a dashed guide line of the predicted slope anchored at the first point."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if np.count_nonzero(good) < 2:
        raise InvalidParameterError("log-log plot needs at least two positive points")
    lx, ly = np.log10(x[good]), np.log10(y[good])
    pad = 0.15
    x0, x1 = float(np.min(lx)) - pad, float(np.max(lx)) + pad
    y0, y1 = float(np.min(ly)) - pad, float(np.max(ly)) + pad
    if fit_slope is not None and fit_intercept is not None:
        ends = [fit_slope * x0 + fit_intercept, fit_slope * x1 + fit_intercept]
        y0, y1 = min(y0, *ends) - 0.05, max(y1, *ends) + 0.05

    def sx(v: float) -> float:
        return _ML + (v - x0) / (x1 - x0) * (_W - _ML - _MR)

    def sy(v: float) -> float:
        return _H - _MB - (v - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
    ]
    for e in _decade_ticks(x0, x1):
        if x0 <= e <= x1:
            xs = _fmt(sx(e))
            parts.append(f'<line x1="{xs}" y1="{_fmt(_H - _MB)}" x2="{xs}" '
                         f'y2="{_fmt(_H - _MB + 6)}" stroke="black"/>')
            parts.append(f'<text x="{xs}" y="{_fmt(_H - _MB + 20)}" font-size="12" '
                         f'text-anchor="middle" font-family="monospace">1e{int(e)}</text>')
            parts.append(f'<line x1="{xs}" y1="{_fmt(_MT)}" x2="{xs}" '
                         f'y2="{_fmt(_H - _MB)}" stroke="#dddddd"/>')
    for e in _decade_ticks(y0, y1):
        if y0 <= e <= y1:
            ys = _fmt(sy(e))
            parts.append(f'<line x1="{_fmt(_ML - 6)}" y1="{ys}" x2="{_fmt(_ML)}" '
                         f'y2="{ys}" stroke="black"/>')
            parts.append(f'<text x="{_fmt(_ML - 10)}" y="{ys}" font-size="12" '
                         f'text-anchor="end" dominant-baseline="middle" '
                         f'font-family="monospace">1e{int(e)}</text>')
            parts.append(f'<line x1="{_fmt(_ML)}" y1="{ys}" x2="{_fmt(_W - _MR)}" '
                         f'y2="{ys}" stroke="#dddddd"/>')
    if guide_slope is not None:
        anchor_x, anchor_y = lx[0], ly[0]
        gy0 = anchor_y + guide_slope * (x0 - anchor_x)
        gy1 = anchor_y + guide_slope * (x1 - anchor_x)
        parts.append(f'<line x1="{_fmt(sx(x0))}" y1="{_fmt(sy(gy0))}" '
                     f'x2="{_fmt(sx(x1))}" y2="{_fmt(sy(gy1))}" '
                     f'stroke="#888888" stroke-dasharray="6,4" stroke-width="1.5"/>')
    if fit_slope is not None and fit_intercept is not None:
        fy0 = fit_slope * x0 + fit_intercept
        fy1 = fit_slope * x1 + fit_intercept
        parts.append(f'<line x1="{_fmt(sx(x0))}" y1="{_fmt(sy(fy0))}" '
                     f'x2="{_fmt(sx(x1))}" y2="{_fmt(sy(fy1))}" '
                     f'stroke="#c02020" stroke-width="1.5"/>')
    for vx, vy in zip(lx, ly):
        parts.append(f'<circle cx="{_fmt(sx(vx))}" cy="{_fmt(sy(vy))}" r="4" '
                     f'fill="#2050c0" stroke="black" stroke-width="0.5"/>')
    if title:
        parts.append(f'<text x="{_W // 2}" y="22" font-size="15" text-anchor="middle" '
                     f'font-family="monospace">{title}</text>')
    if x_label:
        parts.append(f'<text x="{_W // 2}" y="{_H - 14}" font-size="13" '
                     f'text-anchor="middle" font-family="monospace">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="16" y="{_H // 2}" font-size="13" text-anchor="middle" '
                     f'font-family="monospace" transform="rotate(-90 16 {_H // 2})">'
                     f'{y_label}</text>')
    if caption:
        parts.append(f'<text x="{_fmt(_ML + 8)}" y="{_fmt(_MT + 16)}" font-size="12" '
                     f'font-family="monospace">{caption}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
