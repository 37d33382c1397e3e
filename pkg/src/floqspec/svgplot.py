"""Small static SVG renderer for spectrum plots.

Layer order is fixed: enclosure boundaries, then discriminant contours, then
spectrum arcs and axis bands, then point markers.
"""

from __future__ import annotations

import numpy as np


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Canvas:
    def __init__(self, window, width=900, pad=40):
        self.re_min, self.re_max, self.im_min, self.im_max = window
        self.width = width
        span_x = self.re_max - self.re_min
        span_y = self.im_max - self.im_min
        self.scale = (width - 2 * pad) / span_x
        self.height = int(round(span_y * self.scale)) + 2 * pad
        self.pad = pad

    def xy(self, z: complex) -> tuple[float, float]:
        x = self.pad + (z.real - self.re_min) * self.scale
        y = self.pad + (self.im_max - z.imag) * self.scale
        return x, y

    def polyline(self, zs, stroke, width, dash=None) -> str:
        pts = " ".join("{},{}".format(_fmt(x), _fmt(y))
                       for x, y in (self.xy(complex(z)) for z in zs))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (f'<polyline points="{pts}" fill="none" stroke="{stroke}"'
                f' stroke-width="{width}"{dash_attr}/>')

    def marker(self, z, color, r=5) -> str:
        x, y = self.xy(complex(z))
        return (f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="none"'
                f' stroke="{color}" stroke-width="2"/>')


def render_spectrum_svg(window, boundaries=(), contours=(), arcs=(),
                        axis_bands=(), markers=(), width=900) -> str:
    """Compose the layered plot and return the SVG document as a string."""
    cv = _Canvas(window, width)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{cv.width}"'
             f' height="{cv.height}" viewBox="0 0 {cv.width} {cv.height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    # coordinate axes for orientation
    if cv.re_min <= 0 <= cv.re_max:
        parts.append(cv.polyline([1j * cv.im_min, 1j * cv.im_max], "#cccccc", 1))
    if cv.im_min <= 0 <= cv.im_max:
        parts.append(cv.polyline([cv.re_min + 0j, cv.re_max + 0j], "#cccccc", 1))
    for _, curve in boundaries:
        if len(np.atleast_1d(curve)) >= 2:
            parts.append(cv.polyline(curve, "#000000", 1.2, dash="7,4"))
    for curve in contours:
        if len(curve) >= 2:
            parts.append(cv.polyline(curve, "#888888", 0.8, dash="2,3"))
    for arc in arcs:
        if len(arc) >= 2:
            parts.append(cv.polyline(arc, "#1f4fd8", 2.0))
    for a, b in axis_bands:
        parts.append(cv.polyline([a + 0j, b + 0j], "#1f4fd8", 3.0))
    for z in markers:
        parts.append(cv.marker(z, "#d81f1f"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
