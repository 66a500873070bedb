"""Byte-stable SVG scatter plots of configurations."""

from __future__ import annotations

import math

from .annealer import CENTER_EPS, GAP_FRAC, detect_rings
from .core_model import Configuration
from .errors import BadInputFile

DOT_RADIUS = 0.12


def _f(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(c: Configuration, gap_frac: float = GAP_FRAC, center_eps: float = CENTER_EPS,
               pixels: int = 600) -> str:
    """SVG in model units: dots for particles, dashed detected rings, solid sqrt(N) disc."""
    if c.n < 1:
        raise BadInputFile("nothing to render")
    sig = detect_rings(c, gap_frac=gap_frac, center_eps=center_eps)
    disc = math.sqrt(c.n)
    half = 1.1 * max(disc, float(c.radii.max()), 1.0)
    lw = half / 300.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{pixels}" height="{pixels}" '
        f'viewBox="{_f(-half)} {_f(-half)} {_f(2 * half)} {_f(2 * half)}">',
        f'<rect x="{_f(-half)}" y="{_f(-half)}" width="{_f(2 * half)}" height="{_f(2 * half)}" fill="white"/>',
        f'<circle class="disc" cx="0" cy="0" r="{_f(disc)}" fill="none" stroke="#999999" '
        f'stroke-width="{_f(lw)}"/>',
    ]
    for r in sig.ring_radii:
        if r < center_eps * disc:
            continue
        out.append(
            f'<circle class="ring" cx="0" cy="0" r="{_f(r)}" fill="none" stroke="#3366cc" '
            f'stroke-width="{_f(lw)}" stroke-dasharray="{_f(4 * lw)} {_f(3 * lw)}"/>'
        )
    # y flipped so the picture has the usual orientation
    for x, y in c.positions:
        out.append(f'<circle class="particle" cx="{_f(x)}" cy="{_f(-y)}" r="{_f(DOT_RADIUS)}" fill="black"/>')
    out.append(f"<!-- N={c.n} rings={sig} -->")
    out.append("</svg>")
    return "\n".join(out) + "\n"
