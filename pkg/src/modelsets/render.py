"""Rendering of point patterns: deterministic plain SVG and matplotlib figures.

The SVG writer is the package's only numeric boundary: exact coordinates are
evaluated to 15 decimal digits at write time, so identical inputs give
byte-identical files.  The matplotlib path is for quick visual reports.
"""

from __future__ import annotations

from .qfield import QF


def pattern_svg(positions, center, radius: QF, d: int) -> str:
    """SVG 1.1 document with one circle per pattern point."""
    cx = center[0]
    cy = center[1] if d == 2 else QF(0, 0, radius.D)
    pad = radius * QF("11/10", 0, radius.D)
    x0 = (cx - pad).decimal(15)
    y0 = (-(cy + pad)).decimal(15)
    side = (pad + pad).decimal(15)
    r = (radius / 100).decimal(15)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{x0} {y0} {side} {side}">',
    ]
    for p in sorted(positions):
        px = p[0].decimal(15)
        py = (-p[1]).decimal(15) if d == 2 else "0." + "0" * 15
        lines.append(f'<circle cx="{px}" cy="{py}" r="{r}" fill="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def save_pattern_figure(positions, path: str, title: str | None = None) -> None:
    """Scatter the pattern to an image file via matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [float(p[0]) for p in positions]
    ys = [float(p[1]) if len(p) > 1 else 0.0 for p in positions]
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(xs, ys, s=6, c="black")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
