"""Dependency-free SVG line charts of group fractions over time.

Output is a pure function of the input arrays (fixed number formatting, no
timestamps), so identical input yields byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .dynamics import Trajectory
from .ensemble import EnsembleResult

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 20, 50
COLORS = ("#2ca02c", "#1f77b4", "#d62728")  # A green, B blue, U red
LABELS = ("A", "B", "U")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _series(data):
    if isinstance(data, EnsembleResult):
        return data.mean, data.std
    if isinstance(data, Trajectory):
        return data.fractions, None
    arr = np.asarray(data, dtype=float)
    return arr, None


def render_svg(data, x_label: str = "step", y_label: str = "fraction", x0: float = 0.0, dx: float = 1.0) -> str:
    """Render a trajectory, ensemble, or ``(T, 3)`` fraction array as SVG text.

    ``x0``/``dx`` relabel the horizontal axis, e.g. to calendar years.
    """
    mean, std = _series(data)
    if len(mean) == 0:
        raise ValueError("nothing to plot")
    t = len(mean)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(i):
        return LEFT + (pw * i / (t - 1) if t > 1 else pw / 2)

    def py(f):
        return TOP + ph * (1.0 - min(1.0, max(0.0, f)))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _fmt(py(f))
        out.append(f'<text x="{LEFT - 8}" y="{y}" font-size="11" text-anchor="end">{f:.2f}</text>')
    ticks = sorted({0, (t - 1) // 2, t - 1})
    for i in ticks:
        x = _fmt(px(i))
        out.append(f'<text x="{x}" y="{TOP + ph + 16}" font-size="11" text-anchor="middle">{x0 + dx * i:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 10}" font-size="12" text-anchor="middle">{x_label}</text>')
    out.append(
        f'<text x="14" y="{TOP + ph / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {TOP + ph / 2:.2f})">{y_label}</text>'
    )

    for g in range(3):
        color = COLORS[g]
        if std is not None and t > 1:
            upper = [f"{_fmt(px(i))},{_fmt(py(mean[i, g] + std[i, g]))}" for i in range(t)]
            lower = [f"{_fmt(px(i))},{_fmt(py(mean[i, g] - std[i, g]))}" for i in reversed(range(t))]
            out.append(f'<polygon class="band" points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        if t > 1:
            pts = " ".join(f"{_fmt(px(i))},{_fmt(py(mean[i, g]))}" for i in range(t))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            out.append(f'<circle cx="{_fmt(px(0))}" cy="{_fmt(py(mean[0, g]))}" r="3" fill="{color}"/>')
        ly = TOP + 14 + 14 * g
        out.append(f'<text x="{LEFT + pw - 10}" y="{ly}" font-size="11" fill="{color}" text-anchor="end">{LABELS[g]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(data, path, **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(render_svg(data, **kwargs))
