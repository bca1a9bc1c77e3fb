"""Minimal deterministic SVG emitters for ordination figures.

Hand-rolled rather than delegated to a plotting library so that output
bytes are a pure function of the data: fixed decimal formatting, no
timestamps, no generated IDs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["scatter_panels_svg", "heatmap_svg"]

_MARKER_COLORS = ("#1f6fb4", "#d1495b", "#4f9d69", "#8862b8")
_PANEL_W = 360
_PANEL_H = 320
_MARGIN = 46


def _fmt(x):
    return f"{x:.2f}"


def _marker(shape, x, y, color):
    if shape == 0:  # circle
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="{color}" fill-opacity="0.75"/>'
    if shape == 1:  # triangle
        pts = f"{_fmt(x)},{_fmt(y - 4.2)} {_fmt(x - 3.8)},{_fmt(y + 3.2)} {_fmt(x + 3.8)},{_fmt(y + 3.2)}"
        return f'<polygon points="{pts}" fill="{color}" fill-opacity="0.75"/>'
    half = 3.2  # square
    return (
        f'<rect x="{_fmt(x - half)}" y="{_fmt(y - half)}" width="{_fmt(2 * half)}" '
        f'height="{_fmt(2 * half)}" fill="{color}" fill-opacity="0.75"/>'
    )


def _scale(values, lo_px, hi_px):
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    if span == 0.0:
        span = 1.0
    return lambda v: lo_px + (v - vmin) / span * (hi_px - lo_px)


def scatter_panels_svg(panels, path, axis_names=("axis 1", "axis 2")):
    """Write side-by-side scatter panels.

    ``panels`` is a sequence of ``(title, coords, labels)`` with coords
    of shape (n, 2); ``labels`` may be None for a single symbol class.
    """
    n_panels = len(panels)
    width = n_panels * _PANEL_W
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_PANEL_H}" '
        f'viewBox="0 0 {width} {_PANEL_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for idx, (title, coords, labels) in enumerate(panels):
        coords = np.asarray(coords, dtype=float)
        x0 = idx * _PANEL_W
        left, right = x0 + _MARGIN, x0 + _PANEL_W - 16
        top, bottom = 34, _PANEL_H - _MARGIN
        sx = _scale(coords[:, 0], left, right)
        sy = _scale(coords[:, 1], bottom, top)  # flip y
        parts.append(
            f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
            'fill="none" stroke="#888" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 + _PANEL_W / 2:.0f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
        parts.append(
            f'<text x="{x0 + _PANEL_W / 2:.0f}" y="{_PANEL_H - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{axis_names[0]}</text>'
        )
        parts.append(
            f'<text x="{x0 + 14}" y="{(top + bottom) / 2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" '
            f'transform="rotate(-90 {x0 + 14} {(top + bottom) / 2:.0f})">{axis_names[1]}</text>'
        )
        if labels is None:
            classes = {None: 0}
            labels = [None] * coords.shape[0]
        else:
            classes = {lab: i for i, lab in enumerate(sorted(set(str(l) for l in labels)))}
            labels = [str(l) for l in labels]
        for (x, y), lab in zip(coords, labels):
            cls = classes[lab]
            parts.append(_marker(cls % 3, sx(x), sy(y), _MARKER_COLORS[cls % len(_MARKER_COLORS)]))
        if len(classes) > 1:
            for lab, cls in classes.items():
                ly = top + 14 + 16 * cls
                parts.append(_marker(cls % 3, left + 12, ly, _MARKER_COLORS[cls % len(_MARKER_COLORS)]))
                parts.append(
                    f'<text x="{left + 22}" y="{ly + 4}" font-family="sans-serif" '
                    f'font-size="11">{lab}</text>'
                )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _heat_color(v):
    """White -> deep blue two-stop ramp for values in [0, 1]."""
    v = min(max(float(v), 0.0), 1.0)
    r = round(255 + (8 - 255) * v)
    g = round(255 + (81 - 255) * v)
    b = round(255 + (156 - 255) * v)
    return f"rgb({r},{g},{b})"


def heatmap_svg(matrix, row_labels, col_labels, path, cell=None):
    """Write a labeled heatmap of values already scaled to [0, 1]."""
    matrix = np.asarray(matrix, dtype=float)
    n, k = matrix.shape
    if cell is None:
        cell = 16 if n > 30 else 22
    label_w = 10 + 7 * max((len(str(r)) for r in row_labels), default=1)
    width = label_w + k * cell + 20
    height = 30 + n * cell + 16
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for j, lab in enumerate(col_labels):
        parts.append(
            f'<text x="{label_w + j * cell + cell / 2:.0f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{lab}</text>'
        )
    for i in range(n):
        y = 30 + i * cell
        parts.append(
            f'<text x="{label_w - 6}" y="{y + cell * 0.7:.0f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{row_labels[i]}</text>'
        )
        for j in range(k):
            parts.append(
                f'<rect x="{label_w + j * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_heat_color(matrix[i, j])}" stroke="#ddd" stroke-width="0.5"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
