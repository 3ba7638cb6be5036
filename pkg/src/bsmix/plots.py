"""Minimal deterministic SVG output.

Matplotlib embeds version- and hash-dependent ids in its SVGs, which breaks
byte-level reproducibility; these writers emit plain shapes with fixed float
formatting instead. Scatter plots draw concept density contours as 1- and
2-sigma covariance ellipses per mixture component.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .toy_diffusion import GaussianMixtureConcept

__all__ = ["scatter_svg", "curve_svg"]

_WIDTH = 640
_HEIGHT = 480
_MARGIN = 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.4f}"


class _Frame:
    """Maps data coordinates onto the SVG viewport (y axis flipped)."""

    def __init__(self, xmin, xmax, ymin, ymax):
        pad_x = 0.05 * (xmax - xmin) or 1.0
        pad_y = 0.05 * (ymax - ymin) or 1.0
        self.xmin, self.xmax = xmin - pad_x, xmax + pad_x
        self.ymin, self.ymax = ymin - pad_y, ymax + pad_y

    def x(self, v: float) -> float:
        span = self.xmax - self.xmin
        return _MARGIN + (v - self.xmin) / span * (_WIDTH - 2 * _MARGIN)

    def y(self, v: float) -> float:
        span = self.ymax - self.ymin
        return _HEIGHT - _MARGIN - (v - self.ymin) / span * (_HEIGHT - 2 * _MARGIN)


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
    ]


def _axes(frame: _Frame, xlabel: str, ylabel: str) -> list[str]:
    left, right = _MARGIN, _WIDTH - _MARGIN
    top, bottom = _MARGIN, _HEIGHT - _MARGIN
    parts = [
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
        f'<text x="{(left + right) // 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{(top + bottom) // 2}" text-anchor="middle" '
        f'font-family="monospace" font-size="12" '
        f'transform="rotate(-90 16 {(top + bottom) // 2})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = frame.xmin + frac * (frame.xmax - frame.xmin)
        yv = frame.ymin + frac * (frame.ymax - frame.ymin)
        parts.append(
            f'<text x="{_fmt(frame.x(xv))}" y="{bottom + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="10">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{left - 6}" y="{_fmt(frame.y(yv) + 3)}" text-anchor="end" '
            f'font-family="monospace" font-size="10">{yv:.3g}</text>'
        )
    return parts


def _ellipse(frame: _Frame, mean: np.ndarray, cov: np.ndarray, radius: float, color: str) -> str:
    # Principal axes from the eigendecomposition; angle in SVG's y-down frame.
    values, vectors = np.linalg.eigh(cov)
    rx = radius * math.sqrt(max(values[1], 0.0))
    ry = radius * math.sqrt(max(values[0], 0.0))
    major = vectors[:, 1]
    angle = math.degrees(math.atan2(major[1], major[0]))
    cx, cy = frame.x(mean[0]), frame.y(mean[1])
    sx = (_WIDTH - 2 * _MARGIN) / (frame.xmax - frame.xmin)
    sy = (_HEIGHT - 2 * _MARGIN) / (frame.ymax - frame.ymin)
    return (
        f'<ellipse cx="0" cy="0" rx="{_fmt(rx * sx)}" ry="{_fmt(ry * sy)}" '
        f'fill="none" stroke="{color}" stroke-width="1" stroke-opacity="0.6" '
        f'transform="translate({_fmt(cx)} {_fmt(cy)}) rotate({_fmt(-angle)})"/>'
    )


def scatter_svg(
    samples: np.ndarray,
    concepts: Sequence[GaussianMixtureConcept],
    title: str = "toy samples",
) -> str:
    """Scatter of 2-D samples over per-concept covariance-ellipse contours."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError("scatter_svg needs samples of shape (n, 2)")
    if any(c.dim != 2 for c in concepts):
        raise ValueError("scatter_svg needs 2-D concepts")
    means = np.vstack([c.means for c in concepts])
    xs = np.concatenate([samples[:, 0], means[:, 0]])
    ys = np.concatenate([samples[:, 1], means[:, 1]])
    frame = _Frame(xs.min(), xs.max(), ys.min(), ys.max())
    parts = _header(title) + _axes(frame, "x", "y")
    for ci, concept in enumerate(concepts):
        color = _COLORS[ci % len(_COLORS)]
        for mean, cov in zip(concept.means, concept.covariances):
            for radius in (1.0, 2.0):
                parts.append(_ellipse(frame, mean, cov, radius, color))
        label = concept.label or f"concept {ci}"
        parts.append(
            f'<text x="{_WIDTH - _MARGIN - 4}" y="{_MARGIN + 16 + 14 * ci}" text-anchor="end" '
            f'font-family="monospace" font-size="11" fill="{color}">{label}</text>'
        )
    for point in samples:
        parts.append(
            f'<circle cx="{_fmt(frame.x(point[0]))}" cy="{_fmt(frame.y(point[1]))}" '
            'r="2.5" fill="#333333" fill-opacity="0.7"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def curve_svg(
    xs: Sequence[float],
    ys: Sequence[float],
    xlabel: str,
    ylabel: str,
    title: str = "",
) -> str:
    """Polyline through (xs, ys) with point markers."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
        raise ValueError("xs and ys must be matching non-empty 1-D arrays")
    frame = _Frame(xs.min(), xs.max(), ys.min(), ys.max())
    parts = _header(title or ylabel) + _axes(frame, xlabel, ylabel)
    points = " ".join(f"{_fmt(frame.x(x))},{_fmt(frame.y(y))}" for x, y in zip(xs, ys))
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
    )
    for x, y in zip(xs, ys):
        parts.append(
            f'<circle cx="{_fmt(frame.x(x))}" cy="{_fmt(frame.y(y))}" r="3" fill="#1f77b4"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
