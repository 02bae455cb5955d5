"""Minimal deterministic SVG writer for 2-d trajectory plots.

Hand-rolled rather than delegated to a plotting library so that identical
inputs produce byte-identical files.
"""

from __future__ import annotations

# One color per window index (finest window first), cycled if needed.
WINDOW_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")

_SIZE = 480
_MARGIN = 40


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def trajectories_svg(trajectories: list[list[tuple[float, int, float, float]]]) -> str:
    """Render polylines from rows of (t, stage, x, y), one list per trajectory.

    Each trajectory is split into per-stage segments so every window gets its
    own color. An empty input still yields a valid plot frame.
    """
    points = [(x, y) for traj in trajectories for (_, _, x, y) in traj]
    if points:
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo, x_hi, y_lo, y_hi = -1.0, 1.0, -1.0, 1.0
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    span = _SIZE - 2 * _MARGIN

    def sx(x: float) -> float:
        return _MARGIN + span * (x - x_lo) / (x_hi - x_lo)

    def sy(y: float) -> float:
        return _SIZE - _MARGIN - span * (y - y_lo) / (y_hi - y_lo)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{span}" height="{span}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    for traj in trajectories:
        segment: list[tuple[float, float]] = []
        seg_stage = None
        for t, stage, x, y in traj:
            if seg_stage is not None and stage != seg_stage:
                segment.append((x, y))
                lines.append(_polyline(segment, seg_stage, sx, sy))
                segment = []
            segment.append((x, y))
            seg_stage = stage
        if len(segment) >= 2:
            lines.append(_polyline(segment, seg_stage, sx, sy))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _polyline(points, stage, sx, sy) -> str:
    color = WINDOW_COLORS[int(stage) % len(WINDOW_COLORS)]
    coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in points)
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" '
        'stroke-width="1" stroke-opacity="0.6"/>'
    )
