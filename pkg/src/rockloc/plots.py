"""Hand-emitted SVG scatter plots for localization runs.

No plotting dependency: the figures are simple enough (point layouts,
an overlay, correspondence lines) that writing the SVG elements
directly keeps the output deterministic and diffable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .geometry import Affine2, Point2, affine_apply

DISTRIBUTIONS_SVG = "rock_distributions.svg"
OVERLAY_SVG = "match_overlay.svg"
CORRESPONDENCES_SVG = "match_correspondences.svg"

_PANEL = 300.0
_MARGIN = 40.0
_POINT_R = 3.5

_ROVER_COLOR = "#2b6cb0"
_MAP_COLOR = "#c05621"
_LINK_COLOR = "#718096"


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Maps data coordinates into one square SVG panel (y up)."""

    def __init__(
        self, points: Sequence[Point2], ox: float, oy: float, side: float
    ) -> None:
        xs = [p.x for p in points] or [0.0]
        ys = [p.y for p in points] or [0.0]
        lo_x, hi_x = min(xs), max(xs)
        lo_y, hi_y = min(ys), max(ys)
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-9)
        pad = 0.08 * span
        span += 2.0 * pad
        self._cx = 0.5 * (lo_x + hi_x)
        self._cy = 0.5 * (lo_y + hi_y)
        self._scale = side / span
        self._ox = ox + 0.5 * side
        self._oy = oy + 0.5 * side

    def map(self, p: Point2) -> tuple[float, float]:
        return (
            self._ox + (p.x - self._cx) * self._scale,
            self._oy - (p.y - self._cy) * self._scale,
        )


def _circle(x: float, y: float, color: str) -> str:
    return (
        f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_POINT_R}" '
        f'fill="{color}" fill-opacity="0.85"/>'
    )


def _panel_box(ox: float, oy: float, side: float, label: str) -> list[str]:
    return [
        f'<rect x="{_f(ox)}" y="{_f(oy)}" width="{_f(side)}" height="{_f(side)}" '
        'fill="none" stroke="#4a5568" stroke-width="1"/>',
        f'<text x="{_f(ox + 4)}" y="{_f(oy - 8)}" font-family="sans-serif" '
        f'font-size="13" fill="#1a202c">{label}</text>',
    ]


def _document(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">'
    )
    bg = f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>'
    return "\n".join([head, bg, *body, "</svg>"]) + "\n"


def render_distributions(
    rover_pts: Sequence[Point2], map_pts: Sequence[Point2]
) -> str:
    """Two panels: rover ground-frame rocks and map rocks, each autoscaled."""
    body: list[str] = []
    panels = (
        ("rover ground frame", rover_pts, _ROVER_COLOR, _MARGIN),
        ("map frame", map_pts, _MAP_COLOR, 2 * _MARGIN + _PANEL),
    )
    for label, pts, color, ox in panels:
        body.extend(_panel_box(ox, _MARGIN, _PANEL, label))
        frame = _Frame(pts, ox, _MARGIN, _PANEL)
        for p in pts:
            x, y = frame.map(p)
            body.append(_circle(x, y, color))
    width = 3 * _MARGIN + 2 * _PANEL
    return _document(width, _PANEL + 2 * _MARGIN, body)


def _overlay_body(
    map_pts: Sequence[Point2],
    transformed: Sequence[Point2],
    links: Sequence[tuple[int, int]] | None,
) -> str:
    frame = _Frame(list(map_pts) + list(transformed), _MARGIN, _MARGIN, _PANEL)
    label = "rover rocks mapped into map frame"
    body = _panel_box(_MARGIN, _MARGIN, _PANEL, label)
    if links is not None:
        for ti, mi in links:
            x1, y1 = frame.map(transformed[ti])
            x2, y2 = frame.map(map_pts[mi])
            body.append(
                f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                f'stroke="{_LINK_COLOR}" stroke-width="1"/>'
            )
    for p in map_pts:
        x, y = frame.map(p)
        body.append(_circle(x, y, _MAP_COLOR))
    for p in transformed:
        x, y = frame.map(p)
        body.append(_circle(x, y, _ROVER_COLOR))
    return _document(_PANEL + 2 * _MARGIN, _PANEL + 2 * _MARGIN, body)


def render_overlay(
    map_pts: Sequence[Point2], transformed: Sequence[Point2]
) -> str:
    return _overlay_body(map_pts, transformed, None)


def render_correspondences(
    map_pts: Sequence[Point2],
    transformed: Sequence[Point2],
    pairs: Sequence[tuple[int, int]],
) -> str:
    """Overlay plus a line per matched (transformed idx, map idx) pair."""
    return _overlay_body(map_pts, transformed, pairs)


def write_localization_plots(
    out_dir: str | Path,
    rover_ground: Sequence[Point2],
    map_pts: Sequence[Point2],
    transform: Affine2,
    pairs: Sequence[tuple[int, int]],
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    transformed = [affine_apply(transform, p) for p in rover_ground]
    jobs = (
        (DISTRIBUTIONS_SVG, render_distributions(rover_ground, map_pts)),
        (OVERLAY_SVG, render_overlay(map_pts, transformed)),
        (CORRESPONDENCES_SVG, render_correspondences(map_pts, transformed, pairs)),
    )
    written = []
    for name, svg in jobs:
        path = out / name
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
