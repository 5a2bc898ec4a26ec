"""Standalone SVG rendering of the virtual-scale plane.

Keeps figure output independent of the web cockpit: the same geometry
document the HTTP API serves is drawn here as a self-contained SVG string.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

_W, _H, _PAD = 640, 640, 60
_POINT_COLOR = "#2563eb"
_FOCUS_COLOR = "#dc2626"
_ANCHOR_COLOR = "#7c3aed"
_PROJ_COLOR = "#059669"


def _limits(geometry: dict) -> tuple:
    xs = [0.0]
    ys = [0.0]
    for p in geometry["points"]:
        xs.append(p["alpha"])
        ys.append(p["beta"])
    xs.append(geometry["anchor"]["x"])
    ys.append(geometry["anchor"]["y"])
    xs.append(geometry["projection"]["alpha"])
    ys.append(geometry["projection"]["beta"])
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    span = (hi - lo) or 1.0
    return lo - 0.08 * span, hi + 0.08 * span


def render_svg(geometry: dict) -> str:
    """Render a plot-geometry document (see ``analysis.plot_geometry``)."""
    lo, hi = _limits(geometry)
    span = hi - lo

    def sx(v: float) -> float:
        return _PAD + (v - lo) / span * (_W - 2 * _PAD)

    def sy(v: float) -> float:
        return _H - _PAD - (v - lo) / span * (_H - 2 * _PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    title = f"{escape(geometry['dmu'])} - {escape(geometry['model'])}"
    if geometry.get("kappa") is not None:
        title += f" (scalar {geometry['kappa']:.4g})"
    parts.append(f'<text x="{_PAD}" y="24" font-size="16">{title}</text>')

    # Axes through the origin and the efficiency equator diagonal.
    parts.append(f'<line x1="{_PAD}" y1="{sy(0):.1f}" x2="{_W - _PAD}" y2="{sy(0):.1f}" '
                 'stroke="#9ca3af" stroke-width="1"/>')
    parts.append(f'<line x1="{sx(0):.1f}" y1="{_PAD}" x2="{sx(0):.1f}" y2="{_H - _PAD}" '
                 'stroke="#9ca3af" stroke-width="1"/>')
    parts.append(f'<line x1="{sx(lo):.1f}" y1="{sy(lo):.1f}" x2="{sx(hi):.1f}" y2="{sy(hi):.1f}" '
                 'stroke="#111827" stroke-width="1" stroke-dasharray="6 3"/>')
    parts.append(f'<text x="{sx(hi) - 110:.1f}" y="{sy(hi) + 14:.1f}" fill="#111827">'
                 'efficiency equator</text>')

    def vector(vec: dict, color: str):
        x1, y1 = vec["tail"]
        x2, y2 = vec["head"]
        parts.append(f'<line x1="{sx(x1):.1f}" y1="{sy(y1):.1f}" x2="{sx(x2):.1f}" '
                     f'y2="{sy(y2):.1f}" stroke="{color}" stroke-width="1.5" '
                     'stroke-dasharray="4 3"/>')

    vector(geometry["vectors"]["origin_to_focus"], _FOCUS_COLOR)
    vector(geometry["vectors"]["origin_to_anchor"], _ANCHOR_COLOR)
    vector(geometry["vectors"]["anchor_to_focus"], _ANCHOR_COLOR)

    for p in geometry["points"]:
        color = _FOCUS_COLOR if p["is_focus"] else _POINT_COLOR
        r = 5 if p["is_focus"] else 4
        fill = color if (p["is_focus"] or p["is_reference"]) else "white"
        parts.append(f'<circle cx="{sx(p["alpha"]):.1f}" cy="{sy(p["beta"]):.1f}" r="{r}" '
                     f'fill="{fill}" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{sx(p["alpha"]) + 7:.1f}" y="{sy(p["beta"]) - 7:.1f}" '
                     f'fill="{color}">{escape(p["label"])}</text>')

    ax, ay = geometry["anchor"]["x"], geometry["anchor"]["y"]
    parts.append(f'<rect x="{sx(ax) - 4:.1f}" y="{sy(ay) - 4:.1f}" width="8" height="8" '
                 f'fill="{_ANCHOR_COLOR}"/>')
    parts.append(f'<text x="{sx(ax) + 7:.1f}" y="{sy(ay) + 4:.1f}" fill="{_ANCHOR_COLOR}">anchor</text>')

    px, py = geometry["projection"]["alpha"], geometry["projection"]["beta"]
    parts.append(f'<circle cx="{sx(px):.1f}" cy="{sy(py):.1f}" r="4" fill="none" '
                 f'stroke="{_PROJ_COLOR}" stroke-width="2"/>')
    parts.append(f'<text x="{sx(px) + 7:.1f}" y="{sy(py) + 12:.1f}" fill="{_PROJ_COLOR}">benchmark</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
