"""Static SVG rendering of curve projections."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core_geometry import DiscreteCurve, kernel_tangency_set
from .errors import InvalidInputError

PROJECTIONS = ("front", "lagrangian", "geiges-xz", "xy")
SIZE = 600.0
MARGIN = 0.05
TANGENCY_THRESHOLD = 0.1

# column pairs per projection, for (x, y, z, w) and (x, y, z) samples
_ENGEL_AXES = {"front": (0, 2), "geiges-xz": (0, 2), "lagrangian": (0, 3), "xy": (0, 1)}
_LEGENDRIAN_AXES = {"front": (0, 2), "geiges-xz": (0, 2), "lagrangian": (0, 1), "xy": (0, 1)}


def projected(curve, projection: str) -> np.ndarray:
    if projection not in PROJECTIONS:
        raise InvalidInputError(f"unknown projection {projection!r}")
    axes = (_ENGEL_AXES if isinstance(curve, DiscreteCurve) else _LEGENDRIAN_AXES)[projection]
    return np.asarray(curve.points)[:, list(axes)]


def _viewbox(xy: np.ndarray) -> tuple:
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    lo, hi = lo - MARGIN * span, hi + MARGIN * span
    return lo, hi


def _path(xy: np.ndarray, closed: bool) -> str:
    pts = " ".join("%.6g,%.6g" % (a, b) for a, b in xy)
    tag = "polygon" if closed else "polyline"
    return f'<{tag} points="{pts}" />'


def _runs_xy(xy: np.ndarray, runs, n: int) -> list:
    return [xy[(start + np.arange(count)) % n] for start, count in runs]


def kink_supports(metadata: dict) -> list:
    """(center, width) pairs stored under the ``kinks`` metadata key."""
    raw = metadata.get("kinks")
    if not raw:
        return []
    return [(float(c), float(w)) for c, w in json.loads(raw)]


def render(curve, projection: str, metadata: dict | None = None) -> str:
    """SVG text of one projection: the base polyline, kernel-tangency runs, kink supports."""
    xy = projected(curve, projection)
    n = xy.shape[0]
    lo, hi = _viewbox(xy)
    # flip y so the picture is drawn in the usual orientation
    scale = SIZE / float(np.max(hi - lo))
    screen = np.column_stack([(xy[:, 0] - lo[0]) * scale, (hi[1] - xy[:, 1]) * scale])
    width, height = (hi - lo) * scale
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%.6g" height="%.6g" viewBox="0 0 %.6g %.6g">' % (width, height, width, height),
        f"<title>{projection} projection</title>",
        '<g id="curve" fill="none" stroke="black" stroke-width="1">' + _path(screen, curve.closed) + "</g>",
    ]
    if isinstance(curve, DiscreteCurve):
        ts = kernel_tangency_set(curve, TANGENCY_THRESHOLD)
        runs = [_path(seg, False) for seg in _runs_xy(screen, ts.runs, n) if len(seg) > 1]
        parts.append('<g id="tangency" fill="none" stroke="red" stroke-width="3">' + "".join(runs) + "</g>")
    notes = []
    t = np.asarray(curve.params)
    for i, (c, w) in enumerate(kink_supports(metadata or {})):
        off = np.abs(t - c)
        if curve.closed:
            off = np.minimum(off, 1.0 - off)
        seg = screen[off <= w]
        if len(seg) == 0:
            continue
        cx, cy = seg.mean(axis=0)
        notes.append('<circle class="loop" cx="%.6g" cy="%.6g" r="4" />' % (cx, cy))
        notes.append('<text x="%.6g" y="%.6g" font-size="10">k%d</text>' % (cx + 5, cy - 5, i))
    parts.append('<g id="kinks" fill="blue" stroke="none">' + "".join(notes) + "</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot(curve, projection: str, out_path, metadata: dict | None = None) -> None:
    Path(out_path).write_text(render(curve, projection, metadata), encoding="utf-8")


def polyline_points(svg: str, group: str = "curve") -> np.ndarray:
    """Screen coordinates of the first polyline or polygon in group ``group``."""
    start = svg.index(f'<g id="{group}"')
    body = svg[start:]
    a = body.index('points="') + 8
    b = body.index('"', a)
    return np.array([[float(v) for v in p.split(",")] for p in body[a:b].split()])


def loop_glyphs(svg: str) -> int:
    """Number of kink loop glyphs in a rendered picture."""
    return svg.count('class="loop"')
