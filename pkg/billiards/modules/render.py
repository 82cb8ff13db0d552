"""Static SVG drawings of tables, orbits and unfoldings."""
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon as PolygonPatch  # noqa: E402

from billiards.models import Corridor, Orbit  # noqa: E402
from billiards.modules.geomcore import Segment  # noqa: E402
from billiards.modules.polygon import Polygon  # noqa: E402

logger = logging.getLogger(__name__)

MARGIN = 0.05

plt.rcParams["svg.hashsalt"] = "billiards"
plt.rcParams["svg.fonttype"] = "none"


def _xy(points) -> list:
    return [(float(q[0]), float(q[1])) for q in points]


def _fit(ax, points: Sequence):
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    w, h = max(xs) - min(xs), max(ys) - min(ys)
    ax.set_xlim(min(xs) - MARGIN * w, max(xs) + MARGIN * w)
    ax.set_ylim(min(ys) - MARGIN * h, max(ys) + MARGIN * h)
    ax.set_aspect("equal")
    ax.axis("off")


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return path


def draw_table(ax, vertices, label: Optional[str] = None, **style):
    pts = _xy(vertices)
    ax.add_patch(PolygonPatch(pts, closed=True, fill=False, **({"edgecolor": "black", "linewidth": 1.2} | style)))
    if label is not None:
        cx = sum(x for x, _ in pts) / len(pts)
        cy = sum(y for _, y in pts) / len(pts)
        ax.text(cx, cy, label, ha="center", va="center", fontsize=8, color="grey")
    return pts


def draw_links(ax, links: Iterable[Segment], **style):
    for a, b in links:
        (x0, y0), (x1, y1) = _xy((a, b))
        ax.plot([x0, x1], [y0, y1], **({"color": "tab:blue", "linewidth": 0.8} | style))


def render_orbit(p: Polygon, orbit: Orbit, path, highlight=None) -> Path:
    """Table, orbit links and a cross at every vertex hit; `highlight` is an optional extra polygon."""
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = draw_table(ax, p.vertices)
    if highlight is not None:
        ax.add_patch(PolygonPatch(_xy(highlight), closed=True, facecolor="tab:red", alpha=0.15, edgecolor="none"))
    draw_links(ax, orbit.links)
    for event in orbit.events:
        if event.singular:
            x, y = _xy([event.hit])[0]
            ax.plot([x], [y], marker="x", color="tab:red", markersize=8)
    _fit(ax, pts)
    return _save(fig, path)


def render_unfolding(p: Polygon, corridor: Corridor, segment: Segment, path) -> Path:
    """Copies of the table along a corridor, numbered from zero, with the straight unfolded segment."""
    fig, ax = plt.subplots(figsize=(6, 6))
    pts = []
    for k, g in enumerate(corridor.copies):
        pts.extend(draw_table(ax, [g.apply(v) for v in p.vertices], label=str(k), linewidth=0.8))
    draw_links(ax, [segment], color="tab:blue", linewidth=1.2)
    _fit(ax, pts)
    return _save(fig, path)


def render_segments(p: Polygon, segments: Iterable[Segment], path, points=()) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = draw_table(ax, p.vertices)
    draw_links(ax, segments, color="tab:orange")
    for q in points:
        x, y = _xy([q])[0]
        ax.plot([x], [y], marker="o", color="tab:red", markersize=3)
    _fit(ax, pts)
    return _save(fig, path)
