"""
Bounce-to-bounce billiard flow.

Vertex hits are continued from the left with respect to the counterclockwise
boundary orientation: the continuation is the limit of rays that strike the side
ending at the vertex just before the vertex.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

from billiards.errors import EscapeError, PhasePointError
from billiards.models import BounceEvent, FloorSet, Orbit, Period, PhasePoint
from billiards.modules.geomcore import (
    Direction,
    Point,
    Segment,
    angle_between,
    cross,
    dot,
    is_exact,
    linear_reflection,
    ray_segment_intersection,
    reflect_direction,
    same_direction,
    same_point,
    sub,
)
from billiards.modules.polygon import Polygon
from billiards.settings import settings

logger = logging.getLogger(__name__)


class BoundaryHit(NamedTuple):
    t: object
    point: Point
    side_index: int
    vertex_index: Optional[int]


def first_hit(p: Polygon, origin: Point, d: Direction) -> Optional[BoundaryHit]:
    best = None
    for i, side in enumerate(p.sides):
        h = ray_segment_intersection(origin, d, side)
        if h is None:
            continue
        if best is None or h.t < best[0].t:
            best = (h, i)
    if best is None:
        return None
    h, i = best
    vertex = p.vertex_index(h.hit) if h.at_endpoint else None
    return BoundaryHit(h.t, h.hit, i, vertex)


def _unit(d: Direction) -> Direction:
    if is_exact(*d):
        return d
    n = math.hypot(d.dx, d.dy)
    return Direction(d.dx / n, d.dy / n)


def _fan_crossings(p: Polygon, vertex: int, d: Direction) -> int:
    """Number of corner-fan copies the left-shifted line crosses at `vertex`."""
    before, after = p.sides_at(vertex)
    v = p.vertices[vertex]
    a = sub(p.vertices[before], v)
    b = sub(p.vertices[(vertex + 1) % p.n], v)
    alpha = p.interior_angles[vertex]
    beta = math.atan2(float(b.dy), float(b.dx))
    back = Direction(-d.dx, -d.dy)
    x_in = (back.angle - beta) % (2 * math.pi)
    m_float = (x_in + math.pi) / alpha
    k = round(m_float)
    if k >= 1 and abs(m_float - k) < 1e-7:
        # the line may leave along the k-th fan edge; decide exactly
        edges = [b, a]
        while len(edges) <= k:
            edges.append(linear_reflection(edges[-1]).apply_linear(edges[-2]))
        if same_direction(edges[k], d):
            return k - 1
        return k - 1 if m_float < k else k
    return math.floor(m_float)


def vertex_continuation(p: Polygon, vertex: int, d: Direction) -> Tuple[Direction, Tuple[int, ...]]:
    """Outgoing direction at a vertex hit and the sides crossed in the corner fan."""
    before, after = p.sides_at(vertex)
    m = _fan_crossings(p, vertex, d)
    crossed = tuple(before if j % 2 == 0 else after for j in range(m))
    out = d
    for side in crossed:
        out = reflect_direction(out, p.sides[side])
    return _unit(out), crossed


def validate_phase_point(p: Polygon, s: PhasePoint):
    if not p.contains(s.q):
        raise PhasePointError(f"start {s.q} lies outside the table")
    if s.v.dx == 0 and s.v.dy == 0:
        raise PhasePointError("start direction is the zero vector")
    vertex = p.vertex_index(s.q)
    if vertex is not None:
        b = sub(p.vertices[(vertex + 1) % p.n], s.q)
        rel = (s.v.angle - math.atan2(float(b.dy), float(b.dx))) % (2 * math.pi)
        if rel > p.interior_angles[vertex] + settings.angle_tolerance:
            raise PhasePointError(f"direction {s.v} leaves the table at vertex {vertex}")
        return
    side = p.on_boundary(s.q)
    if side is not None and dot(s.v, p.inward_normal(side)) < 0:
        raise PhasePointError(f"direction {s.v} leaves the table through side {side}")


def step(p: Polygon, s: PhasePoint, floors: Optional[FloorSet] = None) -> Tuple[BounceEvent, PhasePoint]:
    hit = first_hit(p, s.q, s.v)
    if hit is None:
        raise EscapeError(f"ray from {s.q} along {s.v} meets no side", state=s)
    if hit.vertex_index is not None:
        outgoing, crossed = vertex_continuation(p, hit.vertex_index, s.v)
        side = p.sides_at(hit.vertex_index)[0]
        event = BounceEvent(
            hit=hit.point,
            side_index=side,
            incoming=s.v,
            outgoing=outgoing,
            singular=True,
            vertex_index=hit.vertex_index,
            crossed=crossed,
        )
    else:
        outgoing = _unit(reflect_direction(s.v, p.sides[hit.side_index]))
        event = BounceEvent(
            hit=hit.point,
            side_index=hit.side_index,
            incoming=s.v,
            outgoing=outgoing,
            crossed=(hit.side_index,),
        )
    floor_index = floors.index_of(outgoing) if floors is not None else None
    return event, PhasePoint(q=hit.point, v=outgoing, floor_index=floor_index)


def return_anchor(p: Polygon, s: PhasePoint) -> Point:
    """The bounce point a returning orbit passes through just before reaching s.q."""
    if p.on_boundary(s.q) is not None:
        return s.q
    back = first_hit(p, s.q, s.v.reversed())
    if back is None:
        raise EscapeError(f"backward ray from {s.q} meets no side", state=s)
    return back.point


def holonomy_closes(p: Polygon, word: Sequence[int], v: Direction, tol: Optional[float] = None) -> bool:
    """The word's reflections compose to a translation along v."""
    g = p.word_isometry(word)
    t = g.translation
    if is_exact(*g, *v):
        return g.has_identity_linear_part() and cross(t, v) == 0 and dot(t, v) > 0
    tol = settings.return_tolerance if tol is None else tol
    linear_ok = max(abs(g.a - 1), abs(g.b), abs(g.c), abs(g.d - 1)) <= tol
    norm = math.hypot(float(t.dx), float(t.dy)) * math.hypot(float(v.dx), float(v.dy))
    return linear_ok and abs(float(cross(t, v))) <= tol * norm and float(dot(t, v)) > 0


def _returned(p: Polygon, start: PhasePoint, anchor: Point, events: Sequence[BounceEvent]) -> bool:
    last = events[-1]
    if is_exact(*last.hit, *last.outgoing, *start.q, *start.v):
        return same_point(last.hit, anchor) and same_direction(last.outgoing, start.v)
    tol = settings.return_tolerance
    if not same_point(last.hit, anchor, tol) or angle_between(last.outgoing, start.v) > tol:
        return False
    word = [side for e in events for side in e.crossed]
    return holonomy_closes(p, word, start.v)


def _period_length(start: PhasePoint, events: Sequence[BounceEvent]) -> float:
    pts = [start.q] + [e.hit for e in events] + [start.q]
    return sum(math.dist((float(a.x), float(a.y)), (float(b.x), float(b.y))) for a, b in zip(pts, pts[1:]))


def trace(
    p: Polygon,
    s: PhasePoint,
    max_links: int,
    stop_at_period: bool = True,
    floors: Optional[FloorSet] = None,
) -> Orbit:
    """Follow s for up to max_links bounces.

    When a period is found the orbit is cut to exactly one period; if the start
    is an interior point a closing link back to it is appended.
    """
    if max_links < 1:
        raise ValueError("max_links must be at least 1")
    validate_phase_point(p, s)
    anchor = return_anchor(p, s) if stop_at_period else None
    events: List[BounceEvent] = []
    links: List[Segment] = []
    current = s
    period = None
    for _ in range(max_links):
        event, current = step(p, current, floors)
        links.append(Segment(links[-1].b if links else s.q, event.hit))
        events.append(event)
        if stop_at_period and _returned(p, s, anchor, events):
            if not same_point(event.hit, s.q):
                links.append(Segment(event.hit, s.q))
            period = Period(period_links=len(events), period_length=_period_length(s, events))
            break
    length = sum(link.length for link in links)
    logger.debug("traced %d links from %s, periodic=%s", len(events), s.q, period is not None)
    return Orbit(start=s, events=tuple(events), links=tuple(links), geometric_length=length, periodic=period)


def detect_period(p: Polygon, o: Orbit) -> Optional[Tuple[int, float]]:
    if not o.events:
        return None
    anchor = return_anchor(p, o.start)
    for k in range(1, len(o.events) + 1):
        if _returned(p, o.start, anchor, o.events[:k]):
            return k, _period_length(o.start, o.events[:k])
    return None


def orbit_from(p: Polygon, q, v, max_links: int, **kwargs) -> Orbit:
    return trace(p, PhasePoint(q=Point(*q), v=Direction(*v)), max_links, **kwargs)


def mirror_residual(p: Polygon, event: BounceEvent) -> float:
    """|angle(incoming, side) - angle(outgoing, side)| for a regular bounce."""
    side = p.sides[event.side_index].vector
    return abs(angle_between(event.incoming, side) - angle_between(event.outgoing, side))
