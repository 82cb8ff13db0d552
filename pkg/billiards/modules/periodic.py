"""
Periodic orbits, found two independent ways.

Perpendicular orbits: a trajectory that meets a side at a right angle retraces
itself and closes up. Translation words: a corridor word whose reflections
compose to a translation carries an open strip (a cylinder) of parallel
periodic orbits.
"""
import logging
import math
from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from billiards.errors import NotPeriodicError, PhasePointError, VertexFootError
from billiards.models import (
    CoverageSample,
    Cylinder,
    ExceptionalSetReport,
    FootInterval,
    Orbit,
    PerpendicularOutcome,
    PerpScanResult,
    PhasePoint,
    canonical_word,
)
from billiards.modules.flow import first_hit, step, trace
from billiards.modules.geomcore import (
    Direction,
    Isometry,
    Point,
    Scalar,
    Segment,
    circle_distance,
    clip_to_box,
    cross,
    dot,
    is_exact,
    near,
    same_direction,
    same_point,
    segment_intersection,
    sign,
    squared_distance_to_segment,
    sub,
)
from billiards.modules.polygon import Polygon, direction_floors, lshape
from billiards.modules.unfolding import diagonal_from_vertex, inside_corner
from billiards.settings import settings

logger = logging.getLogger(__name__)


def _perpendicular(d: Direction, side: Segment) -> bool:
    e = side.vector
    if is_exact(*d, *e):
        return dot(d, e) == 0
    return abs(float(dot(d, e))) <= settings.perp_tolerance * d.norm * e.norm


def _side_parameter(side: Segment, q: Point):
    e = side.vector
    return dot(sub(q, side.a), e) / dot(e, e)


def perpendicular_orbit(p: Polygon, side_index: int, foot: Point, max_links: int) -> PerpendicularOutcome:
    """Launch the inward normal from a foot on a side and wait for a second right-angle hit."""
    foot = Point(*foot)
    if p.vertex_index(foot) is not None:
        raise VertexFootError(f"foot {foot} is a vertex")
    if not near(squared_distance_to_segment(foot, p.sides[side_index]), 0, settings.tolerance**2):
        raise PhasePointError(f"foot {foot} is not on side {side_index}")
    start = PhasePoint(q=foot, v=p.inward_normal(side_index))
    state = start
    for links in range(1, max_links + 1):
        event, state = step(p, state)
        if event.singular:
            # the backward orbit enters the same vertex
            diagonal = diagonal_from_vertex(p, event.vertex_index, event.incoming.reversed(), 2 * links)
            return PerpendicularOutcome(kind="singular", foot=foot, links_used=links, diagonal=diagonal)
        if _perpendicular(event.incoming, p.sides[event.side_index]):
            orbit = trace(p, start, 2 * links)
            if orbit.periodic is None or orbit.periodic.period_links != 2 * links:
                logger.warning("perpendicular orbit from %s failed to close after %d links", foot, 2 * links)
                return PerpendicularOutcome(kind="undecided", foot=foot, links_used=links)
            return PerpendicularOutcome(kind="periodic", foot=foot, links_used=links, orbit=orbit)
    return PerpendicularOutcome(kind="undecided", foot=foot, links_used=max_links)


class _SingularFoot(NamedTuple):
    side_index: int
    foot: Point
    vertex: int
    links: Tuple[Segment, ...]


def _singular_feet(p: Polygon, side_index: int, max_links: int) -> List[_SingularFoot]:
    """Back-shoot from every vertex in every floor of the normal: feet whose normal orbit enters a vertex."""
    normal = p.inward_normal(side_index)
    side = p.sides[side_index]
    floors = direction_floors(p, normal).directions
    found: List[_SingularFoot] = []
    for vertex in range(p.n):
        for d in floors:
            if not inside_corner(p, vertex, d):
                continue
            state = PhasePoint(q=p.vertices[vertex], v=d)
            links = []
            for _ in range(max_links):
                event, nxt = step(p, state)
                links.append(Segment(state.q, event.hit))
                if event.singular:
                    break
                if _perpendicular(event.incoming, p.sides[event.side_index]):
                    if event.side_index == side_index and same_direction(event.incoming, normal.reversed()):
                        if not any(same_point(event.hit, f.foot) for f in found):
                            back = tuple(s.reversed() for s in reversed(links))
                            found.append(_SingularFoot(side_index, event.hit, vertex, back))
                    break
                state = nxt
    found.sort(key=lambda f: _side_parameter(side, f.foot))
    return found


def perp_scan(p: Polygon, side_index: int, max_links: int, samples: int) -> PerpScanResult:
    side = p.sides[side_index]
    singular = _singular_feet(p, side_index, max_links)
    cuts = [_side_parameter(side, f.foot) for f in singular]
    zero = Fraction(0) if p.exact else 0.0
    bounds = [zero] + cuts + [zero + 1]
    per_interval: List[List[int]] = [[] for _ in range(len(bounds) - 1)]
    counts = {"periodic": 0, "singular": 0, "undecided": 0}
    extra_singular = []
    for j in range(1, samples + 1):
        t = Fraction(j, samples + 1) if p.exact else j / (samples + 1)
        outcome = perpendicular_orbit(p, side_index, side.at(t), max_links)
        counts[outcome.kind] += 1
        if outcome.kind == "singular":
            if not any(same_point(outcome.foot, f.foot) for f in singular):
                extra_singular.append(outcome.foot)
            continue
        for k in range(len(bounds) - 1):
            if bounds[k] < t < bounds[k + 1]:
                if outcome.kind == "periodic":
                    per_interval[k].append(outcome.orbit.periodic.period_links)
                break
    intervals = []
    for k, periods in enumerate(per_interval):
        distinct = set(periods)
        intervals.append(
            FootInterval(
                lo=bounds[k],
                hi=bounds[k + 1],
                period_links=distinct.pop() if len(distinct) == 1 else None,
                samples=len(periods),
            )
        )
    if extra_singular:
        logger.warning("%d sampled singular feet escaped the back-shooting search", len(extra_singular))
    result = PerpScanResult(
        side_index=side_index,
        periodic_feet=tuple(intervals),
        singular_feet=tuple(f.foot for f in singular) + tuple(extra_singular),
        periodic_samples=counts["periodic"],
        singular_samples=counts["singular"],
        undecided_samples=counts["undecided"],
    )
    logger.info(
        "side %d: %d periodic, %d singular, %d undecided samples; %d singular feet",
        side_index,
        result.periodic_samples,
        result.singular_samples,
        result.undecided_samples,
        len(result.singular_feet),
    )
    return result


def covering_sides(p: Polygon, q: Point, max_links: int) -> Tuple[int, ...]:
    """Sides whose perpendicular periodic orbits pass through q."""
    sides = []
    for i in range(p.n):
        hit = first_hit(p, q, p.inward_normal(i).reversed())
        if hit is None or hit.vertex_index is not None or hit.side_index != i:
            continue
        outcome = perpendicular_orbit(p, i, hit.point, max_links)
        if outcome.kind == "periodic":
            sides.append(i)
    return tuple(sides)


def _random_interior_points(p: Polygon, count: int, seed: int) -> List[Point]:
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = (float(c) for c in p.bounding_box)
    points = []
    while len(points) < count:
        x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
        q = Point(Fraction(x).limit_denominator(10**6), Fraction(y).limit_denominator(10**6)) if p.exact else Point(x, y)
        if p.contains(q, closed=False):
            points.append(q)
    return points


def exceptional_set_report(p: Polygon, max_links: int, samples: int = 0, seed: int = 0) -> ExceptionalSetReport:
    """Segments that may hold points missed by every perpendicular periodic orbit."""
    p.require_convex()
    diagonals = [f for i in range(p.n) for f in _singular_feet(p, i, max_links)]
    segments = tuple(link for f in diagonals for link in f.links)
    candidates = None
    if p.n == 3:
        points: List[Point] = []
        for f, g in combinations(diagonals, 2):
            if f.side_index == g.side_index:
                continue
            for s in f.links:
                for t in g.links:
                    x = segment_intersection(s, t)
                    if x is not None and p.contains(x, closed=False) and not any(same_point(x, y) for y in points):
                        points.append(x)
        candidates = tuple(sorted(points))
    coverage = tuple(
        CoverageSample(point=q, covering_sides=covering_sides(p, q, max_links))
        for q in _random_interior_points(p, samples, seed)
    )
    logger.info("%d perpendicular diagonal links, %d coverage samples", len(segments), len(coverage))
    return ExceptionalSetReport(segments=segments, candidate_points=candidates, samples=coverage)


def _frame(u: Direction, q) -> Tuple:
    """Coordinates of q along u and across it."""
    return dot(u, q), cross(u, q)


def _clip(poly: List[Tuple], a, b, c) -> List[Tuple]:
    """Keep the part of a convex (m, c) polygon with a·m + b·c + c0 ≥ 0."""
    out = []
    for prev, cur in zip(poly[-1:] + poly[:-1], poly):
        fp = a * prev[0] + b * prev[1] + c
        fc = a * cur[0] + b * cur[1] + c
        if fc >= 0:
            if fp < 0:
                t = fp / (fp - fc)
                out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
            out.append(cur)
        elif fp >= 0:
            t = fp / (fp - fc)
            out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
    return out


def _area(poly: List[Tuple]):
    n = len(poly)
    if n < 3:
        return 0
    return sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1] for i in range(n)) / 2


def _through(poly, u: Direction, left: Point, right: Point):
    """Lines y' = m·x' + c passing with `left` on their left and `right` on their right."""
    lx, ly = _frame(u, left)
    rx, ry = _frame(u, right)
    poly = _clip(poly, -lx, -1, ly)
    return _clip(poly, rx, 1, -ry)


def _window(p: Polygon, g: Isometry, side: int) -> Tuple[Point, Point]:
    """(left, right) ends of an exit window for lines leaving copy g through a side."""
    a, b = g.apply_segment(p.sides[side])
    return (b, a) if sign(g.det) > 0 else (a, b)


def _primitive(word: Sequence[int]) -> bool:
    k = len(word)
    return not any(k % d == 0 and tuple(word[:d]) * (k // d) == tuple(word) for d in range(1, k))


def returns_after(p: Polygon, s: PhasePoint, k: int) -> bool:
    """s comes back to itself after exactly k regular bounces."""
    orbit = trace(p, s, k, stop_at_period=False)
    if len(orbit.events) != k or any(e.singular for e in orbit.events):
        return False
    last = orbit.events[-1]
    if is_exact(*last.hit, *s.q):
        return same_point(last.hit, s.q) and same_direction(last.outgoing, s.v)
    return same_point(last.hit, s.q, settings.return_tolerance) and same_direction(last.outgoing, s.v)


def cylinder_from_word(p: Polygon, entry_side: int, word: Sequence[int], translation: Direction) -> Optional[Cylinder]:
    """The open strip of lines along `translation` crossing the entry side and every window of the word."""
    word = tuple(word)
    T = Direction(*translation)
    if sign(T.dx) == 0 and sign(T.dy) == 0:
        return None
    entry = p.sides[entry_side]
    lefts, rights = [entry.a], [entry.b]
    g = Isometry.identity()
    for side in word:
        left, right = _window(p, g, side)
        lefts.append(left)
        rights.append(right)
        g = g.compose(p.side_reflection(side))
    c_hi = min(cross(T, q) for q in lefts)
    c_lo = max(cross(T, q) for q in rights)
    if sign(c_hi - c_lo) <= 0:
        return None
    ya, yb = cross(T, entry.a), cross(T, entry.b)

    def on_entry(c):
        return entry.at((c - ya) / (yb - ya))

    representative = PhasePoint(q=on_entry(c_lo + (c_hi - c_lo) / 3), v=T)
    if not returns_after(p, representative, len(word)):
        logger.debug("word %s closes by holonomy but its representative does not return", word)
        return None
    norm = T.norm
    return Cylinder(
        word=word,
        entry_side=entry_side,
        direction=T,
        translation=T,
        strip=(on_entry(c_lo), on_entry(c_hi)),
        width=float(c_hi - c_lo) / norm,
        representative=representative,
        period_links=len(word),
        period_length=norm,
    )


def _exact_reference(theta: float) -> Direction:
    return Direction(Fraction(math.cos(theta)).limit_denominator(10**6), Fraction(math.sin(theta)).limit_denominator(10**6))


def _same_strip(p: Polygon, known: Cylinder, candidate: Cylinder) -> bool:
    """The candidate's representative orbit crosses the known strip's entry window in its direction."""
    side = p.sides[known.entry_side]
    lo, hi = sorted(_side_parameter(side, q) for q in known.strip)
    orbit = trace(p, candidate.representative, candidate.period_links, stop_at_period=False)
    for event in orbit.events:
        if event.singular or event.side_index != known.entry_side:
            continue
        forward = same_direction(event.outgoing, known.translation)
        if not (forward or same_direction(event.incoming.reversed(), known.translation)):
            continue
        t = _side_parameter(side, event.hit)
        if sign(t - lo) > 0 and sign(hi - t) > 0:
            return True
    return False


class SearchResult(NamedTuple):
    cylinders: List[Cylinder]
    nodes_expanded: int


def search_cylinders(
    p: Polygon,
    max_word: int,
    direction_window: Optional[Tuple[float, float]] = None,
    budget: Optional[int] = None,
) -> SearchResult:
    """Breadth-first word search over edge-entered corridors with line-space beams."""
    if max_word < 2:
        raise ValueError("max_word must be at least 2")
    one = Fraction(1) if p.exact else 1.0
    if direction_window is not None and direction_window[1] < math.pi / 4:
        theta, delta = direction_window
        ref = _exact_reference(theta) if p.exact else Direction.from_angle(theta)
        slope = Fraction(math.tan(delta) + 1e-5).limit_denominator(10**6) if p.exact else math.tan(delta) + 1e-5
        refs = [(ref, slope)]
    else:
        refs = [(Direction(one, 0 * one), one), (Direction(0 * one, one), one), (Direction(-one, 0 * one), one), (Direction(0 * one, -one), one)]

    queue = deque()
    for u, slope in refs:
        reach = max(abs(y) + slope * abs(x) for x, y in (_frame(u, v) for v in p.vertices)) + 1
        box = [(-slope, -reach), (slope, -reach), (slope, reach), (-slope, reach)]
        for e, side in enumerate(p.sides):
            beam = _through(box, u, side.a, side.b)
            if sign(_area(beam)) > 0:
                queue.append((u, e, (), Isometry.identity(), beam))

    # parallel strips may share a word, so each word keeps a list
    found: Dict[tuple, List[Cylinder]] = {}
    nodes = 0
    while queue:
        if budget is not None and nodes >= budget:
            break
        u, e, word, g, beam = queue.popleft()
        nodes += 1
        last = word[-1] if word else e
        for s in range(p.n):
            if s == last:
                continue
            left, right = _window(p, g, s)
            child = _through(beam, u, left, right)
            if sign(_area(child)) <= 0:
                continue
            w = word + (s,)
            h = g.compose(p.side_reflection(s))
            if s == e and h.has_identity_linear_part() and _primitive(w):
                T = h.translation
                ok = direction_window is None or circle_distance(T.angle, direction_window[0]) < direction_window[1]
                cylinder = cylinder_from_word(p, e, w, T) if ok else None
                if cylinder is not None:
                    known = found.setdefault(canonical_word(w), [])
                    if not any(_same_strip(p, c, cylinder) for c in known):
                        known.append(cylinder)
                        logger.debug("cylinder %s, translation %s, width %.4g", w, T, cylinder.width)
            if len(w) < max_word:
                queue.append((u, e, w, h, child))
    cylinders = sorted(
        (c for strips in found.values() for c in strips), key=lambda c: (c.period_links, c.key(), c.entry_side, c.strip)
    )
    logger.info("word search: %d cylinders after %d nodes", len(cylinders), nodes)
    return SearchResult(cylinders, nodes)


def word_search(
    p: Polygon,
    max_word: int,
    direction_window: Optional[Tuple[float, float]] = None,
    budget: Optional[int] = None,
) -> List[Cylinder]:
    return search_cylinders(p, max_word, direction_window, budget).cylinders


def periodic_strip(p: Polygon, o: Orbit) -> Cylinder:
    """Maximal open strip of orbits parallel to a periodic orbit.

    An orbit whose word composes to a reflection (a retracing orbit) has
    neighbours of twice its period; the strip is then that of the doubled word.
    """
    if o.periodic is None:
        raise NotPeriodicError("orbit has no detected period")
    events = o.period_events()
    word = tuple(side for e in events for side in e.crossed)
    entry = events[-1].side_index
    g = p.word_isometry(word)
    if not g.has_identity_linear_part():
        word = word + word
        g = g.compose(g)
    if not g.has_identity_linear_part():
        raise NotPeriodicError(f"word {word} does not compose to a translation")
    cylinder = cylinder_from_word(p, entry, word, g.translation)
    if cylinder is None:
        raise NotPeriodicError(f"word {word} carries no open strip")
    return cylinder


RIGHT_SQUARE = (1, 0, 2, 1)


def open_box_overlap(s: Segment, box) -> Scalar:
    """Length of s inside the open box (xmin, ymin, xmax, ymax)."""
    xmin, ymin, xmax, ymax = box
    piece = clip_to_box(s, xmin, ymin, xmax, ymax)
    if piece is None:
        return 0 * s.a.x
    a, b = piece
    for lo, hi, pa, pb in ((xmin, xmax, a.x, b.x), (ymin, ymax, a.y, b.y)):
        if (pa == pb == lo) or (pa == pb == hi):
            return 0 * s.a.x
    return piece.length


def lshape_orbit(k: int) -> Tuple[Polygon, Orbit]:
    """Periodic orbit of 2k+2 links in the L-shaped table that never enters the right-hand square.

    The orbit has slope 2k and starts on the bottom side at 1 - 3/(4k); its word
    uses only the vertical and horizontal sides of the left column, so it
    composes to a translation.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    table = lshape()
    start = PhasePoint(q=Point(1 - Fraction(3, 4 * k), Fraction(0)), v=Direction(Fraction(1), Fraction(2 * k)))
    orbit = trace(table, start, 2 * k + 2)
    if orbit.periodic is None or orbit.periodic.period_links != 2 * k + 2:
        raise NotPeriodicError(f"L-shape orbit for k={k} did not close after {2 * k + 2} links")
    overlap = sum(open_box_overlap(link, RIGHT_SQUARE) for link in orbit.links)
    if overlap != 0:
        raise NotPeriodicError(f"L-shape orbit for k={k} enters the right-hand square")
    return table, orbit
