"""
Unfolding: replace the reflections of a trajectory by reflections of the table.

A corridor is the chain of table copies a straight unfolded line passes
through. Corridors from a vertex are explored with an exact beam, the open cone
of rays from the vertex that cross every copy of the chain, and the vertex
images visible inside a beam are the far ends of generalized diagonals.
"""
import logging
import math
from functools import cmp_to_key
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from billiards.errors import ShortDiagonalError
from billiards.models import BranchReport, Cone, Corridor, GeneralizedDiagonal, PhasePoint
from billiards.modules.flow import step, trace
from billiards.modules.geomcore import (
    Direction,
    Isometry,
    Point,
    Segment,
    circle_distance,
    cross,
    ray_segment_intersection,
    same_direction,
    same_point,
    sign,
    sub,
    translate,
)
from billiards.modules.polygon import Polygon, direction_floors

logger = logging.getLogger(__name__)


def inside_corner(p: Polygon, vertex: int, d: Direction) -> bool:
    """d points strictly into the table from the given vertex."""
    v = p.vertices[vertex]
    b = sub(p.vertices[(vertex + 1) % p.n], v)
    a = sub(p.vertices[vertex - 1], v)
    if sign(cross(b, a)) > 0:
        return sign(cross(b, d)) > 0 and sign(cross(d, a)) > 0
    if sign(cross(b, a)) == 0:
        return sign(cross(b, d)) > 0
    # reflex corner: anything outside the closed exterior wedge a → b
    return not (sign(cross(a, d)) >= 0 and sign(cross(d, b)) >= 0)


def _corridor_of(p: Polygon, word: Sequence[int]) -> Corridor:
    copies = [Isometry.identity()]
    for side in word:
        copies.append(copies[-1].compose(p.side_reflection(side)))
    return Corridor(word=tuple(word), copies=tuple(copies))


def unfolded_hits(p: Polygon, s: PhasePoint, n: int) -> Tuple[Corridor, List[Point]]:
    """Corridor of the first n links and the unfolded images of the start and the n hits."""
    if n < 1:
        raise ValueError("n must be at least 1")
    orbit = trace(p, s, n, stop_at_period=False)
    word: List[int] = []
    points = [s.q]
    for event in orbit.events:
        points.append(p.word_isometry(word).apply(event.hit))
        word.extend(event.crossed)
    last = orbit.events[-1]
    # the final hit only closes the last copy; its crossing is not part of the corridor
    word = word[: len(word) - len(last.crossed)]
    return _corridor_of(p, word), points


def unfold(p: Polygon, s: PhasePoint, n: int) -> Tuple[Corridor, Segment]:
    corridor, points = unfolded_hits(p, s, n)
    return corridor, Segment(points[0], points[-1])


def fold(p: Polygon, corridor: Corridor, segment: Segment) -> List[Segment]:
    """Map the pieces of an unfolded segment back into the base table."""
    d = segment.vector
    cuts = [segment.a]
    for g, side in zip(corridor.copies, corridor.word):
        window = g.apply_segment(p.sides[side])
        e = window.vector
        t = cross(sub(window.a, segment.a), e) / cross(d, e)
        cuts.append(segment.at(t))
    cuts.append(segment.b)
    links = []
    for g, a, b in zip(corridor.copies, cuts, cuts[1:]):
        if same_point(a, b):
            continue
        links.append(g.inverse().apply_segment(Segment(a, b)))
    return links


def diagonal_links(p: Polygon, d: GeneralizedDiagonal) -> List[Segment]:
    return fold(p, _corridor_of(p, d.word), d.unfolded_segment)


def collinearity_residual(points: Sequence[Point]) -> float:
    """Largest distance from an unfolded hit to the line through the first and last points."""
    a, b = points[0], points[-1]
    d = sub(b, a)
    norm = d.norm
    if norm == 0:
        return 0.0
    return max(abs(float(cross(d, sub(q, a)))) / norm for q in points)


def diagonal_from_vertex(p: Polygon, vertex: int, d: Direction, max_links: int) -> Optional[GeneralizedDiagonal]:
    """Shoot from a vertex; a generalized diagonal if the ray reaches a vertex within max_links links."""
    if not inside_corner(p, vertex, d):
        return None
    state = PhasePoint(q=p.vertices[vertex], v=d)
    word: List[int] = []
    for links in range(1, max_links + 1):
        event, state = step(p, state)
        if event.singular:
            end = p.word_isometry(word).apply(event.hit)
            return GeneralizedDiagonal(
                start_vertex=vertex,
                end_vertex_copy=(len(word), event.vertex_index),
                link_count=links,
                direction=d,
                unfolded_segment=Segment(p.vertices[vertex], end),
                word=tuple(word),
            )
        word.extend(event.crossed)
    return None


class _Node(NamedTuple):
    word: Tuple[int, ...]
    copies: Tuple[Isometry, ...]
    lo: Direction
    hi: Direction


def _strictly_inside(lo: Direction, hi: Direction, u: Direction) -> bool:
    return sign(cross(lo, u)) > 0 and sign(cross(u, hi)) > 0


def _exit(p: Polygon, node: _Node, apex: Point, d: Direction):
    """(t, side) of the first side of the node's last copy met beyond its entry window."""
    g = node.copies[-1]
    entry = node.word[-1] if node.word else None
    t_window = 0
    if entry is not None:
        h = ray_segment_intersection(apex, d, g.apply_segment(p.sides[entry]))
        if h is None:
            return None
        t_window = h.t
    best = None
    for i, side in enumerate(p.sides):
        if i == entry:
            continue
        h = ray_segment_intersection(apex, d, g.apply_segment(side))
        if h is None or sign(h.t - t_window) <= 0:
            continue
        if best is None or h.t < best[0]:
            best = (h.t, i)
    return best


def _visible_vertices(p: Polygon, node: _Node, apex: Point) -> List[Tuple[Direction, int]]:
    g = node.copies[-1]
    found = []
    for j, v in enumerate(p.vertices):
        u = sub(g.apply(v), apex)
        if sign(u.dx) == 0 and sign(u.dy) == 0:
            continue
        if not _strictly_inside(node.lo, node.hi, u):
            continue
        first = _exit(p, node, apex, u)
        if first is not None and sign(first[0] - 1) >= 0:
            found.append((u, j))
    found.sort(key=cmp_to_key(lambda x, y: -sign(cross(x[0], y[0]))))
    return found


def _children(p: Polygon, node: _Node, apex: Point, visible) -> List[_Node]:
    bounds = [node.lo] + [u for u, _ in visible] + [node.hi]
    out = []
    for u, w in zip(bounds, bounds[1:]):
        rep = Direction(u.dx + w.dx, u.dy + w.dy)
        first = _exit(p, node, apex, rep)
        if first is None:
            logger.debug("beam %s..%s of %s leaves without an exit side", u, w, node.word)
            continue
        side = first[1]
        copy = node.copies[-1].compose(p.side_reflection(side))
        out.append(_Node(node.word + (side,), node.copies + (copy,), u, w))
    return out


def _corner_cones(p: Polygon, vertex: int) -> Tuple[List[Tuple[Direction, Direction]], List[Direction]]:
    """Open cones (each narrower than π) covering the corner, and the rays between them."""
    v = p.vertices[vertex]
    b = sub(p.vertices[(vertex + 1) % p.n], v)
    a = sub(p.vertices[vertex - 1], v)
    turn = sign(cross(b, a))
    if turn > 0:
        return [(b, a)], []
    nb = Direction(-b.dy, b.dx)
    if turn == 0:
        return [(b, nb), (nb, a)], [nb]
    back = b.reversed()
    return [(b, nb), (nb, back), (back, a)], [nb, back]


def _walk(p: Polygon, vertex: int, max_len: int) -> Iterator[Tuple[_Node, list]]:
    apex = p.vertices[vertex]
    cones, _ = _corner_cones(p, vertex)
    stack = [_Node((), (Isometry.identity(),), lo, hi) for lo, hi in reversed(cones)]
    while stack:
        node = stack.pop()
        visible = _visible_vertices(p, node, apex)
        yield node, visible
        if len(node.word) < max_len:
            stack.extend(reversed(_children(p, node, apex, visible)))


def enumerate_corridors(p: Polygon, from_vertex: int, max_len: int) -> Iterator[Corridor]:
    """Depth-first stream of the corridors of length 1..max_len whose beam from the vertex is nonempty."""
    if not 0 <= from_vertex < p.n:
        raise IndexError(f"vertex {from_vertex} out of range for {p.n} vertices")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    apex = p.vertices[from_vertex]
    for node, _ in _walk(p, from_vertex, max_len):
        if node.word:
            yield Corridor(
                word=node.word,
                copies=node.copies,
                apex_vertex=from_vertex,
                beam=Cone(apex=apex, lo=node.lo, hi=node.hi),
            )


def enumerate_generalized_diagonals(p: Polygon, max_links: int) -> List[GeneralizedDiagonal]:
    """Every generalized diagonal of at most max_links links, once per reversal pair."""
    if max_links < 1:
        return []
    found: Dict[tuple, GeneralizedDiagonal] = {}
    for vertex in range(p.n):
        apex = p.vertices[vertex]
        for node, visible in _walk(p, vertex, max_links - 1):
            for u, j in visible:
                diagonal = GeneralizedDiagonal(
                    start_vertex=vertex,
                    end_vertex_copy=(len(node.word), j),
                    link_count=len(node.word) + 1,
                    direction=u,
                    unfolded_segment=Segment(apex, translate(apex, u)),
                    word=node.word,
                )
                found.setdefault(diagonal.key(), diagonal)
        _, splits = _corner_cones(p, vertex)
        for d in splits:
            diagonal = diagonal_from_vertex(p, vertex, d, max_links)
            if diagonal is not None:
                found.setdefault(diagonal.key(), diagonal)
    diagonals = sorted(found.values(), key=lambda g: (g.link_count, g.key()))
    logger.info("found %d generalized diagonals with at most %d links", len(diagonals), max_links)
    return diagonals


def delta_N(p: Polygon, theta, N: int) -> float:
    """Angular room around theta free of the floors of diagonals of at most max(2N, 1) links."""
    floors = direction_floors(p, theta)
    diagonals = enumerate_generalized_diagonals(p, max(2 * N, 1))
    delta = math.inf
    for diagonal in diagonals:
        for d in (diagonal.direction, diagonal.direction.reversed()):
            for member in floors.directions:
                if same_direction(member, d):
                    raise ShortDiagonalError(
                        f"direction {floors.base} carries a {diagonal.link_count}-link generalized diagonal"
                    )
                delta = min(delta, circle_distance(member.angle, d.angle))
    if delta <= 0:
        raise ShortDiagonalError(f"direction {floors.base} carries a short generalized diagonal")
    return delta


def _common_prefix(u: Sequence[int], w: Sequence[int]) -> int:
    k = 0
    while k < len(u) and k < len(w) and u[k] == w[k]:
        k += 1
    return k


def _branch_candidates(p: Polygon, q0: Point, d1: Direction, d2: Direction, w1, w2, lcp: int):
    """Vertices of the last common copy separating the two rays, the shared corner first."""
    g = p.word_isometry(w1[:lcp])
    s1, s2 = w1[lcp], w2[lcp]
    ordered = []
    if (s1 + 1) % p.n == s2:
        ordered.append(s2)
    elif (s2 + 1) % p.n == s1:
        ordered.append(s1)
    lo, hi = (d1, d2) if sign(cross(d1, d2)) > 0 else (d2, d1)
    wedge = []
    for j, v in enumerate(p.vertices):
        u = sub(g.apply(v), q0)
        if j not in ordered and _strictly_inside(lo, hi, u):
            wedge.append((abs(math.atan2(float(cross(d1, u)), float(d1.dx * u.dx + d1.dy * u.dy))), j))
    ordered.extend(j for _, j in sorted(wedge))
    return [(g.apply(p.vertices[j]), j) for j in ordered]


def corridor_coincidence(p: Polygon, q0: Point, theta: Direction, theta2: Direction, N: int) -> BranchReport:
    """Where the corridors of (q0, θ) and (q0, θ′) part, forwards and backwards, capped at N copies."""
    q0 = Point(*q0)
    theta, theta2 = Direction(*theta), Direction(*theta2)
    words = {}
    for key, d in (("f", theta), ("f2", theta2), ("b", theta.reversed()), ("b2", theta2.reversed())):
        words[key] = trace(p, PhasePoint(q=q0, v=d), N, stop_at_period=False).word
    lcp_f = _common_prefix(words["f"], words["f2"])
    lcp_b = _common_prefix(words["b"], words["b2"])
    j_fwd, j_bwd = min(N, lcp_f + 1), min(N, lcp_b + 1)
    if j_fwd >= N or j_bwd >= N:
        return BranchReport(j_fwd=j_fwd, j_bwd=j_bwd)
    forward = _branch_candidates(p, q0, theta, theta2, words["f"], words["f2"], lcp_f)
    backward = _branch_candidates(p, q0, theta.reversed(), theta2.reversed(), words["b"], words["b2"], lcp_b)
    links = j_fwd + j_bwd - 1
    g_b = p.word_isometry(words["b"][:lcp_b])
    for b_point, b_vertex in backward:
        for a_point, a_vertex in forward:
            if same_point(a_point, b_point):
                continue
            d = g_b.inverse().apply_linear(sub(a_point, b_point))
            diagonal = diagonal_from_vertex(p, b_vertex, d, links)
            if (
                diagonal is not None
                and diagonal.link_count == links
                and diagonal.end_vertex == a_vertex
                and same_point(g_b.apply(diagonal.unfolded_segment.b), a_point)
            ):
                return BranchReport(
                    j_fwd=j_fwd, j_bwd=j_bwd, vertex_fwd=a_point, vertex_bwd=b_point, diagonal=diagonal
                )
    logger.debug("no certified branching diagonal for q0=%s, %s vs %s", q0, theta, theta2)
    a_point = forward[0][0] if forward else None
    b_point = backward[0][0] if backward else None
    return BranchReport(j_fwd=j_fwd, j_bwd=j_bwd, vertex_fwd=a_point, vertex_bwd=b_point)


def shadowing_gap(p: Polygon, q0: Point, theta: Direction, theta2: Direction, N: int) -> Tuple[float, float]:
    """(distance between the two unfolded rays at the first one's N-link length, N·diam·|θ−θ′|)."""
    q0 = Point(*q0)
    theta, theta2 = Direction(*theta), Direction(*theta2)
    _, segment = unfold(p, PhasePoint(q=q0, v=theta), N)
    length = segment.length
    far = (float(q0.x) + length * float(theta2.dx) / theta2.norm, float(q0.y) + length * float(theta2.dy) / theta2.norm)
    gap = math.dist((float(segment.b.x), float(segment.b.y)), far)
    spread = circle_distance(theta.angle, theta2.angle)
    return gap, N * p.diameter * spread

