"""
The billiard table: validated simple polygons, rational-angle certification and
the finite set of directions ("floors") a rational table confines an orbit to.
"""
import logging
import math
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from billiards.errors import (
    InexactCoordinateError,
    NotConvexError,
    NotRationalError,
    RepeatedVertexError,
    SelfIntersectionError,
    TableFileError,
    ZeroAreaError,
)
from billiards.models import FloorSet
from billiards.modules.geomcore import (
    Direction,
    Isometry,
    Point,
    Scalar,
    Segment,
    cross,
    dot,
    exact,
    is_exact,
    linear_reflection,
    near,
    reflect_across_line,
    same_direction,
    same_point,
    sign,
    squared_distance_to_segment,
    sub,
)
from billiards.settings import settings

logger = logging.getLogger(__name__)

DEFAULT_MAX_DENOMINATOR = 120

AngleFractions = List[Tuple[int, int]]


class Polygon:
    """A simple counterclockwise polygon. Build through `build_polygon`."""

    def __init__(self, vertices: Sequence[Point], angle_data: Optional[AngleFractions] = None):
        self.vertices: Tuple[Point, ...] = tuple(vertices)
        self.angle_data = angle_data

    def __repr__(self):
        return f"Polygon({', '.join(str(v) for v in self.vertices)})"

    def __eq__(self, other):
        return isinstance(other, Polygon) and _canonical_rotation(self.vertices) == _canonical_rotation(other.vertices)

    def __hash__(self):
        return hash(_canonical_rotation(self.vertices))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def exact(self) -> bool:
        return is_exact(*(c for v in self.vertices for c in v))

    @property
    def rational(self) -> bool:
        return self.angle_data is not None

    @cached_property
    def sides(self) -> Tuple[Segment, ...]:
        n = self.n
        return tuple(Segment(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    @cached_property
    def area(self) -> Scalar:
        return _signed_area(self.vertices)

    @cached_property
    def side_reflections(self) -> Tuple[Isometry, ...]:
        return tuple(reflect_across_line(s) for s in self.sides)

    def side_reflection(self, i: int) -> Isometry:
        return self.side_reflections[i]

    def word_isometry(self, word: Iterable[int]) -> Isometry:
        """R_{w0} ∘ R_{w1} ∘ … : maps the base table onto the last copy of the word's corridor."""
        g = Isometry.identity()
        for side in word:
            g = g.compose(self.side_reflections[side])
        return g

    def sides_at(self, vertex: int) -> Tuple[int, int]:
        """(side ending at the vertex, side starting at it) in counterclockwise order."""
        return (vertex - 1) % self.n, vertex

    def vertex_index(self, p: Point) -> Optional[int]:
        for i, v in enumerate(self.vertices):
            if same_point(v, p):
                return i
        return None

    @cached_property
    def interior_angles(self) -> Tuple[float, ...]:
        angles = []
        for i, v in enumerate(self.vertices):
            prev, nxt = self.vertices[i - 1], self.vertices[(i + 1) % self.n]
            b, a = sub(nxt, v), sub(prev, v)
            angles.append(math.atan2(float(cross(b, a)), float(dot(b, a))) % (2 * math.pi))
        return tuple(angles)

    @cached_property
    def is_convex(self) -> bool:
        return all(a < math.pi + settings.angle_tolerance for a in self.interior_angles)

    @cached_property
    def bounding_box(self) -> Tuple[Scalar, Scalar, Scalar, Scalar]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @cached_property
    def diameter(self) -> float:
        return max(math.dist(tuple(map(float, a)), tuple(map(float, b))) for a in self.vertices for b in self.vertices)

    def on_boundary(self, p: Point) -> Optional[int]:
        """Index of a side containing p, or None."""
        for i, s in enumerate(self.sides):
            d2 = squared_distance_to_segment(p, s)
            if near(d2, 0, settings.tolerance ** 2):
                return i
        return None

    def contains(self, p: Point, closed: bool = True) -> bool:
        if self.on_boundary(p) is not None:
            return closed
        # crossing number; boundary already excluded
        inside = False
        for s in self.sides:
            a, b = s
            if (a.y > p.y) != (b.y > p.y):
                x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
                if x_cross > p.x:
                    inside = not inside
        return inside

    def squared_distance(self, p: Point) -> Scalar:
        if self.contains(p):
            return 0 * p.x
        return min(squared_distance_to_segment(p, s) for s in self.sides)

    def inward_normal(self, i: int) -> Direction:
        e = self.sides[i].vector
        return Direction(-e.dy, e.dx)

    def require_convex(self):
        if not self.is_convex:
            raise NotConvexError(f"{self!r} is not convex")


def _canonical_rotation(vertices):
    i = min(range(len(vertices)), key=lambda k: (vertices[k].x, vertices[k].y))
    return tuple(vertices[i:] + vertices[:i])


def _signed_area(vertices) -> Scalar:
    n = len(vertices)
    return sum(cross(vertices[i], vertices[(i + 1) % n]) for i in range(n)) / 2


def _orientation(a, b, c) -> int:
    return sign(cross(sub(b, a), sub(c, a)))


def _on_segment(a, b, p) -> bool:
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def segments_intersect(s: Segment, t: Segment) -> bool:
    """Closed segments share at least one point."""
    o1, o2 = _orientation(s.a, s.b, t.a), _orientation(s.a, s.b, t.b)
    o3, o4 = _orientation(t.a, t.b, s.a), _orientation(t.a, t.b, s.b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and _on_segment(s.a, s.b, t.a))
        or (o2 == 0 and _on_segment(s.a, s.b, t.b))
        or (o3 == 0 and _on_segment(t.a, t.b, s.a))
        or (o4 == 0 and _on_segment(t.a, t.b, s.b))
    )


def _coerce(value, backend: Optional[str]) -> Scalar:
    if backend == "exact":
        if isinstance(value, float):
            raise InexactCoordinateError(f"coordinate {value!r} is not exact; give an integer or p/q")
        return exact(value)
    if backend == "float":
        return float(value)
    return exact(value)


def build_polygon(
    vertices: Sequence, backend: Optional[str] = None, max_denominator: int = DEFAULT_MAX_DENOMINATOR
) -> Polygon:
    """Validate, orient counterclockwise and try to certify rational angles.

    With no backend given, exact coordinates stay exact unless any coordinate is
    a float, in which case the whole table moves to the float backend.
    """
    points = [tuple(v) for v in vertices]
    if backend is None:
        backend = "exact" if is_exact(*(c for v in points for c in v)) else "float"
    pts = [Point(_coerce(x, backend), _coerce(y, backend)) for x, y in points]
    if len(pts) < 3:
        raise ZeroAreaError("a table needs at least 3 vertices")
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if same_point(pts[i], pts[j]):
                raise RepeatedVertexError(f"vertex {pts[i]} appears twice (positions {i} and {j})")
    area = _signed_area(pts)
    if sign(area) == 0:
        raise ZeroAreaError("vertices enclose no area")
    if area < 0:
        pts.reverse()
    _check_simple(pts)
    p = Polygon(pts)
    p.angle_data = certify_rational(p, max_denominator)
    logger.debug("built %r, rational=%s", p, p.rational)
    return p


def _check_simple(pts: List[Point]):
    n = len(pts)
    sides = [Segment(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        # adjacent sides may only share their common vertex
        nxt = sides[(i + 1) % n]
        u, w = sides[i].vector, nxt.vector
        if sign(cross(u, w)) == 0 and dot(u, w) < 0:
            raise SelfIntersectionError(f"sides {i} and {(i + 1) % n} fold back onto each other")
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if segments_intersect(sides[i], sides[j]):
                raise SelfIntersectionError(f"sides {i} and {j} intersect")


def _gaussian_power(re, im, k):
    rr, ri = Fraction(1), Fraction(0)
    while k:
        if k & 1:
            rr, ri = rr * re - ri * im, rr * im + ri * re
        re, im = re * re - im * im, 2 * re * im
        k >>= 1
    return rr, ri


def _certify_angle_exact(b: Direction, a: Direction, alpha: float, max_denominator: int) -> Optional[Tuple[int, int]]:
    # z = conj(b)·a has argument alpha; alpha = pπ/q  ⇔  z^q is real with sign (-1)^p
    re, im = dot(b, a), cross(b, a)
    for q in range(1, max_denominator + 1):
        p = round(alpha * q / math.pi)
        if not 0 < p < 2 * q:
            continue
        zr, zi = _gaussian_power(re, im, q)
        if zi == 0 and (zr > 0) == (p % 2 == 0):
            return p, q
    return None


def certify_rational(p: Polygon, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Optional[AngleFractions]:
    if max_denominator < 1:
        raise ValueError("max_denominator must be at least 1")
    fractions = []
    for i, v in enumerate(p.vertices):
        alpha = p.interior_angles[i]
        prev, nxt = p.vertices[i - 1], p.vertices[(i + 1) % p.n]
        if p.exact:
            found = _certify_angle_exact(sub(nxt, v), sub(prev, v), alpha, max_denominator)
        else:
            f = Fraction(alpha / math.pi).limit_denominator(max_denominator)
            found = None
            if 0 < f < 2 and abs(alpha - float(f) * math.pi) <= settings.angle_tolerance:
                found = f.numerator, f.denominator
        if found is None:
            return None
        fractions.append(found)
    if sum(Fraction(a, b) for a, b in fractions) != p.n - 2:
        return None
    return fractions


def floor_bound(p: Polygon) -> int:
    if p.angle_data is None:
        raise NotRationalError(f"{p!r} has no certified rational angles")
    return 2 * reduce(math.lcm, (q for _, q in p.angle_data), 1)


def _as_direction(theta) -> Direction:
    if isinstance(theta, Direction):
        return theta
    if isinstance(theta, tuple):
        return Direction(*theta)
    return Direction.from_angle(float(theta))


def _normalised(d: Direction) -> Direction:
    if is_exact(*d):
        return d
    n = math.hypot(d.dx, d.dy)
    return Direction(d.dx / n, d.dy / n)


def direction_floors(p: Polygon, theta) -> FloorSet:
    bound = floor_bound(p)
    base = _normalised(_as_direction(theta))
    generators = [linear_reflection(s.vector) for s in p.sides]
    members = [base]
    frontier = [base]
    while frontier:
        nxt = []
        for d in frontier:
            for g in generators:
                image = _normalised(g.apply_linear(d))
                if not any(same_direction(image, m) for m in members):
                    members.append(image)
                    nxt.append(image)
                    if len(members) > bound:
                        raise NotRationalError(f"direction orbit exceeds {bound} floors; angles are not rational")
        frontier = nxt
    members.sort(key=lambda d: d.angle)
    return FloorSet(base=base, directions=tuple(members), floor_count=len(members), bound=bound)


def area(p: Polygon) -> Scalar:
    return p.area


def unit_square() -> Polygon:
    return build_polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def right_isosceles() -> Polygon:
    return build_polygon([(0, 0), (1, 0), (0, 1)])


def lshape() -> Polygon:
    """Three unit squares; the right-hand square is [1,2]×[0,1]."""
    return build_polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])


def regular_polygon(n: int) -> Polygon:
    """Float-backend regular n-gon with unit circumradius."""
    return build_polygon(
        [(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in range(n)], backend="float"
    )


def parse_coordinate(token: str, backend: str) -> Scalar:
    try:
        if backend == "exact":
            if any(c in token for c in ".eE") and "/" not in token:
                raise InexactCoordinateError(f"{token!r} is not an integer or p/q fraction")
            return Fraction(token)
        return float(Fraction(token)) if "/" in token else float(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise InexactCoordinateError(f"cannot read coordinate {token!r}") from exc


def parse_table(text: str, backend: str = "exact", max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Polygon:
    vertices = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TableFileError(f"expected 'x y', got {raw.strip()!r}", line=lineno)
        try:
            vertices.append(tuple(parse_coordinate(tok, backend) for tok in parts))
        except InexactCoordinateError as exc:
            raise TableFileError(str(exc), line=lineno) from exc
    return build_polygon(vertices, backend=backend, max_denominator=max_denominator)


def read_table(path: Union[str, Path], backend: str = "exact", max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Polygon:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TableFileError(f"cannot read {path}: {exc}") from exc
    return parse_table(text, backend=backend, max_denominator=max_denominator)


def format_table(p: Polygon) -> str:
    lines = ["# x y, counterclockwise"]
    lines.extend(f"{v.x!s} {v.y!s}" if p.exact else f"{v.x!r} {v.y!r}" for v in p.vertices)
    return "\n".join(lines) + "\n"


def write_table(p: Polygon, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(format_table(p), encoding="utf-8")
    return path
