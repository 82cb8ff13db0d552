"""
Planar primitives shared by every other module.

Scalars are either `Fraction` (exact backend) or `float` (float backend). Mixing
the two promotes to float, so the backend of a result is decided by its inputs;
float comparisons use `settings.tolerance`.
"""
import math
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from billiards.errors import DegenerateSegmentError
from billiards.settings import settings

Scalar = Union[Fraction, float]


def is_exact(*values) -> bool:
    return not any(isinstance(v, float) for v in values)


def exact(value) -> Scalar:
    """Normalise ints to Fractions, leave floats and Fractions alone."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value)
    return float(value)


def near(a: Scalar, b: Scalar, tol: Optional[float] = None) -> bool:
    if is_exact(a, b):
        return a == b
    return abs(a - b) <= (settings.tolerance if tol is None else tol)


def sign(a: Scalar, tol: Optional[float] = None) -> int:
    if is_exact(a):
        return (a > 0) - (a < 0)
    t = settings.tolerance if tol is None else tol
    if a > t:
        return 1
    if a < -t:
        return -1
    return 0


class Point(NamedTuple):
    x: Scalar
    y: Scalar

    def __str__(self):
        return f"({self.x}, {self.y})"


class Direction(NamedTuple):
    """A ray direction, meaningful up to positive scaling."""

    dx: Scalar
    dy: Scalar

    @property
    def angle(self) -> float:
        return math.atan2(float(self.dy), float(self.dx)) % (2 * math.pi)

    @property
    def norm(self) -> float:
        return math.hypot(float(self.dx), float(self.dy))

    def reversed(self) -> "Direction":
        return Direction(-self.dx, -self.dy)

    @classmethod
    def from_angle(cls, phi: float) -> "Direction":
        return cls(math.cos(phi), math.sin(phi))

    @classmethod
    def between(cls, a: Point, b: Point) -> "Direction":
        return cls(b.x - a.x, b.y - a.y)


class Segment(NamedTuple):
    a: Point
    b: Point

    @property
    def vector(self) -> Direction:
        return Direction(self.b.x - self.a.x, self.b.y - self.a.y)

    @property
    def length(self) -> float:
        return self.vector.norm

    def midpoint(self) -> Point:
        return Point((self.a.x + self.b.x) / 2, (self.a.y + self.b.y) / 2)

    def at(self, t: Scalar) -> Point:
        return Point(self.a.x + t * (self.b.x - self.a.x), self.a.y + t * (self.b.y - self.a.y))

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


def cross(u, v) -> Scalar:
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v) -> Scalar:
    return u[0] * v[0] + u[1] * v[1]


def sub(p, q) -> Direction:
    return Direction(p[0] - q[0], p[1] - q[1])


def translate(p, v, t=1) -> Point:
    return Point(p[0] + t * v[0], p[1] + t * v[1])


def same_direction(u, v) -> bool:
    """Rays coincide: parallel and pointing the same way."""
    if is_exact(*u, *v):
        return cross(u, v) == 0 and dot(u, v) > 0
    nu, nv = math.hypot(u[0], u[1]), math.hypot(v[0], v[1])
    return abs(cross(u, v)) <= settings.tolerance * nu * nv and dot(u, v) > 0


def same_point(p, q, tol: Optional[float] = None) -> bool:
    if is_exact(*p, *q):
        return p[0] == q[0] and p[1] == q[1]
    return math.hypot(p[0] - q[0], p[1] - q[1]) <= (settings.tolerance if tol is None else tol)


def angle_between(u, v) -> float:
    """Unsigned angle in [0, π] between two vectors."""
    return abs(math.atan2(float(cross(u, v)), float(dot(u, v))))


def circle_distance(a: float, b: float) -> float:
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def squared_distance_to_segment(p: Point, s: Segment) -> Scalar:
    v = s.vector
    w = sub(p, s.a)
    vv = dot(v, v)
    t = dot(w, v) / vv
    if t <= 0:
        return dot(w, w)
    if t >= 1:
        e = sub(p, s.b)
        return dot(e, e)
    c = cross(v, w)
    return c * c / vv


class Isometry(NamedTuple):
    """p ↦ M p + t with M = [[a, b], [c, d]] orthogonal."""

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar
    tx: Scalar
    ty: Scalar

    @classmethod
    def identity(cls) -> "Isometry":
        one, zero = Fraction(1), Fraction(0)
        return cls(one, zero, zero, one, zero, zero)

    @property
    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    @property
    def translation(self) -> Direction:
        return Direction(self.tx, self.ty)

    def apply(self, p) -> Point:
        return Point(self.a * p[0] + self.b * p[1] + self.tx, self.c * p[0] + self.d * p[1] + self.ty)

    def apply_linear(self, v) -> Direction:
        return Direction(self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def apply_segment(self, s: Segment) -> Segment:
        return Segment(self.apply(s.a), self.apply(s.b))

    def compose(self, other: "Isometry") -> "Isometry":
        """self ∘ other."""
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.a * other.tx + self.b * other.ty + self.tx,
            self.c * other.tx + self.d * other.ty + self.ty,
        )

    def inverse(self) -> "Isometry":
        # orthogonal: M⁻¹ = Mᵀ
        a, b, c, d = self.a, self.c, self.b, self.d
        return Isometry(a, b, c, d, -(a * self.tx + b * self.ty), -(c * self.tx + d * self.ty))

    def has_identity_linear_part(self) -> bool:
        return near(self.a, 1) and near(self.b, 0) and near(self.c, 0) and near(self.d, 1)

    def residual(self, other: "Isometry") -> float:
        return max(abs(float(x) - float(y)) for x, y in zip(self, other))


def _require_nondegenerate(s: Segment):
    if same_point(s.a, s.b):
        raise DegenerateSegmentError(f"segment {s.a}→{s.b} has no length")


def linear_reflection(u) -> Isometry:
    """Reflection of directions in a line parallel to u."""
    ux, uy = u
    n = ux * ux + uy * uy
    zero = 0 * n
    return Isometry(
        (ux * ux - uy * uy) / n,
        2 * ux * uy / n,
        2 * ux * uy / n,
        (uy * uy - ux * ux) / n,
        zero,
        zero,
    )


def reflect_across_line(s: Segment) -> Isometry:
    _require_nondegenerate(s)
    m = linear_reflection(s.vector)
    # fix s.a: t = a - M a
    ma = m.apply_linear(s.a)
    return m._replace(tx=s.a.x - ma.dx, ty=s.a.y - ma.dy)


def reflect_direction(d: Direction, s: Segment) -> Direction:
    _require_nondegenerate(s)
    return linear_reflection(s.vector).apply_linear(d)


class RayHit(NamedTuple):
    t: Scalar
    hit: Point
    at_endpoint: bool
    s: Scalar


def ray_segment_intersection(origin: Point, d: Direction, s: Segment) -> Optional[RayHit]:
    """First meeting of the open ray origin + t·d (t > 0) with the closed segment s.

    Segments parallel to the ray never register a hit; sliding along a side is
    not a bounce.
    """
    e = s.vector
    denom = cross(d, e)
    if is_exact(denom):
        if denom == 0:
            return None
    elif abs(denom) <= settings.tolerance * math.hypot(*d) * math.hypot(*e):
        return None
    w = sub(s.a, origin)
    t = cross(w, e) / denom
    u = cross(w, d) / denom
    exact_case = is_exact(t, u)
    if exact_case:
        if t <= 0 or u < 0 or u > 1:
            return None
    else:
        tol = settings.tolerance
        scale = math.hypot(float(e[0]), float(e[1]))
        if t * math.hypot(float(d[0]), float(d[1])) <= tol or u * scale < -tol or (u - 1) * scale > tol:
            return None
        u = min(max(u, 0.0), 1.0)
    hit = s.at(u)
    if exact_case:
        at_endpoint = u == 0 or u == 1
    else:
        at_endpoint = same_point(hit, s.a) or same_point(hit, s.b)
        if at_endpoint:
            hit = s.a if same_point(hit, s.a) else s.b
    return RayHit(t, hit, at_endpoint, u)


def clip_to_box(s: Segment, xmin, ymin, xmax, ymax) -> Optional[Segment]:
    """Part of s inside the closed axis-aligned box, or None."""
    d = s.vector
    t0, t1 = 0 * d.dx, 1 + 0 * d.dx
    for delta, lo, hi, start in ((d.dx, xmin, xmax, s.a.x), (d.dy, ymin, ymax, s.a.y)):
        if delta == 0:
            if start < lo or start > hi:
                return None
            continue
        ta, tb = (lo - start) / delta, (hi - start) / delta
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1:
            return None
    return Segment(s.at(t0), s.at(t1))


def segment_intersection(s: Segment, t: Segment) -> Optional[Point]:
    """The single common point of two non-parallel closed segments, or None."""
    d, e = s.vector, t.vector
    denom = cross(d, e)
    if sign(denom) == 0:
        return None
    w = sub(t.a, s.a)
    u, v = cross(w, e) / denom, cross(w, d) / denom
    if sign(u) < 0 or sign(u - 1) > 0 or sign(v) < 0 or sign(v - 1) > 0:
        return None
    return s.at(u)
