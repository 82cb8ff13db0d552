"""
Orbit statistics: discrepancy against a finite basis of disks, ε-density on the
table and on the invariant surface, and direction-window scans for periodic
points.
"""
import logging
import math
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

import numpy as np
import shapely
from shapely.affinity import affine_transform
from shapely.geometry import MultiLineString, Polygon as ShapelyPolygon

from billiards.errors import EmptyOrbitError, NotPeriodicError
from billiards.models import (
    BasisRegion,
    CEpsilonCandidate,
    CoveredPoint,
    Cylinder,
    DensityReport,
    DiscrepancyReport,
    NearbyPeriodicPoint,
    Orbit,
    PhasePoint,
    RegionDiscrepancy,
    ScanReport,
    WindowCover,
)
from billiards.modules.flow import trace
from billiards.modules.geomcore import (
    Direction,
    Isometry,
    Point,
    Scalar,
    Segment,
    circle_distance,
    dot,
    same_direction,
    squared_distance_to_segment,
    sub,
    translate,
)
from billiards.modules.periodic import open_box_overlap, search_cylinders
from billiards.modules.polygon import Polygon, direction_floors
from billiards.modules.unfolding import enumerate_generalized_diagonals

logger = logging.getLogger(__name__)


def _fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def disk_polygon_area(p: Polygon, center: Point, radius: Scalar) -> float:
    """Area of the open disk ∩ table, summed edge by edge as signed disk ∩ triangle(center, edge)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    cx, cy, r = float(center[0]), float(center[1]), float(radius)
    total = 0.0
    for side in p.sides:
        a = (float(side.a.x) - cx, float(side.a.y) - cy)
        b = (float(side.b.x) - cx, float(side.b.y) - cy)
        total += _triangle_disk_area(a, b, r)
    return abs(total)


def _triangle_disk_area(a, b, r) -> float:
    d = (b[0] - a[0], b[1] - a[1])
    qa = d[0] ** 2 + d[1] ** 2
    if qa == 0:
        return 0.0
    qb = 2 * (a[0] * d[0] + a[1] * d[1])
    qc = a[0] ** 2 + a[1] ** 2 - r * r
    cuts = [0.0]
    disc = qb * qb - 4 * qa * qc
    if disc > 0:
        root = math.sqrt(disc)
        cuts.extend(t for t in sorted(((-qb - root) / (2 * qa), (-qb + root) / (2 * qa))) if 0 < t < 1)
    cuts.append(1.0)
    area = 0.0
    for t0, t1 in zip(cuts, cuts[1:]):
        p0 = (a[0] + t0 * d[0], a[1] + t0 * d[1])
        p1 = (a[0] + t1 * d[0], a[1] + t1 * d[1])
        tm = (t0 + t1) / 2
        mid = (a[0] + tm * d[0], a[1] + tm * d[1])
        if mid[0] ** 2 + mid[1] ** 2 <= r * r:
            area += (p0[0] * p1[1] - p0[1] * p1[0]) / 2
        else:
            area += r * r * math.atan2(p0[0] * p1[1] - p0[1] * p1[0], p0[0] * p1[0] + p0[1] * p1[1]) / 2
    return area


def enumerate_basis(p: Polygon, epsilon) -> List[BasisRegion]:
    """Disks centred at (a/q, b/s) in lowest terms with diameter 1/max(q, s) > epsilon that meet the table."""
    eps = _fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    top = math.ceil(1 / eps) - 1
    xmin, ymin, xmax, ymax = (_fraction(c) for c in p.bounding_box)
    table_area = float(p.area)
    regions = []
    for q in range(1, top + 1):
        for s in range(1, top + 1):
            diameter = Fraction(1, max(q, s))
            r = diameter / 2
            xs = [Fraction(a, q) for a in range(math.ceil((xmin - r) * q), math.floor((xmax + r) * q) + 1) if gcd(a, q) == 1]
            ys = [Fraction(b, s) for b in range(math.ceil((ymin - r) * s), math.floor((ymax + r) * s) + 1) if gcd(b, s) == 1]
            for x in xs:
                for y in ys:
                    center = Point(x, y)
                    if p.squared_distance(center) < r * r:
                        area = disk_polygon_area(p, center, r)
                        regions.append(
                            BasisRegion(center=center, q=q, s=s, diameter=diameter, area_fraction=area / table_area)
                        )
    regions.sort(key=lambda g: (-g.diameter, g.center))
    logger.debug("%d basis regions for epsilon=%s", len(regions), epsilon)
    return regions


def _chord(link: Segment, center: Point, radius: Scalar) -> float:
    d = link.vector
    w = sub(link.a, center)
    qa = dot(d, d)
    qb = 2 * dot(d, w)
    qc = dot(w, w) - radius * radius
    disc = qb * qb - 4 * qa * qc
    if disc <= 0:
        return 0.0
    root = math.sqrt(float(disc))
    t0 = max(0.0, (-float(qb) - root) / (2 * float(qa)))
    t1 = min(1.0, (-float(qb) + root) / (2 * float(qa)))
    return max(0.0, t1 - t0) * link.length


def orbit_region_length(o, r: BasisRegion) -> float:
    """Length of the links inside the open disk of a basis region."""
    links = o.links if isinstance(o, Orbit) else o
    return sum(_chord(link, r.center, r.radius) for link in links)


def discrepancy_of_links(
    p: Polygon, links: Sequence[Segment], epsilon, regions: Optional[Sequence[BasisRegion]] = None
) -> DiscrepancyReport:
    total = sum(link.length for link in links)
    if total <= 0:
        raise EmptyOrbitError("trajectory has zero length")
    rows = []
    if regions is None:
        # no basis disk is wider than 1, so the sup runs over nothing
        regions = [] if _fraction(epsilon) >= 1 else enumerate_basis(p, epsilon)
    for region in regions:
        lf = orbit_region_length(links, region) / total
        rows.append(
            RegionDiscrepancy(
                region=region,
                length_fraction=lf,
                area_fraction=region.area_fraction,
                discrepancy=abs(lf - region.area_fraction),
            )
        )
    sup = max((row.discrepancy for row in rows), default=0.0)
    return DiscrepancyReport(
        epsilon=_fraction(epsilon), per_region=tuple(rows), sup_discrepancy=sup, well_distributed=sup < float(epsilon)
    )


def discrepancy(p: Polygon, o: Orbit, epsilon) -> DiscrepancyReport:
    """Discrepancy of one period (or of the traced segment) over the disk basis."""
    report = discrepancy_of_links(p, o.links, epsilon)
    logger.info("sup discrepancy %.6f at epsilon=%s", report.sup_discrepancy, epsilon)
    return report


def _grid(p: Polygon, spacing: Fraction) -> Tuple[np.ndarray, np.ndarray, Tuple]:
    xmin, ymin, xmax, ymax = (_fraction(c) for c in p.bounding_box)
    nx = math.floor((xmax - xmin) / spacing)
    ny = math.floor((ymax - ymin) / spacing)
    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    xs = float(xmin) + ii * float(spacing)
    ys = float(ymin) + jj * float(spacing)
    inside = shapely.intersects_xy(_shape(p), xs, ys)
    return ii[inside], jj[inside], (xmin, ymin)


def _shape(p: Polygon) -> ShapelyPolygon:
    return ShapelyPolygon([(float(v.x), float(v.y)) for v in p.vertices])


def _farthest(links: Sequence[Segment], ii, jj, origin, spacing):
    """Index of the grid point farthest from the links and its float distance."""
    xs = float(origin[0]) + ii * float(spacing)
    ys = float(origin[1]) + jj * float(spacing)
    if not links:
        return 0, math.inf
    geometry = MultiLineString([[(float(a.x), float(a.y)), (float(b.x), float(b.y))] for a, b in links])
    distances = shapely.distance(shapely.points(xs, ys), geometry)
    k = int(np.argmax(distances))
    return k, float(distances[k])


def epsilon_dense(p: Polygon, o: Orbit, epsilon, surface: bool = False) -> DensityReport:
    """Grid check at spacing ε/4; a witness is re-verified with exact distances."""
    eps = _fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    spacing = eps / 4
    ii, jj, origin = _grid(p, spacing)
    groups: List[Tuple[Optional[int], List[Segment]]]
    if surface:
        floors = direction_floors(p, o.start.v)
        groups = [(f, []) for f in range(floors.floor_count)]
        for link in o.links:
            f = floors.index_of(link.vector)
            if f is not None:
                groups[f][1].append(link)
    else:
        groups = [(None, list(o.links))]
    best = None
    for floor, links in groups:
        k, distance = _farthest(links, ii, jj, origin, spacing)
        if distance <= float(eps):
            continue
        point = Point(origin[0] + int(ii[k]) * spacing, origin[1] + int(jj[k]) * spacing)
        if not p.exact:
            point = Point(float(point.x), float(point.y))
        # exact confirmation of the float distance field
        if all(squared_distance_to_segment(point, link) > eps * eps for link in links):
            if best is None or distance > best[1]:
                best = (point, distance, floor)
    if best is None:
        return DensityReport(epsilon=eps, dense=True, grid_spacing=spacing)
    point, distance, floor = best
    return DensityReport(
        epsilon=eps,
        uncovered_witness=point,
        witness_distance=distance,
        floor_index=floor,
        dense=False,
        grid_spacing=spacing,
    )


def open_region_length(o, box) -> Scalar:
    """Length of an orbit inside an open axis-aligned box (xmin, ymin, xmax, ymax)."""
    links = o.links if isinstance(o, Orbit) else o
    return sum((open_box_overlap(link, box) for link in links), 0)


def cylinder_copies(p: Polygon, cylinder: Cylinder) -> List[Isometry]:
    copies = [Isometry.identity()]
    for side in cylinder.word[:-1]:
        copies.append(copies[-1].compose(p.side_reflection(side)))
    return copies


def cylinder_footprint(p: Polygon, cylinder: Cylinder) -> List[Tuple[ShapelyPolygon, Direction]]:
    """Pieces of the table swept by the strip, one per copy, with the folded direction there."""
    a, b = cylinder.strip
    T = cylinder.translation
    band = ShapelyPolygon([(float(q.x), float(q.y)) for q in (a, b, translate(b, T), translate(a, T))])
    table = _shape(p)
    pieces = []
    for g in cylinder_copies(p, cylinder):
        h = g.inverse()
        params = [float(h.a), float(h.b), float(h.c), float(h.d), float(h.tx), float(h.ty)]
        copy = affine_transform(table, [float(g.a), float(g.b), float(g.c), float(g.d), float(g.tx), float(g.ty)])
        piece = band.intersection(copy)
        if piece.is_empty or piece.area <= 0:
            continue
        pieces.append((affine_transform(piece, params), h.apply_linear(T)))
    return pieces


def _in_window(d: Direction, theta: float, delta: float) -> bool:
    return circle_distance(d.angle, theta) < delta


def _orbit_through(p: Polygon, q: Point, d: Direction, cylinder: Cylinder) -> Optional[Orbit]:
    orbit = trace(p, PhasePoint(q=q, v=d), cylinder.period_links)
    return orbit if orbit.periodic is not None else None


def _sample_points(p: Polygon, grid: int) -> List[Point]:
    xmin, ymin, xmax, ymax = (_fraction(c) for c in p.bounding_box)
    points = []
    for i in range(grid):
        for j in range(grid):
            q = Point(xmin + (xmax - xmin) * Fraction(2 * i + 1, 2 * grid), ymin + (ymax - ymin) * Fraction(2 * j + 1, 2 * grid))
            if not p.exact:
                q = Point(float(q.x), float(q.y))
            if p.contains(q, closed=False):
                points.append(q)
    return points


def scan_A_set(
    p: Polygon,
    theta: float,
    delta: float,
    epsilon,
    grid: int,
    budget: int,
    max_word: int = 24,
) -> ScanReport:
    """Fraction of sample points lying on an ε-well-distributed periodic orbit with direction within δ of θ."""
    search = search_cylinders(p, max_word, (theta, delta), budget)
    footprints = [(i, piece, d) for i, c in enumerate(search.cylinders) for piece, d in cylinder_footprint(p, c)]
    footprints = [(i, piece, d) for i, piece, d in footprints if _in_window(d, theta, delta)]
    samples = _sample_points(p, grid)
    regions = enumerate_basis(p, epsilon)
    covered = []
    for q in samples:
        spot = shapely.Point(float(q.x), float(q.y))
        for i, piece, d in footprints:
            if not piece.contains(spot):
                continue
            orbit = _orbit_through(p, q, d, search.cylinders[i])
            if orbit is None:
                continue
            report = discrepancy_of_links(p, orbit.links, epsilon, regions)
            if report.well_distributed:
                covered.append(
                    CoveredPoint(
                        point=q,
                        cylinder=i,
                        direction=d,
                        open_radius=piece.boundary.distance(spot),
                        sup_discrepancy=report.sup_discrepancy,
                    )
                )
                break
    fraction = len(covered) / len(samples) if samples else 0.0
    logger.info("scan covered %d of %d sample points with %d strips", len(covered), len(samples), len(search.cylinders))
    return ScanReport(
        theta=theta,
        delta=delta,
        epsilon=_fraction(epsilon),
        sampled=len(samples),
        covered=tuple(covered),
        coverage_fraction=fraction,
        strips=tuple(search.cylinders),
        nodes_expanded=search.nodes_expanded,
    )


def periodic_point_near(
    p: Polygon, q: Point, phi: float, epsilon: float, max_word: int = 40, budget: Optional[int] = None
) -> Optional[NearbyPeriodicPoint]:
    """A cylinder with direction within ε of φ whose strip passes within ε of q."""
    spot = shapely.Point(float(q[0]), float(q[1]))
    best = None
    for cylinder in search_cylinders(p, max_word, (phi, epsilon), budget).cylinders:
        for piece, d in cylinder_footprint(p, cylinder):
            if not _in_window(d, phi, epsilon):
                continue
            distance = piece.distance(spot)
            if distance < epsilon and (best is None or distance < best.distance):
                best = NearbyPeriodicPoint(cylinder=cylinder, distance=distance, folded_direction=d)
    return best


def _diagonal_directions(p: Polygon, max_links: int):
    """One diagonal per floor set of diagonal directions."""
    chosen = []
    for diagonal in enumerate_generalized_diagonals(p, max_links):
        if any(any(same_direction(diagonal.direction, m) for m in floors.directions) for _, floors in chosen):
            continue
        chosen.append((diagonal, direction_floors(p, diagonal.direction)))
    return chosen


def c_epsilon_candidates(
    p: Polygon, epsilon, max_links: int, max_word: int = 12, budget: Optional[int] = 20000
) -> List[CEpsilonCandidate]:
    """Diagonal directions that carry a certified non-ε-dense periodic orbit."""
    found = []
    for diagonal, floors in _diagonal_directions(p, max_links):
        search = search_cylinders(p, max_word, (diagonal.direction.angle, 1e-6), budget)
        for cylinder in search.cylinders:
            if cylinder.translation not in floors:
                continue
            orbit = trace(p, cylinder.representative, cylinder.period_links)
            witness = epsilon_dense(p, orbit, epsilon)
            if not witness.dense:
                found.append(
                    CEpsilonCandidate(direction=cylinder.translation, orbit=orbit, witness=witness, diagonal=diagonal)
                )
                break
    logger.info("%d non-dense periodic directions at epsilon=%s", len(found), epsilon)
    return found


def well_distributed_windows(p: Polygon, o: Orbit, epsilon, N: int) -> List[WindowCover]:
    """Cyclic windows of N..2N links of a periodic orbit that are ε-well distributed."""
    if o.periodic is None:
        raise NotPeriodicError("windows are taken cyclically over one period")
    if N < 1:
        raise ValueError("N must be at least 1")
    links = list(o.links)
    regions = enumerate_basis(p, epsilon)
    covers = []
    for start in range(len(links)):
        for length in range(N, 2 * N + 1):
            window = [links[(start + k) % len(links)] for k in range(length)]
            report = discrepancy_of_links(p, window, epsilon, regions)
            if report.well_distributed:
                covers.append(WindowCover(start_link=start, length=length, sup_discrepancy=report.sup_discrepancy))
    return covers
