import math
from fractions import Fraction as F

import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards.errors import NotConvexError, NotPeriodicError, PhasePointError, VertexFootError
from billiards.models import PhasePoint, canonical_word
from billiards.modules.flow import detect_period, trace
from billiards.modules.geomcore import (
    Direction,
    Point,
    Segment,
    circle_distance,
    cross,
    same_direction,
    squared_distance_to_segment,
)
from billiards.modules.periodic import (
    RIGHT_SQUARE,
    covering_sides,
    cylinder_from_word,
    exceptional_set_report,
    lshape_orbit,
    open_box_overlap,
    perp_scan,
    perpendicular_orbit,
    periodic_strip,
    returns_after,
    search_cylinders,
    word_search,
)
from billiards.modules.polygon import direction_floors, unit_square
from billiards.modules.stats import cylinder_footprint
from billiards.modules.unfolding import diagonal_links
from tests.strategies import fractions_between


def P(x, y):
    return Point(F(x), F(y))


def test_perpendicular_orbit_in_the_square(square):
    outcome = perpendicular_orbit(square, 0, P(F(1, 4), 0), 10)
    assert outcome.kind == "periodic"
    assert outcome.links_used == 1
    assert outcome.orbit.periodic.period_links == 2
    assert outcome.orbit.periodic.period_length == pytest.approx(2)


def test_perpendicular_orbit_on_the_hypotenuse(triangle):
    outcome = perpendicular_orbit(triangle, 1, P(F(1, 4), F(3, 4)), 10)
    assert outcome.kind == "periodic"
    assert outcome.links_used == 3
    assert outcome.orbit.periodic.period_links == 6


def test_perpendicular_orbit_into_a_vertex(triangle):
    outcome = perpendicular_orbit(triangle, 1, P(F(1, 2), F(1, 2)), 10)
    assert outcome.kind == "singular"
    assert outcome.diagonal is not None
    assert outcome.diagonal.link_count == 2
    assert outcome.diagonal.start_vertex == 0


def test_perpendicular_orbit_input_checks(square):
    with pytest.raises(VertexFootError):
        perpendicular_orbit(square, 0, P(1, 0), 10)
    with pytest.raises(PhasePointError):
        perpendicular_orbit(square, 0, P(F(1, 2), F(1, 2)), 10)


def test_perp_scan_square(square):
    result = perp_scan(square, 0, 200, 100)
    assert result.periodic_samples == 100
    assert result.singular_samples == 0
    assert result.undecided_samples == 0
    assert result.singular_feet == ()
    assert len(result.periodic_feet) == 1
    assert result.periodic_feet[0].period_links == 2


def test_perp_scan_hypotenuse(triangle):
    result = perp_scan(triangle, 1, 200, 9)
    assert P(F(1, 2), F(1, 2)) in result.singular_feet
    assert result.undecided_samples == 0
    assert result.periodic_samples + result.singular_samples == 9
    assert {interval.period_links for interval in result.periodic_feet} == {6}


@pytest.mark.slow
@pytest.mark.parametrize("table", ["square", "triangle"])
def test_perp_scan_classifies_every_foot(request, table):
    p = request.getfixturevalue(table)
    for side in range(p.n):
        result = perp_scan(p, side, 200, 1000)
        assert result.undecided_samples == 0
        assert result.periodic_samples + result.singular_samples == 1000
        floors = direction_floors(p, p.inward_normal(side)).floor_count
        assert len(result.singular_feet) <= floors * p.n
    foot = p.sides[0].at(F(3, 7))
    outcome = perpendicular_orbit(p, 0, foot, 200)
    assert detect_period(p, outcome.orbit)[0] == outcome.orbit.periodic.period_links


def test_covering_sides(square):
    assert covering_sides(square, P(F(1, 3), F(2, 7)), 10) == (0, 1, 2, 3)


def test_exceptional_set_of_the_square_is_empty(square):
    report = exceptional_set_report(square, 6, samples=5, seed=1)
    assert report.segments == ()
    assert len(report.samples) == 5
    assert all(sample.double_covered for sample in report.samples)


def test_exceptional_set_of_the_triangle(triangle):
    report = exceptional_set_report(triangle, 8)
    assert report.segments
    assert report.candidate_points is not None
    assert all(triangle.contains(q, closed=False) for q in report.candidate_points)


def test_exceptional_set_needs_a_convex_table(ell):
    with pytest.raises(NotConvexError):
        exceptional_set_report(ell, 4)


def test_hexagon_has_no_singular_segments_but_gaps_in_double_covering(hexagon):
    report = exceptional_set_report(hexagon, 6, samples=50, seed=0)
    assert report.segments == ()
    assert report.candidate_points is None
    # near the middle of a side only that side's normals pass
    assert any(not sample.double_covered for sample in report.samples)


def test_triangle_candidates_cross_diagonals_of_two_sides(triangle):
    max_links = 8
    report = exceptional_set_report(triangle, max_links)
    per_side = []
    for side in range(triangle.n):
        links = []
        for foot in perp_scan(triangle, side, max_links, 0).singular_feet:
            outcome = perpendicular_orbit(triangle, side, foot, max_links)
            links.extend(diagonal_links(triangle, outcome.diagonal))
        per_side.append(links)
    for q in report.candidate_points:
        sides = [i for i, links in enumerate(per_side) if any(squared_distance_to_segment(q, s) == 0 for s in links)]
        assert len(sides) >= 2


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 3), fractions_between(F(1, 100), F(99, 100)))
def test_perpendicular_orbits_are_word_search_cylinders(side, t):
    p = unit_square()
    cylinders = word_search(p, 4)
    outcome = perpendicular_orbit(p, side, p.sides[side].at(t), 10)
    assert outcome.kind == "periodic"
    orbit = outcome.orbit
    matches = [
        c for c in cylinders if c.period_links == orbit.periodic.period_links and cross(c.direction, orbit.start.v) == 0
    ]
    assert matches
    assert any(
        returns_after(p, PhasePoint(q=orbit.start.q, v=v), c.period_links)
        for c in matches
        for v in (c.direction, c.direction.reversed())
        if same_direction(v, orbit.start.v)
    )


def test_vertical_cylinder(square):
    cylinder = cylinder_from_word(square, 0, (2, 0), Direction(F(0), F(2)))
    assert cylinder.width == pytest.approx(1)
    assert cylinder.period_links == 2
    assert cylinder.period_length == pytest.approx(2)
    assert returns_after(square, cylinder.representative, 2)


def test_diamond_cylinder(square):
    word = (1, 2, 3, 0)
    g = square.word_isometry(word)
    assert g.translation == Direction(2, 2)
    cylinder = cylinder_from_word(square, 0, word, g.translation)
    assert cylinder.width == pytest.approx(math.sqrt(2) / 2)
    assert cylinder.period_length == pytest.approx(2 * math.sqrt(2))
    assert cylinder.representative.q == P(F(2, 3), 0)


def test_horizontal_translation_word(square):
    assert square.word_isometry((1, 3)).translation == Direction(2, 0)


def test_word_without_a_strip(square):
    # a translation the lines through these windows cannot follow
    assert cylinder_from_word(square, 0, (2, 0), Direction(F(5), F(1))) is None
    assert cylinder_from_word(square, 0, (2, 0), Direction(F(0), F(0))) is None


def test_returns_after(square):
    s = PhasePoint(q=P(F(1, 2), 0), v=Direction(F(1), F(1)))
    assert returns_after(square, s, 4)
    assert not returns_after(square, s, 3)


def test_word_search_in_the_square(square):
    cylinders = word_search(square, 4)
    keys = {c.key() for c in cylinders}
    assert canonical_word((2, 0)) in keys
    assert canonical_word((1, 3)) in keys
    assert canonical_word((1, 2, 3, 0)) in keys
    assert len(keys) == len(cylinders)
    for c in cylinders:
        assert c.width > 0
        assert returns_after(square, c.representative, c.period_links)


def test_parallel_strips_with_one_word_are_all_kept(square):
    # the 10-link strips of slope 3/2 cover these points
    theta = math.atan2(3, 2)
    cylinders = word_search(square, 10, direction_window=(theta, 0.01))
    for c in cylinders:
        assert returns_after(square, c.representative, c.period_links)
    for q in [(0.85, 0.85), (0.95, 0.95)]:
        spot = shapely.Point(*q)
        assert any(
            piece.contains(spot)
            for c in cylinders
            for piece, d in cylinder_footprint(square, c)
            if circle_distance(d.angle, theta) < 0.01
        )


def test_word_search_respects_the_window(square):
    cylinders = word_search(square, 6, direction_window=(math.pi / 2, 0.1))
    assert cylinders
    for c in cylinders:
        assert abs(c.direction.angle - math.pi / 2) < 0.1


def test_word_search_budget(square):
    assert search_cylinders(square, 10, budget=1).nodes_expanded == 1
    with pytest.raises(ValueError):
        search_cylinders(square, 1)


def test_periodic_strip_of_a_traced_orbit(square):
    orbit = trace(square, PhasePoint(q=P(F(1, 2), 0), v=Direction(F(1), F(1))), 10)
    strip = periodic_strip(square, orbit)
    assert strip.width == pytest.approx(math.sqrt(2) / 2)
    vertical = trace(square, PhasePoint(q=P(F(1, 4), 0), v=Direction(F(0), F(1))), 10)
    assert periodic_strip(square, vertical).width == pytest.approx(1)


def test_perpendicular_family_on_the_hypotenuse(triangle):
    orbit = perpendicular_orbit(triangle, 1, P(F(1, 4), F(3, 4)), 10).orbit
    strip = periodic_strip(triangle, orbit)
    assert strip.word == (2, 0, 1, 0, 2, 1)
    # every foot strictly between the midpoint and the vertex (0, 1) shares the orbit type
    assert strip.width == pytest.approx(math.sqrt(2) / 2)


def test_periodic_strip_needs_a_period(square):
    orbit = trace(square, PhasePoint(q=P(F(1, 2), 0), v=Direction(F(1), F(1))), 2)
    with pytest.raises(NotPeriodicError):
        periodic_strip(square, orbit)


def test_open_box_overlap():
    assert open_box_overlap(Segment(P(0, F(1, 2)), P(3, F(1, 2))), RIGHT_SQUARE) == 1
    # running along the edge of the box is not inside it
    assert open_box_overlap(Segment(P(1, 0), P(1, 1)), RIGHT_SQUARE) == 0
    assert open_box_overlap(Segment(P(0, 0), P(1, 1)), RIGHT_SQUARE) == 0


@pytest.mark.parametrize("k", range(1, 9))
def test_lshape_family(k):
    table, orbit = lshape_orbit(k)
    assert orbit.periodic.period_links == 2 * k + 2
    assert sum(open_box_overlap(link, RIGHT_SQUARE) for link in orbit.links) == 0
    assert all(not e.singular for e in orbit.events)


def test_lshape_family_needs_positive_k():
    with pytest.raises(ValueError):
        lshape_orbit(0)


@pytest.mark.slow
@settings(max_examples=500, deadline=None)
@given(st.fractions(F(1, 100), F(99, 100), max_denominator=100))
def test_every_line_of_a_cylinder_is_periodic(t):
    p = unit_square()
    cylinder = cylinder_from_word(p, 0, (1, 2, 3, 0), Direction(F(2), F(2)))
    a, b = cylinder.strip
    start = Segment(a, b).at(t)
    assert returns_after(p, PhasePoint(q=start, v=cylinder.direction), cylinder.period_links)
    floors = direction_floors(p, cylinder.direction)
    orbit = trace(p, PhasePoint(q=start, v=cylinder.direction), cylinder.period_links)
    assert all(e.outgoing in floors for e in orbit.events)
