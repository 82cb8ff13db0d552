import math
from fractions import Fraction as F
from math import gcd

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from billiards.errors import ShortDiagonalError
from billiards.models import PhasePoint
from billiards.modules.flow import trace
from billiards.modules.geomcore import Direction, Point, Segment, circle_distance, same_direction
from billiards.modules.polygon import direction_floors, lshape, regular_polygon, right_isosceles, unit_square
from billiards.modules.unfolding import (
    collinearity_residual,
    corridor_coincidence,
    delta_N,
    diagonal_from_vertex,
    diagonal_links,
    enumerate_corridors,
    enumerate_generalized_diagonals,
    fold,
    inside_corner,
    shadowing_gap,
    unfold,
    unfolded_hits,
)
from tests.strategies import fractions_between, integer_directions, states_in_triangle, states_in_unit_square


def state(x, y, dx, dy):
    return PhasePoint(q=Point(F(x), F(y)), v=Direction(F(dx), F(dy)))


def lattice_diagonal_count(max_links):
    """Vertex-to-vertex lines of the square lattice, counted once per reversal pair."""
    pairs = sum(1 for a in range(1, max_links + 1) for b in range(1, max_links + 1) if a + b <= max_links + 1 and gcd(a, b) == 1)
    return 2 * pairs


def test_diamond_unfolds_into_four_copies(square):
    corridor, points = unfolded_hits(square, state(F(1, 2), 0, 1, 1), 4)
    assert len(corridor.copies) == 4
    assert corridor.word == (1, 2, 3)
    assert collinearity_residual(points) == 0
    assert points[-1] == Point(F(5, 2), 2)


def test_single_link_unfolds_to_the_base_table(square):
    corridor, segment = unfold(square, state(F(1, 2), 0, 1, 1), 1)
    assert len(corridor.copies) == 1
    assert corridor.word == ()
    assert segment.b == Point(1, F(1, 2))


def test_fold_recovers_the_traced_links(square):
    s = state(F(1, 4), 0, 1, 2)
    corridor, segment = unfold(square, s, 5)
    assert fold(square, corridor, segment) == list(trace(square, s, 5, stop_at_period=False).links)


def test_inside_corner(square, ell):
    assert inside_corner(square, 0, Direction(F(1), F(1)))
    assert not inside_corner(square, 0, Direction(F(1), F(0)))
    assert not inside_corner(square, 0, Direction(F(-1), F(1)))
    # every direction except the closed exterior quadrant at the reflex corner
    assert inside_corner(ell, 3, Direction(F(-1), F(-1)))
    assert inside_corner(ell, 3, Direction(F(1), F(-1)))
    assert not inside_corner(ell, 3, Direction(F(1), F(1)))
    assert not inside_corner(ell, 3, Direction(F(1), F(0)))


def test_diagonal_from_vertex(square):
    d = diagonal_from_vertex(square, 0, Direction(F(2), F(1)), 5)
    assert d.link_count == 2
    assert d.end_vertex == 3
    assert d.word == (1,)
    assert d.unfolded_segment.b == Point(2, 1)
    assert diagonal_from_vertex(square, 0, Direction(F(2), F(1)), 1) is None
    assert diagonal_from_vertex(square, 0, Direction(F(-1), F(1)), 5) is None


def test_diagonal_folds_back_into_the_table(square):
    d = diagonal_from_vertex(square, 0, Direction(F(2), F(1)), 5)
    assert diagonal_links(square, d) == [
        Segment(Point(0, 0), Point(1, F(1, 2))),
        Segment(Point(1, F(1, 2)), Point(0, 1)),
    ]


def test_square_diagonals_with_one_link(square):
    diagonals = enumerate_generalized_diagonals(square, 1)
    assert len(diagonals) == 2
    assert {d.link_count for d in diagonals} == {1}
    assert enumerate_generalized_diagonals(square, 0) == []


@pytest.mark.parametrize("max_links", [1, 2, 3, 4])
def test_square_diagonals_match_the_lattice(square, max_links):
    assert len(enumerate_generalized_diagonals(square, max_links)) == lattice_diagonal_count(max_links)


@pytest.mark.slow
@pytest.mark.parametrize("max_links", [5, 6])
def test_square_diagonals_match_the_lattice_long(square, max_links):
    assert len(enumerate_generalized_diagonals(square, max_links)) == lattice_diagonal_count(max_links)


def test_enumerated_diagonals_fold_back_to_vertex_shots(triangle):
    for d in enumerate_generalized_diagonals(triangle, 4):
        shot = diagonal_from_vertex(triangle, d.start_vertex, d.direction, 4)
        assert shot is not None
        assert shot.link_count == d.link_count
        assert shot.key() == d.key()


def test_diagonals_at_the_reflex_corner(ell):
    diagonals = enumerate_generalized_diagonals(ell, 2)
    assert all(d.link_count <= 2 for d in diagonals)
    keys = {d.key() for d in diagonals}
    assert len(keys) == len(diagonals)
    # (1, 1) sees (0, 0) directly
    assert any({d.start_vertex, d.end_vertex} == {3, 0} and d.link_count == 1 for d in diagonals)


def test_enumerate_corridors(square):
    corridors = list(enumerate_corridors(square, 0, 2))
    assert corridors
    assert all(1 <= len(c) <= 2 for c in corridors)
    assert all(c.apex_vertex == 0 and c.beam is not None for c in corridors)
    assert {c.word for c in corridors if len(c) == 1} == {(1,), (2,)}
    with pytest.raises(IndexError):
        next(enumerate_corridors(square, 7, 2))
    with pytest.raises(ValueError):
        next(enumerate_corridors(square, 0, 0))


def test_delta_N_around_slope_three(square):
    theta = Direction(F(1), F(3))
    assert delta_N(square, theta, 0) == pytest.approx(math.atan(3) - math.pi / 4)
    assert delta_N(square, theta, 1) == pytest.approx(math.atan(3) - math.atan(2))


def test_delta_N_rejects_a_diagonal_direction(square):
    with pytest.raises(ShortDiagonalError):
        delta_N(square, Direction(F(1), F(1)), 0)
    with pytest.raises(ShortDiagonalError):
        delta_N(square, Direction(F(1), F(2)), 1)


def test_corridor_coincidence_certifies_the_branching_diagonal(square):
    report = corridor_coincidence(square, Point(F(1, 2), F(1, 4)), Direction(F(1), F(0)), Direction(F(1), F(1)), 3)
    assert (report.j_fwd, report.j_bwd) == (2, 1)
    assert report.vertex_fwd == Point(2, 1)
    assert report.vertex_bwd == Point(0, 0)
    assert report.diagonal.link_count == report.j_fwd + report.j_bwd - 1
    assert report.diagonal.key() in {d.key() for d in enumerate_generalized_diagonals(square, 2)}


def test_identical_directions_never_branch(square):
    theta = Direction(F(1), F(3))
    report = corridor_coincidence(square, Point(F(1, 3), F(1, 7)), theta, theta, 4)
    assert (report.j_fwd, report.j_bwd) == (4, 4)
    assert report.diagonal is None


@pytest.mark.slow
@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(
    fractions_between(F(1, 100), F(99, 100)),
    fractions_between(F(1, 100), F(99, 100)),
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(lambda d: d != (0, 0)),
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(lambda d: d != (0, 0)),
    st.integers(2, 5),
)
def test_branching_diagonal_folds_back_into_the_square(x, y, d, nudge, N):
    p = unit_square()
    q0 = Point(x, y)
    theta = Direction(F(d[0]), F(d[1]))
    theta2 = Direction(theta.dx + F(nudge[0], 40), theta.dy + F(nudge[1], 40))
    for v in (theta, theta2, theta.reversed(), theta2.reversed()):
        orbit = trace(p, PhasePoint(q=q0, v=v), N, stop_at_period=False)
        assume(not any(e.singular for e in orbit.events))
    report = corridor_coincidence(p, q0, theta, theta2, N)
    assume(report.j_fwd < N and report.j_bwd < N)
    diagonal = report.diagonal
    assert diagonal is not None
    assert diagonal.link_count == report.j_fwd + report.j_bwd - 1
    assert diagonal.key() in {g.key() for g in enumerate_generalized_diagonals(p, diagonal.link_count)}
    links = diagonal_links(p, diagonal)
    assert len(links) == diagonal.link_count
    assert p.vertex_index(links[0].a) is not None
    assert p.vertex_index(links[-1].b) is not None
    assert all(p.contains(s.a) and p.contains(s.b) for s in links)


def test_delta_N_certificate_in_the_float_backend(square):
    theta = Direction(1.0, math.sqrt(2))
    delta = delta_N(square, theta, 3)
    diagonals = enumerate_generalized_diagonals(square, 6)
    rng = np.random.default_rng(3)
    for offset in rng.uniform(-delta, delta, size=100) * 0.999:
        floors = direction_floors(square, Direction.from_angle(theta.angle + offset))
        for d in diagonals:
            for member in floors.directions:
                assert not same_direction(member, d.direction)
                assert not same_direction(member, d.direction.reversed())


def _exact_unfolding_holds(p, s, n):
    orbit = trace(p, s, n, stop_at_period=False)
    assume(not any(e.singular for e in orbit.events))
    corridor, points = unfolded_hits(p, s, n)
    assert collinearity_residual(points) == 0
    segment = unfold(p, s, n)[1]
    assert fold(p, corridor, segment) == list(orbit.links)


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@given(states_in_unit_square(), st.integers(1, 50))
def test_square_unfolding_is_exact(s, n):
    _exact_unfolding_holds(unit_square(), s, n)


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@given(states_in_triangle(), st.integers(1, 50))
def test_triangle_unfolding_is_exact(s, n):
    _exact_unfolding_holds(right_isosceles(), s, n)


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@given(states_in_unit_square(), st.integers(1, 50))
def test_lshape_unfolding_is_exact(s, n):
    # starts in the lower-left unit square, which lies inside the L
    _exact_unfolding_holds(lshape(), s, n)


@pytest.mark.slow
@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi, exclude_max=True))
def test_float_unfolding_residual(phi):
    p = regular_polygon(3)
    s = PhasePoint(q=Point(0.05, 0.1), v=Direction.from_angle(phi))
    orbit = trace(p, s, 50, stop_at_period=False)
    assume(not any(e.singular for e in orbit.events))
    _, points = unfolded_hits(p, s, 50)
    assert collinearity_residual(points) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(F(1, 10), F(9, 10), max_denominator=30),
    st.fractions(F(1, 10), F(9, 10), max_denominator=30),
    integer_directions,
    st.floats(-0.05, 0.05).filter(lambda x: x != 0),
    st.integers(1, 8),
)
def test_shadowing_gap_is_bounded(x, y, d, twist, N):
    p = unit_square()
    q0 = Point(x, y)
    theta = Direction(F(d[0]), F(d[1]))
    orbit = trace(p, PhasePoint(q=q0, v=theta), N, stop_at_period=False)
    assume(not any(e.singular for e in orbit.events))
    theta2 = Direction.from_angle(theta.angle + twist)
    gap, bound = shadowing_gap(p, q0, theta, theta2, N)
    assert circle_distance(theta.angle, theta2.angle) == pytest.approx(abs(twist))
    assert gap <= bound + 1e-12
