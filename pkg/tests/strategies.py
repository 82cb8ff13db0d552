"""Shared hypothesis strategies for exact-backend phase points."""
from fractions import Fraction

from hypothesis import strategies as st

from billiards.models import PhasePoint
from billiards.modules.geomcore import Direction, Point


def fractions_between(lo, hi, max_denominator=100):
    return st.fractions(min_value=Fraction(lo), max_value=Fraction(hi), max_denominator=max_denominator)


integer_directions = st.tuples(st.integers(-7, 7), st.integers(-7, 7)).filter(lambda d: d != (0, 0))


@st.composite
def states_in_box(draw, lo=Fraction(1, 100), hi=Fraction(99, 100)):
    """Rational start strictly inside [lo, hi]² with a small integer direction."""
    x = draw(fractions_between(lo, hi))
    y = draw(fractions_between(lo, hi))
    dx, dy = draw(integer_directions)
    return PhasePoint(q=Point(x, y), v=Direction(Fraction(dx), Fraction(dy)))


def states_in_unit_square():
    return states_in_box()


def states_in_triangle():
    # x, y < 1/2 keeps the start below the hypotenuse
    return states_in_box(hi=Fraction(49, 100))


rational_segments = st.tuples(
    *(fractions_between(-3, 3, max_denominator=20) for _ in range(4))
).filter(lambda c: (c[0], c[1]) != (c[2], c[3]))
