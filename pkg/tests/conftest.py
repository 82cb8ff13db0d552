import pytest

from billiards.modules.polygon import lshape, regular_polygon, right_isosceles, unit_square


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def triangle():
    return right_isosceles()


@pytest.fixture
def ell():
    return lshape()


@pytest.fixture
def equilateral():
    return regular_polygon(3)


@pytest.fixture
def hexagon():
    return regular_polygon(6)
