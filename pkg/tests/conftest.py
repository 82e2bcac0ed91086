from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from expshadow.fixtures import cycle, line, point, random_system, two_point
from expshadow.systems import product_system

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def c3():
    return cycle(3)


@pytest.fixture
def l4():
    return line(4)


@pytest.fixture
def prod():
    """Two 2-point systems (distance 2, identity) under 2 d1 + d2/3."""
    return product_system(two_point(2), two_point(2), 2, Fraction(1, 3))


@pytest.fixture
def pt():
    return point()


@st.composite
def finite_systems(draw, max_n=6, max_weight=5):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 10**6))
    return random_system(n, seed=seed, max_weight=draw(st.integers(1, max_weight)))


@st.composite
def permutations_of(draw, n):
    return tuple(draw(st.permutations(range(n))))


def half(x):
    return Fraction(x) / 2
