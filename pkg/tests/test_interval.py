import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import glbpaver.interval as I
from glbpaver.interval import EMPTY, Box, Interval

from oracles import arithmetic_containment, contains_exact


def iv(lo, hi):
    return Interval(float(lo), float(hi))


def test_add_integers_exact():
    assert iv(1, 2) + iv(3, 4) == iv(4, 6)


def test_add_inexact_encloses_rational_within_two_ulps():
    r = iv(0.1, 0.1) + iv(0.2, 0.2)
    assert contains_exact(r, Fraction(0.1) + Fraction(0.2))
    assert r.hi - r.lo <= 2 * math.ulp(0.3)


def test_empty_is_absorbing():
    assert (EMPTY + iv(0, 1)).is_empty
    assert (iv(0, 1) * EMPTY).is_empty
    assert I.sqrt(EMPTY).is_empty


def test_mul_sqr_div_examples():
    assert I.mul(iv(-1, 2), iv(3, 4)) == iv(-4, 8)
    assert I.sqr(iv(-2, 1)) == iv(0, 4)
    assert I.div(iv(1, 1), iv(0, 2)) == Interval(0.5, math.inf)


def test_div_by_interval_straddling_zero_is_entire():
    r = I.div(iv(1, 1), iv(-1, 2))
    assert r.lo == -math.inf and r.hi == math.inf


def test_sqrt_of_negative_interval_is_empty():
    assert I.sqrt(iv(-3, -1)).is_empty
    assert I.sqrt(iv(-3, 4)) == iv(0, 2)


def test_odd_and_even_powers():
    assert I.power(iv(-2, 1), 3) == iv(-8, 1)
    assert I.power(iv(-2, 1), 4) == iv(0, 16)


def test_intersect():
    assert I.intersect(iv(0, 2), iv(1, 3)) == iv(1, 2)
    assert I.intersect(iv(0, 1), iv(2, 3)).is_empty
    a = iv(-0.5, 7)
    assert I.intersect(a, a) == a


def test_width():
    assert I.width(iv(1, 3)) == 2
    assert I.width(iv(0.3, 0.3)) == 0
    assert I.box_width(Box([0, 0], [1, 4])) == 4
    with pytest.raises(ValueError):
        I.width(EMPTY)


def test_bisect_examples():
    left, right = I.bisect(Box([0], [4]), 0)
    assert left == Box([0], [2]) and right == Box([2], [4])
    left, right = I.bisect(Box([0, -2], [1, 2]), 1)
    assert left == Box([0, -2], [1, 0])
    assert right == Box([0, 0], [1, 2])


def test_one_ulp_component_is_unsplittable():
    x = 1.0
    y = math.nextafter(x, 2.0)
    assert I.midpoint(Interval(x, y)) in (x, y)
    with pytest.raises(ValueError):
        Box([x], [y]).bisect(0)


def test_bisect_rejects_unbounded_component():
    with pytest.raises(ValueError):
        Box([0.0], [math.inf]).bisect(0)


def test_empty_box_normalised():
    b = Box([0, 3], [1, 2])
    assert b.is_empty


@pytest.mark.parametrize("seed", range(4))
def test_bisect_halves_partition_parent(seed):
    rng = random.Random(seed)
    for _ in range(200):
        lo = [rng.uniform(-10, 10) for _ in range(3)]
        hi = [a + rng.uniform(1e-6, 5) for a in lo]
        b = Box(lo, hi)
        i = rng.randrange(3)
        left, right = b.bisect(i)
        m = left[i].hi
        assert right[i].lo == m and b[i].lo < m < b[i].hi
        assert left[i].lo == b[i].lo and right[i].hi == b[i].hi
        for j in range(3):
            if j != i:
                assert left[j] == b[j] == right[j]


def test_arithmetic_containment_sample():
    checks, bad = arithmetic_containment(20_000, seed=11)
    assert checks == 20_000 and bad == 0


# -- inclusion monotonicity ---------------------------------------------------------

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@st.composite
def nested(draw):
    """(inner, outer) intervals with inner a subset of outer."""
    a, b, c, d = sorted(draw(st.lists(finite, min_size=4, max_size=4)))
    return Interval(b, c), Interval(a, d)


def _subset(x: Interval, y: Interval) -> bool:
    return x.is_empty or (y.lo <= x.lo and x.hi <= y.hi)


OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "hull_sqr": lambda a, b: I.sqr(a),
    "pow3": lambda a, b: I.power(a, 3),
    "pow4": lambda a, b: I.power(a, 4),
    "sqrt": lambda a, b: I.sqrt(a),
    "neg": lambda a, b: -a,
    "meet": lambda a, b: I.intersect(a, b),
}


@pytest.mark.parametrize("name", sorted(OPS))
@settings(max_examples=300, deadline=None)
@given(x=nested(), y=nested())
def test_inclusion_monotonicity(name, x, y):
    op = OPS[name]
    assert _subset(op(x[0], y[0]), op(x[1], y[1]))


@settings(max_examples=300, deadline=None)
@given(x=nested(), y=nested())
def test_outward_rounding_never_narrows(x, y):
    a, b = x[1], y[1]
    exact = Fraction(a.hi) * Fraction(b.hi), Fraction(a.lo) * Fraction(b.lo), \
        Fraction(a.lo) * Fraction(b.hi), Fraction(a.hi) * Fraction(b.lo)
    r = a * b
    assert Fraction(r.hi) - Fraction(r.lo) >= max(exact) - min(exact)
