from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from malpha import RationalInterval, ln_interval
from malpha.interval import ln2_interval

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)


def interval(draw_a, draw_b):
    return RationalInterval(min(draw_a, draw_b), max(draw_a, draw_b))


def test_construction_rejects_inverted():
    with pytest.raises(ValueError):
        RationalInterval(Fraction(1), Fraction(0))


def test_point_and_width():
    I = RationalInterval.point(Fraction(3, 7))
    assert I.width == 0 and I.contains(Fraction(3, 7))
    J = RationalInterval(Fraction(1, 3), Fraction(1, 2))
    assert J.width == Fraction(1, 6) and J.mid == Fraction(5, 12)


@given(fractions, fractions, fractions, fractions, fractions, fractions)
def test_arithmetic_encloses_pointwise(a, b, c, d, x0, y0):
    I, J = interval(a, b), interval(c, d)
    # sample points inside each interval
    x = I.lo + (I.hi - I.lo) * (abs(x0) % 1)
    y = J.lo + (J.hi - J.lo) * (abs(y0) % 1)
    assert (I + J).contains(x + y)
    assert (I - J).contains(x - y)
    assert (I * J).contains(x * y)
    if J.lo > 0 or J.hi < 0:
        assert (I / J).contains(x / y)


def test_division_by_interval_containing_zero():
    with pytest.raises(ZeroDivisionError):
        RationalInterval(Fraction(1), Fraction(2)) / RationalInterval(Fraction(-1), Fraction(1))


@pytest.mark.parametrize("x", [2, 3, 10, 987, 10**6, 390617900, 2**200 + 1,
                               Fraction(3, 2), Fraction(1, 7)])
def test_ln_encloses_mpmath(x):
    mpmath.mp.dps = 60
    I = ln_interval(x, 40)
    ref = mpmath.log(mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator)
    assert mpmath.mpf(I.lo.numerator) / I.lo.denominator <= ref
    assert ref <= mpmath.mpf(I.hi.numerator) / I.hi.denominator
    assert I.width <= Fraction(1, 2**40)


def test_ln_of_one_and_two():
    assert ln_interval(1).width == 0 and ln_interval(1).lo == 0
    I = ln2_interval(50)
    assert I.lo < Fraction(6931471805599453, 10**16) < I.hi


@settings(max_examples=200)
@given(st.integers(2, 10**30), st.integers(2, 10**30))
def test_ln_additive_consistency(x, y):
    # ln(xy) = ln x + ln y: the enclosures must intersect
    assert (ln_interval(x) + ln_interval(y)).overlaps(ln_interval(x * y))
