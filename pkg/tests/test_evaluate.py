import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from malpha import (
    GOLDEN,
    SQRT2_MINUS_1,
    HorizonExceeded,
    RandomDyadic,
    Rational,
    RationalDegenerate,
    alpha_enclosure,
    convergents,
    norm_dist_malpha,
    norm_dist_rational,
    residue,
)
from malpha.evaluate import norm_dist_exact_rational, norm_dist_surd
from malpha.surd import QuadElement


def nd(x: Fraction) -> Fraction:
    # distance to nearest integer, written independently of the library
    f = x - (x.numerator // x.denominator)
    return min(f, 1 - f)


@pytest.mark.parametrize("x,expected", [
    (Fraction(7, 16), Fraction(7, 16)),
    (Fraction(9, 16), Fraction(7, 16)),
    (Fraction(3, 2), Fraction(1, 2)),
    (Fraction(-1, 3), Fraction(1, 3)),
    (Fraction(5), Fraction(0)),
])
def test_norm_dist_rational_examples(x, expected):
    assert norm_dist_rational(x) == expected


def test_subadditivity_ten_thousand_pairs():
    rng = random.Random(20240601)
    for _ in range(10_000):
        x = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**6))
        y = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**6))
        assert norm_dist_rational(x + y) <= norm_dist_rational(x) + norm_dist_rational(y)


@given(st.fractions(), st.fractions())
def test_subadditivity_property(x, y):
    assert norm_dist_rational(x + y) <= norm_dist_rational(x) + norm_dist_rational(y)
    assert 0 <= norm_dist_rational(x) <= Fraction(1, 2)
    assert norm_dist_rational(x) == nd(x)


@pytest.mark.parametrize("t,q,expected", [(10, 7, 3), (-1, 7, 6), (3 * 5, 8, 7), (0, 1, 0)])
def test_residue(t, q, expected):
    assert residue(t, q) == expected


def test_alpha_enclosure_examples():
    I4 = alpha_enclosure(GOLDEN, 4)
    assert (I4.lo, I4.hi) == (Fraction(3, 5), Fraction(5, 8))
    assert I4.contains(GOLDEN.value)
    I5 = alpha_enclosure(GOLDEN, 5)
    assert (I5.lo, I5.hi) == (Fraction(8, 13), Fraction(5, 8))
    assert I4.contains_interval(I5)
    I = alpha_enclosure(Rational(7, 16), 3)
    assert I.lo == I.hi == Fraction(7, 16)


@pytest.mark.parametrize("alpha", [GOLDEN, SQRT2_MINUS_1, RandomDyadic(3, 2048)], ids=str)
def test_enclosure_monotone_and_width(alpha):
    prev = None
    conv = convergents(alpha, 60)
    for k in range(1, 59):
        I = alpha_enclosure(alpha, k)
        assert I.width <= Fraction(1, conv[k].q * conv[k + 1].q)
        if prev is not None:
            assert prev.contains_interval(I) and I.width <= prev.width
        prev = I


def test_norm_dist_malpha_examples():
    e = norm_dist_malpha(1, GOLDEN)
    exact = QuadElement(Fraction(3, 2), Fraction(-1, 2), 5)
    assert e.interval.contains(exact)
    assert e.interval.rel_width() <= Fraction(1, 2**20)
    e8 = norm_dist_malpha(8, GOLDEN)
    assert Fraction(1, 21) < e8.interval.lo and e8.interval.hi < Fraction(1, 13)
    with pytest.raises(RationalDegenerate):
        norm_dist_malpha(2, Rational(1, 4))
    with pytest.raises(RationalDegenerate):
        norm_dist_exact_rational(4, Rational(1, 4))


def test_rational_prefix_is_exact():
    e = norm_dist_malpha(3, Rational(7, 16))
    assert e.interval.lo == e.interval.hi == Fraction(5, 16)


def test_random_dyadic_horizon_error():
    # ||q_h alpha|| at the last trusted index cannot be resolved inside the horizon
    from malpha.cf import expansion
    alpha = RandomDyadic(9, 128)
    ex = expansion(alpha)
    with pytest.raises(HorizonExceeded):
        norm_dist_malpha(ex.q[ex.horizon], alpha)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**9), st.sampled_from([GOLDEN, SQRT2_MINUS_1]),
       st.integers(4, 60))
def test_enclosure_contains_exact_surd(m, alpha, t):
    tol = Fraction(1, 2**t)
    e = norm_dist_malpha(m, alpha, tol)
    assert e.interval.contains(norm_dist_surd(m, alpha))
    assert e.interval.rel_width() <= tol
    assert 0 <= e.interval.lo and e.interval.hi <= Fraction(1, 2)


def _strict_12(alpha, k):
    conv = convergents(alpha, k + 1)
    pk, qk, qk1 = conv[k].p, conv[k].q, conv[k + 1].q
    gap = alpha.value - Fraction(pk, qk)
    d = gap if gap.sign() >= 0 else -gap
    return Fraction(1, qk * (qk + qk1)) < d < Fraction(1, qk * qk1)


def test_convergent_gap_bounds(surd):
    for k in range(2, 101):
        assert _strict_12(surd, k)


def test_convergent_gap_bounds_rational_prefix():
    # for rational alpha the bounds hold strictly below the last index
    from malpha.cf import full_expansion
    alpha = Rational(104348, 33215)
    L = len(full_expansion(alpha).a)
    conv = convergents(alpha, L)
    x = alpha.value
    for k in range(2, L - 1):
        pk, qk, qk1 = conv[k].p, conv[k].q, conv[k + 1].q
        d = abs(x - Fraction(pk, qk))
        assert Fraction(1, qk * (qk + qk1)) < d < Fraction(1, qk * qk1)


def test_distance_near_convergent_fraction(surd):
    conv = convergents(surd, 40)
    for k in range(1, 40):
        pk, qk, qk1 = conv[k].p, conv[k].q, conv[k + 1].q
        if qk1 > 500:
            break
        for m in range(1, qk1 + 1):
            approx = nd(Fraction(m * pk, qk))
            exact = norm_dist_surd(m, surd)
            assert approx - Fraction(1, qk) < exact < approx + Fraction(1, qk)
