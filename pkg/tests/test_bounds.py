from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from malpha import GOLDEN, POW2, SQRT2_MINUS_1, CapExceeded, InvalidAlpha, RandomDyadic, convergents, quotients
from malpha.bounds import bound_report, bounded_type_check, build_pathological, locate_k, ratio_scan
from malpha.interval import ln_interval


@pytest.mark.parametrize("M,k", [(10, 5), (13, 6), (1, 1), (12, 5), (987, 15)])
def test_locate_k_golden(M, k):
    assert locate_k(GOLDEN, M) == k


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**12), st.sampled_from([GOLDEN, POW2, RandomDyadic(3, 4096)]))
def test_locate_k_property(M, alpha):
    k = locate_k(alpha, M)
    conv = convergents(alpha, k + 1)
    assert conv[k].q <= M < conv[k + 1].q


def test_bound_report_golden():
    r = bound_report(GOLDEN, 1000)
    assert r.k == 15 and r.q_k == 987 and r.a_next == 1
    assert r.lower_ref.overlaps(ln_interval(987) * 1000)
    assert 0.5 <= float(r.ratio_mlogm.mid) <= 5
    assert r.flags == ()
    for I in (r.lower_ref, r.upper_ref, r.upper_improved_ref):
        assert I.lo > 0 and I.width <= Fraction(1000 * 4, 2**30)


def test_bound_report_at_convergent():
    r = bound_report(GOLDEN, 144)
    assert r.q_k == 144
    assert r.lower_ref.overlaps(ln_interval(144) * 144)
    assert r.ratio_mlogm.overlaps(r.ratio_lower)


def test_small_m_flag():
    r = bound_report(SQRT2_MINUS_1, 1)
    assert "small-M" in r.flags and r.lower_ref.lo == r.lower_ref.hi == 1
    assert r.ratio_mlogm is None


def test_huge_partial_quotient_keeps_ratio_bounded():
    alpha = build_pathological("square", K=6)
    conv = convergents(alpha, 5)
    for k in (3, 4):
        r = bound_report(alpha, conv[k].q)
        assert "a_k1>q_k" in r.flags
        # S_M >= 1/||q_k alpha|| > q_{k+1} ~ a_{k+1} q_k >= a_{k+1} M
        assert r.ratio_upper.lo > Fraction(1, 2)


def test_ratio_scan_shapes():
    reps = ratio_scan(GOLDEN, [100, 1000, 10000])
    assert [r.M for r in reps] == [100, 1000, 10000]
    assert reps[0].s_m.hi <= reps[1].s_m.lo and reps[1].s_m.hi <= reps[2].s_m.lo
    assert ratio_scan(GOLDEN, []) == []
    with pytest.raises(ValueError):
        ratio_scan(GOLDEN, [10, 5])


def test_ratio_scan_matches_single_reports():
    grid = [50, 377, 2000]
    for a, b in zip(ratio_scan(SQRT2_MINUS_1, grid), (bound_report(SQRT2_MINUS_1, M) for M in grid)):
        assert a.s_m == b.s_m and a.ratio_lower == b.ratio_lower


def test_pow2_spikes_at_convergents():
    conv = convergents(POW2, 6)
    qs = [c.q for c in conv[2:6]]
    grid = sorted(set(qs + [q - 1 for q in qs]))
    reps = {r.M: r for r in ratio_scan(POW2, grid)}
    for q in qs:
        jump = reps[q].s_m.lo - reps[q - 1].s_m.hi
        # the single term m = q_k carries at least q_{k+1}/2 of the sum
        k = locate_k(POW2, q)
        assert jump > conv[k + 1].q / 2


def test_build_pathological_examples():
    alpha = build_pathological("square", K=4)
    assert list(quotients(alpha, 4).a) == [1, 1, 4, 81]
    assert list(quotients(build_pathological("square", K=1), 1).a) == [1]
    assert build_pathological("square", K=8) == build_pathological("square", K=8)
    with pytest.raises(CapExceeded) as e:
        build_pathological("exp", K=6, cap=50)
    assert e.value.k == 3
    with pytest.raises(InvalidAlpha):
        build_pathological("nope")


def test_build_pathological_custom_rule():
    alpha = build_pathological(lambda q: q + 1, K=6)
    a = quotients(alpha, 6).a
    conv = convergents(alpha, 6)
    assert a[0] == 1
    for k in range(1, 6):
        assert a[k] == conv[k].q + 1


def test_square_rule_exceeds_q_k():
    alpha = build_pathological("square", K=10)
    conv = convergents(alpha, 10)
    a = quotients(alpha, 10).a
    for k in range(2, 9):
        assert a[k] > conv[k].q          # a_{k+1} > q_k (a is 0-indexed here)


@pytest.mark.parametrize("alpha,K,B,expected", [
    (GOLDEN, 100, 1, (True, 1)),
    (POW2, 10, 100, (False, 512)),
    (SQRT2_MINUS_1, 50, 2, (True, 2)),
])
def test_bounded_type_check(alpha, K, B, expected):
    assert bounded_type_check(alpha, K, B) == expected
