import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from malpha import GOLDEN, POW2, InvalidAlpha, RandomDyadic, Rational
from malpha.interval import ln_interval
from malpha.metric import (
    LEVY_CONSTANT,
    PhiSpec,
    birkhoff_log_quotient,
    eventual_quotient_experiment,
    gauss_invariance_identity,
    gauss_map,
    gauss_orbit,
    gauss_orbit_exact,
    gauss_truncation_gap,
    growth_criterion_experiment,
    growth_grid,
    khinchin_io_experiment,
    khinchin_log_series,
    levy_exponent,
    levy_experiment,
    sample_alpha,
)


def test_levy_constant_value():
    mpmath.mp.dps = 30
    assert abs(LEVY_CONSTANT - float(mpmath.pi**2 / (12 * mpmath.log(2)))) < 1e-15
    assert abs(LEVY_CONSTANT - 1.1865691) < 1e-7


@pytest.mark.parametrize("text,family", [("log2", "log2"), ("ln^2(k+1)", "log2"), ("1", "const"),
                                         ("k*log2k", "klog2"), ("k^0.5", "power"), ("log", "log")])
def test_phi_parse(text, family):
    assert PhiSpec.parse(text).family == family


def test_phi_rejects():
    with pytest.raises(InvalidAlpha):
        PhiSpec.parse("banana")
    with pytest.raises(InvalidAlpha):
        PhiSpec("const", 0)


@given(st.sampled_from(["log2", "log", "klog2", "k^0.7", "3"]), st.floats(1, 1e6), st.floats(0, 1e3))
def test_phi_monotone_positive(text, x, dx):
    phi = PhiSpec.parse(text)
    assert 0 < phi(x) <= phi(x + dx)


def test_sample_alpha():
    assert sample_alpha(5, 0, 4096) == sample_alpha(5, 0, 4096)
    assert sample_alpha(5, 0, 4096).numerator != sample_alpha(5, 1, 4096).numerator
    assert sample_alpha(5, 0).bits >= 4096
    with pytest.raises(InvalidAlpha):
        sample_alpha(5, 0, 32)


def test_gauss_orbit_examples():
    assert gauss_orbit(GOLDEN, 5) == [1] * 5
    assert gauss_orbit(Rational(7, 16), 3) == [2, 3, 2] == gauss_orbit_exact(Rational(7, 16), 3)
    assert gauss_orbit(GOLDEN, 0) == []
    assert gauss_map(Fraction(7, 16)) == Fraction(2, 7)
    assert gauss_map(Fraction(2, 7)) == Fraction(1, 2)
    assert gauss_map(Fraction(1, 2)) == 0


@given(st.integers(1, 10**15), st.integers(2, 10**15))
def test_gauss_orbit_matches_exact_iteration(num, den):
    alpha = Rational(num % den or 1, den)
    x, steps = alpha.value, 0
    while x:
        x = gauss_map(x)
        steps += 1
    assert gauss_orbit(alpha, steps) == gauss_orbit_exact(alpha, steps)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**63))
def test_gauss_orbit_random_dyadic(seed):
    alpha = RandomDyadic(seed, 2048)
    assert gauss_orbit(alpha, 200) == gauss_orbit_exact(alpha, 200)


def test_birkhoff_examples():
    assert birkhoff_log_quotient(GOLDEN, 300).hi == 0
    for k in (1, 5, 20):
        assert birkhoff_log_quotient(POW2, k).overlaps(ln_interval(2) * Fraction(k - 1, 2))


def test_levy_exponent_examples():
    g = levy_exponent(GOLDEN, 2000)
    assert abs(float(g.mid) - math.log((1 + 5**0.5) / 2)) < 1e-3
    alpha = RandomDyadic(12, 4096)
    a1 = gauss_orbit(alpha, 1)[0]
    assert levy_exponent(alpha, 1) == ln_interval(a1)


def test_levy_exponent_floor_on_samples():
    for i in range(20):
        alpha = sample_alpha(99, i, 4096)
        for k in (50, 200, 1000):
            assert levy_exponent(alpha, k).lo >= Fraction(45, 100)


def test_khinchin_series_against_mpmath():
    lo, hi = khinchin_log_series()
    mpmath.mp.dps = 30
    ref = float(mpmath.log(mpmath.khinchin))
    assert lo <= ref <= hi
    assert hi - lo < 1e-8


@pytest.mark.parametrize("n", [1, 10, 1000])
def test_gauss_identity_edge_cases(n):
    lhs, rhs, gap = gauss_invariance_identity(0, 1, n)
    assert rhs == pytest.approx(1.0)
    assert gap == pytest.approx(gauss_truncation_gap(0, 1, n), rel=1e-9)
    assert gauss_invariance_identity(0.3, 0.3, n) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        gauss_invariance_identity(0.5, 0.2, n)


def test_gauss_gap_monotone_and_closed_form():
    gaps = [gauss_invariance_identity(0.2, 0.5, n)[2] for n in (1, 10, 100, 1000, 10**4, 10**5)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    for n, g in zip((1, 10, 100, 1000, 10**4, 10**5), gaps):
        assert g == pytest.approx(gauss_truncation_gap(0.2, 0.5, n), rel=1e-6)


def test_levy_experiment_small():
    r1 = levy_experiment(300, 6, 3)
    r2 = levy_experiment(300, 6, 3, workers=2)
    assert r1.to_json() == r2.to_json()
    assert len(r1.seeds) == 6 and r1.params["K"] == 300
    assert abs(r1.summary["levy_mean"] - LEVY_CONSTANT) < 0.2


def test_khinchin_io_small():
    r = khinchin_io_experiment(PhiSpec.parse("1"), 200, 10, 4, extra=[GOLDEN])
    assert r.samples["window_exceedances"][-1] == 0       # golden: all a_k = 1
    assert all(c > 0 for c in r.samples["window_exceedances"][:-1])
    assert r.params["window"] == [100, 200]
    r2 = khinchin_io_experiment(PhiSpec.parse("k*log2k"), 400, 20, 4)
    assert r2.summary["fraction_with_window_exceedance"] < 0.5


def test_eventual_small():
    r = eventual_quotient_experiment(400, 10, 2, k0=50)
    assert r.summary["fraction_holding"] >= 0.8
    assert r.params["window"] == [50, 400]


def test_growth_grid_includes_convergents():
    alpha = RandomDyadic(6, 4096)
    grid = growth_grid(alpha, [100, 10**4])
    from malpha import convergents
    qs = [c.q for c in convergents(alpha, 30) if 100 <= c.q <= 10**4]
    assert set(qs) <= set(grid) and grid == sorted(set(grid))
    small = [c.q for c in convergents(alpha, 30) if 2 <= c.q < 100]
    assert set(small) <= set(grid)
    assert not set(small) & set(growth_grid(alpha, [100, 10**4], burn_in=100))


def test_growth_small_and_golden_bounded():
    r = growth_criterion_experiment(PhiSpec.parse("1"), [100, 1000, 5000], 4, 1, extra=[GOLDEN])
    R_golden = r.samples["R"][-1]
    assert max(R_golden) < 5 and min(R_golden) > 0.5
    assert len(r.samples["prefix_max"][0]) == 3
    with pytest.raises(ValueError):
        growth_criterion_experiment(PhiSpec.parse("1"), [1, 10], 2, 1)


def test_experiment_json_reproducible():
    a = khinchin_io_experiment(PhiSpec.parse("log2"), 100, 5, 11).to_json()
    b = khinchin_io_experiment(PhiSpec.parse("log2"), 100, 5, 11).to_json()
    assert a == b and '"master_seed": 11' in a
