"""Rigorous enclosures of alpha and of ||m alpha|| built from convergents.

Consecutive convergents p_k/q_k and p_{k+1}/q_{k+1} lie on opposite sides of
alpha, so ``m*alpha`` sits between ``m p_k/q_k`` and ``m p_{k+1}/q_{k+1}``.
Reducing that interval mod 1 and folding at 1/2 gives an enclosure of the
distance to the nearest integer; depth grows until it is tight enough.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cf import AlphaSpec, QuadraticSurd, Rational, expansion
from .errors import ExpansionExhausted, HorizonExceeded, RationalDegenerate
from .interval import RationalInterval
from .surd import QuadElement, norm_dist as _surd_norm_dist

DEFAULT_REL_TOL = Fraction(1, 1 << 20)


@dataclass(frozen=True)
class NormDistEnclosure:
    m: int
    interval: RationalInterval
    depth_used: int


def residue(t: int, q: int) -> int:
    """Canonical representative of t mod q in {0, ..., q-1}."""
    if q < 1:
        raise ValueError("modulus must be positive")
    return t % q


def norm_dist_rational(x) -> Fraction:
    """min over integers n of |x - n|."""
    x = Fraction(x)
    f = x - (x.numerator // x.denominator)
    return f if 2 * f <= 1 else 1 - f


def alpha_enclosure(alpha: AlphaSpec, k: int) -> RationalInterval:
    """Interval between the k-th and (k+1)-th convergents; contains alpha."""
    ex = expansion(alpha)
    if ex.finite_len is not None and ex.horizon is None and k == ex.finite_len:
        return RationalInterval.point(Fraction(ex.p[k], ex.q[k]))
    ex.ensure(k + 1)
    return RationalInterval.hull(
        Fraction(ex.p[k], ex.q[k]), Fraction(ex.p[k + 1], ex.q[k + 1])
    )


def tol_bits(rel_tol) -> int:
    """Smallest t with 2^-t <= rel_tol."""
    rel_tol = Fraction(rel_tol)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    t = 0
    while Fraction(1, 1 << t) > rel_tol:
        t += 1
    return t


def _exact_rational_dist(m: int, p: int, q: int) -> tuple[int, int]:
    r = (m * p) % q
    if r == 0 or 2 * r == q:
        raise RationalDegenerate(m)
    return (r, q) if 2 * r < q else (q - r, q)


def first_degenerate(alpha: AlphaSpec) -> int | None:
    """Smallest m >= 1 with m*alpha in Z or Z + 1/2, or None for irrational alpha."""
    if not isinstance(alpha, Rational):
        return None
    q = alpha.den
    return q // 2 if q % 2 == 0 else q


def check_range(alpha: AlphaSpec, M: int) -> None:
    """Raise RationalDegenerate if some m <= M lands on Z or Z + 1/2."""
    m = first_degenerate(alpha)
    if m is not None and m <= M:
        raise RationalDegenerate(m)


def dist_bounds(ex, m: int, tbits: int, depth: int) -> tuple[int, int, int, int, int]:
    """Bounds lo = ln/ld <= ||m alpha|| <= hn/hd with (hi-lo) <= 2^-tbits lo.

    Returns (ln, ld, hn, hd, depth). ``ex`` is the expansion table for alpha.
    """
    d = max(depth, 0)
    while True:
        avail = ex.available
        if avail is not None and d + 1 > avail:
            if ex.horizon is not None:
                raise HorizonExceeded(ex.horizon, d + 1)
            # alpha is the exact rational p_n/q_n
            n = ex.finite_len
            ex.ensure(n)
            r, q = _exact_rational_dist(m, ex.p[n], ex.q[n])
            return r, q, r, q, n
        ex.ensure(d + 1)
        p0, q0, p1, q1 = ex.p[d], ex.q[d], ex.p[d + 1], ex.q[d + 1]
        n0, r0 = divmod(m * p0, q0)
        n1, r1 = divmod(m * p1, q1)
        if n0 == n1 and r0 and r1:
            s0 = 2 * r0 - q0
            s1 = 2 * r1 - q1
            if s0 <= 0 and s1 <= 0:
                a, b = (r0, q0), (r1, q1)
            elif s0 >= 0 and s1 >= 0:
                a, b = (q0 - r0, q0), (q1 - r1, q1)
            else:
                a = b = None
            if a is not None:
                if a[0] * b[1] <= b[0] * a[1]:
                    (ln, ld), (hn, hd) = a, b
                else:
                    (ln, ld), (hn, hd) = b, a
                # (hn/hd - ln/ld) * 2^t <= ln/ld
                if (hn * ld - ln * hd) << tbits <= ln * hd:
                    return ln, ld, hn, hd, d
        d += 1


def start_depth(ex, m: int) -> int:
    """A depth where q_d exceeds m, a sensible place to begin deepening."""
    d = 0
    while True:
        avail = ex.available
        if avail is not None and d >= avail:
            return max(avail - 1, 0)
        ex.ensure(d)
        if ex.q[d] > m:
            return max(d - 1, 0)
        d += 1


def norm_dist_malpha(m: int, alpha: AlphaSpec, rel_tol=DEFAULT_REL_TOL) -> NormDistEnclosure:
    """Enclosure of ||m alpha|| with relative width at most rel_tol."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    t = tol_bits(rel_tol)
    ex = expansion(alpha)
    ln, ld, hn, hd, d = dist_bounds(ex, m, t, start_depth(ex, m))
    return NormDistEnclosure(m, RationalInterval(Fraction(ln, ld), Fraction(hn, hd)), d)


def norm_dist_surd(m: int, alpha: QuadraticSurd) -> QuadElement:
    """Exact ||m alpha|| in Q(sqrt D), independent of any convergent data."""
    if not isinstance(alpha, QuadraticSurd):
        raise TypeError("exact path needs a QuadraticSurd")
    return _surd_norm_dist(alpha.value * m)


def norm_dist_exact_rational(m: int, alpha: Rational) -> Fraction:
    """Exact ||m alpha|| for a rational alpha; raises on 0 or 1/2."""
    d = norm_dist_rational(alpha.value * m)
    if d == 0 or 2 * d == 1:
        raise RationalDegenerate(m)
    return d
