"""Continued-fraction expansions and convergents for numbers in [0, 1).

Indexing: ``a_1`` is the first partial quotient of ``alpha = [a_1, a_2, ...]``,
``p_0/q_0 = 0/1`` and ``p_1/q_1 = 1/a_1``. Every quantity is an exact Python
integer.
"""
from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Callable, Sequence, Union

from .errors import (
    CapExceeded,
    CycleNotFound,
    ExpansionExhausted,
    HorizonExceeded,
    InvalidAlpha,
)
from .surd import QuadElement, is_square

# safety factor below the a.s. growth rate ln q_k ~ 1.19 k
LEVY_PLANNING_RATE = 1.2


# --- alpha descriptions -----------------------------------------------------


@dataclass(frozen=True)
class Rational:
    num: int
    den: int

    def __post_init__(self):
        if self.den == 0:
            raise InvalidAlpha("zero denominator")
        num, den = self.num, self.den
        if den < 0:
            num, den = -num, -den
        num %= den
        g = gcd(num, den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", den // g)

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)


@dataclass(frozen=True)
class QuadraticSurd:
    """The number (P + sqrt(D)) / Q, which must lie in (0, 1)."""

    P: int
    D: int
    Q: int

    def __post_init__(self):
        P, D, Q = self.P, self.D, self.Q
        if Q == 0:
            raise InvalidAlpha("Q must be nonzero")
        if D <= 0 or is_square(D):
            raise InvalidAlpha(f"D={D} must be a positive non-square")
        if (D - P * P) % Q:
            # (P + sqrt D)/Q = (P|Q| + sqrt(D Q^2)) / (Q|Q|)
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Q", Q)
        v = self.value
        if not (0 < v < 1):
            raise InvalidAlpha(f"surd ({P}+sqrt({D}))/{Q} is not in (0, 1)")

    @property
    def value(self) -> QuadElement:
        return QuadElement(Fraction(self.P, self.Q), Fraction(1, self.Q), self.D)


@dataclass(frozen=True)
class RuleGenerated:
    """Quotients produced by a named rule, see ``RULES``.

    ``params`` must be hashable; custom rules carry their callable there.
    """

    rule: str
    params: tuple = ()

    def __post_init__(self):
        if self.rule not in RULES:
            raise InvalidAlpha(f"unknown rule {self.rule!r}; known: {sorted(RULES)}")


@dataclass(frozen=True)
class RandomDyadic:
    """A uniform dyadic rational X / 2^bits standing in for a uniform real."""

    seed: int
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise InvalidAlpha("bits must be positive")

    @property
    def numerator(self) -> int:
        return random.Random(self.seed).getrandbits(self.bits)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.bits)

    @property
    def planning_horizon(self) -> int:
        return math.floor(self.bits * math.log(2) / (2 * LEVY_PLANNING_RATE))


AlphaSpec = Union[Rational, QuadraticSurd, RuleGenerated, RandomDyadic]

GOLDEN = QuadraticSurd(-1, 5, 2)
SQRT2_MINUS_1 = QuadraticSurd(-1, 2, 1)
SQRT3_MINUS_1_HALF = QuadraticSurd(-1, 3, 2)


# --- rules ------------------------------------------------------------------

# A rule maps (k, a[1..k-1], q[0..k-1], *params) to a_k.
RuleFn = Callable[..., int]


def _rule_pow2(k, a, q):
    return 1 << (k - 1)


def _rule_const(k, a, q, c=1):
    return c


def _check_cap(k, value, cap):
    if cap is not None and value > cap:
        raise CapExceeded(k, value, cap)
    return value


def _rule_square(k, a, q, a1=1, cap=None):
    if k == 1:
        return _check_cap(1, a1, cap)
    return _check_cap(k, q[k - 1] ** 2, cap)


def ceil_exp(n: int) -> int:
    """ceil(e^n) for a positive integer n, exactly (e^n is irrational)."""
    from mpmath import mp, exp, floor, mpf

    prec = int(n * 1.4427) + 80
    with mp.workprec(prec):
        v = exp(mpf(n))
        f = int(floor(v))
        if v - f < mpf(2) ** -40 or f + 1 - v < mpf(2) ** -40:
            raise ArithmeticError(f"cannot certify ceil(exp({n}))")
    return f + 1


def _rule_exp(k, a, q, a1=1, cap=None):
    if k == 1:
        return _check_cap(1, a1, cap)
    qk = q[k - 1]
    if cap is not None and qk > cap.bit_length():
        # e^qk > 2^qk > cap, no need to evaluate it
        raise CapExceeded(k, None, cap)
    return _check_cap(k, ceil_exp(qk), cap)


def _rule_custom(k, a, q, a1=1, cap=None, fn=None):
    if k == 1:
        return _check_cap(1, a1, cap)
    v = int(fn(q[k - 1]))
    if v < 1:
        raise InvalidAlpha(f"custom rule produced a_{k}={v} < 1")
    return _check_cap(k, v, cap)


RULES: dict[str, RuleFn] = {
    "pow2": _rule_pow2,
    "const": _rule_const,
    "square": _rule_square,
    "exp": _rule_exp,
    "custom": _rule_custom,
}

POW2 = RuleGenerated("pow2")


# --- expansions -------------------------------------------------------------


@dataclass(frozen=True)
class PartialQuotients:
    a: tuple
    finite: bool = False
    horizon: int | None = None

    def __len__(self):
        return len(self.a)

    def __iter__(self):
        return iter(self.a)

    def __getitem__(self, i):
        return self.a[i]


@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


def expand_rational(num: int, den: int) -> PartialQuotients:
    """Euclidean expansion of num/den reduced into [0, 1)."""
    if den == 0:
        raise InvalidAlpha("zero denominator")
    r = Rational(num, den)
    a = []
    x, y = r.den, r.num  # 1/alpha = x/y
    while y:
        t, rem = divmod(x, y)
        a.append(t)
        x, y = y, rem
    return PartialQuotients(tuple(a), finite=True)


def evaluate_quotients(a: Sequence[int]) -> Fraction:
    """[a_1, ..., a_n] as an exact fraction; the empty expansion is 0."""
    x = Fraction(0)
    for t in reversed(a):
        x = 1 / (t + x)
    return x


def _surd_floor(P: int, D: int, Q: int, s: int) -> int:
    # floor((P + sqrt D)/Q), s = isqrt(D), sqrt D irrational
    if Q > 0:
        return (P + s) // Q
    return -((P + s) // -Q) - 1


def expand_quadratic(s: QuadraticSurd, max_steps: int = 100_000) -> tuple[list, list]:
    """Preperiod and period of the expansion of a quadratic surd in (0, 1)."""
    P, D, Q = s.P, s.D, s.Q
    if (D - P * P) % Q:
        raise CycleNotFound("surd is not normalized: Q does not divide D - P^2")
    r = isqrt(D)
    # skip a_0 = 0: x_1 = 1/alpha
    a0 = _surd_floor(P, D, Q, r)
    P = a0 * Q - P
    Q = (D - P * P) // Q
    seen = {}
    out = []
    for i in range(max_steps):
        state = (P, Q)
        if state in seen:
            j = seen[state]
            return out[:j], out[j:]
        seen[state] = i
        t = _surd_floor(P, D, Q, r)
        out.append(t)
        P = t * Q - P
        Q = (D - P * P) // Q
    raise CycleNotFound(f"no cycle within {max_steps} steps")


def periodic_value(preperiod: Sequence[int], period: Sequence[int], D: int) -> QuadElement:
    """Exact value of [preperiod, (period)] in Q(sqrt D).

    The tail y = [(period)] solves y = (p y + p') / (q y + q') with the
    convergent matrix of one period; we take its root in (0, 1).
    """
    if not period:
        raise ValueError("empty period")
    # M = prod [[0,1],[1,a]] acting on y -> 1/(a + y)
    m00, m01, m10, m11 = 1, 0, 0, 1
    for t in period:
        m00, m01, m10, m11 = m01, m00 + t * m01, m11, m10 + t * m11
    # y = (m00 y + m01) / (m10 y + m11)  ->  m10 y^2 + (m11 - m00) y - m01 = 0
    A, B, C = m10, m11 - m00, -m01
    disc = B * B - 4 * A * C
    # disc must equal D times a rational square
    ratio = Fraction(disc, D)
    rn, rd = ratio.numerator, ratio.denominator
    if not (is_square(rn) and is_square(rd)):
        raise ValueError("period does not belong to Q(sqrt D)")
    root = Fraction(isqrt(rn), isqrt(rd))
    y = QuadElement(Fraction(-B, 2 * A), root / (2 * A), D)
    if not (0 < y < 1):
        y = QuadElement(Fraction(-B, 2 * A), -root / (2 * A), D)
    for t in reversed(preperiod):
        y = (y + t).reciprocal()
    return y


class _Expansion:
    """Lazily grown quotient and convergent tables for one alpha.

    p[i], q[i] hold p_i, q_i for i = 0..n where n = len(a) - 1; a[0] is the
    integer part 0.
    """

    def __init__(self, alpha: AlphaSpec):
        self.alpha = alpha
        self.a = [0]
        self.p = [0]
        self.q = [1]
        self._pm1, self._qm1 = 1, 0
        self.finite_len: int | None = None
        self.horizon: int | None = None
        self._lock = threading.Lock()
        self._gen = None
        if isinstance(alpha, Rational):
            self._extend_all(expand_rational(alpha.num, alpha.den).a)
            self.finite_len = len(self.a) - 1
        elif isinstance(alpha, RandomDyadic):
            X = alpha.numerator
            self._extend_all(expand_rational(X, 1 << alpha.bits).a)
            self.finite_len = len(self.a) - 1
            limit = 1 << alpha.bits
            h = min(alpha.planning_horizon, self.finite_len)
            while h > 0 and self.q[h] ** 2 >= limit:
                h -= 1
            self.horizon = h
        elif isinstance(alpha, QuadraticSurd):
            pre, per = expand_quadratic(alpha)
            self._pre, self._per = pre, per
        elif isinstance(alpha, RuleGenerated):
            self._rule = RULES[alpha.rule]
        else:
            raise InvalidAlpha(f"not an alpha description: {alpha!r}")

    def _push(self, t: int):
        n = len(self.a)
        pk1 = self.p[-1]
        qk1 = self.q[-1]
        pk2 = self.p[-2] if n >= 2 else self._pm1
        qk2 = self.q[-2] if n >= 2 else self._qm1
        self.a.append(t)
        self.p.append(t * pk1 + pk2)
        self.q.append(t * qk1 + qk2)

    def _extend_all(self, quotients):
        for t in quotients:
            self._push(t)

    @property
    def available(self) -> int | None:
        """Number of trusted quotients, None when unbounded."""
        if self.horizon is not None:
            return self.horizon
        return self.finite_len

    def ensure(self, k: int):
        """Make a_1..a_k and convergents 0..k available, or raise."""
        if k < len(self.a):
            if self.horizon is not None and k > self.horizon:
                raise HorizonExceeded(self.horizon, k)
            return
        if self.finite_len is not None:
            if self.horizon is not None:
                raise HorizonExceeded(self.horizon, k)
            raise ExpansionExhausted(self.finite_len, k)
        with self._lock:
            while len(self.a) <= k:
                i = len(self.a)  # index of the next quotient
                if isinstance(self.alpha, QuadraticSurd):
                    j = i - 1
                    if j < len(self._pre):
                        t = self._pre[j]
                    else:
                        t = self._per[(j - len(self._pre)) % len(self._per)]
                else:
                    t = self._rule(i, self.a, self.q, *self.alpha.params)
                    if t < 1:
                        raise InvalidAlpha(f"rule produced a_{i}={t}")
                self._push(t)

    def has(self, k: int) -> bool:
        try:
            self.ensure(k)
        except (ExpansionExhausted, HorizonExceeded):
            return False
        return True


@lru_cache(maxsize=256)
def expansion(alpha: AlphaSpec) -> _Expansion:
    return _Expansion(alpha)


def quotients(alpha: AlphaSpec, k: int) -> PartialQuotients:
    """The first k partial quotients a_1..a_k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    ex = expansion(alpha)
    ex.ensure(k)
    return PartialQuotients(
        tuple(ex.a[1 : k + 1]),
        finite=ex.finite_len is not None and ex.horizon is None and k == ex.finite_len,
        horizon=ex.horizon,
    )


def convergents(alpha: AlphaSpec, k: int) -> list[Convergent]:
    """Convergents p_i/q_i for i = 0..k."""
    ex = expansion(alpha)
    ex.ensure(k)
    return [Convergent(i, ex.p[i], ex.q[i]) for i in range(k + 1)]


def full_expansion(alpha: AlphaSpec) -> PartialQuotients:
    """All trusted quotients of a finite (or horizon-limited) expansion."""
    ex = expansion(alpha)
    n = ex.available
    if n is None:
        raise ValueError("expansion is infinite; pass an explicit depth")
    return quotients(alpha, n)


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def parse_alpha(text: str) -> AlphaSpec:
    """Parse ``rational:p/q``, ``surd:D,P,Q``, ``rule:name`` or ``random:seed,bits``."""
    kind, _, body = text.partition(":")
    try:
        if kind == "rational":
            n, _, d = body.partition("/")
            return Rational(int(n), int(d or 1))
        if kind == "surd":
            D, P, Q = (int(t) for t in body.split(","))
            return QuadraticSurd(P, D, Q)
        if kind == "rule":
            name, *params = body.split(",")
            return RuleGenerated(name, tuple(int(t) for t in params))
        if kind == "random":
            seed, bits = (int(t) for t in body.split(","))
            return RandomDyadic(seed, bits)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidAlpha):
            raise
        raise InvalidAlpha(f"cannot parse alpha {text!r}: {exc}") from exc
    raise InvalidAlpha(f"cannot parse alpha {text!r}")


def locate_k(alpha: AlphaSpec, M: int) -> int:
    """The index k with q_k <= M < q_{k+1} (the largest such k)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    ex = expansion(alpha)
    k = 0
    while True:
        ex.ensure(k + 1)
        if ex.q[k + 1] > M:
            return k
        k += 1
