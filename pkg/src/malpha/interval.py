"""Closed intervals with exact rational endpoints, plus rigorous logarithms.

Logarithms are computed in binary fixed point with every rounding directed
outward, so ``ln_interval(x)`` is guaranteed to contain ``ln(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

LN_BITS = 30


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = _frac(self.lo), _frac(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(x, x)

    @classmethod
    def hull(cls, x, y) -> "RationalInterval":
        x, y = _frac(x), _frac(y)
        return cls(min(x, y), max(x, y))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def rel_width(self) -> Fraction:
        if self.lo <= 0:
            raise ZeroDivisionError("relative width needs a positive lower end")
        return self.width / self.lo

    def contains(self, x) -> bool:
        # QuadElement and friends compare against Fractions exactly
        if isinstance(x, (int, float, _RationalABC)):
            x = _frac(x)
        return self.lo <= x and x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def contains_interval(self, other: "RationalInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "RationalInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def _as_interval(self, other) -> "RationalInterval":
        if isinstance(other, RationalInterval):
            return other
        return RationalInterval.point(_frac(other))

    def __add__(self, other):
        o = self._as_interval(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._as_interval(other)
        return RationalInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return self._as_interval(other) - self

    def __mul__(self, other):
        o = self._as_interval(other)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(c), max(c))

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"reciprocal of an interval containing 0: {self}")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * self._as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return self._as_interval(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        if self.lo >= 0:
            return RationalInterval(self.lo**n, self.hi**n)
        if self.hi <= 0:
            return RationalInterval.hull(self.lo**n, self.hi**n)
        if n % 2:
            return RationalInterval(self.lo**n, self.hi**n)
        return RationalInterval(0, max(self.lo**n, self.hi**n))

    def ln(self, bits: int = LN_BITS) -> "RationalInterval":
        return RationalInterval(ln_interval(self.lo, bits).lo, ln_interval(self.hi, bits).hi)

    def to_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        lo, hi = self.to_floats()
        return f"RationalInterval([{lo:.17g}, {hi:.17g}])"


def as_interval(x) -> RationalInterval:
    if isinstance(x, RationalInterval):
        return x
    return RationalInterval.point(x)


# --- fixed-point logarithms -------------------------------------------------


def _atanh_fp(zfp: int, W: int, upper: bool) -> int:
    """Bound 2^W * atanh(z) for z = zfp / 2^W in [0, 1/3].

    ``upper=False`` truncates a positive series with floored terms, which is a
    lower bound. ``upper=True`` ceils every term and adds a geometric tail.
    """
    if zfp == 0:
        return 0
    two_w = 2 * W
    z2 = zfp * zfp
    total = 0
    power = zfp
    j = 0
    while True:
        d = 2 * j + 1
        total += -(-power // d) if upper else power // d
        if upper:
            power = -(-(power * z2) >> two_w)
        else:
            power = (power * z2) >> two_w
        j += 1
        if power <= 1:
            break
    if upper:
        # remaining terms: sum_{i>=j} z^{2i+1}/(2i+1) <= power / (1 - z^2), z^2 <= 1/9
        total += -(-power * 9 // 8) + 1
    return total


@lru_cache(maxsize=None)
def _ln2_fp(W: int) -> tuple[int, int]:
    one = 1 << W
    lo = 2 * _atanh_fp(one // 3, W, False)
    hi = 2 * _atanh_fp(-(-one // 3), W, True)
    return lo, hi


def _ln_fp(num: int, den: int, W: int) -> tuple[int, int]:
    """Bounds (lo, hi) on 2^W * ln(num/den) for positive integers."""
    # pick e with num/den / 2^e in [1, 2)
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        if num < den << e:
            e -= 1
    else:
        if num << -e < den:
            e -= 1
    # y = num / (den * 2^e) in [1, 2), as fixed point
    if e >= 0:
        yn, yd = num, den << e
    else:
        yn, yd = num << -e, den
    y_lo = (yn << W) // yd
    y_hi = -(-(yn << W) // yd)
    one = 1 << W
    # z = (y-1)/(y+1), increasing in y
    z_lo = ((y_lo - one) << W) // (y_lo + one)
    z_hi = -(-((y_hi - one) << W) // (y_hi + one))
    z_hi = min(z_hi, -(-one // 3))
    l2lo, l2hi = _ln2_fp(W)
    if e >= 0:
        base_lo, base_hi = e * l2lo, e * l2hi
    else:
        base_lo, base_hi = e * l2hi, e * l2lo
    lo = base_lo + 2 * _atanh_fp(z_lo, W, False)
    hi = base_hi + 2 * _atanh_fp(z_hi, W, True)
    return lo, hi


@lru_cache(maxsize=65536)
def _ln_cached(num: int, den: int, bits: int) -> tuple[Fraction, Fraction]:
    e_mag = max(num.bit_length(), den.bit_length()).bit_length()
    W = bits + e_mag + 8
    lo, hi = _ln_fp(num, den, W)
    return Fraction(lo, 1 << W), Fraction(hi, 1 << W)


def ln_interval(x, bits: int = LN_BITS) -> RationalInterval:
    """Enclosure of the natural log of a positive rational, width <= 2^-bits."""
    x = _frac(x)
    if x <= 0:
        raise ValueError(f"ln of non-positive value {x}")
    if x == 1:
        return RationalInterval.point(0)
    lo, hi = _ln_cached(x.numerator, x.denominator, bits)
    return RationalInterval(lo, hi)


def ln2_interval(bits: int = LN_BITS) -> RationalInterval:
    return ln_interval(2, bits)
