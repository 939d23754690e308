"""Exact arithmetic in the real quadratic field Q(sqrt(D)).

Elements are ``a + b*sqrt(D)`` with rational ``a``, ``b``. Every comparison is
decided with integer arithmetic, so these objects serve as an exact oracle for
distances ``||m*alpha||`` and for sums of their reciprocals when ``alpha`` is a
quadratic irrational.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt
from numbers import Rational as _RationalABC


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


class QuadElement:
    __slots__ = ("a", "b", "D")

    def __init__(self, a, b, D: int):
        if D <= 0 or is_square(D):
            raise ValueError(f"D={D} must be a positive non-square")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.D = D

    def _coerce(self, other) -> "QuadElement":
        if isinstance(other, QuadElement):
            if other.D != self.D:
                raise ValueError("mixing elements of different quadratic fields")
            return other
        if isinstance(other, (int, _RationalABC)):
            return QuadElement(other, 0, self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(-self.a, -self.b, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(self.a - o.a, self.b - o.b, self.D)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(
            self.a * o.a + self.b * o.b * self.D, self.a * o.b + self.b * o.a, self.D
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadElement":
        return QuadElement(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def reciprocal(self) -> "QuadElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadElement(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = QuadElement(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 against b^2 D
        diff = a * a - b * b * self.D
        return sa if diff > 0 else sb

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare with {type(other)!r}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def floor(self) -> int:
        # floor(a + b sqrt D) = floor((num + sqrt(b_num^2 D)) / den) handled
        # via a common denominator and an integer square root.
        if self.b == 0:
            return self.a.__floor__()
        den = self.a.denominator * self.b.denominator
        A = self.a.numerator * self.b.denominator
        B = self.b.numerator * self.a.denominator
        # value = (A + B sqrt D) / den, B != 0, sqrt(B^2 D) irrational
        r = isqrt(B * B * self.D)  # floor of |B| sqrt D
        if B > 0:
            return (A + r) // den
        return (A - r - 1) // den

    def __float__(self):
        from math import sqrt

        return float(self.a) + float(self.b) * sqrt(self.D)

    def to_decimal(self, digits: int = 30) -> str:
        from mpmath import mp, mpf, sqrt

        with mp.workdps(digits + 10):
            v = mpf(self.a.numerator) / self.a.denominator + (
                mpf(self.b.numerator) / self.b.denominator
            ) * sqrt(self.D)
            return mp.nstr(v, digits)

    def __repr__(self):
        return f"QuadElement({self.a}, {self.b}, D={self.D})"


def surd_value(P: int, D: int, Q: int) -> QuadElement:
    """(P + sqrt(D)) / Q as a field element."""
    return QuadElement(Fraction(P, Q), Fraction(1, Q), D)


def norm_dist(x: QuadElement) -> QuadElement:
    """Distance from ``x`` to the nearest integer, exactly."""
    n = x.floor()
    frac = x - n
    if frac * 2 <= 1:
        return frac
    return 1 - frac
