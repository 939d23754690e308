"""Reference growth bounds for S_M and constructions that stress them.

The comparison quantities are

    lower     M ln q_k
    upper     M ln q_k + a_{k+1} M
    improved  M ln q_k + M (1 + ln a_{k+1})

with k fixed by q_k <= M < q_{k+1}. Implied constants are never assumed;
reports carry interval-valued ratios so callers can fit them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .cf import AlphaSpec, RuleGenerated, expansion, locate_k, quotients
from .errors import InvalidAlpha
from .evaluate import DEFAULT_REL_TOL
from .interval import RationalInterval, ln_interval
from .sums import prefix_sums, s_m

__all__ = [
    "BoundReport",
    "locate_k",
    "bound_report",
    "ratio_scan",
    "build_pathological",
    "bounded_type_check",
]

LN_PREC = 30


@dataclass(frozen=True)
class BoundReport:
    M: int
    k: int
    q_k: int
    a_next: int
    lower_ref: RationalInterval
    upper_ref: RationalInterval
    upper_improved_ref: RationalInterval
    s_m: RationalInterval
    ratio_lower: RationalInterval
    ratio_upper: RationalInterval
    ratio_improved: RationalInterval
    ratio_mlogm: RationalInterval | None
    flags: tuple = ()
    special_total: RationalInterval | None = None
    special_vs_upper: RationalInterval | None = None
    special_vs_improved: RationalInterval | None = None


def _references(alpha: AlphaSpec, M: int):
    ex = expansion(alpha)
    k = locate_k(alpha, M)
    qk, a_next = ex.q[k], ex.a[k + 1]
    flags = []
    ln_q = ln_interval(qk, LN_PREC)
    if M < 2 or qk == 1:
        # ln q_k = 0: keep ratios finite
        lower = RationalInterval.point(1)
        flags.append("small-M")
    else:
        lower = ln_q * M
    upper = ln_q * M + a_next * M
    improved = ln_q * M + (ln_interval(a_next, LN_PREC) + 1) * M
    if a_next > qk:
        flags.append("a_k1>q_k")
    mlogm = ln_interval(M, LN_PREC) * M if M >= 2 else None
    return k, qk, a_next, lower, upper, improved, mlogm, flags


def _report(alpha, M, total, special=None) -> BoundReport:
    k, qk, a_next, lower, upper, improved, mlogm, flags = _references(alpha, M)
    extra = {}
    if special is not None:
        extra = dict(
            special_total=special,
            special_vs_upper=special / (a_next * M),
            special_vs_improved=special / ((ln_interval(a_next, LN_PREC) + 1) * M),
        )
    return BoundReport(
        M=M, k=k, q_k=qk, a_next=a_next,
        lower_ref=lower, upper_ref=upper, upper_improved_ref=improved,
        s_m=total,
        ratio_lower=total / lower,
        ratio_upper=total / upper,
        ratio_improved=total / improved,
        ratio_mlogm=None if mlogm is None else total / mlogm,
        flags=tuple(flags),
        **extra,
    )


def bound_report(alpha: AlphaSpec, M: int, rel_tol=DEFAULT_REL_TOL, **kw) -> BoundReport:
    """S_M against the three reference bounds, including the special-term subsum."""
    rep = s_m(alpha, M, rel_tol, **kw)
    return _report(alpha, M, rep.total, rep.special_total)


def ratio_scan(alpha: AlphaSpec, M_grid, rel_tol=DEFAULT_REL_TOL, **kw) -> list[BoundReport]:
    """One report per grid value, from a single summation pass to max(grid)."""
    grid = [int(M) for M in M_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("M_grid must be strictly increasing")
    totals = prefix_sums(alpha, grid, rel_tol, **kw)
    return [_report(alpha, M, S) for M, S in zip(grid, totals)]


_RULE_NAMES = {"square": "square", "q^2": "square", "qk^2": "square", "exp": "exp"}


def build_pathological(rule: str | Callable[[int], int] = "square", K: int = 8,
                       a1: int = 1, cap: int | None = None) -> RuleGenerated:
    """An alpha whose a_{k+1} is computed from the exact q_k of its prefix.

    ``rule`` is ``"square"`` (a_{k+1} = q_k^2), ``"exp"`` (a_{k+1} =
    ceil(exp(q_k)), sensible only with a ``cap``) or a callable q_k -> a_{k+1}.
    The first K quotients are generated eagerly so cap violations surface now.
    """
    if a1 < 1:
        raise InvalidAlpha("a_1 must be >= 1")
    if callable(rule):
        alpha = RuleGenerated("custom", (a1, cap, rule))
    else:
        try:
            name = _RULE_NAMES[rule]
        except KeyError:
            raise InvalidAlpha(f"unknown growth rule {rule!r}") from None
        alpha = RuleGenerated(name, (a1, cap))
    quotients(alpha, K)
    return alpha


def bounded_type_check(alpha: AlphaSpec, K: int, B: int) -> tuple[bool, int]:
    """(max_{k<=K} a_k <= B, max_{k<=K} a_k)."""
    a = quotients(alpha, K).a
    top = max(a) if a else 0
    return top <= B, top
