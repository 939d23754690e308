"""Enclosures of S_M(alpha) = sum_{m<=M} 1/||m alpha|| and its relatives.

Every term is bounded below and above by integers at a fixed binary scale
2^-F (rounded outward), and the bounds are summed as Python integers. Integer
addition is associative, so block subtotals, special terms and the tail
reassemble the total exactly, and a parallel run returns the same bits as the
sequential one.

Two kernels produce the term bounds:

``exact``
    one term at a time, deepening the convergent enclosure of ``m*alpha``
    until the distance is known to the requested relative accuracy.
``fast``
    vectorised over m. With one convergent p/q where q' (the next
    denominator) satisfies M / q' <= 2^-s, each distance is
    (r' +- eta)/q with r' = min(m p mod q, q - m p mod q) and eta <= 2^-s.
    Residues too small for int64 fixed point are handed to the exact kernel.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cf import AlphaSpec, expansion, locate_k
from .errors import BudgetExceeded, HorizonExceeded, ExpansionExhausted
from .evaluate import DEFAULT_REL_TOL, check_range, dist_bounds, start_depth, tol_bits
from .interval import RationalInterval, ln_interval

_LOW31 = (1 << 31) - 1
_FLOAT_EXACT = 1 << 52
_MAX_CHUNK = 1 << 16


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MALPHA_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SumReport:
    M: int
    total: RationalInterval
    special_terms: list
    block_subtotals: list
    tail: RationalInterval | None
    k_used: int
    q_k: int
    special_total: RationalInterval
    bulk_total: RationalInterval
    kernel: str = "fast"

    @property
    def specials_count(self) -> int:
        return len(self.special_terms)


@dataclass
class _Plan:
    tbits: int
    F: int
    s: int
    kernel: str
    j: int = -1
    p: int = 0
    q: int = 0
    R0: int = 0
    chunk: int = _MAX_CHUNK


def _make_plan(alpha: AlphaSpec, M: int, rel_tol, kernel: str = "auto") -> _Plan:
    t = tol_bits(rel_tol)
    plan = _Plan(tbits=t, F=t + 4, s=t + 3, kernel="exact")
    if kernel == "exact":
        return plan
    ex = expansion(alpha)
    need = M << plan.s
    j = 0
    try:
        while True:
            ex.ensure(j + 1)
            if ex.q[j + 1] >= need:
                break
            j += 1
    except (HorizonExceeded, ExpansionExhausted):
        if kernel == "fast":
            raise
        return plan
    q = ex.q[j]
    if q >= _FLOAT_EXACT or q < 2:
        if kernel == "fast":
            raise ValueError(f"fast kernel unavailable: q_j={q}")
        return plan
    chunk = 1 << max(10, min(16, 62 - q.bit_length()))
    # keep q/r' * 2^F below 2^61 on the float route
    R0 = max(2, -(-(q << plan.F) >> 61) + 1)
    plan.kernel = "fast"
    plan.j, plan.p, plan.q, plan.R0, plan.chunk = j, ex.p[j], q, R0, chunk
    return plan


def _exact_term(ex, m: int, plan: _Plan, hint: int, weighted: bool):
    ln, ld, hn, hd, d = dist_bounds(ex, m, plan.tbits + 2, hint)
    lo = (hd << plan.F) // hn
    hi = -(-(ld << plan.F) // ln)
    if weighted:
        lo, hi = lo // m, -(-hi // m)
    return lo, hi, d


def _split_reduce(v: np.ndarray, starts: np.ndarray) -> list[int]:
    hi = np.add.reduceat(v >> 31, starts)
    lo = np.add.reduceat(v & _LOW31, starts)
    return [(int(h) << 31) + int(l) for h, l in zip(hi, lo)]


def _range_sums(alpha, plan: _Plan, m_start: int, m_stop: int, cuts: list[int],
                special: tuple[int, int] | None, weighted: bool, want_terms: bool,
                deadline: float | None):
    """Sum term bounds for m in [m_start, m_stop] split at ``cuts``.

    ``cuts`` are the inclusive right ends of the segments that intersect the
    range, the last one >= m_stop. Returns per-segment (lo, hi) sums, special
    terms as (m, lo, hi), and optionally every term.
    """
    ex = expansion(alpha)
    seg_lo = [0] * len(cuts)
    seg_hi = [0] * len(cuts)
    specials = []
    terms = [] if want_terms else None
    hint = start_depth(ex, m_start)
    if plan.kernel == "fast":
        hint = plan.j

    pk, qk = special if special else (0, 1)
    m0 = m_start
    while m0 <= m_stop:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("runtime budget exceeded while summing")
        m1 = min(m_stop, m0 + plan.chunk - 1)
        n = m1 - m0 + 1
        # segment starts (relative) for this chunk
        idx = []
        ci = []
        pos = m0
        for c_i, c in enumerate(cuts):
            if c < m0:
                continue
            if pos > m1:
                break
            idx.append(pos - m0)
            ci.append(c_i)
            pos = c + 1
        starts = np.asarray(idx, dtype=np.intp)

        if plan.kernel == "fast":
            i = np.arange(n, dtype=np.int64)
            q, p = plan.q, plan.p
            base = (m0 * p) % q
            r = (base + (i * (p % q)) % q) % q
            rp = np.minimum(r, q - r)
            small = rp < plan.R0
            rp_safe = np.where(small, plan.R0, rp)
            X = (float(q) / rp_safe.astype(np.float64)) * float(1 << plan.F)
            Xi = np.floor(X).astype(np.int64)
            lo = Xi - (Xi >> 52) - 2
            hi = Xi + (Xi >> 52) + 3
            lo = lo - (lo >> plan.s) - 1
            hi = hi + (hi >> (plan.s - 1)) + 1
            if weighted:
                mm = i + m0
                lo = lo // mm
                hi = -(-hi // mm)
            lo = np.where(small, 0, lo)
            hi = np.where(small, 0, hi)
            lo_sums = _split_reduce(lo, starts)
            hi_sums = _split_reduce(hi, starts)
            extra = {}
            for off in np.flatnonzero(small).tolist():
                m = m0 + off
                tl, th, _ = _exact_term(ex, m, plan, plan.j, weighted)
                extra[off] = (tl, th)
            for off, (tl, th) in extra.items():
                seg = int(np.searchsorted(starts, off, side="right")) - 1
                lo_sums[seg] += tl
                hi_sums[seg] += th
            for a, c_i in enumerate(ci):
                seg_lo[c_i] += lo_sums[a]
                seg_hi[c_i] += hi_sums[a]

            def term_at(off):
                if off in extra:
                    return extra[off]
                return int(lo[off]), int(hi[off])

            if special:
                rk = ((m0 * pk) % qk + (i * (pk % qk)) % qk) % qk
                sp = np.flatnonzero((rk <= 1) | (rk == qk - 1)).tolist()
                for off in sp:
                    specials.append((m0 + off, *term_at(off)))
            if want_terms:
                lo_list, hi_list = lo.tolist(), hi.tolist()
                for off, (tl, th) in extra.items():
                    lo_list[off], hi_list[off] = tl, th
                terms.extend(zip(lo_list, hi_list))
        else:
            seg = -1
            for off in range(n):
                m = m0 + off
                while seg + 1 < len(idx) and idx[seg + 1] <= off:
                    seg += 1
                tl, th, hint = _exact_term(ex, m, plan, hint, weighted)
                seg_lo[ci[seg]] += tl
                seg_hi[ci[seg]] += th
                if special:
                    rk = (m * pk) % qk
                    if rk <= 1 or rk == qk - 1:
                        specials.append((m, tl, th))
                if want_terms:
                    terms.append((tl, th))
        m0 = m1 + 1
    return seg_lo, seg_hi, specials, terms


def _worker(args):
    return _range_sums(*args)


def accumulate(alpha: AlphaSpec, M: int, cuts: list[int], rel_tol=DEFAULT_REL_TOL,
               special: tuple[int, int] | None = None, weighted: bool = False,
               want_terms: bool = False, kernel: str = "auto",
               workers: int | None = None, budget: float | None = None):
    """Sum term bounds over m = 1..M, segmented at the sorted ``cuts``.

    Returns (plan, seg_lo, seg_hi, specials, terms); sums are integers at
    scale 2^-plan.F.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    cuts = sorted(set(int(c) for c in cuts if 1 <= c <= M))
    if not cuts or cuts[-1] != M:
        cuts.append(M)
    check_range(alpha, M)
    plan = _make_plan(alpha, M, rel_tol, kernel)
    deadline = None if budget is None else time.monotonic() + budget
    workers = default_workers() if workers is None else workers
    if workers <= 1 or M < 4 * plan.chunk or want_terms:
        seg_lo, seg_hi, specials, terms = _range_sums(
            alpha, plan, 1, M, cuts, special, weighted, want_terms, deadline
        )
        return plan, seg_lo, seg_hi, specials, terms

    # split on chunk boundaries so each worker sees whole chunks
    n_chunks = -(-M // plan.chunk)
    per = -(-n_chunks // workers)
    jobs = []
    bounds = []
    for w in range(workers):
        a = w * per * plan.chunk + 1
        b = min(M, (w + 1) * per * plan.chunk)
        if a > b:
            break
        first = next(i for i, c in enumerate(cuts) if c >= a)
        last = next(i for i, c in enumerate(cuts) if c >= b)
        local_cuts = cuts[first:last + 1]
        jobs.append((alpha, plan, a, b, local_cuts, special, weighted, False, deadline))
        bounds.append(first)
    seg_lo = [0] * len(cuts)
    seg_hi = [0] * len(cuts)
    specials = []
    with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
        for first, (lo, hi, sp, _) in zip(bounds, pool.map(_worker, jobs)):
            for i, (x, y) in enumerate(zip(lo, hi)):
                seg_lo[first + i] += x
                seg_hi[first + i] += y
            specials.extend(sp)
    return plan, seg_lo, seg_hi, specials, None


def _interval(lo: int, hi: int, F: int, den: int = 1) -> RationalInterval:
    return RationalInterval(Fraction(lo, den << F), Fraction(hi, den << F))


def s_m(alpha: AlphaSpec, M: int, rel_tol=DEFAULT_REL_TOL, kernel: str = "auto",
        workers: int | None = None, budget: float | None = None) -> SumReport:
    """Enclosure of S_M(alpha) with block and special-term diagnostics.

    Blocks are [1 + l q_k, (l+1) q_k] for q_k <= M < q_{k+1}; a trailing
    partial block is reported as ``tail``. Special terms are the m with
    m p_k congruent to 0 or +-1 mod q_k.
    """
    if M < 1:
        raise ValueError("M must be >= 1 (the empty sum is not reported)")
    check_range(alpha, M)
    ex = expansion(alpha)
    k = locate_k(alpha, M)
    pk, qk = ex.p[k], ex.q[k]
    L = M // qk
    cuts = [l * qk for l in range(1, L + 1)]
    plan, seg_lo, seg_hi, sp, _ = accumulate(
        alpha, M, cuts, rel_tol, special=(pk, qk), kernel=kernel,
        workers=workers, budget=budget,
    )
    F = plan.F
    blocks = [_interval(a, b, F) for a, b in zip(seg_lo[:L], seg_hi[:L])]
    tail = _interval(seg_lo[L], seg_hi[L], F) if len(seg_lo) > L else None
    tot_lo, tot_hi = sum(seg_lo), sum(seg_hi)
    sp = sorted(sp)
    sp_lo = sum(t[1] for t in sp)
    sp_hi = sum(t[2] for t in sp)
    return SumReport(
        M=M,
        total=_interval(tot_lo, tot_hi, F),
        special_terms=[(m, _interval(a, b, F)) for m, a, b in sp],
        block_subtotals=blocks,
        tail=tail,
        k_used=k,
        q_k=qk,
        special_total=_interval(sp_lo, sp_hi, F),
        bulk_total=_interval(tot_lo - sp_lo, tot_hi - sp_hi, F),
        kernel=plan.kernel,
    )


def prefix_sums(alpha: AlphaSpec, grid, rel_tol=DEFAULT_REL_TOL, kernel: str = "auto",
                workers: int | None = None, budget: float | None = None,
                weighted: bool = False) -> list[RationalInterval]:
    """S_M enclosures for every M in ``grid`` from one pass up to max(grid)."""
    grid = [int(g) for g in grid]
    if not grid:
        return []
    if min(grid) < 1:
        raise ValueError("grid values must be >= 1")
    M = max(grid)
    cuts = sorted(set(grid))
    plan, seg_lo, seg_hi, _, _ = accumulate(
        alpha, M, cuts, rel_tol, weighted=weighted, kernel=kernel,
        workers=workers, budget=budget,
    )
    acc_lo = acc_hi = 0
    at = {}
    for c, a, b in zip(cuts, seg_lo, seg_hi):
        acc_lo += a
        acc_hi += b
        at[c] = (acc_lo, acc_hi)
    return [_interval(*at[g], plan.F) for g in grid]


def _iroot(n: int, k: int) -> int:
    """floor(n^(1/k)) for n >= 0."""
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _pow_fixed(num: int, den: int, beta: Fraction, F: int, upper: bool) -> int:
    """floor or ceil of 2^F (num/den)^beta."""
    u, v = beta.numerator, beta.denominator
    N = (num ** u) << (F * v)
    Dn = den ** u
    if upper:
        y = -(-N // Dn)
        r = _iroot(y, v)
        return r if r ** v == y else r + 1
    return _iroot(N // Dn, v)


def s_m_beta(alpha: AlphaSpec, M: int, beta, rel_tol=DEFAULT_REL_TOL) -> RationalInterval:
    """Enclosure of sum_{m<=M} ||m alpha||^-beta for rational beta >= 1.

    The distance is resolved to rel_tol / (8 beta) so the power keeps the
    overall relative width near rel_tol.
    """
    beta = Fraction(beta)
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if beta == 1:
        return s_m(alpha, M, rel_tol).total
    if M < 1:
        raise ValueError("M must be >= 1")
    check_range(alpha, M)
    t = tol_bits(rel_tol)
    F = t + 4
    dbits = t + 3 + max(0, math.ceil(math.log2(beta)))
    ex = expansion(alpha)
    hint = start_depth(ex, 1)
    lo_sum = hi_sum = 0
    for m in range(1, M + 1):
        ln, ld, hn, hd, hint = dist_bounds(ex, m, dbits, hint)
        lo_sum += _pow_fixed(hd, hn, beta, F, upper=False)
        hi_sum += _pow_fixed(ld, ln, beta, F, upper=True)
    return _interval(lo_sum, hi_sum, F)


def s_m_weighted(alpha: AlphaSpec, M: int, rel_tol=DEFAULT_REL_TOL, kernel: str = "auto",
                 workers: int | None = None) -> RationalInterval:
    """Enclosure of sum_{m<=M} 1/(m ||m alpha||)."""
    return prefix_sums(alpha, [M], rel_tol, kernel=kernel, workers=workers, weighted=True)[0]


def cesaro_means(alpha: AlphaSpec, N: int, rel_tol=DEFAULT_REL_TOL,
                 kernel: str = "auto") -> list[RationalInterval]:
    """Enclosures of (1/n) sum_{j<=n} S_j for n = 1..N, from one pass of terms."""
    if N < 1:
        raise ValueError("N must be >= 1")
    plan, _, _, _, terms = accumulate(alpha, N, [], rel_tol, want_terms=True, kernel=kernel)
    out = []
    s_lo = s_hi = 0
    c_lo = c_hi = 0
    for n, (a, b) in enumerate(terms, start=1):
        s_lo += a
        s_hi += b
        c_lo += s_lo
        c_hi += s_hi
        out.append(_interval(c_lo, c_hi, plan.F, n))
    return out


def block_profile(alpha: AlphaSpec, k: int, l: int, rel_tol=DEFAULT_REL_TOL,
                  kernel: str = "auto") -> RationalInterval:
    """Enclosure of sum over m in [1 + l q_k, (l+1) q_k] of 1/||m alpha||."""
    if l < 0:
        raise ValueError("l must be non-negative")
    ex = expansion(alpha)
    ex.ensure(k + 1)
    qk = ex.q[k]
    M = (l + 1) * qk
    cuts = [l * qk, M] if l else [M]
    plan, seg_lo, seg_hi, _, _ = accumulate(alpha, M, cuts, rel_tol, kernel=kernel)
    return _interval(seg_lo[-1], seg_hi[-1], plan.F)


# Euler's constant to 12 digits, outward
_GAMMA = RationalInterval(Fraction(577215664901, 10**12), Fraction(577215664902, 10**12))


def harmonic_block_bound(q: int) -> RationalInterval:
    """Enclosure of sum_{n=1}^{q} q/(n+1), the shape of the per-block lower bound.

    Exact for q <= 1000; beyond that uses
    ln N + gamma + 1/(2N) - 1/(12N^2) <= H_N <= ln N + gamma + 1/(2N) with N = q+1.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q <= 1000:
        return RationalInterval.point(q * sum(Fraction(1, n + 1) for n in range(1, q + 1)))
    N = q + 1
    base = ln_interval(N) + _GAMMA + Fraction(1, 2 * N)
    H = RationalInterval(base.lo - Fraction(1, 12 * N * N), base.hi)
    return (H - 1) * q


def special_count(pk: int, qk: int, M: int) -> int:
    """Number of m <= M with m p_k congruent to 0 or +-1 mod q_k."""
    if qk == 1:
        return M
    inv = pow(pk, -1, qk)
    total = 0
    for c in {0, 1, qk - 1}:
        t = (c * inv) % qk  # m == t mod q_k
        total += M // qk if t == 0 else (M - t) // qk + 1 if t <= M else 0
    return total
