"""Monte Carlo checks of the metric theory of continued fractions.

"Uniform random alpha" is a :class:`RandomDyadic` with enough bits that its
first K quotients agree with those of any real in the same dyadic cell.
Every experiment is driven by a master seed; per-sample seeds come from
``numpy.random.SeedSequence`` so results are bit-reproducible and independent
of how samples are scheduled.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cf import (
    LEVY_PLANNING_RATE,
    AlphaSpec,
    Rational,
    RandomDyadic,
    expansion,
    quotients,
)
from .errors import BudgetExceeded, InvalidAlpha
from .evaluate import DEFAULT_REL_TOL
from .interval import RationalInterval, ln_interval
from .sums import default_workers, prefix_sums

MIN_BITS = 64
LEVY_CONSTANT = math.pi**2 / (12 * math.log(2))


# --- phi families -------------------------------------------------------------


@dataclass(frozen=True)
class PhiSpec:
    """A positive non-decreasing function on [1, inf).

    family: ``log2`` ln^2(k+1), ``log`` ln(k+1), ``power`` k^s, ``const`` c,
    ``klog2`` k ln^2(k+1).
    """

    family: str
    param: float = 1.0

    def __post_init__(self):
        if self.family not in ("log2", "log", "power", "const", "klog2"):
            raise InvalidAlpha(f"unknown phi family {self.family!r}")
        if self.family == "const" and self.param <= 0:
            raise InvalidAlpha("constant phi must be positive")
        if self.family == "power" and self.param < 0:
            raise InvalidAlpha("power phi needs s >= 0")

    def __call__(self, x: float) -> float:
        f = self.family
        if f == "log2":
            return math.log(x + 1) ** 2
        if f == "log":
            return math.log(x + 1)
        if f == "power":
            return x**self.param
        if f == "klog2":
            return x * math.log(x + 1) ** 2
        return self.param

    @property
    def label(self) -> str:
        return {
            "log2": "ln^2(k+1)",
            "log": "ln(k+1)",
            "power": f"k^{self.param:g}",
            "klog2": "k*ln^2(k+1)",
            "const": f"{self.param:g}",
        }[self.family]

    @classmethod
    def parse(cls, text: str) -> "PhiSpec":
        t = text.replace(" ", "").lower()
        table = {
            "log2": ("log2", 1.0), "ln^2(k+1)": ("log2", 1.0), "log^2": ("log2", 1.0),
            "log": ("log", 1.0), "ln(k+1)": ("log", 1.0),
            "klog2": ("klog2", 1.0), "k*log2k": ("klog2", 1.0), "k*ln^2(k+1)": ("klog2", 1.0),
        }
        if t in table:
            return cls(*table[t])
        if t.startswith("k^"):
            return cls("power", float(t[2:]))
        try:
            return cls("const", float(t))
        except ValueError:
            raise InvalidAlpha(f"cannot parse phi {text!r}") from None


# --- results ------------------------------------------------------------------


@dataclass
class ExperimentResult:
    name: str
    master_seed: int | None
    seeds: list
    params: dict
    samples: dict
    summary: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default) + "\n"

    def sample_rows(self) -> tuple[list[str], list[list]]:
        cols = [c for c, v in self.samples.items() if _is_flat(v)]
        rows = [
            [i, self.seeds[i]] + [self.samples[c][i] for c in cols]
            for i in range(len(self.seeds))
        ]
        return ["sample", "seed"] + cols, rows


def _is_flat(v) -> bool:
    return all(not isinstance(x, (list, tuple, dict)) for x in v)


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


# --- sampling -----------------------------------------------------------------


def sample_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_alpha(master_seed: int, index: int, bits: int = 4096) -> RandomDyadic:
    """The index-th uniform dyadic sample of a seeded stream."""
    if bits < MIN_BITS:
        raise InvalidAlpha(f"bits={bits} is below the minimum {MIN_BITS}")
    return RandomDyadic(sample_seed(master_seed, index), bits)


def bits_for_depth(K: int) -> int:
    """Bits that keep depth K well inside the validity horizon."""
    need = math.ceil((K + 16) * 2 * LEVY_PLANNING_RATE / math.log(2)) + 1024
    return max(4096, -(-need // 64) * 64)


def _map(fn: Callable, items: Sequence, workers: int | None, deadline: float | None):
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        out = []
        for it in items:
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded("runtime budget exceeded")
            out.append(fn(it))
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- Gauss map ----------------------------------------------------------------


def gauss_map(x: Fraction) -> Fraction:
    """T(x) = 1/x - floor(1/x), with T(0) = 0."""
    if x == 0:
        return Fraction(0)
    y = 1 / x
    return y - (y.numerator // y.denominator)


def gauss_orbit(alpha: AlphaSpec, n: int) -> list[int]:
    """floor(1 / T^{k-1} alpha) for k = 1..n, read off the shifted expansion."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return list(quotients(alpha, n).a)


def gauss_orbit_exact(x, n: int) -> list[int]:
    """Same quotients by iterating T on an exact rational (independent path)."""
    if isinstance(x, (Rational, RandomDyadic)):
        x = x.value
    x = Fraction(x)
    out = []
    for _ in range(n):
        if x == 0:
            raise ValueError(f"orbit reached 0 after {len(out)} steps")
        y = 1 / x
        a = y.numerator // y.denominator
        out.append(a)
        x = y - a
    return out


# --- Birkhoff averages ----------------------------------------------------------


def birkhoff_log_quotient(alpha: AlphaSpec, k: int) -> RationalInterval:
    """Enclosure of (1/k) sum_{i<=k} ln a_i."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a = quotients(alpha, k).a
    lo = hi = Fraction(0)
    for t in a:
        if t > 1:
            I = ln_interval(t)
            lo += I.lo
            hi += I.hi
    return RationalInterval(lo / k, hi / k)


def levy_exponent(alpha: AlphaSpec, k: int) -> RationalInterval:
    """Enclosure of (1/k) ln q_k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ex = expansion(alpha)
    ex.ensure(k)
    return ln_interval(ex.q[k]) / k


def khinchin_log_series(n_terms: int = 200_000) -> tuple[float, float]:
    """Enclosure (lo, hi) of ln K0 = (1/ln 2) sum_n ln n ln(1 + 1/(n(n+2))).

    The partial sum runs to ``n_terms``; the tail T satisfies

        (ln(N+2)+1)/(N+2) - 1/(2N^2)  <=  T  <=  (ln N + 1)/N

    from ln(1+u) bounds and integral comparison with ln x / x^2. A 1e-13
    allowance covers float rounding in the partial sum.
    """
    N = n_terms
    n = np.arange(2, N + 1, dtype=np.float64)
    terms = np.log(n) * -np.log1p(-1.0 / (n + 1.0) ** 2)
    partial = math.fsum(terms.tolist())
    tail_lo = (math.log(N + 2) + 1) / (N + 2) - 1 / (2 * N * N)
    tail_hi = (math.log(N) + 1) / N
    slack = 1e-13
    ln2 = math.log(2)
    return (partial + tail_lo - slack) / ln2, (partial + tail_hi + slack) / ln2


def khinchin_log_constant(n_terms: int = 200_000) -> float:
    lo, hi = khinchin_log_series(n_terms)
    return (lo + hi) / 2


# --- invariant measure --------------------------------------------------------


def gauss_measure(a: float, b: float) -> float:
    return (math.log1p(b) - math.log1p(a)) / math.log(2)


def gauss_invariance_identity(a, b, n_terms: int) -> tuple[float, float, float]:
    """Compare mu([a,b]) with the truncated measure of its preimage under T.

    T^{-1}[a,b] is the disjoint union of [1/(n+b), 1/(n+a)], n >= 1. Returns
    (lhs, rhs, gap) with lhs the sum of the first ``n_terms`` pieces.
    """
    a, b = float(a), float(b)
    if not (0 <= a <= b <= 1):
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    if n_terms < 0:
        raise ValueError("n_terms must be non-negative")
    rhs = gauss_measure(a, b)
    if a == b or n_terms == 0:
        return 0.0, rhs, rhs
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    # ln((n+a+1)(n+b) / ((n+a)(n+b+1))) = ln(1 + (b-a)/((n+a)(n+b+1)))
    pieces = np.log1p((b - a) / ((n + a) * (n + b + 1)))
    lhs = math.fsum(pieces.tolist()) / math.log(2)
    return lhs, rhs, abs(rhs - lhs)


def gauss_truncation_gap(a, b, n_terms: int) -> float:
    """Closed form of the truncation gap: the partial sums telescope."""
    a, b = float(a), float(b)
    return math.log((n_terms + 1 + b) / (n_terms + 1 + a)) / math.log(2)


# --- experiments --------------------------------------------------------------


def _levy_sample(args):
    alpha, k = args
    return float(levy_exponent(alpha, k).mid), float(birkhoff_log_quotient(alpha, k).mid)


def _samples(master_seed, N, bits, extra=()):
    alphas = [sample_alpha(master_seed, i, bits) for i in range(N)]
    seeds = [a.seed for a in alphas]
    for x in extra:
        alphas.append(x)
        seeds.append(None)
    return alphas, seeds


def levy_experiment(K: int, N: int, master_seed: int, bits: int | None = None,
                    workers: int | None = None, budget: float | None = None) -> ExperimentResult:
    """Ensemble of (1/K) ln q_K and (1/K) sum ln a_i over N random alphas."""
    bits = bits or bits_for_depth(K)
    alphas, seeds = _samples(master_seed, N, bits)
    deadline = None if budget is None else time.monotonic() + budget
    vals = _map(_levy_sample, [(a, K) for a in alphas], workers, deadline)
    lev = [v[0] for v in vals]
    khi = [v[1] for v in vals]
    ref_k = khinchin_log_constant()
    return ExperimentResult(
        name="levy",
        master_seed=master_seed,
        seeds=seeds,
        params={"K": K, "N": N, "bits": bits},
        samples={"levy_exponent": lev, "birkhoff_log_quotient": khi},
        summary={
            "levy_mean": float(np.mean(lev)),
            "levy_std": float(np.std(lev, ddof=1)) if N > 1 else 0.0,
            "levy_reference": LEVY_CONSTANT,
            "levy_rel_error": abs(float(np.mean(lev)) - LEVY_CONSTANT) / LEVY_CONSTANT,
            "khinchin_mean": float(np.mean(khi)),
            "khinchin_std": float(np.std(khi, ddof=1)) if N > 1 else 0.0,
            "khinchin_reference": ref_k,
            "khinchin_rel_error": abs(float(np.mean(khi)) - ref_k) / ref_k,
        },
    )


def _io_sample(args):
    alpha, phi, K, w0 = args
    a = quotients(alpha, K).a
    exceed = [k for k, t in enumerate(a, start=1) if t > phi(k)]
    return exceed, sum(1 for k in exceed if k >= w0)


def khinchin_io_experiment(phi: PhiSpec, K: int, N: int, master_seed: int,
                           bits: int | None = None, extra: Sequence[AlphaSpec] = (),
                           workers: int | None = None, budget: float | None = None) -> ExperimentResult:
    """Exceedances a_k > phi(k), with the window [K/2, K] standing in for i.o."""
    bits = bits or bits_for_depth(K)
    alphas, seeds = _samples(master_seed, N, bits, extra)
    w0 = K // 2
    deadline = None if budget is None else time.monotonic() + budget
    vals = _map(_io_sample, [(a, phi, K, w0) for a in alphas], workers, deadline)
    counts = [v[1] for v in vals]
    per_step = [len(v[0]) / K for v in vals]
    return ExperimentResult(
        name="khinchin_io",
        master_seed=master_seed,
        seeds=seeds,
        params={"phi": phi.label, "K": K, "N": N, "bits": bits, "window": [w0, K]},
        samples={
            "window_exceedances": counts,
            "exceedance_rate": per_step,
            "exceedance_indices": [v[0] for v in vals],
        },
        summary={
            "fraction_with_window_exceedance": sum(1 for c in counts if c) / len(counts),
            "mean_window_exceedances": float(np.mean(counts)),
        },
    )


def _eventual_sample(args):
    alpha, K, k0 = args
    ex = expansion(alpha)
    ex.ensure(K)
    bad = [k for k in range(k0, K) if ex.a[k + 1] > ex.q[k]]
    return bad


def eventual_quotient_experiment(K: int, N: int, master_seed: int, k0: int = 100,
                                 bits: int | None = None, workers: int | None = None) -> ExperimentResult:
    """How often a_{k+1} <= q_k holds throughout the window [k0, K)."""
    bits = bits or bits_for_depth(K)
    alphas, seeds = _samples(master_seed, N, bits)
    vals = _map(_eventual_sample, [(a, K, k0) for a in alphas], workers, None)
    ok = [not v for v in vals]
    return ExperimentResult(
        name="eventual",
        master_seed=master_seed,
        seeds=seeds,
        params={"K": K, "N": N, "bits": bits, "window": [k0, K]},
        samples={"holds": ok, "violations": vals},
        summary={"fraction_holding": sum(ok) / len(ok)},
    )


def growth_grid(alpha: AlphaSpec, M_grid: Sequence[int], burn_in: int | None = None) -> list[int]:
    """M_grid plus every convergent denominator q_k with 2 <= q_k <= max(M_grid).

    ``burn_in`` drops the q_k below it (M_grid itself is kept as given).
    """
    hi = max(M_grid)
    lo = max(2, burn_in or 2)
    ex = expansion(alpha)
    extra = []
    k = 0
    while True:
        ex.ensure(k)
        if ex.q[k] > hi:
            break
        if ex.q[k] >= lo:
            extra.append(ex.q[k])
        k += 1
    return sorted(set(M_grid) | set(extra))


def _growth_sample(args):
    alpha, M_grid, rel_tol, burn_in = args
    grid = growth_grid(alpha, M_grid, burn_in)
    S = prefix_sums(alpha, grid, rel_tol, workers=1)
    return grid, [float(x.mid) for x in S]


def growth_criterion_experiment(phi: PhiSpec, M_grid: Sequence[int], N: int, master_seed: int,
                                rel_tol=DEFAULT_REL_TOL, bits: int = 4096,
                                extra: Sequence[AlphaSpec] = (), workers: int | None = None,
                                budget: float | None = None,
                                burn_in: int | None = None) -> ExperimentResult:
    """R(M) = S_M / (M ln M phi(ln M)) along each sample's grid.

    The grid is M_grid together with every convergent denominator q_k >= 2
    up to max(M_grid), or only those >= ``burn_in`` when given.
    ``prefix_max`` holds the running maximum of R at each value of M_grid;
    the limsup proxy is the last of them.
    """
    M_grid = sorted(int(M) for M in M_grid)
    if M_grid[0] < 2:
        raise ValueError("R(M) needs M >= 2")
    alphas, seeds = _samples(master_seed, N, bits, extra)
    deadline = None if budget is None else time.monotonic() + budget
    vals = _map(_growth_sample, [(a, tuple(M_grid), rel_tol, burn_in) for a in alphas], workers, deadline)
    max_R, prefix_max, increases, grids, Rs = [], [], [], [], []
    for grid, S in vals:
        R = [s / (M * math.log(M) * phi(math.log(M))) for M, s in zip(grid, S)]
        run = []
        best = -math.inf
        pm = []
        for M, r in zip(grid, R):
            best = max(best, r)
            run.append(best)
            if M in M_grid:
                pm.append(best)
        grids.append(grid)
        Rs.append(R)
        max_R.append(best)
        prefix_max.append(pm)
        increases.append(sum(1 for x, y in zip(pm, pm[1:]) if y > x))
    arr = np.asarray(max_R)
    return ExperimentResult(
        name="growth",
        master_seed=master_seed,
        seeds=seeds,
        params={"phi": phi.label, "M_grid": M_grid, "N": N, "bits": bits,
                "rel_tol": str(Fraction(rel_tol)), "phi_argument": "ln M",
                "burn_in": burn_in},
        samples={
            "max_R": max_R,
            "prefix_increases": increases,
            "prefix_max": prefix_max,
            "grid": grids,
            "R": Rs,
        },
        summary={
            "median_max_R": float(np.median(arr)),
            "q25_max_R": float(np.quantile(arr, 0.25)),
            "q75_max_R": float(np.quantile(arr, 0.75)),
            "fraction_increasing": sum(1 for c in increases if c) / len(increases),
        },
    )
