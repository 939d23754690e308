"""Command-line front end.

    malpha expand --surd 5,-1,2 --depth 6
    malpha sum --surd 5,-1,2 --M 1000
    malpha sum --rule pow2 --grid q --M 100000
    malpha bounds --rule square --grid q --M 1000000
    malpha experiment levy --K 2000 --N 50 --seed 7 --out levy.json --csv levy.csv

Exit codes: 0 success, 2 invalid input, 3 depth/horizon exhaustion,
4 runtime budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Context
from fractions import Fraction

from . import __version__
from .bounds import ratio_scan
from .cf import (
    AlphaSpec,
    QuadraticSurd,
    RandomDyadic,
    Rational,
    RuleGenerated,
    convergents,
    expansion,
    full_expansion,
    locate_k,
)
from .errors import InvalidAlpha, MalphaError
from .evaluate import DEFAULT_REL_TOL
from .metric import (
    PhiSpec,
    eventual_quotient_experiment,
    gauss_invariance_identity,
    gauss_truncation_gap,
    growth_criterion_experiment,
    khinchin_io_experiment,
    khinchin_log_series,
    levy_experiment,
)
from .sums import prefix_sums, s_m, special_count

SCHEMA_VERSION = 1

_FLOOR = Context(prec=17, rounding=ROUND_FLOOR)
_CEIL = Context(prec=17, rounding=ROUND_CEILING)


def approx(x: Fraction, up: bool = False) -> str:
    """17 significant digits, rounded outward so printed bounds still enclose."""
    ctx = _CEIL if up else _FLOOR
    return str(ctx.divide(ctx.create_decimal(x.numerator), x.denominator))


@dataclass
class RunConfig:
    subcommand: str
    alpha: AlphaSpec | None = None
    M: int | None = None
    grid: list[int] | None = None
    depth: int | None = None
    N: int | None = None
    seed: int | None = None
    rel_tol: Fraction = DEFAULT_REL_TOL
    fmt: str = "csv"
    out: str | None = None
    extras: dict = field(default_factory=dict)


# --- parsing ------------------------------------------------------------------


def _alpha_from_args(ns) -> AlphaSpec:
    try:
        if ns.rational is not None:
            num, _, den = ns.rational.partition("/")
            return Rational(int(num), int(den or 1))
        if ns.surd is not None:
            D, P, Q = (int(t) for t in ns.surd.split(","))
            return QuadraticSurd(P, D, Q)
        if ns.rule is not None:
            name, *params = ns.rule.split(",")
            return RuleGenerated(name, tuple(int(t) for t in params))
        if ns.random is not None:
            seed, bits = (int(t) for t in ns.random.split(","))
            return RandomDyadic(seed, bits)
    except InvalidAlpha:
        raise
    except ValueError as exc:
        raise InvalidAlpha(f"bad alpha description: {exc}") from exc
    raise InvalidAlpha("one of --rational, --surd, --rule, --random is required")


def _parse_fraction(text: str) -> Fraction:
    try:
        if text.startswith("2^"):
            return Fraction(2) ** int(text[2:])
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _parse_grid(text: str) -> list[int] | str:
    if text == "q":
        return "q"
    try:
        vals = [int(float(t)) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
    return vals


def _int(text: str) -> int:
    try:
        return int(float(text)) if ("e" in text.lower()) else int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc


def _add_alpha(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rational", metavar="P/Q")
    g.add_argument("--surd", metavar="D,P,Q", help="(P + sqrt D) / Q")
    g.add_argument("--rule", metavar="NAME[,PARAMS]", help="pow2, square, exp, const")
    g.add_argument("--random", metavar="SEED,BITS")


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--max-seconds", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="malpha", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("expand", help="table of k, a_k, p_k, q_k")
    _add_alpha(p)
    p.add_argument("--depth", type=_int)
    _add_output(p)

    for name, help_ in (("sum", "enclosures of S_M"), ("bounds", "S_M against reference bounds")):
        p = sub.add_parser(name, help=help_)
        _add_alpha(p)
        p.add_argument("--M", type=_int)
        p.add_argument("--grid", type=_parse_grid, help="comma list, or q for convergent denominators")
        p.add_argument("--rel-tol", type=_parse_fraction, default=DEFAULT_REL_TOL)
        _add_output(p)

    p = sub.add_parser("experiment", help="seeded Monte Carlo experiments (JSON)")
    p.add_argument("kind", choices=("levy", "khinchin", "growth", "eventual", "gauss", "khinchin-constant"))
    p.add_argument("--K", type=_int, default=2000)
    p.add_argument("--N", type=_int, default=50)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--bits", type=_int)
    p.add_argument("--phi", default="log2")
    p.add_argument("--grid", type=_parse_grid, default=[1000, 10000, 100000])
    p.add_argument("--rel-tol", type=_parse_fraction, default=DEFAULT_REL_TOL)
    p.add_argument("--a", type=_parse_fraction, default=Fraction(1, 5))
    p.add_argument("--b", type=_parse_fraction, default=Fraction(1, 2))
    p.add_argument("--terms", type=_int, default=10**6)
    p.add_argument("--burn-in", type=_int, default=None,
                   help="growth: skip convergent denominators below this M")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--csv", metavar="PATH", help="per-sample table")
    p.add_argument("--max-seconds", type=float, default=None)
    return parser


# --- output -------------------------------------------------------------------


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _table(name: str, header: list[str], rows: list[list], fmt: str, approx_cols=()) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    extra = f"; approx={','.join(approx_cols)}" if approx_cols else ""
    buf.write(f"# schema=malpha.{name}/{SCHEMA_VERSION}{extra}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class _Stream:
    """CSV rows written as they are produced (grid mode)."""

    def __init__(self, name, header, fmt, path, approx_cols=()):
        self.fmt = fmt
        self.header = header
        self.rows = []
        self.fh = open(path, "w", encoding="utf-8", newline="\n") if path else sys.stdout
        if fmt == "csv":
            extra = f"; approx={','.join(approx_cols)}" if approx_cols else ""
            self.fh.write(f"# schema=malpha.{name}/{SCHEMA_VERSION}{extra}\n")
            self.w = csv.writer(self.fh, lineterminator="\n")
            self.w.writerow(header)

    def row(self, r):
        if self.fmt == "csv":
            self.w.writerow(r)
            self.fh.flush()
        else:
            self.rows.append(dict(zip(self.header, r)))

    def close(self):
        if self.fmt == "json":
            self.fh.write(json.dumps(self.rows, indent=2) + "\n")
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


def _interval_cells(I):
    return [approx(I.lo), approx(I.hi, up=True)]


# --- commands -----------------------------------------------------------------


def cmd_expand(cfg: RunConfig) -> int:
    alpha = cfg.alpha
    ex = expansion(alpha)
    depth = cfg.depth
    if depth is None:
        if ex.available is None:
            depth = 10
        else:
            depth = len(full_expansion(alpha))
    conv = convergents(alpha, depth)
    rows = [[c.k, ex.a[c.k], c.p, c.q] for c in conv]
    _write(_table("expand", ["k", "a_k", "p_k", "q_k"], rows, cfg.fmt), cfg.out)
    return 0


def _grid_for(cfg: RunConfig) -> list[int]:
    if cfg.grid == "q":
        top = cfg.M or 10**4
        ex = expansion(cfg.alpha)
        out = []
        k = 0
        while True:
            if not ex.has(k):
                break
            if ex.q[k] > top:
                break
            out.append(ex.q[k])
            k += 1
        return sorted(set(out))
    if cfg.grid:
        return sorted(set(cfg.grid))
    if cfg.M is None:
        raise InvalidAlpha("need --M or --grid")
    return [cfg.M]


def cmd_sum(cfg: RunConfig) -> int:
    budget = cfg.extras.get("max_seconds")
    header = ["M", "S_lo", "S_hi", "k", "specials"]
    grid = _grid_for(cfg)
    if len(grid) == 1:
        rep = s_m(cfg.alpha, grid[0], cfg.rel_tol, budget=budget)
        rows = [[rep.M, *_interval_cells(rep.total), rep.k_used, rep.specials_count]]
        _write(_table("sum", header, rows, cfg.fmt, ("S_lo", "S_hi")), cfg.out)
        return 0
    totals = prefix_sums(cfg.alpha, grid, cfg.rel_tol, budget=budget)
    out = _Stream("sum", header, cfg.fmt, cfg.out, ("S_lo", "S_hi"))
    try:
        ex = expansion(cfg.alpha)
        for M, S in zip(grid, totals):
            k = locate_k(cfg.alpha, M)
            out.row([M, *_interval_cells(S), k, special_count(ex.p[k], ex.q[k], M)])
    finally:
        out.close()
    return 0


def cmd_bounds(cfg: RunConfig) -> int:
    budget = cfg.extras.get("max_seconds")
    grid = _grid_for(cfg)
    reports = ratio_scan(cfg.alpha, grid, cfg.rel_tol, budget=budget)
    header = ["M", "k", "q_k", "a_k1", "S_lo", "S_hi", "lower_ref", "upper_ref",
              "upper_improved_ref", "ratio_lower", "ratio_upper", "ratio_improved",
              "ratio_mlogm", "flags"]
    rows = []
    for r in reports:
        rows.append([
            r.M, r.k, r.q_k, r.a_next, *_interval_cells(r.s_m),
            approx(r.lower_ref.mid), approx(r.upper_ref.mid), approx(r.upper_improved_ref.mid),
            approx(r.ratio_lower.mid), approx(r.ratio_upper.mid), approx(r.ratio_improved.mid),
            "" if r.ratio_mlogm is None else approx(r.ratio_mlogm.mid),
            "|".join(r.flags),
        ])
    approx_cols = header[4:13]
    _write(_table("bounds", header, rows, cfg.fmt, approx_cols), cfg.out)
    return 0


def cmd_experiment(cfg: RunConfig) -> int:
    x = cfg.extras
    kind = x["kind"]
    budget = x.get("max_seconds")
    if kind == "levy":
        res = levy_experiment(cfg.depth, cfg.N, cfg.seed, bits=x.get("bits"), budget=budget)
    elif kind == "khinchin":
        res = khinchin_io_experiment(PhiSpec.parse(x["phi"]), cfg.depth, cfg.N, cfg.seed,
                                     bits=x.get("bits"), budget=budget)
    elif kind == "eventual":
        res = eventual_quotient_experiment(cfg.depth, cfg.N, cfg.seed, bits=x.get("bits"))
    elif kind == "growth":
        if cfg.grid == "q" or not cfg.grid:
            raise InvalidAlpha("growth needs an explicit --grid list")
        res = growth_criterion_experiment(PhiSpec.parse(x["phi"]), cfg.grid, cfg.N, cfg.seed,
                                          rel_tol=cfg.rel_tol, bits=x.get("bits") or 4096,
                                          budget=budget, burn_in=x.get("burn_in"))
    elif kind == "gauss":
        a, b, n = x["a"], x["b"], x["terms"]
        lhs, rhs, gap = gauss_invariance_identity(a, b, n)
        _write(json.dumps({"a": str(a), "b": str(b), "n_terms": n, "lhs": lhs, "rhs": rhs,
                           "gap": gap, "truncation_gap_closed_form": gauss_truncation_gap(a, b, n)},
                          indent=2, sort_keys=True) + "\n", cfg.out)
        return 0
    else:
        lo, hi = khinchin_log_series()
        _write(json.dumps({"ln_khinchin_lo": lo, "ln_khinchin_hi": hi, "width": hi - lo},
                          indent=2, sort_keys=True) + "\n", cfg.out)
        return 0
    _write(res.to_json(), cfg.out)
    if x.get("csv"):
        header, rows = res.sample_rows()
        rows = [["" if v is None else v for v in r] for r in rows]
        _write(_table(f"experiment.{res.name}", header, rows, "csv"), x["csv"])
    return 0


COMMANDS = {"expand": cmd_expand, "sum": cmd_sum, "bounds": cmd_bounds, "experiment": cmd_experiment}


def config_from_args(ns) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand, out=ns.out)
    if ns.subcommand == "experiment":
        cfg.depth, cfg.N, cfg.seed = ns.K, ns.N, ns.seed
        cfg.grid, cfg.rel_tol = ns.grid, ns.rel_tol
        cfg.fmt = "json"
        cfg.extras = {"kind": ns.kind, "phi": ns.phi, "bits": ns.bits, "a": ns.a, "b": ns.b,
                      "terms": ns.terms, "csv": ns.csv, "max_seconds": ns.max_seconds,
                      "burn_in": ns.burn_in}
        if cfg.N < 1 or cfg.depth < 1:
            raise InvalidAlpha("--N and --K must be positive")
        return cfg
    cfg.alpha = _alpha_from_args(ns)
    cfg.fmt = ns.format
    cfg.extras = {"max_seconds": ns.max_seconds}
    if ns.subcommand == "expand":
        cfg.depth = ns.depth
        if cfg.depth is not None and cfg.depth < 0:
            raise InvalidAlpha("--depth must be non-negative")
    else:
        cfg.M, cfg.grid, cfg.rel_tol = ns.M, ns.grid, ns.rel_tol
        if cfg.M is not None and cfg.M < 1:
            raise InvalidAlpha("--M must be >= 1")
        if cfg.rel_tol <= 0:
            raise InvalidAlpha("--rel-tol must be positive")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.subcommand](cfg)
    except MalphaError as exc:
        print(f"malpha: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        print(f"malpha: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
