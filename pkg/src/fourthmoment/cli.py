"""Command-line front end: ``python -m fourthmoment <subcommand> ...``.

Every subcommand writes CSV preceded by ``#`` comment lines recording the
invocation, the theta value in use and the library version. Exit codes are
0 on success, 1 for usage errors and 2 when a computation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import amplifier, cache, exponents, lfun, moments, sieve, tracesums
from .modsym import EigenSeparationError
from .pipeline import default_n_max, weighted_eigensystem

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class Report:
    """CSV rows plus a comment header, written at the end of a command."""

    def __init__(self, argv, theta: Fraction | None = None):
        self.comments = [f"fourthmoment {__version__}",
                         "invocation: fourthmoment " + " ".join(argv)]
        if theta is not None:
            self.comments.append(f"theta: {theta}")
        self.header: list[str] | None = None
        self.rows: list = []  # lists are CSV rows, strings are in-place comments
        self.trailer: list[str] = []

    def comment(self, text: str) -> None:
        self.trailer.append(text)

    def render(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        writer = csv.writer(buf, lineterminator="\n")
        if self.header:
            writer.writerow(self.header)
        for row in self.rows:
            if isinstance(row, str):
                buf.write(f"# {row}\n")
            else:
                writer.writerow([_cell(v) for v in row])
        for c in self.trailer:
            buf.write(f"# {c}\n")
        return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def _theta_arg(spec: str | None) -> exponents.ThetaValue:
    try:
        return exponents.parse_theta_spec(spec or "kim-sarnak")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _levels(values) -> list[int]:
    out = []
    for v in values:
        for part in str(v).split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    return out


def _single_level(args) -> int:
    levels = _levels(args.level)
    if len(levels) != 1:
        raise UsageError("exactly one level expected")
    return levels[0]


def _eigensystem(q: int, args, n_max: int | None = None):
    """Load from the cache or compute and store."""
    from .arith import is_prime

    if not is_prime(q):
        raise UsageError(f"level must be prime (got {q})")
    n_max = n_max or args.nmax or default_n_max(q)
    cdir = Path(args.cache_dir)
    es = cache.load(cdir, q, n_max)
    if es is None:
        es = weighted_eigensystem(q, n_max, rng_seed=args.seed or 0)
        cache.save(es, cdir)
        es = cache.load(cdir, q, n_max)
    return es


# -------------------------------------------------------------------- commands


def cmd_eigen(args, rep: Report) -> int:
    q = _single_level(args)
    es = _eigensystem(q, args)
    rep.header = ["q", "g", "n_max", "form", "eps", "weight", "lambda_2"]
    for f in range(es.num_forms):
        rep.rows.append([q, es.num_forms, es.n_max, f, int(es.eps[f]),
                         float(es.weights[f]), float(es.lam[f, 2])])
    rep.comment(f"cache: {cache.cache_path(args.cache_dir, q)}")
    return EXIT_OK


def cmd_lvalue(args, rep: Report) -> int:
    q = _single_level(args)
    es = _eigensystem(q, args)
    rep.header = ["q", "form", "eps", "central_value"]
    for f in range(es.num_forms):
        cv = lfun.central_value(es, f)
        rep.rows.append([q, f, cv.epsilon, cv.value])
    return EXIT_OK


def cmd_moment(args, rep: Report) -> int:
    levels = _levels(args.level)
    if not levels:
        raise UsageError("no levels given")
    main = None
    if args.main_term:
        if args.main_term not in moments.MAIN_TERM_PRESETS:
            raise UsageError(f"unknown main term {args.main_term!r}")
        main = moments.MAIN_TERM_PRESETS[args.main_term]
    rows = moments.moment_sweep(levels, args.twist, main,
                                loader=lambda q: _eigensystem(q, args))
    rep.header = ["q", "g", "M_harmonic", "M_natural"] + (["residual"] if main else [])
    failures = 0
    for r in rows:
        if r.error:
            failures += 1
            rep.rows.append(f"q={r.q} error: {r.error}")
            continue
        row = [r.q, r.g, r.harmonic_value, r.natural_value]
        if main:
            row.append(r.residual)
        rep.rows.append(row)
    return EXIT_FAILURE if failures == len(rows) else EXIT_OK


def cmd_amplify(args, rep: Report) -> int:
    q = _single_level(args)
    L = args.length
    if L is None or L < 4:
        raise UsageError("--length must be at least 4")
    es = _eigensystem(q, args, n_max=max(args.nmax or 0, default_n_max(q), int(L)))
    rep.header = ["q", "L", "form", "Lambda", "norm2_sq", "norm1", "normalized_count"]
    norm = amplifier.prime_count_normalized(L, q)
    for f in range(es.num_forms):
        coeffs = amplifier.build_amplifier(es, f, L)
        lam = amplifier.amplified_value(es, f, coeffs)
        rep.rows.append([q, L, f, lam, coeffs.norm2_sq(), coeffs.norm1(), norm])
    return EXIT_OK


def cmd_exponents(args, rep: Report) -> int:
    theta = _theta_arg(args.theta)
    rep.comments.append(f"theta: {theta.value} ({theta.provenance})")
    rep.header = ["name", "exact", "decimal"]
    try:
        table = exponents.exponent_table(theta)
    except ArithmeticError as exc:
        rep.comment(f"identity check failed: {exc}")
        return EXIT_FAILURE
    for name, val in table:
        rep.rows.append([name, str(val), f"{float(val):.10g}"])
    rep.comment("discrepancy report (name, stated, derived, match)")
    for d in exponents.discrepancy_report(theta):
        rep.comment(f"{d.name}, {d.stated}, {d.derived}, {'yes' if d.matches else 'NO'}"
                    + (f" [{d.note}]" if d.note else ""))
    return EXIT_OK


def cmd_sieve_bench(args, rep: Report) -> int:
    theta = _theta_arg(args.theta)
    if args.trials < 1 or args.size < 1:
        raise UsageError("--trials and --size must be positive")
    seed = 42 if args.seed is None else args.seed
    stats = sieve.ratio_experiment(args.trials, args.size, seed, theta.value)
    rep.header = ["trial", "r", "s", "d", "sign", "ratio"]
    for i, (ratio, (r, s, d, sign)) in enumerate(zip(stats.ratios, stats.instances)):
        rep.rows.append([i, r, s, d, sign, ratio])
    rep.comment(f"max ratio {stats.max!r}, mean {stats.mean!r}")
    return EXIT_OK


def cmd_lemma1(args, rep: Report) -> int:
    q = _single_level(args)
    theta = _theta_arg(args.theta)
    M, N, C, l = args.M, args.N, args.C, args.twist
    if C <= math.sqrt(l * M * N):
        raise UsageError(f"the Kloosterman-Bessel bound requires C > sqrt(l M N) = {math.sqrt(l * M * N):.6g}")
    res = tracesums.lemma1_ratio(q, l, M, N, C, c_max=args.cmax, theta=float(theta.value))
    rep.header = ["q", "l", "M", "N", "C", "lhs", "rhs", "ratio", "c_max", "tail_estimate"]
    rep.rows.append([q, l, M, N, C, res.lhs, res.rhs, res.ratio, res.c_max, res.tail_estimate])
    return EXIT_OK


def cmd_petersson_check(args, rep: Report) -> int:
    q = _single_level(args)
    es = _eigensystem(q, args)
    out = tracesums.trace_formula_check(es, m_max=args.mmax, c_max=args.cmax)
    rep.header = ["q", "m", "n", "error", "tail_rms"]
    for (m, n), err, rms in zip(out["pairs"], out["errors"], out["tail_rms"]):
        rep.rows.append([q, m, n, float(err), float(rms)])
    rep.comment(f"max error {out['max_error']!r} at c_max {out['c_max']}")
    return EXIT_OK


COMMANDS = {
    "eigen": cmd_eigen,
    "lvalue": cmd_lvalue,
    "moment": cmd_moment,
    "amplify": cmd_amplify,
    "exponents": cmd_exponents,
    "sieve-bench": cmd_sieve_bench,
    "lemma1": cmd_lemma1,
    "petersson-check": cmd_petersson_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--level", "-q", action="append", default=[],
                        help="prime level; moment also takes lists like 11,13 or 11-101")
    common.add_argument("--twist", "-l", type=int, default=1)
    common.add_argument("--length", "-L", type=float, default=None)
    common.add_argument("--nmax", type=int, default=None)
    common.add_argument("--theta", default=None,
                        help="kim-sarnak (default), selberg-conj, or an exact lambda_1 such as 3/16")
    common.add_argument("--seed", type=int, default=None,
                        help="eigenvector splitting seed (default 0) or sieve-bench seed (default 42)")
    common.add_argument("--cache-dir", default=None,
                        help=f"defaults to ${cache.ENV_CACHE_DIR} or ~/.cache/fourthmoment")
    common.add_argument("--out", default=None, help="write CSV here instead of stdout")

    parser = _Parser(prog="fourthmoment", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "moment":
            sp.add_argument("--main-term", default=None, choices=sorted(moments.MAIN_TERM_PRESETS))
        if name == "sieve-bench":
            sp.add_argument("--trials", type=int, default=20)
            sp.add_argument("--size", type=float, default=64)
        if name == "lemma1":
            sp.add_argument("-M", type=float, required=True)
            sp.add_argument("-N", type=float, required=True)
            sp.add_argument("-C", type=float, required=True)
            sp.add_argument("--cmax", type=int, default=200_000)
        if name == "petersson-check":
            sp.add_argument("--mmax", type=int, default=20)
            sp.add_argument("--cmax", type=int, default=200_000)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.cache_dir is None:
            args.cache_dir = str(cache.default_cache_dir())
        theta = None if args.command == "exponents" else _theta_arg(args.theta).value
        rep = Report(argv, theta)
        code = COMMANDS[args.command](args, rep)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EigenSeparationError as exc:
        print(f"computation failed: {exc}; retry with a different --seed or higher "
              "precision (more splitting primes)", file=sys.stderr)
        return EXIT_FAILURE
    except (ArithmeticError, RuntimeError, ValueError, cache.CacheFormatError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    text = rep.render()
    if args.out:
        cache.atomic_write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return code
