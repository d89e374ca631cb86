"""Command-line front end: ``regcomp <command> --family SPEC ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional, Sequence

from . import asympt
from . import checks
from . import decrement as dm
from . import samplers as smp
from .arith import fmt, parse_number
from .combinat import Composition, Partition
from .families import (
    GRAMMAR,
    FamilyError,
    build_decrement,
    build_model,
    expand_families,
    parse_family,
    two_param_params,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# above this level the chain sampler builds two-parameter rows on demand
LAZY_FROM = 2000


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- output helpers

def emit(rows: List[dict], args, meta: Optional[dict] = None) -> str:
    """Render rows as CSV, JSON, or an aligned text table."""
    if not rows:
        return ""
    columns = list(rows[0])
    if args.json:
        payload = dict(meta or {})
        payload["rows"] = rows
        return json.dumps(payload, indent=2) + "\n"
    if args.csv:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in columns}
    lines = ["  ".join(c.ljust(widths[c]) for c in columns)]
    lines += ["  ".join(str(r[c]).ljust(widths[c]) for c in columns) for r in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _family(args):
    if not args.family:
        raise UsageError("--family is required")
    return parse_family(args.family)


def _matrix(args, N: int):
    return build_decrement(_family(args), N, args.backend)


# ---------------------------------------------------------------- commands

def cmd_cpf(args) -> int:
    q = _matrix(args, args.n)
    if args.composition:
        c = Composition.parse(args.composition)
        if c.n != args.n:
            raise UsageError(f"composition {c} does not sum to --n {args.n}")
        args.out.write(fmt(dm.cpf(q, c)) + "\n")
        return EXIT_OK
    table = dm.cpf_table(q, args.n)
    rows = [{"composition": str(c), "p": fmt(p)} for c, p in table.entries.items()]
    args.out.write(emit(rows, args, {"family": str(_family(args)), "n": args.n}))
    return EXIT_OK


def cmd_ppf(args) -> int:
    q = _matrix(args, args.n)
    if args.partition:
        lam = Partition.parse(args.partition)
        if lam.n != args.n:
            raise UsageError(f"partition {lam} does not sum to --n {args.n}")
        args.out.write(fmt(dm.ppf(q, lam)) + "\n")
        return EXIT_OK
    table = dm.ppf_table(q, args.n)
    rows = [{"partition": str(p), "p": fmt(v)} for p, v in table.entries.items()]
    args.out.write(emit(rows, args, {"family": str(_family(args)), "n": args.n}))
    return EXIT_OK


def cmd_qmatrix(args) -> int:
    q = _matrix(args, args.n)
    rows = [{"n": n, "m": m, "q": fmt(x)} for n in range(1, q.N + 1) for m, x in enumerate(q.row(n), start=1)]
    args.out.write(emit(rows, args, {"family": str(_family(args))}))
    return EXIT_OK


def cmd_green(args) -> int:
    spec = _family(args)
    q = _matrix(args, args.n)
    rows = []
    phi = None
    if args.compare_closed:
        phi = build_model(spec).phi_sequence(2 * args.n - 1)
        if args.backend == "float":
            phi = [float(x) for x in phi]
    for n in range(1, args.n + 1):
        dp_row = dm.green_dp(q, n)
        printed = dm.green_closed_row(phi, n, "printed") if phi else None
        corrected = dm.green_closed_row(phi, n, "corrected") if phi else None
        for j, g in enumerate(dp_row, start=1):
            row = {"n": n, "j": j, "g": fmt(g)}
            if phi:
                row["g_printed"] = fmt(printed[j - 1])
                row["delta_printed"] = fmt(printed[j - 1] - g)
                row["g_corrected"] = fmt(corrected[j - 1])
            rows.append(row)
    args.out.write(emit(rows, args, {"family": str(spec)}))
    return EXIT_OK


def _sampler(args, n_max: int) -> asympt.SamplerSpec:
    kind = args.sampler
    if kind == "chain":
        family = _family(args)
        tp = two_param_params(family)
        if tp is not None and n_max > LAZY_FROM:
            q = dm.two_param_lazy(*tp, n_max)
        else:
            q = build_decrement(family, n_max, "float")
        return asympt.SamplerSpec("chain", q=q)
    if kind == "crp":
        return asympt.SamplerSpec("crp", (("alpha", _need(args, "alpha")), ("theta", _need(args, "theta"))))
    if kind == "stickbreaking":
        if not args.w:
            raise UsageError("stickbreaking needs --w beta:A,B or --w point:X")
        law, _, rest = args.w.partition(":")
        if law == "beta":
            a, b = (float(parse_number(x)) for x in rest.split(","))
            return asympt.SamplerSpec("stickbreaking", (("a", a), ("b", b)))
        if law == "point":
            return asympt.SamplerSpec("stickbreaking", (("w", float(parse_number(rest))),))
        raise UsageError(f"unknown W law {law!r}")
    if kind == "renewal":
        return asympt.SamplerSpec("renewal", (("alpha", _need(args, "alpha")),))
    if kind == "bernoulli":
        return asympt.SamplerSpec("bernoulli", (("theta", _need(args, "theta")),))
    if kind == "ordered-crp":
        return asympt.SamplerSpec("ordered-crp", (("alpha", _need(args, "alpha")),))
    raise UsageError(f"unknown sampler {kind!r}")


def _need(args, name: str) -> float:
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"sampler {args.sampler} needs --{name}")
    return float(parse_number(value))


def cmd_sample(args) -> int:
    spec = _sampler(args, args.n)
    for i in range(args.reps):
        stream = smp.RngStream(args.seed, i)
        if args.strings and spec.kind in ("renewal", "bernoulli"):
            p = dict(spec.params)
            if spec.kind == "renewal":
                line = smp.sample_renewal_string_alpha(p["alpha"], args.n, stream)
            else:
                line = smp.sample_bernoulli_string_dual_ewens(p["theta"], args.n, stream)
        else:
            comp, _ = spec.draw(args.n, stream)
            line = str(comp)
        args.out.write(line + "\n")
    return EXIT_OK


def _targets(args, spec: asympt.SamplerSpec, n: int, r_max: int) -> dict:
    """Exact expectations where they are cheap: beta structural laws and DP on small chains."""
    ab = None
    p = dict(spec.params)
    if spec.kind in ("crp", "ordered-crp", "renewal"):
        alpha = p["alpha"]
        theta = p.get("theta", alpha if spec.kind == "ordered-crp" else 0.0)
        ab = (1 - alpha, theta + alpha)
    elif spec.kind == "stickbreaking" and "a" in p:
        # a regenerative stick-breaking structure with W ~ beta(1, theta) is Ewens(theta)
        ab = (1.0, p["b"]) if p["a"] == 1 else None
    elif spec.kind == "chain" and two_param_params(parse_family(args.family)) is not None:
        alpha, theta = (float(x) for x in two_param_params(parse_family(args.family)))
        ab = (1 - alpha, theta + alpha)
    elif spec.kind == "bernoulli":
        return {"K": float(asympt.ewens_mean_blocks(p["theta"], n))}
    if ab is not None and min(ab) > 0:
        out = {"K": asympt.expected_Kn_beta(*ab, n)}
        for r in range(1, min(r_max, n) + 1):
            out[f"K_{r}"] = asympt.expected_Knr_beta(*ab, n, r)
        return out
    if spec.kind == "chain" and n <= 5000:
        return {"K": float(asympt.expected_Kn_dp(spec.q, n))}
    return {}


def cmd_blocks(args) -> int:
    ns = [int(x) for x in str(args.n_list).split(",")]
    spec = _sampler(args, max(ns))
    rows = []
    for n in ns:
        summary = asympt.mc_blocks(spec, n, args.reps, args.seed, r_max=args.r_max, workers=args.workers)
        targets = _targets(args, spec, n, args.r_max)
        for name, s in summary.stats.items():
            target = targets.get(name)
            ratio = s.mean / target if target else None
            rows.append({
                "n": n, "stat": name, "estimate": fmt(s.mean), "se": fmt(s.se),
                "lo95": fmt(s.lo95), "hi95": fmt(s.hi95),
                "target": "" if target is None else fmt(target),
                "ratio": "" if ratio is None else fmt(ratio),
            })
    meta = {"seed": args.seed, "reps": args.reps, "sampler": str(spec), "family": args.family}
    args.out.write(emit(rows, args, meta))
    return EXIT_OK


def cmd_check(args) -> int:
    families = expand_families(args.families)
    suites = list(checks.SUITES) if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    unknown = [s for s in suites if s not in checks.SUITES]
    if unknown:
        raise UsageError(f"unknown suite {', '.join(unknown)}; choose from {', '.join(checks.SUITES)}")
    ok = True
    for name in suites:
        result = checks.run_suite(name, families, args.n_max)
        args.out.write(str(result) + "\n")
        ok &= result.passed
    args.out.write("PASS\n" if ok else "FAIL\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_arrange(args) -> int:
    eta = math.inf if args.eta in ("inf", "infinity") else float(parse_number(args.eta))
    stream = smp.RngStream(args.seed)
    ranks = smp.pw_initial_ranks(eta, args.k, stream)
    arrangement = smp.decode_ranks(ranks)
    if args.json:
        args.out.write(json.dumps({"eta": args.eta, "k": args.k, "seed": args.seed,
                                   "ranks": ranks, "arrangement": arrangement}) + "\n")
    else:
        args.out.write(" ".join(map(str, arrangement)) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser

SAMPLERS = ("chain", "crp", "stickbreaking", "renewal", "bernoulli", "ordered-crp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regcomp", description="Regenerative composition structures.",
                                     epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(fn=fn)
        fmt_group = p.add_mutually_exclusive_group()
        fmt_group.add_argument("--csv", action="store_true", help="CSV output")
        fmt_group.add_argument("--json", action="store_true", help="JSON output")
        return p

    def exact_args(p):
        p.add_argument("--family", help="family spec, e.g. ewens:theta=1")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--backend", choices=("exact", "float"), default="exact")

    p = add("cpf", cmd_cpf, "composition probabilities")
    exact_args(p)
    p.add_argument("--composition", help="single composition, e.g. 2,1")

    p = add("ppf", cmd_ppf, "partition probabilities")
    exact_args(p)
    p.add_argument("--partition", help="single partition, e.g. 2,1")

    exact_args(add("qmatrix", cmd_qmatrix, "decrement matrix rows 1..n as n,m,q"))

    p = add("green", cmd_green, "Green matrix g(n,j) by dynamic programming")
    exact_args(p)
    p.add_argument("--compare-closed", action="store_true", help="add the closed-form columns and their gap")

    def sampler_args(p):
        p.add_argument("--sampler", choices=SAMPLERS, default="chain")
        p.add_argument("--family", help="family spec for the chain sampler")
        p.add_argument("--alpha")
        p.add_argument("--theta")
        p.add_argument("--w", help="stick-breaking factor law: beta:A,B or point:X")
        p.add_argument("--reps", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    p = add("sample", cmd_sample, "draw compositions, one per line")
    sampler_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--strings", action="store_true", help="bit strings for renewal/bernoulli samplers")

    p = add("blocks", cmd_blocks, "Monte Carlo block-count summaries")
    sampler_args(p)
    p.add_argument("--n", dest="n_list", required=True, help="comma-separated sizes")
    p.add_argument("--r-max", type=int, default=asympt.R_MAX)
    p.add_argument("--workers", type=int, default=1)

    p = add("check", cmd_check, "run invariant suites")
    p.add_argument("--suite", default="all", help=f"all or a comma list of: {', '.join(checks.SUITES)}")
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--families", default="all", help="all, or specs separated by ';'")

    p = add("arrange", cmd_arrange, "random arrangement from initial ranks")
    p.add_argument("--eta", default="1", help="number, fraction or inf")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.out = out or sys.stdout
    try:
        return args.fn(args)
    except (UsageError, FamilyError) as exc:
        sys.stderr.write(f"error: {exc}\n\n{GRAMMAR}\n")
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError, RuntimeError, OverflowError) as exc:
        sys.stderr.write(f"error in {args.command} ({' '.join(argv or sys.argv[1:])}): {exc}\n")
        return EXIT_FAIL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
