"""``km-sharp`` command-line front end.

Exit status: 0 on success, 1 when a property check or precondition fails,
2 on a usage error.  Every command is deterministic given its flags; wall
times go to stderr so that output files are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import List, Optional

from . import bounds, chain, rates, tightmap
from .errors import DomainError, KMError, ParseError, PreconditionError
from .numeric import NumericMode, format_scalar, to_float
from .schedule import StepSchedule
from .transport import TransportProblem, inside_out, plan_cost, solve_exact, verify_no_crossing

SUITES = ("metric", "monotone", "four_point", "oracle", "cd_gap", "no_crossing", "appendix_b")
DEFAULT_ALPHAS = ("0.3", "0.45", "0.5", "0.7", "0.9")
DEFAULT_LIMIT_N = "100,1000,10000,100000"


class UsageError(KMError):
    pass


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _schedule(args, default: str = "const:0.5") -> StepSchedule:
    if getattr(args, "alpha", None) is not None:
        return StepSchedule.parse(f"const:{args.alpha}")
    return StepSchedule.parse(args.schedule or default)


def _const_alpha(s: StepSchedule):
    if not s.constant:
        raise UsageError("this command needs a constant schedule (const:ALPHA or --alpha)")
    return s.steps[0]


def _mode(args, default: str) -> NumericMode:
    return NumericMode.parse(args.mode or default)


def _state(text: str):
    try:
        m, n = (int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--state expects m,n, got {text!r}") from None
    if not 0 <= m < n:
        raise UsageError(f"--state needs 0 <= m < n, got {text!r}")
    return m, n


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _grid(text: str) -> List[float]:
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"--alpha-grid expects a:b:step, got {text!r}") from None
    return rates.alpha_grid(a, b, step)


# ---------------------------------------------------------------- commands

def cmd_table(args) -> int:
    s = _schedule(args)
    mode = _mode(args, "float")
    if args.which == "c":
        t = bounds.build_c_table(s, args.n, mode)
    else:
        t = bounds.build_d_table(s, args.n, args.method, mode)
    if args.format == "json":
        text = json.dumps({"kind": t.kind, "schedule": s.literal(), "N": t.N, "mode": mode.value,
                           "method": t.method,
                           "cells": [[m, n, format_scalar(v)] for m, n, v in t.cells()]}, indent=2) + "\n"
    else:
        text = bounds.table_to_csv(t)
    _emit(text, args.output)
    _log(f"table kind={t.kind} N={t.N} mode={mode.value} method={t.method} wall={t.seconds:.3f}s")
    return 0


def cmd_rates(args) -> int:
    s = _schedule(args)
    alpha = _const_alpha(s)
    start = time.perf_counter()
    pts = rates.rate_points(alpha, args.n)
    method = "closed_form" if alpha >= Fraction(1, 2) else "inside_out"
    if args.format == "json":
        text = json.dumps([p.__dict__ for p in pts], indent=2) + "\n"
    else:
        text = rates.rates_to_csv(pts, f"schedule={s.literal()} N={args.n} mode=float method={method}")
    _emit(text, args.output)
    _log(f"rates N={args.n} wall={time.perf_counter() - start:.3f}s")
    return 0


def cmd_gamma(args) -> int:
    if args.alpha is not None:
        grid = [float(args.alpha)]
    else:
        grid = _grid(args.alpha_grid)
    start = time.perf_counter()
    res = rates.gamma_sweep(grid, args.nmax, args.threads)
    if args.format == "json":
        text = json.dumps([r.__dict__ for r in res], indent=2) + "\n"
    else:
        text = rates.gamma_to_csv(res, f"nmax={args.nmax} points={len(grid)} mode=float")
    _emit(text, args.output)
    _log(f"gamma points={len(grid)} nmax={args.nmax} wall={time.perf_counter() - start:.3f}s")
    return 0


def _oracle_report(s, d, N, mode) -> bounds.PropertyReport:
    rep = bounds.PropertyReport("oracle", N)
    tol = 0 if mode is NumericMode.EXACT else 1e-12
    for n in range(N + 1):
        for m in range(n + 1):
            p = TransportProblem.build(s, d, m, n, mode)
            z = inside_out(p)
            lp, _ = solve_exact(p)
            gap = abs(plan_cost(z, d) - plan_cost(lp, d))
            rep.checked += 1
            if gap > tol:
                rep.violations.append(("cost", m, n))
                rep.worst_violation = max(rep.worst_violation, gap)
            if not verify_no_crossing(z):
                rep.violations.append(("crossing", m, n))
    return rep


def _no_crossing_report(s, d, N, mode) -> bounds.PropertyReport:
    rep = bounds.PropertyReport("no_crossing", N)
    for n in range(1, N + 1):
        for m in range(n):
            p = TransportProblem.build(s, d, m, n, mode)
            z = inside_out(p)
            rep.checked += 1
            if not z.is_simple(p):
                rep.violations.append(("not_simple", m, n))
            if not verify_no_crossing(z):
                rep.violations.append(("crossing", m, n))
    return rep


def _appendix_b_report(alpha, N) -> bounds.PropertyReport:
    rep = bounds.PropertyReport("appendix_b", N)
    bound = 4 * (1 - alpha) ** 2
    for n in range(1, N + 1):
        for m in range(n):
            _, g = chain.plan_difference_row(m, n, alpha)
            _, g_direct = chain.plan_difference_direct(m, n, alpha)
            rep.checked += 1
            if g != g_direct if isinstance(alpha, Fraction) else abs(g - g_direct) > 1e-12:
                rep.violations.append(("formula", m, n))
            if g > bound:
                rep.violations.append(("above_bound", m, n))
                rep.worst_violation = max(rep.worst_violation, g - bound)
    return rep


def _run_suite(name, s, d, mode, N):
    alpha = s.steps[0] if s.constant else None
    half = alpha is not None and Fraction(1, 2) <= alpha < 1
    if name == "metric":
        return bounds.check_metric(d)
    if name == "monotone":
        return bounds.check_monotone(d)
    if name == "four_point":
        return bounds.check_four_point(d)
    if name == "oracle":
        return _oracle_report(s, d, N, mode)
    if name == "no_crossing":
        return _no_crossing_report(s, d, N, mode)
    if name == "cd_gap":
        if not half:
            return "needs a constant step 1/2 <= alpha < 1"
        c = bounds.build_c_table(s, N, mode)
        return bounds.check_cd_gap(d, c, mode.convert(alpha))
    if name == "appendix_b":
        if not half:
            return "needs a constant step 1/2 <= alpha < 1"
        return _appendix_b_report(mode.convert(alpha), N)
    raise UsageError(f"unknown suite {name!r}")


def cmd_verify(args) -> int:
    suites = [t.strip() for t in args.suite.split(",") if t.strip()]
    unknown = [t for t in suites if t not in SUITES]
    if unknown or not suites:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {','.join(SUITES)}")
    mode = _mode(args, "exact")
    runs = []
    if args.table:
        d = bounds.read_table_csv(args.table)
        if d.schedule is None and set(suites) - {"metric", "monotone", "four_point"}:
            raise UsageError("the table file carries no schedule; only table suites can run")
        runs.append((d.schedule, d, d.mode, d.N))
    else:
        if args.schedule or args.alpha is not None:
            schedules = [_schedule(args)]
        else:
            schedules = [StepSchedule.const(Fraction(a)) for a in DEFAULT_ALPHAS]
        for s in schedules:
            runs.append((s, None, mode, args.n))
    results, ok = [], True
    start = time.perf_counter()
    for s, d, md, N in runs:
        if d is None:
            d = bounds.build_d_table(s, N, "inside_out", md)
        lit = s.literal() if s is not None else "unknown"
        for name in suites:
            rep = _run_suite(name, s, d, md, N)
            if isinstance(rep, str):
                results.append({"suite": name, "schedule": lit, "skipped": rep})
                continue
            ok &= rep.passed
            results.append({"suite": name, "schedule": lit, "mode": md.value, **rep.as_dict()})
    if args.format == "csv":
        lines = ["suite,schedule,status,checked,violation_count,worst_violation"]
        for r in results:
            status = "skipped" if "skipped" in r else ("pass" if r["passed"] else "fail")
            lines.append(f"{r['suite']},{r['schedule']},{status},{r.get('checked', 0)},"
                         f"{r.get('violation_count', 0)},{r.get('worst_violation', 0)}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"passed": ok, "results": results}, indent=2) + "\n"
    _emit(text, args.output)
    _log(f"verify suites={','.join(suites)} runs={len(runs)} passed={ok} "
         f"wall={time.perf_counter() - start:.3f}s")
    return 0 if ok else 1


def cmd_tightmap(args) -> int:
    s = _schedule(args)
    mode = _mode(args, "exact")
    start = time.perf_counter()
    d = bounds.build_d_table(s, args.n, "inside_out", mode)
    orbit, rep = tightmap.tight_orbit(s, d)
    out = {"schedule": s.literal(), "mode": mode.value, **rep.as_dict(),
           "max_deviation": float(to_float(rep.worst_violation))}
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    if args.output:
        _emit(orbit.to_csv(), args.output)
    _log(f"tightmap N={args.n} pairs={len(orbit.pairs)} passed={rep.passed} "
         f"wall={time.perf_counter() - start:.3f}s")
    return 0 if rep.passed else 1


def cmd_simulate(args) -> int:
    s = _schedule(args)
    mode = _mode(args, "exact")
    m, n = _state(args.state)
    start = time.perf_counter()
    d = bounds.build_d_table(s, n, "inside_out", mode)
    rep = chain.simulation_report(args.kind, m, n, s, d, args.samples, args.seed)
    _emit(rep.to_json() + "\n", args.output)
    _log(f"simulate state=({m},{n}) samples={args.samples} wall={time.perf_counter() - start:.3f}s")
    return 0


def cmd_limit(args) -> int:
    try:
        ns = [int(t) for t in args.n.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--n expects a comma list of integers, got {args.n!r}") from None
    diags = rates.limit_diagnostics(ns)
    if args.format == "json":
        text = json.dumps([{**t.__dict__, "distance_to_limit": t.distance_to_limit} for t in diags],
                          indent=2) + "\n"
    else:
        text = rates.limit_to_csv(diags, f"limit={rates.INV_SQRT_PI!r} theta=1-ln(n)/n")
    _emit(text, args.output)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="km-sharp",
                                     description="Sharp recursive bounds for Krasnosel'skii-Mann iterations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default=None, n_type=_nonneg_int, fmt="csv"):
        p.add_argument("--schedule", help="const:ALPHA or list:A1,A2,... (default const:0.5)")
        p.add_argument("--alpha", help="shorthand for --schedule const:ALPHA")
        p.add_argument("--mode", choices=("exact", "float"))
        p.add_argument("--n", type=n_type, default=n_default, help="horizon N")
        p.add_argument("-o", "--output", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        p.add_argument("--threads", type=_positive_int, default=1, help="worker cap")

    p = sub.add_parser("table", help="build a d or c table")
    common(p, 30)
    p.add_argument("--which", choices=("d", "c"), default="d")
    p.add_argument("--method", choices=bounds.METHODS, default="inside_out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("rates", help="kappa_n and kappa~_n for n = 1..N")
    common(p, 300, _positive_int)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("gamma", help="gamma(alpha) on one alpha or a grid")
    common(p)
    p.add_argument("--alpha-grid", default="0.01:0.99:0.01", help="a:b:step (inclusive)")
    p.add_argument("--nmax", type=_positive_int, default=512)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("verify", help="run property suites")
    common(p, 12, fmt="json")
    p.add_argument("--suite", default=",".join(SUITES), help=f"comma list from {','.join(SUITES)}")
    p.add_argument("--table", help="check a table CSV instead of building one")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tightmap", help="build the extremal orbit and check its isometry identities")
    common(p, 15, _positive_int, fmt="json")
    p.set_defaults(func=cmd_tightmap)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of a fox-and-hare absorption probability")
    common(p, fmt="json")
    p.add_argument("--state", required=True, help="m,n with m < n")
    p.add_argument("--kind", choices=("C", "D"), default="D")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limit", help="kappa~_n(theta_n) against 1/sqrt(pi)")
    p.add_argument("--n", default=DEFAULT_LIMIT_N, help="comma list of n >= 2")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_limit)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"km-sharp: error: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, KMError) as exc:
        print(f"km-sharp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
