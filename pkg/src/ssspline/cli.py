"""Command-line interface: ``ssspline {constants,select,mn-curve,interp,experiment}``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical failure.
Magnitudes too large or small for a double can be passed as ``exp(L)`` on the
command line and as ``{"log": L}`` in JSON.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys

import numpy as np

from .errors import DomainError, NumericalError, ValidationError
from .harness import reports_to_csv, reports_to_json, run_experiment_config
from .interp import (DEFAULT_TOL_RESIDUAL, Interpolant, ScatteredData,
                     build_interpolant, eval_interpolant)
from .logscalar import LogScalar
from .select import (SelectionProblem, compute_c1, derived_constants,
                     log_mn_at_log_c, oracle_minimize_mn, select_c)
from .theory import KernelParams, delta0_case, theory_context

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
_EXP_RE = re.compile(r"^\s*exp\(\s*([-+0-9.eE]+)\s*\)\s*$")

logger = logging.getLogger("ssspline")


class UsageError(Exception):
    pass


def parse_magnitude(text: str) -> LogScalar:
    """``"0.01"`` or ``"exp(-5000)"`` -> LogScalar."""
    m = _EXP_RE.match(text)
    try:
        if m:
            return LogScalar.from_log(float(m.group(1)))
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or exp(L): {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return LogScalar.from_value(value)


def _read_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _problem_from_args(args) -> SelectionProblem:
    if args.problem:
        if any(v is not None for v in (args.n, args.lam, args.sigma, args.d, args.b0)):
            raise UsageError("give either a problem file or --n/--lambda/--sigma/--d flags, not both")
        return SelectionProblem.from_json(_read_json(args.problem))
    missing = [f for f, v in (("--n", args.n), ("--lambda", args.lam),
                              ("--sigma", args.sigma), ("--d", args.d)) if v is None]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or pass a problem JSON file)")
    if args.b0 is None and not args.dilation_invariant:
        raise UsageError("choose --b0 B0 or --dilation-invariant")
    return SelectionProblem.create(args.n, args.lam, args.sigma, args.d, args.b0)


# --- subcommands ----------------------------------------------------------

def cmd_constants(args):
    ctx = theory_context(args.n, args.lam)
    if args.json:
        _emit(json.dumps(ctx.to_json(), indent=2) + "\n", args.out)
        return EXIT_OK
    rows = [
        ("n", ctx.n), ("lambda", ctx.lam), ("m", ctx.m),
        ("gamma_n", ctx.gamma_n),
        ("rho", f"{ctx.rho:.15g}"),
        ("Delta0", f"{ctx.delta0}  (case {delta0_case(ctx.n, ctx.lam)})"),
        ("l(lambda,n)", ctx.l_const),
        ("C0(m,n)", ctx.c0_const),
        ("alpha_n", f"{ctx.alpha_n:.15g}"),
        ("exp(2 n gamma_n)", LogScalar(2.0 * ctx.n * ctx.gamma_n)),
    ]
    width = max(len(k) for k, _ in rows)
    _emit("".join(f"{k:<{width}}  {v}\n" for k, v in rows), args.out)
    return EXIT_OK


def cmd_select(args):
    problem = _problem_from_args(args)
    rec = select_c(problem)
    doc = {"problem": problem.to_json(), "recommendation": rec.to_json()}
    if args.oracle:
        consts = rec.constants
        hi = consts.c1 if consts.c1 is not None else consts.c0
        c_max = args.oracle_c_max or hi * 1e3
        c_star, v_star = oracle_minimize_mn(problem, c_max, args.grid)
        doc["oracle"] = {"c": c_star.to_json(), "log_mn": v_star, "c_max": c_max.to_json(),
                         "grid_points": args.grid}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_mn_curve(args):
    problem = _problem_from_args(args)
    consts = derived_constants(problem)
    c_min = args.c_min or consts.c0
    if args.c_max is not None:
        c_max = args.c_max
    else:
        c_max = (consts.c1 if consts.c1 is not None else consts.c0) * 10.0
    if c_min.log_value < consts.c0.log_value - 1e-12 * max(1.0, abs(consts.c0.log_value)):
        raise ValidationError(f"c_min = {c_min} is below the theoretical floor c0 = {consts.c0}")
    if not c_min < c_max:
        raise ValidationError("need c_min < c_max")
    if args.points < 2:
        raise ValidationError("need at least 2 points")
    log_c = np.linspace(c_min.log_value, c_max.log_value, args.points)
    vals = log_mn_at_log_c(problem, log_c, check_floor=False, consts=consts)
    if problem.b0 is None:
        branch = ["dilation"] * len(log_c)
    else:
        log_c1 = compute_c1(problem.ctx, problem.b0).log_value
        branch = ["below-c1" if lc < log_c1 else "above-c1" for lc in log_c]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c_log", "log_mn", "branch"])
    for lc, v, b in zip(log_c, vals, branch):
        w.writerow([repr(float(lc)), repr(float(v)), b])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_interp(args):
    data = ScatteredData.from_json(_read_json(args.data))
    params = KernelParams(data.n, args.lam, args.c)
    s = build_interpolant(data, params, tol_residual=args.tol_residual)
    text = json.dumps(s.to_json()) + "\n"
    if args.out or not args.probe:
        _emit(text, args.out)
    if args.probe:
        doc = _read_json(args.probe)
        pts = doc["points"] if isinstance(doc, dict) else doc
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = eval_interpolant(s, pts)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(data.n)] + ["value"])
        for x, v in zip(pts, np.atleast_1d(vals)):
            w.writerow([repr(float(t)) for t in x] + [repr(float(v))])
        _emit(buf.getvalue(), args.probe_out)
    return EXIT_OK


def cmd_experiment(args):
    config = _read_json(args.config)
    if not isinstance(config, dict):
        raise ValidationError("experiment config must be a JSON object")
    reports = run_experiment_config(config, seed=args.seed)
    text = reports_to_json(reports) + "\n" if args.format == "json" else reports_to_csv(reports)
    _emit(text, args.out)
    return EXIT_OK


# --- argument parsing -----------------------------------------------------

def _add_problem_flags(p):
    p.add_argument("problem", nargs="?", help="selection problem JSON file ('-' for stdin)")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--d", type=parse_magnitude, help="fill distance, number or exp(L)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--b0", type=parse_magnitude, help="fixed cube side, number or exp(L)")
    mode.add_argument("--dilation-invariant", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssspline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print gamma_n, rho, Delta0, l, C0, alpha_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("select", help="choose the shape parameter c")
    _add_problem_flags(p)
    p.add_argument("--oracle", action="store_true", help="also run the grid-search oracle")
    p.add_argument("--oracle-c-max", type=parse_magnitude)
    p.add_argument("--grid", type=int, default=4001, help="oracle grid points")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("mn-curve", help="sample log MN(c) to CSV")
    _add_problem_flags(p)
    p.add_argument("--c-min", type=parse_magnitude)
    p.add_argument("--c-max", type=parse_magnitude)
    p.add_argument("--points", "--grid", dest="points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mn_curve)

    p = sub.add_parser("interp", help="build an interpolant from scattered data")
    p.add_argument("data", help='JSON {"n", "points", "values"}')
    p.add_argument("--lambda", dest="lam", type=int, default=2)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--tol-residual", type=float, default=DEFAULT_TOL_RESIDUAL)
    p.add_argument("--probe", help='JSON {"points": [...]} to evaluate')
    p.add_argument("--probe-out")
    p.add_argument("--out", help="interpolant JSON path")
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("experiment", help="bound-vs-error experiment over (c, grid) jobs")
    p.add_argument("config")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--seed", type=int, default=0, help="seed for random_centers jobs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SSSPLINE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValidationError, DomainError) as exc:
        print(f"ssspline: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        stage = f" [stage: {exc.stage}]" if exc.stage else ""
        print(f"ssspline: numerical failure{stage}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KeyError, TypeError) as exc:
        print(f"ssspline: error: malformed input ({exc})", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
