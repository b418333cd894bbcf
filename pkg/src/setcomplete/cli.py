"""Command-line entry point: ``setcomplete {solve,bench,demo}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import bench
from .barrier import detect_barriers
from .core import (DENSE_FORMATS, OBSERVED_FORMATS, InputError, SolverConfig,
                   load_observed, save_completed)
from .example import CONTOUR_VALUE, U0, example_matrix
from .objective import descent_ray, eval_atomic, eval_f
from .solver import solve

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2
SEED_ENV = "SETCOMPLETE_SEED"


def _g(x):
    return f"{x:.6g}"


def _default_seed():
    try:
        return int(os.environ.get(SEED_ENV, "0"))
    except ValueError:
        return 0


def _load_init(path):
    vals = [float(line) for line in open(path).read().split()]
    v = np.asarray(vals)
    if v.size == 0 or not np.linalg.norm(v) > 0:
        raise InputError(f"{path}: initial vector must be nonzero")
    return v / np.linalg.norm(v)


def _guess_format(path):
    return "csv-triplets" if str(path).lower().endswith(".csv") else "matrix-market-coordinate"


def cmd_solve(args):
    try:
        fmt = args.format or _guess_format(args.input)
        shape = tuple(int(s) for s in args.shape.split(",")) if args.shape else None
        X = load_observed(args.input, fmt, shape=shape)
        init = _load_init(args.init) if args.init else None
        if init is not None and init.size != X.m:
            raise InputError(f"initial vector has length {init.size}, matrix has {X.m} rows")
        config = SolverConfig(eps_e=args.tol, max_outer_iters=args.max_iter,
                              transfer_enabled=not args.no_transfer,
                              rng_seed=args.seed, init_u=init)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    rep = solve(X, config)
    if args.output:
        try:
            save_completed(rep.u, rep.w, args.output, args.output_format)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT

    print(f"matrix:            {X.m} x {X.n}, {X.nnz} observed")
    print(f"success:           {rep.success}")
    print(f"iterations:        {rep.outer_iterations}")
    print(f"transfers:         {rep.transfers_performed}")
    print(f"objective:         {_g(rep.final_objective)}")
    print(f"relative residual: {_g(rep.relative_residual)}")
    if rep.stationary:
        print("stopped at a stationary point")
    return EXIT_OK if rep.success else EXIT_NOCONV


def _parse_rates(text):
    rates = [float(s) for s in text.split(",") if s.strip()]
    if not rates:
        raise ValueError("no sampling rates given")
    for r in rates:
        if not 0.0 < r <= 1.0:
            raise ValueError(f"sampling rate {r} outside (0, 1]")
    return rates


def format_summary(result):
    lines = ["rate      trials  success  rate_ok   iters     transfers  exact_err"]
    for pt in result.points:
        lines.append(
            f"{_g(pt.sampling_rate):<9} {pt.trials:<7} {pt.successes:<8} "
            f"{_g(pt.success_rate):<9} {_g(pt.mean_iters):<9} "
            f"{_g(pt.mean_transfers):<10} {_g(pt.mean_exact_recovery_err)}")
    return "\n".join(lines)


def cmd_bench(args):
    try:
        rates = _parse_rates(args.rates)
        specs = [bench.TrialSpec(args.m, args.n, r, args.trials, seed=args.seed,
                                 transfer_enabled=not args.no_transfer) for r in rates]
        config = SolverConfig(eps_e=args.tol, max_outer_iters=args.max_iter)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    result = bench.run_sweep(specs, config, jobs=args.jobs)
    if args.out:
        bench.emit_csv(result, args.out)
    if args.gnuplot:
        label = "no-transfer" if args.no_transfer else "transfer"
        bench.emit_gnuplot({label: result}, args.gnuplot)
    print(format_summary(result))
    return EXIT_OK


def _demo_arm(X, transfer_enabled, out):
    rep = solve(X, SolverConfig(init_u=U0, transfer_enabled=transfer_enabled),
                record_history=True)
    label = "on" if transfer_enabled else "off"
    out(f"-- transfer {label} --")
    shown = rep.history if len(rep.history) <= 12 else rep.history[:8] + [None] + rep.history[-3:]
    for h in shown:
        if h is None:
            out("  ...")
            continue
        jump = f"  transfer t={_g(h['t_transfer'])} f={_g(h['f_after_transfer'])}" if h["t_transfer"] else ""
        out(f"  iter {h['iteration']:>4}  f={_g(h['f'])}{jump}")
    status = "success" if rep.success else "failure"
    out(f"  {status}: iterations={rep.outer_iterations} transfers={rep.transfers_performed} "
        f"relative residual={_g(rep.relative_residual)}")
    return rep


def cmd_demo(args):
    out = print
    X = example_matrix()
    out("observed 3x2 matrix (? = unobserved):")
    dense = X.to_dense(np.nan)
    for row in dense:
        out("  " + "  ".join("?" if np.isnan(v) else _g(v) for v in row))
    out(f"initial u0 = (-10, 1, 1)/sqrt(102), f(u0) = {_g(eval_f(U0, X))} (= 144/101)")
    probe = np.array([0.0, 1.0, -1.0]) / np.sqrt(2.0)
    out(f"contour probe u = (0, 1, -1)/sqrt(2): f1 = {_g(eval_atomic(probe, X, 0))}"
        f" (every u with u2 = -u3 gives {_g(CONTOUR_VALUE)})")
    for rec in detect_barriers(descent_ray(U0, X), X):
        out(f"barrier at u0: blocking column {rec.blocking_column + 1}, blocked column "
            f"{rec.blocked_column + 1}, t_o={_g(rec.t_o)}, t_p={_g(rec.t_p)}, "
            f"slope at t_o={_g(rec.total_slope_at_t_o)}")
    _demo_arm(X, True, out)
    _demo_arm(X, False, out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="setcomplete",
                                     description="Rank-1 consistent matrix completion.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="complete one observed matrix")
    p.add_argument("input")
    p.add_argument("--format", choices=OBSERVED_FORMATS,
                   help="input format (default: by extension, .csv means triplets)")
    p.add_argument("--shape", help="M,N for CSV triplet input (default: inferred)")
    p.add_argument("--tol", type=float, default=1e-6, help="relative residual target")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--init", help="file with the initial vector, one value per line")
    p.add_argument("--no-transfer", action="store_true")
    p.add_argument("--output", help="write the completed dense matrix here")
    p.add_argument("--output-format", choices=DENSE_FORMATS, default="dense-csv")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="Monte-Carlo success-rate sweep")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--rates", default=",".join(str(r) for r in bench.DEFAULT_RATES))
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--gnuplot", help="optional two-column series output path")
    p.add_argument("--no-transfer", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=2000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo", help="barrier example: transfer on vs off")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
