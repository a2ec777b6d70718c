"""``timesched`` command line.

Subcommands: ``generate``, ``lp``, ``round``, ``exact``, ``experiment``,
``validate``. ``lp``, ``round`` and ``exact`` read an instance file when one
is given and otherwise generate one from the generator flags and ``--seed``.
Errors print ``error: ...`` to stderr and exit with status 1; bad flags exit
with status 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact import DEFAULT_CAP, exact
from .harness import ALGORITHMS, ExperimentConfig, default_algorithm, report_csv, run_algorithm, \
    run_experiment
from .instance import GeneratorConfig, Model, generate, objective, validate_instance, validate_schedule
from .lp.program import LPError, SolverConfig
from .lp.relaxations import FracIdentical, FracRelated, FracRelatedWC, solve_relaxation
from .textio import ParseError, format_rational, read_instance, read_schedule, write_instance, write_schedule
from .unrelated import TRIAL_LOG_HEADER, schedule_unrelated_independent, schedule_unrelated_wc


def _pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return lo, hi


def _add_generator_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    g = p.add_argument_group("instance generator")
    g.add_argument("--model", choices=[m.value for m in Model], required=required)
    g.add_argument("--n", type=int, default=5, help="number of jobs")
    g.add_argument("--m", type=int, default=2, help="number of machines")
    g.add_argument("--sizes", type=_pair, default=(1, 3), metavar="LO,HI")
    g.add_argument("--weights", type=_pair, default=(1, 5), metavar="LO,HI")
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--layers", type=int, default=None)
    g.add_argument("--speeds", type=_pair, default=(1, 8), metavar="LO,HI")
    g.add_argument("--sparsity", type=float, default=1.0)


def _generator(args) -> GeneratorConfig:
    return GeneratorConfig(Model(args.model), args.n, args.m, args.sizes, args.weights, args.density, args.layers,
                           args.speeds, args.sparsity)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_instance(args):
    if args.instance:
        with open(args.instance, encoding="utf-8") as fh:
            inst = read_instance(fh.read())
    else:
        if not args.model:
            raise ValueError("give an instance file or --model to generate one")
        inst = generate(_generator(args), args.seed)
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    return inst


def cmd_generate(args) -> int:
    cfg = _generator(args)
    if args.count == 1:
        _emit(write_instance(generate(cfg, args.seed)), args.out)
        return 0
    if not args.out:
        raise ValueError("--count above 1 needs --out DIRECTORY")
    os.makedirs(args.out, exist_ok=True)
    width = len(str(args.count - 1))
    for k in range(args.count):
        with open(os.path.join(args.out, f"instance_{k:0{width}d}.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(write_instance(generate(cfg, args.seed + k)))
    return 0


def _solution_lines(frac) -> list[str]:
    out = []
    if isinstance(frac, FracIdentical):
        for j, t in zip(*np.nonzero(np.abs(frac.x) > 1e-12)):
            out.append(f"x {j} {t} {frac.x[j, t]:.12g}")
    elif isinstance(frac, FracRelated):
        for i, j in zip(*np.nonzero(np.abs(frac.x) > 1e-12)):
            out.append(f"x {i} {j} {frac.x[i, j]:.12g}")
        out.append(f"D {frac.D:.12g}")
    elif isinstance(frac, FracRelatedWC):
        for i, j, u in zip(*np.nonzero(np.abs(frac.x) > 1e-12)):
            out.append(f"x {i} {j} {format_rational(frac.deadlines[u])} {frac.x[i, j, u]:.12g}")
    else:
        for i, j, s in zip(*np.nonzero(np.abs(frac.x) > 1e-12)):
            out.append(f"x {i} {j} {s} {frac.x[i, j, s]:.12g}")
    out += [f"C {j} {c:.12g}" for j, c in enumerate(frac.C)]
    return out


def cmd_lp(args) -> int:
    inst = _load_instance(args)
    frac = solve_relaxation(inst, SolverConfig(feas_tol=args.feas_tol), objective=args.objective)
    lines = [f"lp_value {frac.lp_value:.12g}"]
    if args.solution:
        lines += _solution_lines(frac)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_round(args) -> int:
    inst = _load_instance(args)
    alg = args.alg or default_algorithm(inst.model, all(j.size == 1 for j in inst.jobs)
                                        if inst.model is Model.IDENTICAL else False)
    if alg in ("unrelated-dep", "unrelated-indep"):
        fn = schedule_unrelated_wc if alg == "unrelated-dep" else schedule_unrelated_independent
        r = fn(inst, seed=args.seed, trials=args.trials)
        sched, costs, best, lp = r.schedule, r.costs, r.cost, r.lp_value
        if args.log:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(TRIAL_LOG_HEADER)
            w.writerows(s.row() for s in r.log)
            _emit(buf.getvalue(), args.log)
    else:
        out = run_algorithm(inst, alg, args.seed, args.trials)
        sched, costs, best, lp = out.schedule, out.costs, out.best, out.lp_value
    mean = np.mean([float(c) for c in costs])
    head = [f"algorithm {alg}", f"lp_value {lp:.12g}", f"best_cost {format_rational(best)}",
            f"mean_cost {mean:.12g}"]
    _emit("\n".join(head) + "\n" + write_schedule(sched), args.out)
    return 0


def cmd_exact(args) -> int:
    inst = _load_instance(args)
    res = exact(inst, args.objective, args.cap)
    v = Fraction(res.opt_value)
    text = f"opt_value {format_rational(v) if v.denominator != 1 else v.numerator}\n"
    _emit(text + f"nodes {res.nodes_explored}\n" + write_schedule(res.witness), args.out)
    return 0


def cmd_experiment(args) -> int:
    gen = _generator(args)
    cfg = ExperimentConfig(Model(args.model), args.n, args.m, args.instances, args.trials, args.seed, args.alg,
                           args.exact, args.cap, gen, args.record_time)
    _emit(report_csv(run_experiment(cfg, args.workers)), args.out)
    return 0


def cmd_validate(args) -> int:
    with open(args.instance, encoding="utf-8") as fh:
        inst = read_instance(fh.read())
    problems = validate_instance(inst)
    if not problems:
        with open(args.schedule, encoding="utf-8") as fh:
            text = fh.read()
        lines = text.splitlines(keepends=True)
        first = next((k for k, ln in enumerate(lines) if ln.startswith("schedule ")), 0)
        sched = read_schedule("".join(lines[first:]))
        problems = validate_schedule(inst, sched)
    if problems:
        for p in problems:
            print(p)
        return 1
    print(f"ok objective {format_rational(objective(inst, sched))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timesched", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write random instance files")
    _add_generator_flags(p, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", help="file (count 1) or directory")
    p.set_defaults(func=cmd_generate)

    def with_instance(p):
        p.add_argument("instance", nargs="?", help="instance file; omit to generate from flags")
        _add_generator_flags(p)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("lp", help="solve the LP relaxation")
    with_instance(p)
    p.add_argument("--objective", choices=("default", "wc"), default="default",
                   help="related machines: makespan LP (default) or weighted-completion LP")
    p.add_argument("--solution", action="store_true", help="also print variables above 1e-12")
    p.add_argument("--feas-tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("round", help="run a rounding algorithm")
    with_instance(p)
    p.add_argument("--alg", choices=sorted(ALGORITHMS))
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--log", help="CSV trial log (unrelated algorithms)")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("exact", help="exact optimum by search")
    with_instance(p)
    p.add_argument("--objective", choices=("wc", "cmax"), default="wc")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("experiment", help="run an experiment and write a CSV report")
    _add_generator_flags(p, required=True)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alg", choices=sorted(ALGORITHMS))
    p.add_argument("--exact", action="store_true", help="also compute the exact optimum")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $TIMESCHED_WORKERS or 1)")
    p.add_argument("--record-time", action="store_true", help="fill the wall_time column")
    p.add_argument("--out", help="report path (default stdout)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="check a schedule against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ParseError, LPError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
