"""Command-line entry point: ``symtree learn | experiment | count``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .cnf import parse_dimacs, to_dimacs
from .counting import DEFAULT_DELTA, DEFAULT_EPSILON, CapExceeded, approx_count, exact_count_projected
from .experiment import DEFAULT_GRID, ExperimentConfig, run_experiment
from .learner import LearnerConfig, LearnerError, Status, run
from .oracles import OracleProtocolError, make_oracle
from .runlog import RunLog
from .tree import TreeSpec, format_truth_table, truth_table

EXIT_OK = 0
EXIT_NO_TREE = 1
EXIT_ERROR = 3


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _grid(text):
    cells = []
    for item in text.split(","):
        try:
            n, d = item.lower().split("x")
            cells.append((int(n), int(d)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid cells look like 3x2, got {item!r}") from None
    return tuple(cells)


def _add_counter_flags(p):
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--engine", default="auto",
                   help="SAT backend: auto, builtin, pysat or pysat:<name> (default auto)")


def _add_learner_flags(p):
    _add_counter_flags(p)
    p.add_argument("--exact-cap", type=int, default=10_000,
                   help="use exact counts while the version space is below this size (0 disables)")
    p.add_argument("--max-rounds", type=_positive_int, default=None,
                   help="query budget (default 2**features)")
    p.add_argument("--stagnation", choices=("paper", "no-progress"), default="paper")
    p.add_argument("--no-anticipate", dest="anticipate", action="store_false",
                   help="always ask the best query, even when it cannot split the survivors")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for query scoring")


def build_parser():
    parser = argparse.ArgumentParser(prog="symtree", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a hidden tree through membership queries")
    p.add_argument("--features", type=_positive_int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--oracle", required=True, help="random:<seed> | table:<path> | exec:<command>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", help="write a JSONL round log here (timings go to <log>.timings.jsonl)")
    p.add_argument("--emit-dimacs", metavar="DIR", help="dump the version space after every round")
    _add_learner_flags(p)

    p = sub.add_parser("experiment", help="run the learner over a grid of configurations")
    p.add_argument("--grid", type=_grid, default=DEFAULT_GRID,
                   help="comma-separated NxD cells (default 3x2,3x3,4x2,4x3)")
    p.add_argument("--seeds", type=_positive_int, default=10, help="seeds 0..K-1 per cell")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_positive_int, default=1, help="runs executed in parallel")
    _add_learner_flags(p)

    p = sub.add_parser("count", help="projected model count of a DIMACS file with 'c ind' lines")
    p.add_argument("path")
    p.add_argument("--exact", action="store_true", help="also print the exact count")
    p.add_argument("--exact-cap", type=int, default=None, help="give up on the exact count at this size")
    p.add_argument("--no-approx", action="store_true", help="skip the hashing estimate")
    p.add_argument("--seed", type=int, default=0)
    _add_counter_flags(p)
    return parser


def _learner_config(args, seed):
    return LearnerConfig(
        epsilon=args.epsilon, delta=args.delta, max_rounds=args.max_rounds, seed=seed,
        stagnation=args.stagnation, exact_cap=args.exact_cap or None, engine=args.engine,
        n_jobs=args.jobs, anticipate=args.anticipate,
    )


def cmd_learn(args, out):
    spec = TreeSpec(args.features, args.depth)
    config = _learner_config(args, args.seed)
    if args.emit_dimacs:
        os.makedirs(args.emit_dimacs, exist_ok=True)
    log_fh = open(args.log, "w") if args.log else None
    timing_fh = open(args.log + ".timings.jsonl", "w") if args.log else None
    log = RunLog(log_fh, timing_fh) if log_fh else None
    oracle = make_oracle(args.oracle, spec)

    def on_round(k, formula, layout, record):
        if args.emit_dimacs:
            with open(os.path.join(args.emit_dimacs, f"round_{k}.cnf"), "w") as fh:
                fh.write(to_dimacs(formula))
        if log and record is not None:
            log.round(record)

    try:
        if log:
            log.start(n_features=spec.n_features, depth=spec.depth, seed=args.seed, oracle=args.oracle,
                      epsilon=config.epsilon, delta=config.delta, exact_cap=config.exact_cap,
                      stagnation=config.stagnation, max_rounds=config.max_rounds or spec.n_inputs)
        outcome = run(spec, oracle, config, on_round=on_round)
        if log:
            log.finish(outcome)
    except (LearnerError, OracleProtocolError) as exc:
        if log:
            log.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        oracle.close()
        for fh in (log_fh, timing_fh):
            if fh:
                fh.close()

    print(f"status: {outcome.status}", file=out)
    print(f"queries: {outcome.n_queries}", file=out)
    if outcome.tree is None:
        return EXIT_NO_TREE
    print(f"tree: {outcome.tree}", file=out)
    print(format_truth_table(truth_table(outcome.tree), spec.n_features), end="", file=out)
    return EXIT_OK


def cmd_experiment(args, out):
    config = ExperimentConfig(
        grid=args.grid, seeds=range(args.seeds), learner=_learner_config(args, 0),
        out_dir=args.out, jobs=args.workers,
    )
    rows = run_experiment(config)
    failed = 0
    for n, d in config.grid:
        cell = [r for r in rows if (r["n_features"], r["depth"]) == (n, d)]
        ok = [r for r in cell if not r["error"]]
        correct = sum(1 for r in ok if r["correct"])
        stagnated = sum(1 for r in ok if r["stagnation_fired"])
        collapsed = sum(1 for r in ok if r["collapse_confirmed"])
        mean_q = sum(r["queries"] for r in ok) / len(ok) if ok else float("nan")
        failed += len(cell) - correct
        print(f"n={n} d={d} |H|={cell[0]['hypothesis_space']} runs={len(cell)} correct={correct} "
              f"stagnation={stagnated} collapse={collapsed} mean_queries={mean_q:.2f}/{2 ** n}", file=out)
    print(f"summary: {os.path.join(args.out, 'summary.csv')}", file=out)
    return EXIT_OK if failed == 0 else EXIT_ERROR


def cmd_count(args, out):
    with open(args.path) as fh:
        formula = parse_dimacs(fh.read())
    if not formula.projection:
        print(f"error: {args.path} has no 'c ind' projection lines", file=sys.stderr)
        return EXIT_ERROR
    if args.exact:
        try:
            print(f"exact: {exact_count_projected(formula, cap=args.exact_cap).value}", file=out)
        except CapExceeded as exc:
            print(f"exact: >= {exc.cap}", file=out)
    if not args.no_approx:
        est = approx_count(formula, args.epsilon, args.delta, args.seed, engine=args.engine)
        print(f"approx: {est.value} (epsilon={args.epsilon} delta={args.delta} seed={args.seed}"
              f"{' exact' if est.exact else ''})", file=out)
    return EXIT_OK


def main(argv=None, out=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    commands = {"learn": cmd_learn, "experiment": cmd_experiment, "count": cmd_count}
    try:
        return commands[args.command](args, out)
    except (ValueError, OSError) as exc:
        parser.exit(EXIT_ERROR, f"error: {exc}\n")
