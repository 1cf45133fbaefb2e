"""Command-line entry point: load-report, exact, estimate, bench."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import ExperimentPlan, emit_results, run_plan
from .errors import ClosedWalksError, ConfigError, DataError
from .estimators import ALGORITHMS, estimate
from .graphio import FullAccess, QueryLedger, RestrictedAccess, load_report
from .oracle import dense_spectrum, power_iteration_top
from .walker import WalkConfig, random_walk

log = logging.getLogger("closedwalks")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--graph", help="SNAP-style edge list (optionally .gz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="output file (stdout when omitted)")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--no-lcc", action="store_true", help="keep every component")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="closedwalks", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("load-report", parents=[common], help="parse a graph and report counts")

    ex = sub.add_parser("exact", parents=[common], help="reference eigenvalues")
    ex.add_argument("--n-eigs", type=int, default=2)
    ex.add_argument("--tol", type=float, default=1e-10)
    ex.add_argument("--max-iters", type=int, default=100_000)
    ex.add_argument("--dense-limit", type=int, default=500,
                    help="use the dense solver up to this many nodes")

    es = sub.add_parser("estimate", parents=[common], help="sample closed walks")
    es.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="b")
    es.add_argument("--k", type=int, help="closed-walk length (naive, a)")
    es.add_argument("--max-k", type=int, default=30, help="K for b, c, topn")
    es.add_argument("--beta", type=float, default=0.05)
    es.add_argument("--walk-length", type=int, help="steps m; defaults to the budget")
    es.add_argument("--burn-in", type=int)
    es.add_argument("--budget", type=int, help="query budget Q")
    es.add_argument("--start-node", type=int, help="dense node id to start from")
    es.add_argument("--restricted", action="store_true",
                    help="neighbor queries only; requires --start-node")
    es.add_argument("--n-eigs", type=int, default=3, help="eigenvalues for topn")
    es.add_argument("--trace-out", help="write visited node ids, one per line")

    be = sub.add_parser("bench", parents=[common], help="run an experiment plan")
    be.add_argument("--plan", required=True, help="JSON ExperimentPlan")
    be.add_argument("--workers", type=int)
    be.add_argument("--no-timing", action="store_true",
                    help="leave runtime blank so the CSV is reproducible byte for byte")
    return p


def _load(args):
    if not args.graph:
        raise ConfigError("--graph is required")
    try:
        return load_report(args.graph, lcc=not args.no_lcc)
    except FileNotFoundError as e:
        raise DataError(f"graph file not found: {args.graph}") from e


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())}


def _write(doc: dict, args) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_load_report(args) -> None:
    _, report = _load(args)
    _write({"version": __version__, "config": _resolved(args), "report": report.to_dict()}, args)


def cmd_exact(args) -> None:
    g, _ = _load(args)
    if g.node_count <= args.dense_limit:
        spec = dense_spectrum(g)
    else:
        spec = power_iteration_top(g, args.n_eigs, tol=args.tol, max_iters=args.max_iters,
                                   seed=args.seed)
    _write({"version": __version__, "config": _resolved(args), **spec.to_dict()}, args)


def _walk_config(args) -> WalkConfig:
    m = args.walk_length if args.walk_length is not None else args.budget
    if m is None:
        raise ConfigError("give --walk-length or --budget")
    if args.budget is not None and m > args.budget:
        log.warning("walk length %d exceeds budget %d; the walk will stop early", m, args.budget)
    if args.burn_in is not None and m <= args.burn_in:
        raise ConfigError(f"walk length {m} must exceed burn-in {args.burn_in}")
    if args.restricted and args.start_node is None:
        raise ConfigError("--restricted needs --start-node")
    if not 0 < args.beta < 1:
        raise ConfigError("--beta must lie in (0, 1)")
    return WalkConfig(walk_length=m, burn_in=args.burn_in, seed=args.seed,
                      start_node=args.start_node)


def cmd_estimate(args) -> None:
    cfg = _walk_config(args)
    g, _ = _load(args)
    view = RestrictedAccess if args.restricted else FullAccess
    access = view(g, QueryLedger(budget=args.budget))
    rep = estimate(args.algorithm, access, g.node_count, cfg, k=args.k, K=args.max_k,
                   beta=args.beta, n_eigs=args.n_eigs)
    if args.trace_out:
        window = args.k if args.algorithm in ("naive", "a") and args.k else args.max_k
        if args.algorithm in ("naive", "a") and not args.k:
            window = 3
        walk = random_walk(view(g, QueryLedger(budget=args.budget)), cfg, window=window)
        walk.dump_trace(args.trace_out)
    cfg_doc = _resolved(args)
    cfg_doc["resolved_burn_in"] = rep.t
    cfg_doc["resolved_walk_length"] = rep.m
    _write({"version": __version__, "config": cfg_doc, **rep.to_dict()}, args)


def cmd_bench(args) -> None:
    plan = ExperimentPlan.from_json(args.plan)
    if args.graph:
        plan.graph = args.graph
    if args.workers:
        plan.workers = args.workers
    if args.no_lcc:
        plan.lcc = False
    plan.validate()
    try:
        g, _ = load_report(plan.graph, lcc=plan.lcc)
    except FileNotFoundError as e:
        raise DataError(f"graph file not found: {plan.graph}") from e
    truth = plan.truth
    if truth is None:
        spec = dense_spectrum(g) if g.node_count <= 500 else power_iteration_top(g, 2)
        truth = {"lambda1": spec.lambda1, "lambda2": spec.lambda2}
    rows = run_plan(plan, truth, graph=g)
    out = args.output or "bench.csv"
    extra = {"version": __version__, "config": _resolved(args),
             "plan": {**vars(plan), "truth": truth}}
    csv_path, json_path = emit_results(rows, out, timing=not args.no_timing, extra=extra)
    log.info("wrote %s and %s", csv_path, json_path)


COMMANDS = {"load-report": cmd_load_report, "exact": cmd_exact, "estimate": cmd_estimate,
            "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=args.log_level, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except ClosedWalksError as e:
        msg = str(e).replace("\n", " ")
        sys.stderr.write(json.dumps({"error": e.kind, "exit_code": e.exit_code,
                                     "message": msg}) + "\n")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
