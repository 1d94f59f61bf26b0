"""Command line interface for matching-advice experiments."""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from matching_advice.config import load_config
from matching_advice.derandomize import (
    FAMILIES,
    build_covering_set,
    build_ratio_matrix,
    cover_violations,
    derandomized_algorithm,
    family_setup,
)
from matching_advice.engine import ArrivalOrder
from matching_advice.experiments import BOUND_KINDS, bound_table, rows_to_csv, run_experiment, write_artifacts
from matching_advice.generators import GENERATORS, generate, ranking_lb_permutations
from matching_advice.invariants import SUITES, run_selftest
from matching_advice.lowerbounds.ranking import h_gadget_perfect_matching, ranking_lb_instance
from matching_advice.lowerbounds.string_guessing import (
    GreedyMatcher,
    OptimalAdviceMatcher,
    PermutationIndex,
    SgkhInstance,
    sgkh_reduction_run,
)
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, Matching, MatchingError, format_instance, save_instance

logger = logging.getLogger(__name__)

MATCHERS = {"greedy": GreedyMatcher, "optimal": OptimalAdviceMatcher}


def setup_logging(debug: bool = False) -> None:
    """Set up logging configuration."""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _params(pairs: Optional[List[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"Parameters must look like key=value, got {pair!r}")
        params[key] = value
    return params


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def _dump(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_gen(args: argparse.Namespace) -> int:
    """Emit a generated instance."""
    graph = generate(args.kind, _params(args.param), args.seed)
    _emit(format_instance(graph, f"{args.kind} {' '.join(args.param or [])} seed={args.seed}"), args.out)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    """Run an experiment from a config file; with --out, write <out>.json and <out>.csv."""
    cfg = load_config(
        args.config,
        overrides={"seed": args.seed, "trials": args.trials, "workers": args.workers},
    )
    result = run_experiment(cfg)
    if args.out:
        write_artifacts(result, args.out)
    else:
        sys.stdout.write(result.to_json() if args.format == "json" else result.to_csv())
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    """Print a table of closed-form bounds."""
    rows = bound_table(
        args.kind, k_max=args.k_max, c=args.c, rho_steps=args.rho_steps, k=args.k, requests=args.requests
    )
    _emit(_dump(rows) if args.format == "json" else rows_to_csv(rows), args.out)
    return 0


def _gadget_witness_ok(graph: BipartiteGraph) -> bool:
    """The gadget's closed-form perfect matching must lie in the built graph."""
    try:
        witness = Matching(frozenset(h_gadget_perfect_matching(graph.n)))
        witness.validate(graph)
    except MatchingError as e:
        logger.error(f"h_gadget witness rejected: {e}")
        return False
    if len(witness) != graph.n or len(witness) != graph.m:
        logger.error(f"h_gadget witness has {len(witness)} pairs for a {graph.n}x{graph.m} gadget")
        return False
    return True


def cmd_lb_build(args: argparse.Namespace) -> int:
    """Build a lower-bound instance; ranking_lb and h_gadget instances are verified first."""
    params = _params(args.param)
    if args.kind != "ranking_lb":
        graph = generate(args.kind, params, args.seed)
        if args.kind == "h_gadget" and not _gadget_witness_ok(graph):
            return 1
        _emit(format_instance(graph, f"{args.kind} {' '.join(args.param or [])}"), args.out)
        return 0
    perms = ranking_lb_permutations(params, np.random.default_rng(args.seed))
    n = perms[0].m
    instance = ranking_lb_instance(perms, ArrivalOrder.identity(n), float(params.get("eps", 0.5)))
    problems = instance.violations(perms)
    for problem in problems:
        logger.error(problem)
    sizes = [instance.ranking_size(sigma) for sigma in perms]
    logger.info(
        f"Ranking sizes {sizes}, bound {instance.ranking_bound:.3f},"
        f" proof sum {float(instance.proof_sum):.3f}"
    )
    if args.out:
        save_instance(instance.graph, args.out, comment=f"ranking_lb {' '.join(args.param or [])}")
    else:
        sys.stdout.write(format_instance(instance.graph))
    return 1 if problems else 0


def cmd_sgkh(args: argparse.Namespace) -> int:
    """Run the string-guessing reduction on a random target."""
    index = PermutationIndex(args.c)
    instance = SgkhInstance.random(index.size, args.length, args.seed)
    result = sgkh_reduction_run(MATCHERS[args.matcher](), instance, args.c)
    _emit(_dump(result.to_dict()), args.out)
    return 0 if result.equivalence_holds else 1


def cmd_derand(args: argparse.Namespace) -> int:
    """Build a covering set for a toy family and check the derandomized algorithm on every input."""
    family, algorithm, r = family_setup(args.family, args.k)
    matrix = build_ratio_matrix(family, algorithm, r)
    cover = build_covering_set(matrix, args.epsilon)
    problems = cover_violations(cover, matrix)
    advice_bits = set()
    for row, online_input in enumerate(family):
        matching, bits = derandomized_algorithm(cover, matrix, algorithm, online_input)
        advice_bits.add(bits)
        optimum = len(max_matching(online_input.graph))
        achieved = Fraction(1) if optimum == 0 else Fraction(len(matching), optimum)
        if achieved < cover.threshold:
            problems.append(f"Input {row} replayed at {achieved} < {cover.threshold}")
    for problem in problems:
        logger.error(problem)
    summary = {
        "family": args.family,
        "inputs": matrix.rows,
        "random_strings": matrix.cols,
        "expected_ratio": str(cover.expected_ratio),
        "threshold": str(cover.threshold),
        "covering_set_size": len(cover.strings),
        "iterations": cover.iterations,
        "iteration_bound": cover.iteration_bound,
        "advice_bits": sorted(advice_bits),
    }
    if args.out:
        _emit(cover.to_manifest(matrix), args.out)
    sys.stdout.write(_dump(summary))
    return 1 if problems else 0


def cmd_selftest(args: argparse.Namespace) -> int:
    """Run the exhaustive invariant suites."""
    reports = run_selftest(args.max_size, args.suite or tuple(SUITES), samples=args.samples, seed=args.seed)
    _emit(_dump([report.to_dict() for report in reports]), args.out)
    return 0 if all(report.ok for report in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Online bipartite matching with advice")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to execute")

    gen_parser = subparsers.add_parser("gen", help="Emit a generated instance file")
    gen_parser.add_argument("--kind", required=True, choices=sorted(GENERATORS))
    gen_parser.add_argument("--param", "-p", action="append", help="Generator parameter key=value")
    gen_parser.add_argument("--seed", type=int, default=None)
    gen_parser.add_argument("--out", help="Output path (default stdout)")
    gen_parser.set_defaults(func=cmd_gen)

    run_parser = subparsers.add_parser("run", help="Run an experiment config")
    run_parser.add_argument("--config", "-c", help="Path to experiment YAML file")
    run_parser.add_argument("--seed", type=int)
    run_parser.add_argument("--trials", type=int)
    run_parser.add_argument("--workers", type=int)
    run_parser.add_argument("--out", help="Artifact base path; writes <out>.json and <out>.csv")
    run_parser.add_argument("--format", choices=["json", "csv"], default="json")
    run_parser.set_defaults(func=cmd_run)

    bounds_parser = subparsers.add_parser("bounds", help="Tabulate closed-form bounds")
    bounds_parser.add_argument("--kind", required=True, choices=BOUND_KINDS)
    bounds_parser.add_argument("--k-max", type=int, default=10)
    bounds_parser.add_argument("--k", type=int, default=2)
    bounds_parser.add_argument("--c", type=int, default=3)
    bounds_parser.add_argument("--rho-steps", type=int, default=10)
    bounds_parser.add_argument("--requests", type=int, default=100, help="Requests for advice_lb totals")
    bounds_parser.add_argument("--out")
    bounds_parser.add_argument("--format", choices=["json", "csv"], default="csv")
    bounds_parser.set_defaults(func=cmd_bounds)

    lb_parser = subparsers.add_parser("lb-build", help="Emit a lower-bound instance")
    lb_parser.add_argument("--kind", required=True, choices=["ranking_lb", "semi_complete", "h_gadget"])
    lb_parser.add_argument("--param", "-p", action="append", help="Parameter key=value")
    lb_parser.add_argument("--seed", type=int, default=None)
    lb_parser.add_argument("--out")
    lb_parser.set_defaults(func=cmd_lb_build)

    sgkh_parser = subparsers.add_parser("sgkh", help="Run the string-guessing reduction")
    sgkh_parser.add_argument("--c", type=int, default=3)
    sgkh_parser.add_argument("--length", type=int, default=50)
    sgkh_parser.add_argument("--matcher", choices=sorted(MATCHERS), default="greedy")
    sgkh_parser.add_argument("--seed", type=int, default=0)
    sgkh_parser.add_argument("--out")
    sgkh_parser.set_defaults(func=cmd_sgkh)

    derand_parser = subparsers.add_parser("derand", help="Covering-set derandomization on a toy family")
    derand_parser.add_argument("--family", choices=sorted(FAMILIES), default="semi_complete3")
    derand_parser.add_argument("--k", type=int, default=1)
    derand_parser.add_argument("--epsilon", type=float, default=0.2)
    derand_parser.add_argument("--out", help="Covering-set manifest path")
    derand_parser.set_defaults(func=cmd_derand)

    selftest_parser = subparsers.add_parser("selftest", help="Run exhaustive invariant sweeps")
    selftest_parser.add_argument("--max-size", type=int, default=3)
    selftest_parser.add_argument("--suite", action="append", choices=sorted(SUITES))
    selftest_parser.add_argument(
        "--samples", type=int, default=0, help="Random instances above the exhaustive size"
    )
    selftest_parser.add_argument("--seed", type=int, default=0)
    selftest_parser.add_argument("--out")
    selftest_parser.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.debug)
    logger.debug(f"Executing command: {args.command}")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
