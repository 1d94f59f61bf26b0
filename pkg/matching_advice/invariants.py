"""Invariant sweeps over small instances: exhaustive up to a per-suite size, sampled beyond it."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from matching_advice.category import advice_category_breakdown
from matching_advice.engine import (
    ArrivalOrder,
    DiffKind,
    RankingPermutation,
    alternating_path_diff,
    arrival_edge_order,
    greedy_edge_run,
    ranking_run,
    upgrade_lemma_holds,
)
from matching_advice.eps_advice import EpsParams, eps_oracle, eps_online, plan_violations
from matching_advice.matching import brute_force_matching, max_matching, remove_vertex
from matching_advice.models import BipartiteGraph, Matching, Side, Vertex, build_graph

logger = logging.getLogger(__name__)

MAX_REPORTED_VIOLATIONS = 20
EPSILONS = (0.1, 0.3, 0.6)

Instance = Tuple[BipartiteGraph, Matching, ArrivalOrder, RankingPermutation]
Check = Callable[["SweepReport", BipartiteGraph, Matching, ArrivalOrder, RankingPermutation], None]


@dataclass
class SweepReport:
    name: str
    checked: int = 0
    sampled: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, message: str) -> None:
        if len(self.violations) < MAX_REPORTED_VIOLATIONS:
            self.violations.append(message)
        else:
            self.violations[-1] = f"{message} (and more)"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "checked": self.checked,
            "sampled": self.sampled,
            "ok": self.ok,
            "violations": self.violations,
        }


def enumerate_graphs(n: int, m: int) -> Iterator[BipartiteGraph]:
    """All n x m graphs up to reordering of A.

    Rows are multisets of neighborhoods; combined with a sweep over every
    arrival order this covers every labelled graph.
    """
    masks = range(2**m)
    for rows in itertools.combinations_with_replacement(masks, n):
        edges = ((a + 1, b + 1) for a, mask in enumerate(rows) for b in range(m) if mask >> b & 1)
        yield build_graph(n, m, edges)


def small_graphs(max_n: int, max_m: int) -> Iterator[BipartiteGraph]:
    for n in range(1, max_n + 1):
        for m in range(1, max_m + 1):
            yield from enumerate_graphs(n, m)


def all_arrival_orders(n: int) -> Iterator[ArrivalOrder]:
    for order in itertools.permutations(range(1, n + 1)):
        yield ArrivalOrder(order)


def all_rankings(m: int) -> Iterator[RankingPermutation]:
    for ranks in itertools.permutations(range(1, m + 1)):
        yield RankingPermutation(ranks)


def exhaustive_instances(max_size: int, with_rankings: bool) -> Iterator[Instance]:
    """Every graph with both sides at most ``max_size``, every arrival order and, if asked, every ranking."""
    for graph in small_graphs(max_size, max_size):
        optimum = max_matching(graph)
        rankings: Iterable[RankingPermutation] = (
            list(all_rankings(graph.m)) if with_rankings else [RankingPermutation.identity(graph.m)]
        )
        for pi in all_arrival_orders(graph.n):
            for sigma in rankings:
                yield graph, optimum, pi, sigma


def sampled_instances(max_size: int, count: int, seed: int = 0, above: int = 0) -> Iterator[Instance]:
    """``count`` random instances with side sizes in 1..max_size and at least one side above ``above``.

    Edge density, arrival order and ranking are drawn from numpy's default_rng(seed).
    """
    if above >= max_size:
        above = 0
    rng = np.random.default_rng(seed)
    for _ in range(count):
        while True:
            n, m = (int(v) for v in rng.integers(1, max_size + 1, size=2))
            if max(n, m) > above:
                break
        mask = rng.random((n, m)) < rng.random()
        graph = build_graph(n, m, ((a + 1, b + 1) for a, b in zip(*np.nonzero(mask))))
        pi = ArrivalOrder(tuple(int(a) for a in rng.permutation(n) + 1))
        sigma = RankingPermutation(tuple(int(r) for r in rng.permutation(m) + 1))
        yield graph, max_matching(graph), pi, sigma


def check_max_matching(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """Layered augmenting paths agree with exhaustive search."""
    optimum.validate(graph)
    exhaustive = brute_force_matching(graph)
    if len(optimum) != len(exhaustive):
        report.fail(f"{graph.adjacency}: layered {len(optimum)} vs exhaustive {len(exhaustive)}")


def check_monotonicity(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """Removing one vertex changes Ranking's output by at most a single alternating path from it."""
    full = ranking_run(graph, pi, sigma)
    vertices = [Vertex(Side.A, a) for a in graph.a_vertices] + [Vertex(Side.B, b) for b in graph.b_vertices]
    for vertex in vertices:
        smaller = remove_vertex(graph, vertex)
        reduced = ranking_run(smaller, pi.restrict(smaller), sigma.restrict(smaller)).relabel(smaller)
        if alternating_path_diff(full, reduced, start=vertex).kind is DiffKind.OTHER:
            report.fail(f"{graph.adjacency} pi=[{pi}] sigma=[{sigma}] remove {vertex}")


def check_upgrade_lemma(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """Upgrading an unmatched B-vertex never hurts any matched A-vertex."""
    matching = ranking_run(graph, pi, sigma)
    for b in graph.b_vertices:
        if matching.partner_of_b(b) is not None:
            continue
        for new_rank in range(1, sigma.rank(b)):
            if not upgrade_lemma_holds(graph, pi, sigma, b, new_rank):
                report.fail(f"{graph.adjacency} pi=[{pi}] sigma=[{sigma}] b{b} -> rank {new_rank}")


def check_greedy(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """Greedy in arrival order is at least half the optimum."""
    size = len(greedy_edge_run(graph, arrival_edge_order(graph, pi)))
    if 2 * size < len(optimum):
        report.fail(f"{graph.adjacency} pi=[{pi}]: greedy {size}, optimum {len(optimum)}")


def check_advice_category(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """5|M| >= 3|M*| with exactly m advice bits, plus the category bookkeeping identities."""
    breakdown = advice_category_breakdown(graph, pi, optimum)
    if 5 * len(breakdown.result) < 3 * len(optimum):
        report.fail(f"{graph.adjacency} pi=[{pi}]: {len(breakdown.result)} vs optimum {len(optimum)}")
    if len(breakdown.result) < len(breakdown.reference):
        report.fail(f"{graph.adjacency} pi=[{pi}]: advice run below identity Ranking")
    for problem in breakdown.violations():
        report.fail(f"{graph.adjacency} pi=[{pi}]: {problem}")


def check_eps_advice(
    report: SweepReport, graph: BipartiteGraph, optimum: Matching, pi: ArrivalOrder, sigma: RankingPermutation
) -> None:
    """(1 - eps) guarantee, online replay equality and plan structure."""
    for epsilon in EPSILONS:
        params = EpsParams(epsilon)
        result = eps_oracle(graph, pi, params)
        if len(result.matching) < params.target(len(optimum)):
            report.fail(f"{graph.adjacency} pi=[{pi}] eps={epsilon}: {len(result.matching)} < target")
        tape = result.tape.copy()
        if eps_online(graph, pi, tape) != result.matching or tape.bits_read != tape.bits_written:
            report.fail(f"{graph.adjacency} pi=[{pi}] eps={epsilon}: online replay differs")
        for problem in plan_violations(graph, pi, result):
            report.fail(f"{graph.adjacency} pi=[{pi}] eps={epsilon}: {problem}")


@dataclass(frozen=True)
class Suite:
    """A per-instance check, whether it ranges over rankings, and the largest side enumerated exhaustively."""

    check: Check
    with_rankings: bool
    exhaustive_limit: int


SUITES: Dict[str, Suite] = {
    "max_matching": Suite(check_max_matching, with_rankings=False, exhaustive_limit=4),
    "monotonicity": Suite(check_monotonicity, with_rankings=True, exhaustive_limit=3),
    "upgrade_lemma": Suite(check_upgrade_lemma, with_rankings=True, exhaustive_limit=3),
    "greedy_half": Suite(check_greedy, with_rankings=False, exhaustive_limit=4),
    "advice_category": Suite(check_advice_category, with_rankings=False, exhaustive_limit=4),
    "eps_advice": Suite(check_eps_advice, with_rankings=False, exhaustive_limit=4),
}


def run_sweep(name: str, max_size: int, samples: int = 0, seed: int = 0) -> SweepReport:
    """Run one suite exhaustively up to its limit, then on ``samples`` random instances up to ``max_size``.

    Raises:
        ValueError: If the suite is unknown or the sizes are not positive
    """
    if name not in SUITES:
        raise ValueError(f"Unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if max_size < 1 or samples < 0:
        raise ValueError(f"Need max_size >= 1 and samples >= 0, got {max_size} and {samples}")
    suite = SUITES[name]
    exhaustive = min(max_size, suite.exhaustive_limit)
    report = SweepReport(name)
    for instance in exhaustive_instances(exhaustive, suite.with_rankings):
        report.checked += 1
        suite.check(report, *instance)
    for instance in sampled_instances(max_size, samples, seed, above=exhaustive):
        report.checked += 1
        report.sampled += 1
        suite.check(report, *instance)
    if max_size > exhaustive and samples == 0:
        logger.warning(f"{name}: sizes above {exhaustive} are only covered by sampling; pass samples > 0")
    return report


def run_selftest(
    max_size: int = 3, suites: Sequence[str] = tuple(SUITES), samples: int = 0, seed: int = 0
) -> List[SweepReport]:
    """Run the named sweeps on every graph with at most ``max_size`` vertices per side."""
    reports = []
    for name in suites:
        report = run_sweep(name, max_size, samples, seed)
        level = logging.INFO if report.ok else logging.ERROR
        logger.log(
            level,
            f"{name}: {report.checked} checks ({report.sampled} sampled),"
            f" {len(report.violations)} violations",
        )
        reports.append(report)
    return reports
