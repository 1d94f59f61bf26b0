"""(1 - eps)-competitive matching with O(n / eps^5) advice bits.

The oracle simulates an augmenting-path algorithm built from Greedy passes on
induced subgraphs. Pass 1 is Greedy on the whole graph. Each later phase
takes a maximal set of vertex-disjoint shortest augmenting paths with respect
to the current matching M and rediscovers them layer by layer: the pass for
layer j runs Greedy between the current path frontier (A-vertices) and the
B-vertices of layer j. After the last layer every surviving path is flipped
into M. The tape records every pass's vertex sets plus, for each A-vertex,
the index j(a) of the pass whose matching holds its final edge; the online
decoder replays all passes in the background and outputs (a, M_j(a)(a)).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, NamedTuple, Set, Tuple, Union

from matching_advice.advice import (
    AdviceError,
    AdviceInconsistencyError,
    AdviceTape,
    fixed_width,
    self_delimited_length,
)
from matching_advice.engine import ArrivalOrder
from matching_advice.matching import max_matching, opt, shortest_augmenting_paths
from matching_advice.models import BipartiteGraph, Edge, Matching

logger = logging.getLogger(__name__)

# Pass budget is floor(PASS_CONSTANT / eps^5).
PASS_CONSTANT = 4


def _exact(epsilon: float) -> Fraction:
    return Fraction(epsilon).limit_denominator(10**6)


@dataclass(frozen=True)
class EpsParams:
    """Accuracy parameter and the budgets derived from it."""

    epsilon: float

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def max_path_layers(self) -> int:
        """Augmenting paths have at most this many unmatched edges (length 2t - 1)."""
        return math.ceil(1 / _exact(self.epsilon)) + 1

    @property
    def pass_budget(self) -> int:
        return max(1, math.floor(PASS_CONSTANT / _exact(self.epsilon) ** 5))

    def target(self, optimum: int) -> int:
        """Smallest matching size meeting (1 - eps) * optimum."""
        return math.ceil((1 - _exact(self.epsilon)) * optimum)


@dataclass(frozen=True)
class PassPlan:
    """Greedy passes (A_i, B_i) and the final pass index j(a) of every A-vertex (0 = unmatched)."""

    passes: Tuple[Tuple[FrozenSet[int], FrozenSet[int]], ...]
    final_index: Dict[int, int]

    @property
    def num_passes(self) -> int:
        return len(self.passes)

    def to_text(self) -> str:
        """One line per pass: index, A_i ids, B_i ids."""
        lines = []
        for index, (a_set, b_set) in enumerate(self.passes, start=1):
            a_ids = " ".join(str(a) for a in sorted(a_set))
            b_ids = " ".join(str(b) for b in sorted(b_set))
            lines.append(f"{index} | A: {a_ids} | B: {b_ids}")
        return "\n".join(lines) + "\n"


class EpsOracleResult(NamedTuple):
    plan: PassPlan
    tape: AdviceTape
    matching: Matching


def replay_pass(
    graph: BipartiteGraph, pi: ArrivalOrder, a_set: FrozenSet[int], b_set: FrozenSet[int]
) -> Matching:
    """Greedy on the subgraph induced by (A_i, B_i), edges in arrival order then ascending B-id."""
    taken: Set[int] = set()
    pairs: List[Edge] = []
    for a in pi.sequence:
        if a not in a_set:
            continue
        for b in graph.neighbors(a):
            if b in b_set and b not in taken:
                taken.add(b)
                pairs.append((a, b))
                break
    return Matching(frozenset(pairs))


def _as_params(eps: Union[EpsParams, float]) -> EpsParams:
    return eps if isinstance(eps, EpsParams) else EpsParams(float(eps))


def eps_oracle(graph: BipartiteGraph, pi: ArrivalOrder, eps: Union[EpsParams, float]) -> EpsOracleResult:
    """Plan the greedy passes, write the advice tape and return the resulting matching.

    Args:
        graph: Input graph
        pi: Arrival order the online decoder will see
        eps: Accuracy parameter

    Returns:
        EpsOracleResult with the plan, the tape and the matching the decoder will output
    """
    params = _as_params(eps)
    target = params.target(len(max_matching(graph)))
    all_a = frozenset(graph.a_vertices)
    all_b = frozenset(graph.b_vertices)

    passes: List[Tuple[FrozenSet[int], FrozenSet[int]]] = [(all_a, all_b)]
    first = replay_pass(graph, pi, all_a, all_b)
    mate_a: Dict[int, int] = dict(first.pairs)
    final_index: Dict[int, int] = {a: 1 for a in mate_a}
    phases = 0

    while len(mate_a) < target:
        current = Matching(frozenset(mate_a.items()))
        paths = shortest_augmenting_paths(graph, current, max_layers=params.max_path_layers)
        if not paths:
            logger.debug(f"No augmenting path within {params.max_path_layers} layers at |M|={len(mate_a)}")
            break
        layers = len(paths[0][0])
        if len(passes) + layers > params.pass_budget:
            logger.warning(
                f"Pass budget {params.pass_budget} exhausted at |M|={len(mate_a)}, target {target}"
            )
            break
        # frontier A-vertex -> (a, b, pass index) edges discovered so far
        active: Dict[int, List[Tuple[int, int, int]]] = {path_a[0]: [] for path_a, _ in paths}
        completed: List[List[Tuple[int, int, int]]] = []
        for layer in range(layers):
            a_set = frozenset(active)
            b_set = frozenset(path_b[layer] for _, path_b in paths)
            passes.append((a_set, b_set))
            found = replay_pass(graph, pi, a_set, b_set)
            pass_index = len(passes)
            following: Dict[int, List[Tuple[int, int, int]]] = {}
            for a, chain in active.items():
                b = found.partner_of_a(a)
                if b is None:
                    continue
                extended = chain + [(a, b, pass_index)]
                nxt = current.partner_of_b(b)
                if nxt is None:
                    completed.append(extended)
                else:
                    following[nxt] = extended
            active = following
        if not completed:
            logger.warning(f"Phase {phases + 1} completed no augmenting path; stopping")
            break
        for chain in completed:
            for a, b, pass_index in chain:
                mate_a[a] = b
                final_index[a] = pass_index
        phases += 1
        logger.debug(f"Phase {phases}: {len(completed)} paths over {layers} layers, |M|={len(mate_a)}")

    matching = Matching(frozenset(mate_a.items()))
    plan = PassPlan(tuple(passes), final_index)
    tape = write_plan(graph, pi, plan)
    logger.info(
        f"eps={params.epsilon}: |M|={len(matching)} target={target} passes={plan.num_passes} "
        f"advice_bits={tape.bits_written}"
    )
    return EpsOracleResult(plan, tape, matching)


def write_plan(graph: BipartiteGraph, pi: ArrivalOrder, plan: PassPlan) -> AdviceTape:
    """Encode n, m, P, the pass memberships and the j(a) fields in arrival order."""
    tape = AdviceTape()
    tape.write_self_delimited(graph.n)
    tape.write_self_delimited(graph.m)
    tape.write_self_delimited(plan.num_passes)
    for a_set, b_set in plan.passes:
        for a in graph.a_vertices:
            tape.write_bit(1 if a in a_set else 0)
        for b in graph.b_vertices:
            tape.write_bit(1 if b in b_set else 0)
    width = fixed_width(plan.num_passes)
    for a in pi.sequence:
        tape.write_fixed(plan.final_index.get(a, 0), width)
    return tape


def eps_online(graph: BipartiteGraph, pi: ArrivalOrder, tape: AdviceTape) -> Matching:
    """Replay every pass per arrival and output (a, M_j(a)(a)) when j(a) >= 1.

    Raises:
        AdviceError: If the tape header does not match the graph
        TapeUnderrunError: If the tape is too short
        AdviceInconsistencyError: If j(a) names a pass that left a unmatched
    """
    n = tape.read_self_delimited()
    m = tape.read_self_delimited()
    if (n, m) != (graph.n, graph.m):
        raise AdviceError(f"Tape describes n={n}, m={m} but the graph has n={graph.n}, m={graph.m}")
    num_passes = tape.read_self_delimited()
    passes: List[Tuple[Set[int], Set[int]]] = []
    for _ in range(num_passes):
        a_set = {a for a in graph.a_vertices if tape.read_bit()}
        b_set = {b for b in graph.b_vertices if tape.read_bit()}
        passes.append((a_set, b_set))
    width = fixed_width(num_passes)
    taken: List[Set[int]] = [set() for _ in passes]
    used_b: Set[int] = set()
    pairs: List[Edge] = []
    for a in pi.sequence:
        index = tape.read_fixed(width)
        chosen: Dict[int, int] = {}
        for i, (a_set, b_set) in enumerate(passes):
            if a not in a_set:
                continue
            for b in graph.neighbors(a):
                if b in b_set and b not in taken[i]:
                    taken[i].add(b)
                    chosen[i + 1] = b
                    break
        if index == 0:
            continue
        if index > num_passes or index not in chosen:
            raise AdviceInconsistencyError(f"a{a} has j(a)={index} but pass {index} leaves it unmatched")
        b = chosen[index]
        if b in used_b:
            raise AdviceInconsistencyError(f"Advice assigns b{b} twice (again to a{a})")
        used_b.add(b)
        pairs.append((a, b))
    return Matching(frozenset(pairs))


def max_passes(eps: Union[EpsParams, float]) -> int:
    return _as_params(eps).pass_budget


def advice_budget(n: int, m: int, eps: Union[EpsParams, float]) -> int:
    """Upper bound on the tape length for any instance with n, m vertices.

    sd(n) + sd(m) + sd(P) + P(n + m) + n * bit_length(P) with P the pass budget.
    """
    passes = max_passes(eps)
    return (
        self_delimited_length(n)
        + self_delimited_length(m)
        + self_delimited_length(passes)
        + passes * (n + m)
        + n * fixed_width(passes)
    )


def plan_violations(graph: BipartiteGraph, pi: ArrivalOrder, result: EpsOracleResult) -> List[str]:
    """Structural checks on the plan and on its replayed passes."""
    problems = []
    replayed = [replay_pass(graph, pi, a_set, b_set) for a_set, b_set in result.plan.passes]
    for index, ((a_set, b_set), found) in enumerate(zip(result.plan.passes, replayed), start=1):
        best = opt(graph, a_set, b_set)
        if 2 * len(found) < best:
            problems.append(f"Pass {index} matched {len(found)} of an induced optimum {best}")
    for a, b in result.matching.pairs:
        index = result.plan.final_index.get(a, 0)
        if index < 1 or a not in result.plan.passes[index - 1][0]:
            problems.append(f"a{a} has j(a)={index} outside its pass sets")
        elif (a, b) not in replayed[index - 1]:
            problems.append(f"Edge ({a}, {b}) is not in replayed pass {index}")
    if not all(any(edge in r for r in replayed) for edge in result.matching.pairs):
        problems.append("Final matching is not contained in the union of the passes")
    return problems
