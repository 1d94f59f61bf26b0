"""Covering-set derandomization of a randomized online algorithm.

Given an enumerable input family and all 2^r random strings, build the exact
ratio matrix, choose a small set W of strings such that every input achieves
at least (1 - eps) E under one of them, and turn that into a deterministic
algorithm whose advice is the index of the right string in W.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from matching_advice.advice import AdviceTape
from matching_advice.category import randomized_category
from matching_advice.engine import ArrivalOrder, BitSource, FixedBitSource, kvv_run
from matching_advice.lowerbounds.string_guessing import semi_complete
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, Matching, build_graph

logger = logging.getLogger(__name__)

MATRIX_ENTRY_LIMIT = 2**22

RandomizedAlgorithm = Callable[[BipartiteGraph, ArrivalOrder, BitSource], Matching]


class DerandomizationError(ValueError):
    """Raised for oversized matrices and inputs outside the enumerated family."""


@dataclass(frozen=True)
class OnlineInput:
    graph: BipartiteGraph
    pi: ArrivalOrder

    def describe(self) -> str:
        return f"{self.graph.summary()} pi=[{self.pi}]"


def category_algorithm(k: int) -> RandomizedAlgorithm:
    """The randomized category algorithm with k bits per B-vertex."""

    def run(graph: BipartiteGraph, pi: ArrivalOrder, rng: BitSource) -> Matching:
        return randomized_category(graph, pi, k, rng).matching

    return run


def kvv_algorithm(graph: BipartiteGraph, pi: ArrivalOrder, rng: BitSource) -> Matching:
    return kvv_run(graph, pi, rng).matching


def arrival_order_family(graph: BipartiteGraph) -> List[OnlineInput]:
    """The graph under every arrival order, in lexicographic order."""
    return [
        OnlineInput(graph, ArrivalOrder(order))
        for order in itertools.permutations(range(1, graph.n + 1))
    ]


def all_graphs_family(n: int, m: int) -> List[OnlineInput]:
    """Every graph on n x m vertices under every arrival order."""
    cells = [(a, b) for a in range(1, n + 1) for b in range(1, m + 1)]
    family = []
    for mask in range(2 ** len(cells)):
        graph = build_graph(n, m, (cell for i, cell in enumerate(cells) if mask >> i & 1))
        family.extend(arrival_order_family(graph))
    return family


@dataclass
class RatioMatrix:
    """Exact ratios A[i][j] of input i under random string j (big-endian bits of j)."""

    inputs: List[OnlineInput]
    r: int
    entries: List[List[Fraction]]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return 2**self.r

    def row_mean(self, i: int) -> Fraction:
        return sum(self.entries[i], Fraction(0)) / self.cols

    @property
    def expected_ratio(self) -> Fraction:
        """E: the minimum over inputs of the expected ratio."""
        return min(self.row_mean(i) for i in range(self.rows))

    def index_of(self, online_input: OnlineInput) -> Optional[int]:
        for i, candidate in enumerate(self.inputs):
            if candidate == online_input:
                return i
        return None


def _ratio(matching: Matching, optimum: int) -> Fraction:
    return Fraction(1) if optimum == 0 else Fraction(len(matching), optimum)


def build_ratio_matrix(family: Sequence[OnlineInput], algorithm: RandomizedAlgorithm, r: int) -> RatioMatrix:
    """Replay ``algorithm`` on every input with every r-bit string.

    Raises:
        DerandomizationError: If rows * 2^r exceeds MATRIX_ENTRY_LIMIT
    """
    if len(family) * 2**r > MATRIX_ENTRY_LIMIT:
        raise DerandomizationError(
            f"{len(family)} inputs x 2^{r} strings exceed the {MATRIX_ENTRY_LIMIT}-entry limit"
        )
    entries = []
    for online_input in family:
        optimum = len(max_matching(online_input.graph))
        row = [
            _ratio(algorithm(online_input.graph, online_input.pi, FixedBitSource.from_int(j, r)), optimum)
            for j in range(2**r)
        ]
        entries.append(row)
    matrix = RatioMatrix(list(family), r, entries)
    logger.info(f"Ratio matrix {matrix.rows}x{matrix.cols}, E={matrix.expected_ratio}")
    return matrix


@dataclass
class CoveringSet:
    """Chosen strings W and, for every input, the string that covers it."""

    strings: List[int]
    cover: Dict[int, int]
    r: int
    expected_ratio: Fraction
    epsilon: Fraction
    iterations: int
    covered_per_iteration: List[int] = field(default_factory=list)
    iteration_bound: Optional[int] = None

    @property
    def threshold(self) -> Fraction:
        return (1 - self.epsilon) * self.expected_ratio

    @property
    def index_width(self) -> int:
        """ceil(log2 |W|) bits select a string."""
        return (len(self.strings) - 1).bit_length()

    def string_bits(self, column: int) -> str:
        return format(column, f"0{self.r}b") if self.r else ""

    def to_manifest(self, matrix: RatioMatrix) -> str:
        """One line per chosen string: position, hex bits, covered input ids."""
        lines = [f"# E={self.expected_ratio} eps={self.epsilon} |W|={len(self.strings)}"]
        for position, column in enumerate(self.strings):
            covered = sorted(i for i, j in self.cover.items() if j == column)
            hex_bits = format(column, "x")
            inputs = " ".join(str(i) for i in covered)
            lines.append(f"{position} bits={self.r};{hex_bits} covers: {inputs}")
        return "\n".join(lines) + "\n"


def build_covering_set(matrix: RatioMatrix, epsilon: float) -> CoveringSet:
    """Greedily pick the column with the largest sum over uncovered rows until all rows are covered.

    Raises:
        DerandomizationError: If eps is outside (0, 1) or the averaging argument fails
    """
    eps = Fraction(epsilon).limit_denominator(10**6)
    if not 0 < eps < 1:
        raise DerandomizationError(f"epsilon must lie in (0, 1), got {epsilon}")
    expected = matrix.expected_ratio
    threshold = (1 - eps) * expected
    uncovered = set(range(matrix.rows))
    columns = list(range(matrix.cols))
    cover: Dict[int, int] = {}
    strings: List[int] = []
    per_iteration: List[int] = []
    while uncovered:
        best = max(columns, key=lambda j: (sum((matrix.entries[i][j] for i in uncovered), Fraction(0)), -j))
        total = sum((matrix.entries[i][best] for i in uncovered), Fraction(0))
        if total < len(uncovered) * expected:
            raise DerandomizationError(f"Best column sums to {total} < {len(uncovered)} * E")
        hit = {i for i in uncovered if matrix.entries[i][best] >= threshold}
        if not hit:
            raise DerandomizationError(f"Column {best} covers no remaining input")
        if len(hit) * (1 - expected + eps * expected) < len(uncovered) * eps * expected:
            raise DerandomizationError(f"Column {best} covers only {len(hit)} of {len(uncovered)} inputs")
        for i in hit:
            cover[i] = best
        uncovered -= hit
        columns.remove(best)
        strings.append(best)
        per_iteration.append(len(hit))
        logger.debug(f"Chose string {best}: covered {len(hit)}, {len(uncovered)} left")

    iteration_bound = None
    if expected > 0:
        delta = (1 - expected + eps * expected) / expected
        if delta > 1 and matrix.rows > 1:
            iteration_bound = math.ceil(math.log(matrix.rows) / math.log(delta))
            if len(strings) > iteration_bound:
                logger.warning(f"Used {len(strings)} strings, above the bound {iteration_bound}")
    result = CoveringSet(
        strings=strings,
        cover=cover,
        r=matrix.r,
        expected_ratio=expected,
        epsilon=eps,
        iterations=len(strings),
        covered_per_iteration=per_iteration,
        iteration_bound=iteration_bound,
    )
    logger.info(f"Covering set of {len(strings)} strings for {matrix.rows} inputs at threshold {threshold}")
    return result


def cover_violations(cover: CoveringSet, matrix: RatioMatrix) -> List[str]:
    """Inputs whose assigned string falls below (1 - eps) E."""
    return [
        f"Input {i} gets {matrix.entries[i][cover.cover.get(i, 0)]} < {cover.threshold}"
        for i in range(matrix.rows)
        if i not in cover.cover or matrix.entries[i][cover.cover[i]] < cover.threshold
    ]


def derandomized_advice(cover: CoveringSet, matrix: RatioMatrix, online_input: OnlineInput) -> AdviceTape:
    """Oracle: self-delimited n and m, then the position in W of the covering string.

    Raises:
        DerandomizationError: If the input is not in the family
    """
    row = matrix.index_of(online_input)
    if row is None:
        raise DerandomizationError(f"Input {online_input.describe()} is not in the enumerated family")
    tape = AdviceTape()
    tape.write_self_delimited(online_input.graph.n)
    tape.write_self_delimited(online_input.graph.m)
    tape.write_fixed(cover.strings.index(cover.cover[row]), cover.index_width)
    return tape


def derandomized_run(
    cover: CoveringSet, algorithm: RandomizedAlgorithm, online_input: OnlineInput, tape: AdviceTape
) -> Matching:
    """Online side: read the string index and simulate the randomized algorithm with it."""
    tape.read_self_delimited()
    tape.read_self_delimited()
    column = cover.strings[tape.read_fixed(cover.index_width)]
    return algorithm(online_input.graph, online_input.pi, FixedBitSource.from_int(column, cover.r))


def derandomized_algorithm(
    cover: CoveringSet, matrix: RatioMatrix, algorithm: RandomizedAlgorithm, online_input: OnlineInput
) -> Tuple[Matching, int]:
    """Run oracle and online side on one input.

    Returns:
        Tuple of (matching, advice bits read)
    """
    tape = derandomized_advice(cover, matrix, online_input)
    matching = derandomized_run(cover, algorithm, online_input, tape)
    return matching, tape.bits_read


FAMILIES = {
    "semi_complete3": "randomized category (k bits per vertex) on every arrival order of the 3-semi-complete",
    "kvv2": "Ranking with a random permutation on every 2x2 graph and arrival order",
}


def family_setup(name: str, k: int = 1) -> Tuple[List[OnlineInput], RandomizedAlgorithm, int]:
    """Named toy families: (inputs, algorithm, random-bit length).

    Raises:
        DerandomizationError: For unknown family names
    """
    if name == "semi_complete3":
        graph = semi_complete(3)
        return arrival_order_family(graph), category_algorithm(k), k * graph.m
    if name == "kvv2":
        # Fisher-Yates on two vertices draws exactly one bit.
        return all_graphs_family(2, 2), kvv_algorithm, 1
    raise DerandomizationError(f"Unknown family {name!r}; choose from {sorted(FAMILIES)}")
