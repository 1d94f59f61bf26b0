"""Instances on which every Ranking algorithm from a small family stays near n/2.

The B-side is split into blocks that are monotone under every given
permutation; each block hosts a gadget H_z on which Ranking matches about half
of the vertices whether the ranks increase or decrease along the block.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from matching_advice.engine import ArrivalOrder, RankingPermutation, ranking_run
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, Edge, build_graph

logger = logging.getLogger(__name__)


class PartitionError(ValueError):
    """Raised when monotone blocks of the required size cannot be extracted."""


def _gadget_edges(us: Sequence[int], vs: Sequence[int]) -> List[Edge]:
    """Edges of H_z with u_i -> us[i-1] and v_j -> vs[j-1], z = len(vs) even."""
    z = len(vs)
    half = z // 2
    edges = []
    for i in range(1, z + 1):
        if i <= half:
            targets = [j for j in (2 * i - 1, 2 * i, 2 * i + 1) if j <= z]
        else:
            targets = [2 * i - z - 1]
        edges.extend((us[i - 1], vs[j - 1]) for j in targets)
    return edges


def h_gadget(z: int) -> BipartiteGraph:
    """Gadget H_z: u_i sees v_(2i-1), v_2i, v_(2i+1) for i <= z/2 and v_(2i-z-1) beyond.

    With u's arriving in id order, Ranking matches z/2 vertices when ranks
    increase with the v-id, z/2 + 1 when they decrease, while a perfect
    matching exists. The out-of-range neighbor v_(z+1) of u_(z/2) is dropped.

    Raises:
        ValueError: If z is odd or smaller than 4
    """
    if z < 4 or z % 2:
        raise ValueError(f"Gadget size must be even and at least 4, got {z}")
    ids = list(range(1, z + 1))
    return build_graph(z, z, _gadget_edges(ids, ids))


def h_gadget_perfect_matching(z: int) -> List[Edge]:
    """Witness: u_i - v_2i for i <= z/2 and u_i - v_(2i-z-1) beyond."""
    half = z // 2
    return [(i, 2 * i) if i <= half else (i, 2 * i - z - 1) for i in range(1, z + 1)]


def _longest_increasing(values: Sequence[int]) -> List[int]:
    """Indices of a longest strictly increasing subsequence (patience sorting)."""
    tails: List[int] = []
    tail_index: List[int] = []
    parent = [-1] * len(values)
    for i, value in enumerate(values):
        pile = bisect.bisect_left(tails, value)
        if pile == len(tails):
            tails.append(value)
            tail_index.append(i)
        else:
            tails[pile] = value
            tail_index[pile] = i
        parent[i] = tail_index[pile - 1] if pile > 0 else -1
    result = []
    i = tail_index[-1] if tail_index else -1
    while i >= 0:
        result.append(i)
        i = parent[i]
    return result[::-1]


def longest_monotone_subsequence(values: Sequence[int]) -> Tuple[List[int], bool]:
    """Indices of a longest monotone subsequence of distinct values.

    Returns:
        Tuple of (ascending indices, True if the subsequence increases)
    """
    increasing = _longest_increasing(values)
    decreasing = _longest_increasing([-v for v in values])
    if len(decreasing) > len(increasing):
        return decreasing, False
    return increasing, True


def max_admissible_permutations(n: int, epsilon: float) -> int:
    """floor(log log n - log log(1/eps) - 2), logarithms base 2."""
    if n < 4 or not 0 < epsilon < 0.5:
        return 0
    return math.floor(math.log2(math.log2(n)) - math.log2(math.log2(1 / epsilon)) - 2)


@dataclass(frozen=True)
class MonotoneBlocks:
    """Disjoint B-blocks monotone under every permutation, plus the leftover set C."""

    blocks: Tuple[Tuple[int, ...], ...]
    leftover: Tuple[int, ...]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)


def _min_block_size(epsilon: float) -> int:
    return math.ceil(Fraction(1) / Fraction(epsilon).limit_denominator(10**6))


def es_partition(
    perms: Sequence[RankingPermutation], epsilon: float, strict: bool = False
) -> MonotoneBlocks:
    """Split B = [n] into blocks of size >= 1/eps monotone under every permutation, leaving <= sqrt(n).

    Each round narrows the remaining set by one longest monotone subsequence
    per permutation and removes the survivors as a block.

    Args:
        perms: Permutations of the same size n
        epsilon: Block size parameter in (0, 1)
        strict: Reject up front when len(perms) exceeds max_admissible_permutations

    Raises:
        PartitionError: If a round cannot produce a large enough block
    """
    if not perms:
        raise PartitionError("At least one permutation is required")
    n = perms[0].m
    if any(p.m != n for p in perms):
        raise PartitionError("All permutations must have the same size")
    if not 0 < epsilon < 1:
        raise PartitionError(f"epsilon must lie in (0, 1), got {epsilon}")
    admissible = max_admissible_permutations(n, epsilon)
    if strict and len(perms) > admissible:
        raise PartitionError(
            f"{len(perms)} permutations exceed the admissible {admissible} for n={n}, eps={epsilon}"
        )
    min_size = _min_block_size(epsilon)
    remaining = list(range(1, n + 1))
    blocks: List[Tuple[int, ...]] = []
    while len(remaining) ** 2 > n:
        candidate = remaining
        for perm in perms:
            indices, _ = longest_monotone_subsequence([perm.rank(b) for b in candidate])
            candidate = [candidate[i] for i in indices]
        if len(candidate) < min_size:
            raise PartitionError(
                f"Extracted block of size {len(candidate)} < {min_size} with {len(remaining)} vertices "
                f"left; at most {admissible} permutations are admissible for n={n}, eps={epsilon}"
            )
        blocks.append(tuple(candidate))
        chosen = set(candidate)
        remaining = [b for b in remaining if b not in chosen]
        logger.debug(f"Extracted block of size {len(candidate)}, {len(remaining)} vertices left")
    return MonotoneBlocks(tuple(blocks), tuple(remaining))


def _is_monotone(values: Sequence[int]) -> bool:
    pairs = list(zip(values, values[1:]))
    return all(x < y for x, y in pairs) or all(x > y for x, y in pairs)


def validate_partition(
    partition: MonotoneBlocks, perms: Sequence[RankingPermutation], epsilon: float
) -> List[str]:
    """Independently check disjointness, coverage, sizes and monotonicity; return the problems found."""
    problems = []
    n = perms[0].m if perms else 0
    seen: List[int] = [b for block in partition.blocks for b in block] + list(partition.leftover)
    if sorted(seen) != list(range(1, n + 1)):
        problems.append("Blocks and leftover do not partition 1..n")
    if len(partition.leftover) ** 2 > n:
        problems.append(f"Leftover has {len(partition.leftover)} vertices, more than sqrt({n})")
    for number, block in enumerate(partition.blocks, start=1):
        if len(block) * Fraction(epsilon).limit_denominator(10**6) < 1:
            problems.append(f"Block {number} has size {len(block)} < 1/eps")
        ordered = sorted(block)
        for p, perm in enumerate(perms, start=1):
            if not _is_monotone([perm.rank(b) for b in ordered]):
                problems.append(f"Block {number} is not monotone under permutation {p}")
    return problems


@dataclass(frozen=True)
class RankingLowerBound:
    """Constructed instance together with the quantities its analysis bounds."""

    graph: BipartiteGraph
    pi: ArrivalOrder
    partition: MonotoneBlocks
    a_blocks: Tuple[Tuple[int, ...], ...]
    a_leftover: Tuple[int, ...]
    epsilon: float

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def proof_sum(self) -> Fraction:
        """sum(|B_i|/2 + 2) + |C|."""
        return sum((Fraction(len(block), 2) + 2 for block in self.partition.blocks), Fraction(0)) + len(
            self.partition.leftover
        )

    @property
    def closed_bound(self) -> float:
        """n/2 + 2 eps' n + sqrt(n) with eps' = eps/2."""
        return self.n / 2 + self.epsilon * self.n + math.sqrt(self.n)

    @property
    def ranking_bound(self) -> float:
        """n/2 + eps n + sqrt(n) + 2 * (#blocks)."""
        return self.closed_bound + 2 * self.partition.num_blocks

    def ranking_size(self, sigma: RankingPermutation) -> int:
        return len(ranking_run(self.graph, self.pi, sigma))

    def violations(self, perms: Sequence[RankingPermutation]) -> List[str]:
        """Check perfect matching, the proof sum and Ranking's size for every permutation."""
        problems = []
        if len(max_matching(self.graph)) != self.n:
            problems.append("Instance has no perfect matching")
        if self.proof_sum > self.closed_bound:
            problems.append(f"Proof sum {self.proof_sum} exceeds {self.closed_bound}")
        for number, sigma in enumerate(perms, start=1):
            size = self.ranking_size(sigma)
            if size > self.ranking_bound:
                problems.append(f"Ranking under permutation {number} matched {size} > {self.ranking_bound}")
        return problems


def ranking_lb_instance(
    perms: Sequence[RankingPermutation], pi: ArrivalOrder, epsilon: float, strict: bool = False
) -> RankingLowerBound:
    """Build the instance for permutations ``perms`` and arrival order ``pi``.

    Blocks come from es_partition with eps' = eps/2. A-vertices are assigned in
    arrival order block by block, C last. An even block of size p hosts H_p, an
    odd one H_(p-1) plus one edge; blocks under size 4 and C get a perfect
    matching. B-vertices keep their ids, so each permutation applies unchanged.

    Raises:
        PartitionError: If the partition cannot be built
    """
    width = perms[0].m if perms else 0
    if pi.n != width:
        raise PartitionError(f"Arrival order has {pi.n} vertices, permutations have {width}")
    partition = es_partition(perms, epsilon / 2, strict=strict)
    arrivals = list(pi.sequence)
    edges: List[Edge] = []
    a_blocks: List[Tuple[int, ...]] = []
    cursor = 0
    for block in partition.blocks:
        vs = sorted(block)
        us = arrivals[cursor:cursor + len(vs)]
        cursor += len(vs)
        a_blocks.append(tuple(us))
        p = len(vs)
        if p < 4:
            edges.extend(zip(us, vs))
        elif p % 2 == 0:
            edges.extend(_gadget_edges(us, vs))
        else:
            edges.extend(_gadget_edges(us[:-1], vs[:-1]))
            edges.append((us[-1], vs[-1]))
    a_leftover = tuple(arrivals[cursor:])
    edges.extend(zip(a_leftover, sorted(partition.leftover)))
    n = pi.n
    instance = RankingLowerBound(
        graph=build_graph(n, n, edges),
        pi=pi,
        partition=partition,
        a_blocks=tuple(a_blocks),
        a_leftover=a_leftover,
        epsilon=epsilon,
    )
    logger.info(
        f"Built ranking lower-bound instance: n={n}, {partition.num_blocks} blocks,"
        f" |C|={len(partition.leftover)}"
    )
    return instance
