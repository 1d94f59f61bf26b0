"""Deterministic replay of online matching algorithms.

Ranking under an arrival order and a ranking permutation, Greedy over an
explicit edge order, category-to-permutation conversion, and the randomized
Ranking algorithm driven by a metered bit source.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from matching_advice.models import BipartiteGraph, Edge, Matching, Side, Vertex

logger = logging.getLogger(__name__)


class EngineError(ValueError):
    """Raised when an engine is given inconsistent orders or permutations."""


class BitSourceExhaustedError(RuntimeError):
    """Raised when a fixed bit string runs out."""


def _check_permutation(values: Sequence[int], size: int, what: str) -> None:
    if sorted(values) != list(range(1, size + 1)):
        raise EngineError(f"{what} must be a permutation of 1..{size}, got {list(values)}")


def _parse_ids(text: str, what: str) -> Tuple[int, ...]:
    try:
        return tuple(int(token) for token in text.split())
    except ValueError:
        raise EngineError(f"{what} must be whitespace-separated integers, got {text!r}")


@dataclass(frozen=True)
class ArrivalOrder:
    """Arrival order pi: ``sequence[t - 1]`` is the A-vertex arriving at step t."""

    sequence: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequence", tuple(self.sequence))
        _check_permutation(self.sequence, len(self.sequence), "Arrival order")

    @property
    def n(self) -> int:
        return len(self.sequence)

    @cached_property
    def _positions(self) -> Dict[int, int]:
        return {a: t for t, a in enumerate(self.sequence, start=1)}

    def position(self, a: int) -> int:
        """Return the 1-based step at which ``a`` arrives."""
        return self._positions[a]

    @classmethod
    def identity(cls, n: int) -> "ArrivalOrder":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def reverse(cls, n: int) -> "ArrivalOrder":
        return cls(tuple(range(n, 0, -1)))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "ArrivalOrder":
        sequence = list(range(1, n + 1))
        rng.shuffle(sequence)
        return cls(tuple(sequence))

    @classmethod
    def parse(cls, text: str) -> "ArrivalOrder":
        """Parse a whitespace-separated list of 1-based A-ids."""
        return cls(_parse_ids(text, "Arrival order"))

    def restrict(self, graph: BipartiteGraph) -> "ArrivalOrder":
        """Project this order onto a subgraph, translating labels to local ids."""
        local = [graph.local_a(a) for a in self.sequence]
        return ArrivalOrder(tuple(a for a in local if a is not None))

    def __str__(self) -> str:
        return " ".join(str(a) for a in self.sequence)


@dataclass(frozen=True)
class RankingPermutation:
    """Ranking permutation sigma: ``ranks[b - 1]`` is sigma(b); lower is preferred."""

    ranks: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranks", tuple(self.ranks))
        _check_permutation(self.ranks, len(self.ranks), "Ranking permutation")

    @property
    def m(self) -> int:
        return len(self.ranks)

    def rank(self, b: int) -> int:
        return self.ranks[b - 1]

    def preference_order(self) -> Tuple[int, ...]:
        """B-vertices listed from most to least preferred."""
        order = [0] * self.m
        for b, r in enumerate(self.ranks, start=1):
            order[r - 1] = b
        return tuple(order)

    @classmethod
    def identity(cls, m: int) -> "RankingPermutation":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def reverse(cls, m: int) -> "RankingPermutation":
        return cls(tuple(range(m, 0, -1)))

    @classmethod
    def from_preference(cls, order: Sequence[int]) -> "RankingPermutation":
        """Build sigma from B-vertices listed most preferred first."""
        _check_permutation(order, len(order), "Preference order")
        ranks = [0] * len(order)
        for r, b in enumerate(order, start=1):
            ranks[b - 1] = r
        return cls(tuple(ranks))

    @classmethod
    def parse(cls, text: str) -> "RankingPermutation":
        """Parse whitespace-separated ranks sigma(1) ... sigma(m)."""
        return cls(_parse_ids(text, "Ranking permutation"))

    def move_to_rank(self, b: int, new_rank: int) -> "RankingPermutation":
        """Move ``b`` to ``new_rank``, keeping the relative order of all other vertices."""
        if not 1 <= b <= self.m or not 1 <= new_rank <= self.m:
            raise EngineError(f"Cannot move b{b} to rank {new_rank} in a permutation of size {self.m}")
        order = [v for v in self.preference_order() if v != b]
        order.insert(new_rank - 1, b)
        return RankingPermutation.from_preference(order)

    def restrict(self, graph: BipartiteGraph) -> "RankingPermutation":
        """Relative ranks of the B-vertices of a subgraph, by their labels."""
        labels = sorted(range(1, graph.m + 1), key=lambda b: self.rank(graph.b_label(b)))
        return RankingPermutation.from_preference(labels)

    def __str__(self) -> str:
        return " ".join(str(r) for r in self.ranks)


@dataclass(frozen=True)
class CategoryAssignment:
    """Category function c: B -> {1..2^k}; ``categories[b - 1]`` is c(b).

    ``strict`` enforces 2^k < m, which the randomized category algorithm requires.
    """

    k: int
    categories: Tuple[int, ...]
    strict: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        if self.k < 1:
            raise EngineError(f"Category bit count k must be at least 1, got {self.k}")
        limit = 2**self.k
        for b, value in enumerate(self.categories, start=1):
            if not 1 <= value <= limit:
                raise EngineError(f"Category of b{b} is {value}, outside 1..{limit}")
        if self.strict and limit >= self.m:
            raise EngineError(f"2^k = {limit} must be smaller than m = {self.m}")

    @property
    def m(self) -> int:
        return len(self.categories)

    @property
    def num_categories(self) -> int:
        return 2**self.k

    def category(self, b: int) -> int:
        return self.categories[b - 1]

    def members(self, category: int) -> Tuple[int, ...]:
        """B-vertices of one category, ascending."""
        return tuple(b for b, value in enumerate(self.categories, start=1) if value == category)


class BitSource:
    """Source of random bits that counts every bit handed out."""

    def __init__(self) -> None:
        self.bits_consumed = 0

    def _draw(self) -> int:
        raise NotImplementedError

    def next_bit(self) -> int:
        bit = self._draw()
        self.bits_consumed += 1
        return bit

    def take(self, count: int) -> int:
        """Read ``count`` bits as a big-endian integer."""
        value = 0
        for _ in range(count):
            value = (value << 1) | self.next_bit()
        return value

    def uniform_int(self, upper: int) -> int:
        """Uniform integer in [0, upper) by rejection sampling.

        Each attempt reads bit_length(upper - 1) bits; ``upper == 1`` reads none.
        """
        if upper < 1:
            raise EngineError(f"Upper bound must be positive, got {upper}")
        width = (upper - 1).bit_length()
        while True:
            value = self.take(width)
            if value < upper:
                return value


class MeteredBitSource(BitSource):
    """Seeded random bits; identical seeds give identical streams."""

    def __init__(self, seed: int) -> None:
        super().__init__()
        self.seed = seed
        self._random = random.Random(seed)
        self._buffer = 0
        self._buffered = 0

    def _draw(self) -> int:
        if self._buffered == 0:
            self._buffer = self._random.getrandbits(64)
            self._buffered = 64
        self._buffered -= 1
        return (self._buffer >> self._buffered) & 1


class FixedBitSource(BitSource):
    """Replays an explicit bit string."""

    def __init__(self, bits: Iterable[int]) -> None:
        super().__init__()
        self.bits = tuple(int(bit) for bit in bits)
        if any(bit not in (0, 1) for bit in self.bits):
            raise EngineError(f"Bit string may contain only 0 and 1, got {self.bits}")

    @classmethod
    def from_int(cls, value: int, width: int) -> "FixedBitSource":
        """Big-endian bits of ``value`` over ``width`` positions."""
        return cls((value >> shift) & 1 for shift in range(width - 1, -1, -1))

    def _draw(self) -> int:
        if self.bits_consumed >= len(self.bits):
            raise BitSourceExhaustedError(f"Fixed bit string of length {len(self.bits)} exhausted")
        return self.bits[self.bits_consumed]


class OnlineRun(NamedTuple):
    """Output of a randomized online run."""

    matching: Matching
    bits_used: int


def _check_sizes(graph: BipartiteGraph, pi: ArrivalOrder, sigma: Optional[RankingPermutation] = None) -> None:
    if pi.n != graph.n:
        raise EngineError(f"Arrival order covers {pi.n} vertices but the graph has n={graph.n}")
    if sigma is not None and sigma.m != graph.m:
        raise EngineError(f"Ranking permutation covers {sigma.m} vertices but the graph has m={graph.m}")


def ranking_run(graph: BipartiteGraph, pi: ArrivalOrder, sigma: RankingPermutation) -> Matching:
    """Match every arriving A-vertex to its free neighbor of minimum rank.

    Raises:
        EngineError: If pi or sigma does not fit the graph
    """
    _check_sizes(graph, pi, sigma)
    taken = [False] * (graph.m + 1)
    pairs: List[Edge] = []
    for a in pi.sequence:
        best: Optional[int] = None
        best_rank = 0
        for b in graph.neighbors(a):
            if taken[b]:
                continue
            r = sigma.ranks[b - 1]
            assert best is None or r != best_rank, "ranks must be distinct"
            if best is None or r < best_rank:
                best, best_rank = b, r
        if best is not None:
            taken[best] = True
            pairs.append((a, best))
    return Matching(frozenset(pairs))


def greedy_edge_run(graph: BipartiteGraph, omega: Sequence[Edge]) -> Matching:
    """Insert each edge of ``omega`` whose endpoints are both still free.

    Raises:
        EngineError: If omega contains a non-edge, repeats an edge or misses one
    """
    seen: Set[Edge] = set()
    matched_a: Set[int] = set()
    matched_b: Set[int] = set()
    pairs: List[Edge] = []
    for a, b in omega:
        if not graph.has_edge(a, b):
            raise EngineError(f"Edge order mentions ({a}, {b}), which is not an edge")
        if (a, b) in seen:
            raise EngineError(f"Edge order lists ({a}, {b}) twice")
        seen.add((a, b))
        if a not in matched_a and b not in matched_b:
            matched_a.add(a)
            matched_b.add(b)
            pairs.append((a, b))
    if len(seen) != graph.num_edges:
        raise EngineError(f"Edge order lists {len(seen)} of {graph.num_edges} edges")
    return Matching(frozenset(pairs))


def ranking_edge_order(graph: BipartiteGraph, pi: ArrivalOrder, sigma: RankingPermutation) -> List[Edge]:
    """Edges sorted by (arrival step of a, rank of b); Greedy over it reproduces Ranking."""
    _check_sizes(graph, pi, sigma)
    order: List[Edge] = []
    for a in pi.sequence:
        order.extend((a, b) for b in sorted(graph.neighbors(a), key=sigma.rank))
    return order


def arrival_edge_order(graph: BipartiteGraph, pi: ArrivalOrder) -> List[Edge]:
    """Edges sorted by arrival step of a, then ascending B-id."""
    _check_sizes(graph, pi)
    return [(a, b) for a in pi.sequence for b in graph.neighbors(a)]


def category_to_permutation(c: CategoryAssignment, m: int) -> RankingPermutation:
    """Order B by (category, id): sigma_c(b1) < sigma_c(b2) iff c(b1) < c(b2) or equal and b1 < b2."""
    if c.m != m:
        raise EngineError(f"Category assignment covers {c.m} vertices, expected {m}")
    order = sorted(range(1, m + 1), key=lambda b: (c.category(b), b))
    return RankingPermutation.from_preference(order)


def random_permutation(m: int, rng: BitSource) -> RankingPermutation:
    """Uniform permutation by Fisher-Yates over descending ranges."""
    order = list(range(1, m + 1))
    for i in range(m - 1, 0, -1):
        j = rng.uniform_int(i + 1)
        order[i], order[j] = order[j], order[i]
    return RankingPermutation.from_preference(order)


def kvv_run(graph: BipartiteGraph, pi: ArrivalOrder, rng: BitSource) -> OnlineRun:
    """Run Ranking with a uniformly random permutation and report the bits it took."""
    start = rng.bits_consumed
    sigma = random_permutation(graph.m, rng)
    matching = ranking_run(graph, pi, sigma)
    return OnlineRun(matching, rng.bits_consumed - start)


class DiffKind(str, Enum):
    """Shape of the symmetric difference of two matchings."""

    IDENTICAL = "identical"
    SINGLE_PATH = "single_path"
    OTHER = "other"


class PathDiff(NamedTuple):
    kind: DiffKind
    path: Tuple[Vertex, ...] = ()


def alternating_path_diff(m1: Matching, m2: Matching, start: Optional[Vertex] = None) -> PathDiff:
    """Classify M1 xor M2 as identical, a single alternating path, or anything else.

    Cycles and multiple components are "other". When ``start`` is given, the
    path must have it as an endpoint; the returned path begins there.
    """
    difference = m1.pairs ^ m2.pairs
    if not difference:
        return PathDiff(DiffKind.IDENTICAL)
    adjacency: Dict[Vertex, List[Vertex]] = {}
    for a, b in difference:
        va, vb = Vertex(Side.A, a), Vertex(Side.B, b)
        adjacency.setdefault(va, []).append(vb)
        adjacency.setdefault(vb, []).append(va)
    endpoints = sorted(
        (v for v, nbrs in adjacency.items() if len(nbrs) == 1), key=lambda v: (v.side.value, v.id)
    )
    if len(endpoints) != 2:
        return PathDiff(DiffKind.OTHER)
    origin = endpoints[0]
    if start is not None:
        if start not in endpoints:
            return PathDiff(DiffKind.OTHER)
        origin = start
    path = [origin]
    previous: Optional[Vertex] = None
    current = origin
    while True:
        following = [v for v in adjacency[current] if v != previous]
        if not following:
            break
        previous, current = current, following[0]
        path.append(current)
    if len(path) != len(adjacency):
        return PathDiff(DiffKind.OTHER)
    return PathDiff(DiffKind.SINGLE_PATH, tuple(path))


def upgrade_lemma_holds(
    graph: BipartiteGraph, pi: ArrivalOrder, sigma: RankingPermutation, b: int, new_rank: int
) -> bool:
    """Check the upgrade property for moving an unmatched ``b`` up to ``new_rank``.

    Every A-vertex matched under sigma must stay matched under the upgraded
    permutation sigma', to a vertex sigma' ranks no worse than its old partner.
    Vacuously true when ``b`` is matched or the move is not an upgrade.
    """
    before = ranking_run(graph, pi, sigma)
    if before.partner_of_b(b) is not None or new_rank >= sigma.rank(b):
        return True
    upgraded = sigma.move_to_rank(b, new_rank)
    after = ranking_run(graph, pi, upgraded)
    for a, old in before.pairs:
        new = after.partner_of_a(a)
        if new is None or upgraded.rank(new) > upgraded.rank(old):
            logger.debug(f"Upgrade of b{b} to rank {new_rank} lost a{a}: {old} -> {new}")
            return False
    return True
