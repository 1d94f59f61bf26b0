"""Data models for bipartite matching instances."""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class GraphError(ValueError):
    """Raised when a graph, a vertex reference or an instance file is invalid."""


class MatchingError(ValueError):
    """Raised when a set of pairs is not a matching (of a given graph)."""


class Side(str, Enum):
    """Side of the bipartition a vertex belongs to."""

    A = "a"
    B = "b"


@dataclass(frozen=True)
class Vertex:
    """A vertex identified by its side and 1-based id."""

    side: Side
    id: int

    def __str__(self) -> str:
        return f"{self.side.value}{self.id}"


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph G = (A, B, E) with A = [n] and B = [m].

    ``adjacency[a - 1]`` holds the sorted B-neighbors of A-vertex ``a``. Graphs
    produced by surgery carry ``a_labels`` / ``b_labels`` mapping their local
    ids back to the ids of the instance they were cut from.
    """

    n: int
    m: int
    adjacency: Tuple[Tuple[int, ...], ...]
    a_labels: Tuple[int, ...] = ()
    b_labels: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise GraphError(f"Vertex counts must be nonnegative, got n={self.n}, m={self.m}")
        if len(self.adjacency) != self.n:
            raise GraphError(
                f"Adjacency has {len(self.adjacency)} rows but n={self.n}"
            )
        for a, neighbors in enumerate(self.adjacency, start=1):
            previous = 0
            for b in neighbors:
                if not 1 <= b <= self.m:
                    raise GraphError(f"Edge ({a}, {b}) has B-endpoint outside 1..{self.m}")
                if b <= previous:
                    raise GraphError(f"Neighbors of a{a} are not strictly ascending: {neighbors}")
                previous = b
        if not self.a_labels:
            object.__setattr__(self, "a_labels", tuple(range(1, self.n + 1)))
        if not self.b_labels:
            object.__setattr__(self, "b_labels", tuple(range(1, self.m + 1)))
        if len(self.a_labels) != self.n or len(self.b_labels) != self.m:
            raise GraphError("Label maps must cover every vertex exactly once")

    @property
    def num_edges(self) -> int:
        """Number of edges."""
        return sum(len(neighbors) for neighbors in self.adjacency)

    @property
    def a_vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def b_vertices(self) -> range:
        return range(1, self.m + 1)

    def neighbors(self, a: int) -> Tuple[int, ...]:
        """Return the sorted B-neighbors of A-vertex ``a``."""
        return self.adjacency[a - 1]

    def b_neighbors(self, b: int) -> Tuple[int, ...]:
        """Return the sorted A-neighbors of B-vertex ``b``."""
        return self._reverse_adjacency[b - 1]

    def degree(self, a: int) -> int:
        return len(self.adjacency[a - 1])

    def has_edge(self, a: int, b: int) -> bool:
        return 1 <= a <= self.n and b in self._neighbor_sets[a - 1]

    def has_vertex(self, vertex: Vertex) -> bool:
        limit = self.n if vertex.side is Side.A else self.m
        return 1 <= vertex.id <= limit

    def edges(self) -> Iterator[Edge]:
        """Iterate over all edges, ordered by A-vertex then B-vertex."""
        for a, neighbors in enumerate(self.adjacency, start=1):
            for b in neighbors:
                yield (a, b)

    def a_label(self, a: int) -> int:
        return self.a_labels[a - 1]

    def b_label(self, b: int) -> int:
        return self.b_labels[b - 1]

    def local_a(self, label: int) -> Optional[int]:
        """Return the local id of the A-vertex carrying ``label``, if present."""
        return self._a_label_index.get(label)

    def local_b(self, label: int) -> Optional[int]:
        """Return the local id of the B-vertex carrying ``label``, if present."""
        return self._b_label_index.get(label)

    def has_perfect_matching_size(self, size: int) -> bool:
        """Check whether a matching of ``size`` would saturate both sides."""
        return self.n == self.m == size

    @cached_property
    def _neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(neighbors) for neighbors in self.adjacency)

    @cached_property
    def _reverse_adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        reverse: List[List[int]] = [[] for _ in range(self.m)]
        for a, b in self.edges():
            reverse[b - 1].append(a)
        return tuple(tuple(row) for row in reverse)

    @cached_property
    def _a_label_index(self) -> Dict[int, int]:
        return {label: a for a, label in enumerate(self.a_labels, start=1)}

    @cached_property
    def _b_label_index(self) -> Dict[int, int]:
        return {label: b for b, label in enumerate(self.b_labels, start=1)}

    def summary(self) -> str:
        """Return a one-line summary of the graph."""
        return f"BipartiteGraph(n={self.n}, m={self.m}, edges={self.num_edges})"


def build_graph(n: int, m: int, edges: Iterable[Edge]) -> BipartiteGraph:
    """Build a graph from an edge list, dropping duplicate edges.

    Args:
        n: Number of A-vertices
        m: Number of B-vertices
        edges: Iterable of (a, b) pairs with 1-based ids

    Returns:
        BipartiteGraph with sorted, deduplicated adjacency lists

    Raises:
        GraphError: If an endpoint lies outside its side's id range
    """
    if n < 0 or m < 0:
        raise GraphError(f"Vertex counts must be nonnegative, got n={n}, m={m}")
    rows: List[set] = [set() for _ in range(n)]
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= m):
            raise GraphError(f"Edge ({a}, {b}) is out of range for n={n}, m={m}")
        rows[a - 1].add(b)
    return BipartiteGraph(n=n, m=m, adjacency=tuple(tuple(sorted(row)) for row in rows))


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint (a, b) edges with lookup by endpoint."""

    pairs: FrozenSet[Edge] = frozenset()

    def __post_init__(self) -> None:
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        seen_a: set = set()
        seen_b: set = set()
        for a, b in sorted(pairs):
            if a in seen_a:
                raise MatchingError(f"A-vertex {a} appears in more than one pair")
            if b in seen_b:
                raise MatchingError(f"B-vertex {b} appears in more than one pair")
            seen_a.add(a)
            seen_b.add(b)

    @cached_property
    def _a_to_b(self) -> Dict[int, int]:
        return {a: b for a, b in self.pairs}

    @cached_property
    def _b_to_a(self) -> Dict[int, int]:
        return {b: a for a, b in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.pairs))

    def __contains__(self, edge: object) -> bool:
        return edge in self.pairs

    def partner_of_a(self, a: int) -> Optional[int]:
        """Return M(a) for an A-vertex, or None if unmatched."""
        return self._a_to_b.get(a)

    def partner_of_b(self, b: int) -> Optional[int]:
        """Return M(b) for a B-vertex, or None if unmatched."""
        return self._b_to_a.get(b)

    def partner(self, vertex: Vertex) -> Optional[Vertex]:
        """Return the vertex matched to ``vertex``, if any."""
        if vertex.side is Side.A:
            b = self.partner_of_a(vertex.id)
            return None if b is None else Vertex(Side.B, b)
        a = self.partner_of_b(vertex.id)
        return None if a is None else Vertex(Side.A, a)

    @property
    def a_vertices(self) -> FrozenSet[int]:
        """A-side of V(M)."""
        return frozenset(self._a_to_b)

    @property
    def b_vertices(self) -> FrozenSet[int]:
        """B-side of V(M)."""
        return frozenset(self._b_to_a)

    def validate(self, graph: BipartiteGraph) -> None:
        """Check that every pair is an edge of ``graph``.

        Raises:
            MatchingError: If a pair is not an edge
        """
        for a, b in sorted(self.pairs):
            if not graph.has_edge(a, b):
                raise MatchingError(f"Pair ({a}, {b}) is not an edge of {graph.summary()}")

    def relabel(self, graph: BipartiteGraph) -> "Matching":
        """Translate a matching on ``graph`` to the ids of the graph it was cut from."""
        return Matching(frozenset((graph.a_label(a), graph.b_label(b)) for a, b in self.pairs))

    def __repr__(self) -> str:
        return f"Matching({sorted(self.pairs)})"


def parse_instance(text: str) -> BipartiteGraph:
    """Parse the line-oriented instance format.

    Line 1 holds ``n m``; every further line ``a: b1 b2 ...`` lists the
    neighbors of A-vertex ``a``. ``#`` starts a comment. A-vertices without a
    line have no neighbors.

    Args:
        text: Instance file contents

    Returns:
        Parsed graph

    Raises:
        GraphError: On malformed lines, duplicate rows or out-of-range ids
    """
    header: Optional[Tuple[int, int]] = None
    rows: Dict[int, List[int]] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"Line {line_number}: expected 'n m', got {line!r}")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise GraphError(f"Line {line_number}: non-integer header {line!r}")
            continue
        if ":" not in line:
            raise GraphError(f"Line {line_number}: expected 'a: b1 b2 ...', got {line!r}")
        head, tail = line.split(":", 1)
        try:
            a = int(head)
            neighbors = [int(token) for token in tail.split()]
        except ValueError:
            raise GraphError(f"Line {line_number}: non-integer vertex id in {line!r}")
        if a in rows:
            raise GraphError(f"Line {line_number}: A-vertex {a} listed twice")
        rows[a] = neighbors
    if header is None:
        raise GraphError("Instance is empty: missing 'n m' header")
    n, m = header
    return build_graph(n, m, ((a, b) for a, neighbors in rows.items() for b in neighbors))


def format_instance(graph: BipartiteGraph, comment: Optional[str] = None) -> str:
    """Serialize a graph to the instance format."""
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"{graph.n} {graph.m}")
    for a in graph.a_vertices:
        neighbors = " ".join(str(b) for b in graph.neighbors(a))
        lines.append(f"{a}: {neighbors}".rstrip())
    return "\n".join(lines) + "\n"


def load_instance(path: Union[str, Path]) -> BipartiteGraph:
    """Load an instance file.

    Raises:
        FileNotFoundError: If the file does not exist
        GraphError: If the file is malformed
    """
    with open(path, "r") as f:
        graph = parse_instance(f.read())
    logger.info(f"Loaded instance {graph.summary()} from {path}")
    return graph


def save_instance(graph: BipartiteGraph, path: Union[str, Path], comment: Optional[str] = None) -> None:
    """Write an instance file, creating parent directories as needed."""
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w") as f:
        f.write(format_instance(graph, comment))
    logger.info(f"Saved instance {graph.summary()} to {output}")
