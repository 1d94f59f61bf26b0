"""Exact offline matching oracle and graph surgery."""

import logging
from collections import deque
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from matching_advice.models import (
    BipartiteGraph,
    GraphError,
    Matching,
    Side,
    Vertex,
)

logger = logging.getLogger(__name__)

# Exhaustive enumeration is exponential; keep it to toy sizes.
BRUTE_FORCE_LIMIT = 8

# (a_0, ..., a_{t-1}), (b_0, ..., b_{t-1}): new edges (a_i, b_i); removed edges (a_i, b_{i-1}).
AugmentingPath = Tuple[Tuple[int, ...], Tuple[int, ...]]


def _layer_a_vertices(
    graph: BipartiteGraph, mate_b: Dict[int, int], free_a: Sequence[int]
) -> Tuple[Dict[int, int], Optional[int]]:
    """Breadth-first layering from the free A-vertices.

    Returns:
        Tuple of (layer index per reached A-vertex, index of the first layer
        that touches a free B-vertex or None if no augmenting path exists)
    """
    layer = {a: 0 for a in free_a}
    queue = deque(free_a)
    found: Optional[int] = None
    while queue:
        a = queue.popleft()
        depth = layer[a]
        if found is not None and depth >= found:
            continue
        for b in graph.neighbors(a):
            partner = mate_b.get(b)
            if partner is None:
                if found is None:
                    found = depth
            elif partner not in layer:
                layer[partner] = depth + 1
                queue.append(partner)
    return layer, found


def _extend_from(
    graph: BipartiteGraph,
    root: int,
    layer: Dict[int, int],
    target: int,
    mate_b: Dict[int, int],
    used_b: Set[int],
    dead_a: Set[int],
) -> Optional[AugmentingPath]:
    """Depth-first search along the layering for one path ending at a free B-vertex."""
    path_a = [root]
    path_b: List[int] = []
    stack: List[Iterator[int]] = [iter(graph.neighbors(root))]
    while stack:
        a = path_a[-1]
        advanced = False
        for b in stack[-1]:
            if b in used_b:
                continue
            partner = mate_b.get(b)
            if partner is None:
                if layer[a] == target:
                    path_b.append(b)
                    return tuple(path_a), tuple(path_b)
                continue
            if partner in dead_a or layer.get(partner) != layer[a] + 1:
                continue
            path_b.append(b)
            path_a.append(partner)
            stack.append(iter(graph.neighbors(partner)))
            advanced = True
            break
        if not advanced:
            dead_a.add(a)
            stack.pop()
            path_a.pop()
            if path_b:
                path_b.pop()
    return None


def shortest_augmenting_paths(
    graph: BipartiteGraph, matching: Matching, max_layers: Optional[int] = None
) -> List[AugmentingPath]:
    """Find a maximal set of vertex-disjoint shortest augmenting paths.

    Args:
        graph: The graph
        matching: Current matching of ``graph``
        max_layers: If given, return nothing when the shortest augmenting path
            has more than ``max_layers`` unmatched edges (length 2t-1 has t)

    Returns:
        Paths in order of their free A-endpoint; empty if no (short enough) path exists
    """
    mate_b = {b: a for a, b in matching.pairs}
    free_a = [a for a in graph.a_vertices if matching.partner_of_a(a) is None]
    layer, found = _layer_a_vertices(graph, mate_b, free_a)
    if found is None:
        return []
    if max_layers is not None and found + 1 > max_layers:
        return []
    paths: List[AugmentingPath] = []
    used_b: Set[int] = set()
    dead_a: Set[int] = set()
    for root in free_a:
        path = _extend_from(graph, root, layer, found, mate_b, used_b, dead_a)
        if path is None:
            continue
        paths.append(path)
        used_b.update(path[1])
        dead_a.update(path[0])
    return paths


def augment(matching: Matching, paths: Iterable[AugmentingPath]) -> Matching:
    """Return the symmetric difference of ``matching`` with vertex-disjoint paths."""
    a_to_b = {a: b for a, b in matching.pairs}
    for path_a, path_b in paths:
        for a, b in zip(path_a, path_b):
            a_to_b[a] = b
    return Matching(frozenset(a_to_b.items()))


def max_matching(graph: BipartiteGraph) -> Matching:
    """Compute a maximum matching with the Hopcroft-Karp phase structure.

    Args:
        graph: Bipartite graph

    Returns:
        A maximum matching of ``graph``
    """
    matching = Matching()
    phases = 0
    while True:
        paths = shortest_augmenting_paths(graph, matching)
        if not paths:
            break
        matching = augment(matching, paths)
        phases += 1
    logger.debug(f"Maximum matching of size {len(matching)} on {graph.summary()} after {phases} phases")
    return matching


def brute_force_matching(graph: BipartiteGraph) -> Matching:
    """Find a maximum matching by exhaustive search.

    Raises:
        GraphError: If either side exceeds BRUTE_FORCE_LIMIT vertices
    """
    if graph.n > BRUTE_FORCE_LIMIT or graph.m > BRUTE_FORCE_LIMIT:
        raise GraphError(
            f"Exhaustive search is limited to {BRUTE_FORCE_LIMIT} vertices per side, "
            f"got n={graph.n}, m={graph.m}"
        )
    best: List[Tuple[int, int]] = []
    current: List[Tuple[int, int]] = []
    taken: Set[int] = set()

    def search(a: int) -> None:
        nonlocal best
        if len(current) + (graph.n - a + 1) <= len(best):
            return
        if a > graph.n:
            best = list(current)
            return
        for b in graph.neighbors(a):
            if b not in taken:
                taken.add(b)
                current.append((a, b))
                search(a + 1)
                current.pop()
                taken.discard(b)
        search(a + 1)

    search(1)
    return Matching(frozenset(best))


def induced_subgraph(
    graph: BipartiteGraph, a_subset: Iterable[int], b_subset: Iterable[int]
) -> BipartiteGraph:
    """Return the subgraph induced by A' and B', relabeled to 1..|A'| and 1..|B'|.

    Local ids follow ascending original ids; ``a_labels`` / ``b_labels`` of the
    result point back to the labels of ``graph``.

    Raises:
        GraphError: If a vertex lies outside the graph
    """
    a_kept = sorted(set(a_subset))
    b_kept = sorted(set(b_subset))
    for a in a_kept:
        if not 1 <= a <= graph.n:
            raise GraphError(f"A-vertex {a} is not in {graph.summary()}")
    for b in b_kept:
        if not 1 <= b <= graph.m:
            raise GraphError(f"B-vertex {b} is not in {graph.summary()}")
    b_local = {b: index for index, b in enumerate(b_kept, start=1)}
    adjacency = tuple(
        tuple(b_local[b] for b in graph.neighbors(a) if b in b_local) for a in a_kept
    )
    return BipartiteGraph(
        n=len(a_kept),
        m=len(b_kept),
        adjacency=adjacency,
        a_labels=tuple(graph.a_label(a) for a in a_kept),
        b_labels=tuple(graph.b_label(b) for b in b_kept),
    )


def remove_vertex(graph: BipartiteGraph, vertex: Vertex) -> BipartiteGraph:
    """Delete one vertex and its incident edges.

    Raises:
        GraphError: If the vertex does not exist
    """
    if not graph.has_vertex(vertex):
        raise GraphError(f"Unknown vertex {vertex} in {graph.summary()}")
    a_kept = [a for a in graph.a_vertices if not (vertex.side is Side.A and a == vertex.id)]
    b_kept = [b for b in graph.b_vertices if not (vertex.side is Side.B and b == vertex.id)]
    return induced_subgraph(graph, a_kept, b_kept)


def opt(graph: BipartiteGraph, a_subset: Iterable[int], b_subset: Iterable[int]) -> int:
    """Size of a maximum matching in the subgraph induced by A' and B'."""
    return len(max_matching(induced_subgraph(graph, a_subset, b_subset)))
