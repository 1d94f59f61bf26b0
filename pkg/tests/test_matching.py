"""Tests for the maximum matching oracle and graph surgery."""

import networkx as nx
import pytest
from hypothesis import given, settings

from matching_advice.matching import (
    augment,
    brute_force_matching,
    induced_subgraph,
    max_matching,
    opt,
    remove_vertex,
    shortest_augmenting_paths,
)
from matching_advice.models import GraphError, Matching, Side, Vertex, build_graph
from tests.strategies import bipartite_graphs


def networkx_matching_size(graph) -> int:
    """Independent oracle: networkx Hopcroft-Karp on the same graph."""
    g = nx.Graph()
    tops = [("a", a) for a in graph.a_vertices]
    g.add_nodes_from(tops)
    g.add_nodes_from(("b", b) for b in graph.b_vertices)
    g.add_edges_from((("a", a), ("b", b)) for a, b in graph.edges())
    return len(nx.bipartite.hopcroft_karp_matching(g, top_nodes=tops)) // 2


class TestMaxMatching:
    """Test cases for max_matching."""

    def test_semi_complete_is_perfect(self, semi3):
        """Test the staircase graph has a perfect matching."""
        matching = max_matching(semi3)
        assert len(matching) == 3
        matching.validate(semi3)

    def test_needs_augmentation(self, path_graph):
        """Test that a blocking greedy choice gets repaired."""
        assert max_matching(path_graph) == Matching(frozenset({(1, 2), (2, 1)}))

    def test_star(self, star_graph):
        """Test a star has matching size one."""
        assert len(max_matching(star_graph)) == 1

    def test_empty(self, empty_graph):
        """Test a graph without edges."""
        assert len(max_matching(empty_graph)) == 0
        assert len(max_matching(build_graph(0, 0, []))) == 0

    @settings(max_examples=200, deadline=None)
    @given(bipartite_graphs(max_n=6, max_m=6))
    def test_matches_brute_force(self, graph):
        """Test layered search agrees with exhaustive search."""
        fast = max_matching(graph)
        fast.validate(graph)
        assert len(fast) == len(brute_force_matching(graph))

    @settings(max_examples=200, deadline=None)
    @given(bipartite_graphs(max_n=12, max_m=12))
    def test_matches_networkx(self, graph):
        """Test agreement with networkx Hopcroft-Karp."""
        assert len(max_matching(graph)) == networkx_matching_size(graph)

    def test_brute_force_limit(self):
        """Test exhaustive search refuses large graphs."""
        with pytest.raises(GraphError):
            brute_force_matching(build_graph(9, 1, []))


class TestAugmentingPaths:
    """Test cases for shortest augmenting paths."""

    def test_single_path(self, path_graph):
        """Test the path a2-b1-a1-b2 is found and applied."""
        current = Matching(frozenset({(1, 1)}))
        paths = shortest_augmenting_paths(path_graph, current)
        assert paths == [((2, 1), (1, 2))]
        assert augment(current, paths) == Matching(frozenset({(1, 2), (2, 1)}))

    def test_layer_limit(self, path_graph):
        """Test that paths with too many unmatched edges are suppressed."""
        current = Matching(frozenset({(1, 1)}))
        assert shortest_augmenting_paths(path_graph, current, max_layers=1) == []
        assert shortest_augmenting_paths(path_graph, current, max_layers=2) != []

    def test_no_path_at_maximum(self, semi3):
        """Test no augmenting path exists once the matching is maximum."""
        assert shortest_augmenting_paths(semi3, max_matching(semi3)) == []

    @settings(max_examples=100, deadline=None)
    @given(bipartite_graphs(max_n=7, max_m=7))
    def test_paths_are_disjoint_and_equal_length(self, graph):
        """Test one phase yields vertex-disjoint paths of the same length."""
        current = Matching()
        paths = shortest_augmenting_paths(graph, current)
        if not paths:
            return
        assert len({len(path_a) for path_a, _ in paths}) == 1
        a_seen = [a for path_a, _ in paths for a in path_a]
        b_seen = [b for _, path_b in paths for b in path_b]
        assert len(a_seen) == len(set(a_seen))
        assert len(b_seen) == len(set(b_seen))
        augmented = augment(current, paths)
        augmented.validate(graph)
        assert len(augmented) == len(paths)


class TestSurgery:
    """Test cases for induced subgraphs and vertex removal."""

    def test_induced_subgraph_relabels(self, semi3):
        """Test local ids follow ascending original ids and labels point back."""
        sub = induced_subgraph(semi3, [2, 3], [1, 3])
        assert (sub.n, sub.m) == (2, 2)
        assert sub.adjacency == ((2,), (2,))
        assert sub.a_labels == (2, 3)
        assert sub.b_labels == (1, 3)

    def test_labels_compose(self, semi3):
        """Test that nested surgery keeps the original labels."""
        inner = induced_subgraph(induced_subgraph(semi3, [1, 2, 3], [2, 3]), [2, 3], [2])
        assert inner.a_labels == (2, 3)
        assert inner.b_labels == (3,)

    def test_remove_vertex(self, semi3):
        """Test deleting one vertex from each side."""
        without_a = remove_vertex(semi3, Vertex(Side.A, 1))
        assert (without_a.n, without_a.m) == (2, 3)
        assert without_a.a_labels == (2, 3)
        without_b = remove_vertex(semi3, Vertex(Side.B, 3))
        assert without_b.adjacency == ((1, 2), (2,), ())

    def test_remove_unknown_vertex(self, semi3):
        """Test removing a vertex that does not exist."""
        with pytest.raises(GraphError):
            remove_vertex(semi3, Vertex(Side.B, 4))
        with pytest.raises(GraphError):
            induced_subgraph(semi3, [4], [])

    def test_opt(self, semi3):
        """Test sizes of induced optima."""
        assert opt(semi3, [1, 2, 3], [1, 2, 3]) == 3
        assert opt(semi3, [2, 3], [3]) == 1
        assert opt(semi3, [], [1]) == 0

    def test_relabel_matching(self, semi3):
        """Test translating a submatching back to original ids."""
        sub = induced_subgraph(semi3, [2, 3], [2, 3])
        assert max_matching(sub).relabel(sub) == Matching(frozenset({(2, 2), (3, 3)}))
