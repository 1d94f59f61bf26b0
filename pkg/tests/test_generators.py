"""Tests for instance generators."""

import numpy as np
import pytest

from matching_advice.generators import GENERATORS, generate, ranking_lb_permutations
from matching_advice.matching import max_matching


class TestGenerate:
    """Test cases for generate."""

    def test_semi_complete(self):
        """Test c = 5 gives 15 edges."""
        graph = generate("semi_complete", {"c": 5})
        assert graph.num_edges == 15

    def test_h_gadget(self):
        """Test the gadget kind delegates to the lower-bound module."""
        graph = generate("h_gadget", {"z": "8"})
        assert (graph.n, graph.m) == (8, 8)
        assert len(max_matching(graph)) == 8

    def test_perfect_random(self):
        """Test the planted perfect matching survives extra edges."""
        graph = generate("perfect_random", {"n": 10, "extra_edges": 5}, seed=3)
        assert len(max_matching(graph)) == 10
        assert 10 <= graph.num_edges <= 15

    def test_random_bipartite(self):
        """Test sizes and the edge probability extremes."""
        assert generate("random_bipartite", {"n": 4, "m": 6, "p": 1}, seed=0).num_edges == 24
        assert generate("random_bipartite", {"n": 4, "p": 0}, seed=0).num_edges == 0
        assert generate("random_bipartite", {"n": 4}, seed=0).m == 4

    def test_deterministic(self):
        """Test equal kind, parameters and seed give equal graphs."""
        params = {"n": 12, "m": 9, "p": 0.3}
        assert generate("random_bipartite", params, seed=42) == generate("random_bipartite", params, seed=42)
        assert generate("perfect_random", {"n": 8}, seed=1) == generate("perfect_random", {"n": 8}, seed=1)

    def test_ranking_lb(self):
        """Test the lower-bound kind builds a perfect-matching instance."""
        graph = generate("ranking_lb", {"n": 64, "k": 1, "eps": 0.5, "sigma": "identity"})
        assert (graph.n, graph.m) == (64, 64)
        assert len(max_matching(graph)) == 64

    @pytest.mark.parametrize(
        "kind, params",
        [
            ("nope", {}),
            ("semi_complete", {}),
            ("semi_complete", {"c": "five"}),
            ("random_bipartite", {"n": 3, "p": 1.5}),
            ("ranking_lb", {"n": 8, "k": 2, "sigma": "identity reverse random"}),
            ("ranking_lb", {"n": 8, "sigma": "sideways"}),
        ],
    )
    def test_invalid(self, kind, params):
        """Test unknown kinds and invalid parameters."""
        with pytest.raises(ValueError):
            generate(kind, params)

    def test_registry(self):
        """Test every documented kind is registered."""
        expected = {"semi_complete", "h_gadget", "random_bipartite", "perfect_random", "ranking_lb"}
        assert set(GENERATORS) == expected


class TestRankingPermutations:
    """Test cases for named permutation families."""

    def test_single_name_repeats(self):
        """Test one name is used for all k permutations."""
        perms = ranking_lb_permutations({"n": 5, "k": 2, "sigma": "reverse"}, np.random.default_rng(0))
        assert [p.ranks for p in perms] == [(5, 4, 3, 2, 1)] * 2

    def test_mixed_names(self):
        """Test identity, reverse and random in one family."""
        params = {"n": 6, "k": 3, "sigma": "identity reverse random"}
        perms = ranking_lb_permutations(params, np.random.default_rng(0))
        assert perms[0].ranks == (1, 2, 3, 4, 5, 6)
        assert perms[1].ranks == (6, 5, 4, 3, 2, 1)
        assert sorted(perms[2].ranks) == [1, 2, 3, 4, 5, 6]
