"""Tests for the (1 - eps) advice scheme."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matching_advice.advice import AdviceError, AdviceInconsistencyError, AdviceTape, TapeUnderrunError
from matching_advice.engine import ArrivalOrder
from matching_advice.eps_advice import (
    EpsParams,
    PassPlan,
    advice_budget,
    eps_oracle,
    eps_online,
    max_passes,
    plan_violations,
    replay_pass,
    write_plan,
)
from matching_advice.generators import generate
from matching_advice.invariants import all_arrival_orders, small_graphs
from matching_advice.matching import max_matching, opt
from matching_advice.models import Matching
from tests.strategies import bipartite_graphs


def check_instance(graph, pi, epsilon):
    """Run oracle and decoder; return the oracle result after the shared checks."""
    params = EpsParams(epsilon)
    result = eps_oracle(graph, pi, params)
    assert len(result.matching) >= params.target(len(max_matching(graph)))
    tape = result.tape.copy()
    assert eps_online(graph, pi, tape) == result.matching
    assert tape.bits_read == tape.bits_written
    assert tape.bits_written <= advice_budget(graph.n, graph.m, epsilon)
    assert plan_violations(graph, pi, result) == []
    return result


class TestEpsParams:
    """Test cases for derived budgets."""

    def test_budgets(self):
        """Test path length, pass budget and target at a few epsilons."""
        half = EpsParams(0.5)
        assert half.max_path_layers == 3
        assert half.pass_budget == 128
        assert EpsParams(0.6).pass_budget == 51
        assert EpsParams(0.1).max_path_layers == 11
        assert half.target(5) == 3
        assert EpsParams(0.2).target(10) == 8

    @pytest.mark.parametrize("epsilon", [0, 1, -0.1, 1.5])
    def test_invalid_epsilon(self, epsilon):
        """Test eps must lie strictly between 0 and 1."""
        with pytest.raises(ValueError):
            EpsParams(epsilon)

    def test_advice_budget(self):
        """Test the closed-form tape bound."""
        assert max_passes(0.5) == 128
        assert advice_budget(100, 100, 0.5) == 26441


class TestReplayPass:
    """Test cases for single Greedy passes."""

    def test_restricted_pass(self, semi3):
        """Test Greedy only sees the induced vertex sets."""
        pi = ArrivalOrder.identity(3)
        found = replay_pass(semi3, pi, frozenset({2, 3}), frozenset({3}))
        assert found == Matching(frozenset({(2, 3)}))

    def test_arrival_order_matters(self, path_graph):
        """Test the pass follows the arrival order."""
        pi = ArrivalOrder.parse("2 1")
        found = replay_pass(path_graph, pi, frozenset({1, 2}), frozenset({1, 2}))
        assert found == Matching(frozenset({(1, 2), (2, 1)}))

    @settings(max_examples=100, deadline=None)
    @given(bipartite_graphs(max_n=6, max_m=6), st.randoms(use_true_random=False))
    def test_pass_is_half_of_induced_optimum(self, graph, rnd):
        """Test a pass on random vertex subsets matches at least half their induced optimum."""
        a_set = frozenset(a for a in graph.a_vertices if rnd.random() < 0.7)
        b_set = frozenset(b for b in graph.b_vertices if rnd.random() < 0.7)
        found = replay_pass(graph, ArrivalOrder.random(graph.n, rnd), a_set, b_set)
        assert 2 * len(found) >= opt(graph, a_set, b_set)


class TestOracleAndDecoder:
    """Test cases for eps_oracle and eps_online."""

    def test_greedy_already_enough(self, semi3):
        """Test a single pass suffices when Greedy is optimal."""
        result = check_instance(semi3, ArrivalOrder.identity(3), 0.3)
        assert result.plan.num_passes == 1
        assert len(result.matching) == 3

    def test_blocking_example_gets_repaired(self, path_graph):
        """Test the augmenting phase fixes Greedy's blocking choice."""
        result = check_instance(path_graph, ArrivalOrder.identity(2), 0.1)
        assert len(result.matching) == 2
        assert result.plan.num_passes == 3
        assert result.plan.final_index == {1: 3, 2: 2}

    def test_plan_text(self, path_graph):
        """Test the diagnostic listing of passes."""
        result = eps_oracle(path_graph, ArrivalOrder.identity(2), 0.1)
        assert result.plan.to_text() == "1 | A: 1 2 | B: 1 2\n2 | A: 2 | B: 1\n3 | A: 1 | B: 2\n"

    def test_tape_layout(self, path_graph):
        """Test header, membership bits and j(a) fields."""
        result = eps_oracle(path_graph, ArrivalOrder.identity(2), 0.1)
        # sd(2)=011, sd(2)=011, sd(3)=00100, 3 passes x 4 bits, then j(1)=3, j(2)=2 in 2 bits each
        assert result.tape.to_bitstring() == "011" "011" "00100" "1111" "0110" "1001" "11" "10"

    def test_empty_graph(self, empty_graph):
        """Test the scheme on a graph without edges."""
        result = check_instance(empty_graph, ArrivalOrder.identity(2), 0.5)
        assert len(result.matching) == 0

    def test_header_mismatch(self, semi3, path_graph):
        """Test a tape written for another graph size is rejected."""
        result = eps_oracle(semi3, ArrivalOrder.identity(3), 0.5)
        with pytest.raises(AdviceError):
            eps_online(path_graph, ArrivalOrder.identity(2), result.tape.copy())

    def test_truncated_tape(self, semi3):
        """Test a cut-off tape underruns."""
        result = eps_oracle(semi3, ArrivalOrder.identity(3), 0.5)
        truncated = AdviceTape(result.tape.bits[:-1])
        with pytest.raises(TapeUnderrunError):
            eps_online(semi3, ArrivalOrder.identity(3), truncated)

    def test_inconsistent_index(self, path_graph):
        """Test a j(a) naming a pass that leaves a unmatched is rejected."""
        pi = ArrivalOrder.identity(2)
        plan = PassPlan(((frozenset({1, 2}), frozenset({1, 2})),), {1: 1, 2: 1})
        with pytest.raises(AdviceInconsistencyError):
            eps_online(path_graph, pi, write_plan(path_graph, pi, plan))

    @settings(max_examples=150, deadline=None)
    @given(
        bipartite_graphs(max_n=6, max_m=6),
        st.sampled_from([0.1, 0.3, 0.6]),
        st.randoms(use_true_random=False),
    )
    def test_random_instances(self, graph, epsilon, rnd):
        """Test guarantee, replay equality and budget on random small graphs."""
        check_instance(graph, ArrivalOrder.random(graph.n, rnd), epsilon)

    @pytest.mark.slow
    def test_exhaustive_small(self):
        """Test every graph with n, m <= 4 under every arrival order."""
        for graph in small_graphs(4, 4):
            for pi in all_arrival_orders(graph.n):
                for epsilon in (0.1, 0.3, 0.6):
                    check_instance(graph, pi, epsilon)

    @pytest.mark.slow
    def test_random_sixty(self):
        """Test 100 random graphs with n = m = 60 at eps = 0.2."""
        for seed in range(100):
            graph = generate("random_bipartite", {"n": 60, "m": 60, "p": 0.05}, seed=seed)
            check_instance(graph, ArrivalOrder.identity(60), 0.2)
