"""Tests for the exhaustive and sampled invariant sweeps."""

import pytest

from matching_advice.invariants import (
    SUITES,
    SweepReport,
    all_arrival_orders,
    all_rankings,
    enumerate_graphs,
    exhaustive_instances,
    run_selftest,
    run_sweep,
    sampled_instances,
    small_graphs,
)


class TestEnumeration:
    """Test cases for small-instance enumeration."""

    @pytest.mark.parametrize("n,m,count", [(1, 1, 2), (2, 2, 10), (2, 3, 36), (3, 2, 20)])
    def test_graph_counts(self, n, m, count):
        """Test one graph per multiset of A-neighborhoods."""
        graphs = list(enumerate_graphs(n, m))
        assert len(graphs) == count
        assert len({g.adjacency for g in graphs}) == count

    def test_small_graphs_covers_sizes(self):
        """Test every (n, m) pair up to the limit appears."""
        sizes = {(g.n, g.m) for g in small_graphs(2, 2)}
        assert sizes == {(1, 1), (1, 2), (2, 1), (2, 2)}

    def test_orders_and_rankings(self):
        """Test permutations are exhaustive."""
        assert len(list(all_arrival_orders(3))) == 6
        assert len({r.ranks for r in all_rankings(4)}) == 24

    def test_exhaustive_instances_with_rankings(self):
        """Test every graph is paired with every order and, when asked, every ranking."""
        plain = list(exhaustive_instances(1, with_rankings=False))
        assert len(plain) == 2
        ranked = list(exhaustive_instances(2, with_rankings=True))
        # 1x1: 2 graphs; 1x2: 4 graphs x 2 rankings; 2x1: 3 graphs x 2 orders; 2x2: 10 graphs x 2 x 2
        assert len(ranked) == 2 + 8 + 6 + 40


class TestSampling:
    """Test cases for random instances beyond the exhaustive sizes."""

    def test_sizes_above_threshold(self):
        """Test sampled instances stay within bounds and exceed the exhaustive size."""
        instances = list(sampled_instances(5, 200, seed=7, above=3))
        assert len(instances) == 200
        for graph, optimum, pi, sigma in instances:
            assert max(graph.n, graph.m) > 3
            assert graph.n <= 5 and graph.m <= 5
            assert sorted(pi.sequence) == list(range(1, graph.n + 1))
            assert sorted(sigma.ranks) == list(range(1, graph.m + 1))
            optimum.validate(graph)

    def test_seeded(self):
        """Test equal seeds draw equal instances."""
        first = [(g.adjacency, pi, sigma) for g, _, pi, sigma in sampled_instances(4, 30, seed=2)]
        second = [(g.adjacency, pi, sigma) for g, _, pi, sigma in sampled_instances(4, 30, seed=2)]
        assert first == second

    def test_threshold_at_limit_is_ignored(self):
        """Test a threshold at or above the largest size samples every size."""
        sizes = {(g.n, g.m) for g, _, _, _ in sampled_instances(2, 200, seed=0, above=2)}
        assert (1, 1) in sizes


class TestReport:
    """Test cases for sweep reports."""

    def test_violations_are_capped(self):
        """Test only a bounded number of violations is kept."""
        report = SweepReport("demo")
        for i in range(50):
            report.fail(f"case {i}")
        assert not report.ok
        assert len(report.violations) == 20
        assert report.violations[-1] == "case 49 (and more)"
        assert report.to_dict()["ok"] is False


class TestSweeps:
    """Test cases for running the sweeps."""

    @pytest.mark.parametrize("name", sorted(SUITES))
    def test_suite_passes_small(self, name):
        """Test each suite finds no violation on two-by-two graphs."""
        (report,) = run_selftest(2, [name])
        assert report.name == name
        assert report.checked > 0
        assert report.ok, report.violations

    def test_unknown_suite(self):
        """Test an unknown suite name is rejected."""
        with pytest.raises(ValueError):
            run_selftest(2, ["nope"])


    def test_sweep_counts_samples(self):
        """Test sampled instances are counted on top of the exhaustive ones."""
        exhaustive = run_sweep("greedy_half", 2)
        report = run_sweep("greedy_half", 2, samples=40, seed=1)
        assert report.sampled == 40
        assert report.checked == exhaustive.checked + 40
        assert report.ok, report.violations
        assert report.to_dict()["sampled"] == 40

    def test_invalid_sizes(self):
        """Test non-positive sizes and negative sample counts are rejected."""
        with pytest.raises(ValueError):
            run_sweep("greedy_half", 0)
        with pytest.raises(ValueError):
            run_sweep("greedy_half", 2, samples=-1)

    def test_unsampled_sizes_warn(self, caplog):
        """Test asking beyond the exhaustive size without samples logs a warning."""
        report = run_sweep("monotonicity", 4, samples=0)
        assert report.sampled == 0
        assert "only covered by sampling" in caplog.text

    @pytest.mark.slow
    def test_eps_advice_exhaustive_four(self):
        """Test the (1 - eps) suite on every graph and order with up to four vertices per side."""
        (report,) = run_selftest(4, ["eps_advice"])
        assert report.sampled == 0
        assert report.ok, report.violations

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["advice_category", "monotonicity", "upgrade_lemma"])
    def test_sampled_size_five(self, name):
        """Test the costlier suites at their exhaustive limit plus a million sampled instances up to 5x5."""
        (report,) = run_selftest(5, [name], samples=10**6, seed=11)
        assert report.sampled == 10**6
        assert report.ok, report.violations

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["max_matching", "greedy_half"])
    def test_cheap_suites_size_five(self, name):
        """Test the matching and greedy suites up to 5x5 with sampling above four."""
        (report,) = run_selftest(5, [name], samples=10**5, seed=11)
        assert report.ok, report.violations
