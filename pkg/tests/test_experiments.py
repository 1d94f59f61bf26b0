"""Tests for experiments, bound tables and artifacts."""

import json
import math

import pytest

from matching_advice.category import category_ratio_bound
from matching_advice.config import ExperimentConfig
from matching_advice.experiments import (
    ExperimentError,
    bound_table,
    derive_seed,
    rows_to_csv,
    run_experiment,
    run_trial,
    write_artifacts,
)
from matching_advice.models import save_instance


def make_config(**values) -> ExperimentConfig:
    data = {"generator": "semi_complete", "generator_params": {"c": 6}, "seed": 1, "trials": 1}
    data.update(values)
    return ExperimentConfig.from_dict(data)


class TestSeeds:
    """Test cases for per-trial seed derivation."""

    def test_deterministic_and_distinct(self):
        """Test seeds depend only on (base, index) and differ across trials."""
        seeds = [derive_seed(42, i) for i in range(1000)]
        assert seeds == [derive_seed(42, i) for i in range(1000)]
        assert len(set(seeds)) == 1000
        assert derive_seed(1, 0) != derive_seed(2, 0)
        assert all(0 <= s < 2**64 for s in seeds)


class TestRunTrial:
    """Test cases for single trials."""

    def test_ranking_with_sigma(self):
        """Test Ranking with an explicit permutation."""
        record = run_trial(make_config(algorithm="ranking", sigma="6 5 4 3 2 1"), 0)
        assert record.optimal_size == 6
        assert record.matching_size == 3
        assert record.ratio == 0.5
        assert record.perfect

    def test_randomized_category_bits(self):
        """Test the category run records k*m random bits and per-category counts."""
        record = run_trial(make_config(algorithm="randomized_category", k=2), 0)
        assert record.random_bits == 12
        assert sum(record.category_sizes) == 6
        assert sum(record.category_matched) == record.matching_size

    def test_advice_bits(self):
        """Test advice-driven algorithms report bits read."""
        assert run_trial(make_config(algorithm="advice_category"), 0).advice_bits == 6
        record = run_trial(make_config(algorithm="eps_advice", epsilon=0.3), 0)
        assert record.advice_bits > 0
        assert record.matching_size >= math.ceil(0.7 * 6)

    def test_given_order_mismatch(self):
        """Test an arrival order of the wrong length."""
        with pytest.raises(ExperimentError):
            run_trial(make_config(algorithm="greedy", arrival_order="1 2"), 0)

    def test_sigma_mismatch(self):
        """Test a permutation of the wrong length."""
        with pytest.raises(ExperimentError):
            run_trial(make_config(algorithm="ranking", sigma="1 2"), 0)

    def test_category_too_many_bits(self):
        """Test 2^k >= m is refused."""
        with pytest.raises(ExperimentError):
            run_trial(make_config(algorithm="randomized_category", k=3), 0)

    def test_instance_file(self, tmp_path, semi3):
        """Test loading the instance from a file."""
        path = tmp_path / "semi3.txt"
        save_instance(semi3, path)
        cfg = ExperimentConfig.from_dict({"algorithm": "greedy", "instance_file": str(path), "seed": 0})
        assert run_trial(cfg, 0).matching_size == 3


class TestRunExperiment:
    """Test cases for whole experiments."""

    def test_reproducible(self):
        """Test identical configs give identical artifacts."""
        cfg = make_config(algorithm="kvv", trials=20, arrival="random")
        first, second = run_experiment(cfg), run_experiment(cfg)
        assert first.to_json() == second.to_json()
        assert first.to_csv() == second.to_csv()
        assert [t.index for t in first.trials] == list(range(20))

    def test_workers_match_serial(self):
        """Test process-parallel trials give the same records as serial ones."""
        serial = run_experiment(make_config(algorithm="kvv", trials=8))
        parallel = run_experiment(make_config(algorithm="kvv", trials=8, workers=2))
        assert serial.trials == parallel.trials

    def test_aggregates(self):
        """Test mean, standard error and minimum."""
        cfg = make_config(algorithm="randomized_category", k=1, trials=50, perfect_only=True)
        result = run_experiment(cfg)
        ratios = result.ratios
        assert result.mean_ratio == pytest.approx(ratios.mean())
        assert result.standard_error == pytest.approx(ratios.std(ddof=1) / math.sqrt(50))
        assert result.min_ratio == ratios.min()
        assert result.category_stats is not None
        assert result.category_stats.trials == 50
        assert all(t.category_counts.consistent(t.matching_size) for t in result.trials)
        summary = json.loads(result.to_json())
        assert summary["trials"] == 50
        assert "categories" in summary

    def test_greedy_at_least_half(self):
        """Test Greedy never falls below half of the optimum on random instances."""
        cfg = make_config(
            algorithm="greedy",
            generator="random_bipartite",
            generator_params={"n": 12, "m": 10, "p": 0.3},
            instance_per_trial=True,
            arrival="random",
            trials=30,
        )
        assert run_experiment(cfg).min_ratio >= 0.5

    def test_write_artifacts(self, tmp_path):
        """Test JSON summary and CSV rows are written side by side."""
        result = run_experiment(make_config(algorithm="greedy", trials=3))
        json_path, csv_path = write_artifacts(result, tmp_path / "out" / "run")
        assert json.loads(json_path.read_text())["trials"] == 3
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("index,seed,matching_size")

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_semi_complete_acceptance(self, k):
        """Test mean ratio and x_1 on the 30-semi-complete graph over 10^4 trials."""
        cfg = make_config(
            algorithm="randomized_category",
            generator_params={"c": 30},
            k=k,
            trials=10_000,
            perfect_only=True,
        )
        result = run_experiment(cfg)
        assert result.mean_ratio >= category_ratio_bound(k) - 3 * result.standard_error
        assert all(t.random_bits == 30 * k for t in result.trials)
        assert result.category_stats.x1_holds()
        assert result.category_stats.recurrence_holds()

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_perfect_random_acceptance(self, k):
        """Test ratio, bits, x_1 and the recurrence on 50 random perfect-matching graphs with n = 30."""
        for graph_seed in range(50):
            cfg = make_config(
                algorithm="randomized_category",
                generator="perfect_random",
                generator_params={"n": 30, "extra_edges": 60},
                k=k,
                trials=10_000,
                seed=graph_seed,
            )
            result = run_experiment(cfg)
            assert result.mean_ratio >= category_ratio_bound(k) - 3 * result.standard_error
            assert all(t.random_bits == 30 * k for t in result.trials)
            assert result.category_stats.x1_holds()
            assert result.category_stats.recurrence_holds()


class TestBoundTable:
    """Test cases for closed-form bound tables."""

    def test_category_ratio(self):
        """Test k = 1..10 with 5/9 first and the last row near 1 - 1/e."""
        rows = bound_table("category_ratio", k_max=10)
        assert len(rows) == 10
        assert rows[0]["bound"] == pytest.approx(5 / 9, abs=1e-15)
        assert rows[-1]["gap_to_limit"] < 0.0002

    def test_advice_lb(self):
        """Test the rho grid for c = 3 is monotone."""
        rows = bound_table("advice_lb", c=3, rho_steps=10)
        values = [row["bits_per_request"] for row in rows]
        assert len(values) == 10
        assert all(x <= y for x, y in zip(values, values[1:]))
        assert all(row["bits_total"] == pytest.approx(100 * row["bits_per_request"]) for row in rows)
        assert bound_table("advice_lb", c=3, rho_steps=2, requests=7)[1]["bits_total"] == pytest.approx(
            7 * bound_table("advice_lb", c=3, rho_steps=2)[1]["bits_per_request"]
        )

    def test_partial_sums(self):
        """Test recurrence residuals vanish for k = 2."""
        rows = bound_table("partial_sums", k=2)
        assert [row["i"] for row in rows] == [0, 1, 2, 3, 4]
        assert all(row["recurrence_residual"] < 1e-12 for row in rows)

    def test_invalid(self):
        """Test unknown kinds and empty ranges."""
        with pytest.raises(ValueError):
            bound_table("nope")
        with pytest.raises(ValueError):
            bound_table("category_ratio", k_max=0)
        with pytest.raises(ValueError):
            bound_table("advice_lb", rho_steps=0)

    def test_csv(self):
        """Test CSV rendering of table rows."""
        text = rows_to_csv(bound_table("partial_sums", k=1))
        assert text.splitlines()[0] == "k,i,partial_sum,recurrence_residual"
        assert len(text.splitlines()) == 4
        assert rows_to_csv([]) == ""
