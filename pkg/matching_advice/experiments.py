"""Seeded Monte Carlo experiments, bound tables and result artifacts."""

import csv
import io
import json
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from matching_advice.category import (
    CategoryCounts,
    CategoryStatistics,
    advice_category_online,
    advice_category_oracle,
    category_counts,
    category_ratio_bound,
    category_statistics,
    partial_sum_bound,
    randomized_category,
)
from matching_advice.config import ExperimentConfig
from matching_advice.eps_advice import eps_oracle, eps_online
from matching_advice.engine import (
    ArrivalOrder,
    MeteredBitSource,
    RankingPermutation,
    arrival_edge_order,
    greedy_edge_run,
    kvv_run,
    ranking_run,
)
from matching_advice.generators import generate
from matching_advice.lowerbounds.string_guessing import advice_lb_per_request, advice_lb_total, rho_range
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, load_instance

logger = logging.getLogger(__name__)

SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
ARRIVAL_SALT = 0xA5A5A5A5


class ExperimentError(ValueError):
    """Raised when an algorithm cannot run on the configured instance."""


def derive_seed(base: int, index: int) -> int:
    """Per-trial seed: splitmix64 finalizer applied to base + (index + 1) * gamma."""
    z = (base + (index + 1) * SPLITMIX_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int
    matching_size: int
    optimal_size: int
    ratio: float
    random_bits: int = 0
    advice_bits: int = 0
    perfect: bool = False
    category_sizes: Tuple[int, ...] = ()
    category_matched: Tuple[int, ...] = ()

    @property
    def category_counts(self) -> CategoryCounts:
        return CategoryCounts(self.category_sizes, self.category_matched)

    def to_row(self) -> Dict[str, Any]:
        row = asdict(self)
        row["category_sizes"] = " ".join(str(v) for v in self.category_sizes)
        row["category_matched"] = " ".join(str(v) for v in self.category_matched)
        return row


@dataclass
class ExperimentResult:
    """Per-trial records plus their aggregates."""

    config: Dict[str, Any]
    trials: List[TrialRecord]
    category_stats: Optional[CategoryStatistics] = None

    @property
    def ratios(self) -> np.ndarray:
        return np.array([t.ratio for t in self.trials], dtype=float)

    @property
    def mean_ratio(self) -> float:
        return float(self.ratios.mean())

    @property
    def standard_error(self) -> float:
        if len(self.trials) < 2:
            return 0.0
        return float(self.ratios.std(ddof=1) / math.sqrt(len(self.trials)))

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())

    @property
    def worst_trial(self) -> int:
        return int(self.ratios.argmin())

    def summary(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "config": self.config,
            "trials": len(self.trials),
            "mean_ratio": self.mean_ratio,
            "standard_error": self.standard_error,
            "min_ratio": self.min_ratio,
            "max_ratio": float(self.ratios.max()),
            "worst_trial": self.worst_trial,
            "mean_random_bits": float(np.mean([t.random_bits for t in self.trials])),
            "max_advice_bits": max(t.advice_bits for t in self.trials),
        }
        if self.category_stats is not None:
            data["categories"] = self.category_stats.to_dict()
        return data

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        rows = [t.to_row() for t in self.trials]
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()


def _arrival(cfg: ExperimentConfig, n: int, seed: int) -> ArrivalOrder:
    if cfg.arrival == "given":
        pi = ArrivalOrder.parse(cfg.arrival_order or "")
        if pi.n != n:
            raise ExperimentError(f"arrival_order has {pi.n} entries but the instance has n={n}")
        return pi
    if cfg.arrival == "random":
        return ArrivalOrder.random(n, random.Random(seed ^ ARRIVAL_SALT))
    return ArrivalOrder.identity(n)


def _instance(cfg: ExperimentConfig, seed: Optional[int]) -> BipartiteGraph:
    if cfg.instance_file:
        return load_instance(cfg.instance_file)
    return generate(cfg.generator or "", cfg.generator_params, seed)


def run_trial(
    cfg: ExperimentConfig, index: int, graph: Optional[BipartiteGraph] = None, optimum: Optional[int] = None
) -> TrialRecord:
    """Run one seeded trial.

    Raises:
        ExperimentError: If the algorithm cannot run on the instance
    """
    seed = derive_seed(cfg.seed, index)
    if graph is None:
        graph = _instance(cfg, seed)
        optimum = None
    if optimum is None:
        optimum = len(max_matching(graph))
    pi = _arrival(cfg, graph.n, seed)
    random_bits = advice_bits = 0
    sizes: Tuple[int, ...] = ()
    matched: Tuple[int, ...] = ()

    if cfg.algorithm == "ranking":
        sigma = RankingPermutation.parse(cfg.sigma) if cfg.sigma else RankingPermutation.identity(graph.m)
        if sigma.m != graph.m:
            raise ExperimentError(f"sigma has {sigma.m} entries but the instance has m={graph.m}")
        matching = ranking_run(graph, pi, sigma)
    elif cfg.algorithm == "greedy":
        matching = greedy_edge_run(graph, arrival_edge_order(graph, pi))
    elif cfg.algorithm == "kvv":
        matching, random_bits = kvv_run(graph, pi, MeteredBitSource(seed))
    elif cfg.algorithm == "randomized_category":
        if 2**cfg.k >= graph.m:
            raise ExperimentError(f"randomized_category needs 2^k < m, got k={cfg.k}, m={graph.m}")
        run = randomized_category(graph, pi, cfg.k, MeteredBitSource(seed))
        matching, random_bits = run.matching, run.bits_used
        counts = category_counts(run.categories, matching)
        if not counts.consistent(len(matching)):
            raise ExperimentError(f"Category fractions miss matched vertices on trial {index}")
        sizes, matched = counts
    elif cfg.algorithm == "advice_category":
        tape = advice_category_oracle(graph, pi)
        matching = advice_category_online(graph, pi, tape)
        advice_bits = tape.bits_read
    elif cfg.algorithm == "eps_advice":
        result = eps_oracle(graph, pi, cfg.epsilon)
        tape = result.tape.copy()
        matching = eps_online(graph, pi, tape)
        if matching != result.matching:
            raise ExperimentError(f"Online replay diverged from the oracle on trial {index}")
        advice_bits = tape.bits_read
    else:
        raise ExperimentError(f"Unknown algorithm {cfg.algorithm!r}")

    matching.validate(graph)
    ratio = 1.0 if optimum == 0 else len(matching) / optimum
    return TrialRecord(
        index=index,
        seed=seed,
        matching_size=len(matching),
        optimal_size=optimum,
        ratio=ratio,
        random_bits=random_bits,
        advice_bits=advice_bits,
        perfect=graph.has_perfect_matching_size(optimum),
        category_sizes=tuple(sizes),
        category_matched=tuple(matched),
    )


def _trial_task(task: Tuple[ExperimentConfig, int, Optional[BipartiteGraph], Optional[int]]) -> TrialRecord:
    return run_trial(*task)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every trial of an experiment, in parallel when ``cfg.workers > 1``.

    Records come back ordered by trial index, so the result depends only on the config.

    Raises:
        ExperimentError: If the algorithm cannot run on the instance
    """
    logger.info(f"Running {cfg.algorithm} for {cfg.trials} trials (seed={cfg.seed}, workers={cfg.workers})")
    graph: Optional[BipartiteGraph] = None
    optimum: Optional[int] = None
    if not cfg.instance_per_trial:
        graph = _instance(cfg, cfg.seed)
        optimum = len(max_matching(graph))
        if cfg.algorithm == "randomized_category" and 2**cfg.k >= graph.m:
            raise ExperimentError(f"randomized_category needs 2^k < m, got k={cfg.k}, m={graph.m}")
    tasks = [(cfg, index, graph, optimum) for index in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        records = [_trial_task(task) for task in tasks]

    stats = None
    if cfg.algorithm == "randomized_category":
        selected = [r for r in records if r.perfect or not cfg.perfect_only]
        if selected:
            stats = category_statistics(cfg.k, [r.category_counts for r in selected])
        else:
            logger.warning("No trial instance has a perfect matching; skipping category statistics")
    result = ExperimentResult(cfg.to_dict(), records, stats)
    logger.info(
        f"Finished {cfg.algorithm}: mean ratio {result.mean_ratio:.6f} +- {result.standard_error:.6f}, "
        f"min {result.min_ratio:.6f}"
    )
    return result


def write_artifacts(result: ExperimentResult, out: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``<out>.json`` (summary) and ``<out>.csv`` (one row per trial)."""
    base = Path(out)
    json_path = base.with_suffix(".json")
    csv_path = base.with_suffix(".csv")
    base.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(result.to_json())
    csv_path.write_text(result.to_csv())
    logger.info(f"Wrote {json_path} and {csv_path}")
    return json_path, csv_path


BOUND_KINDS = ("category_ratio", "advice_lb", "partial_sums")


def bound_table(
    kind: str, k_max: int = 10, c: int = 3, rho_steps: int = 10, k: int = 2, requests: int = 100
) -> List[Dict[str, Any]]:
    """Rows of closed-form values.

    Args:
        kind: category_ratio (k = 1..k_max), advice_lb (rho grid for block size c,
            totals over ``requests`` requests) or partial_sums (i = 0..2^k with recurrence residuals)

    Raises:
        ValueError: For unknown kinds or invalid ranges
    """
    if kind == "category_ratio":
        if k_max < 1:
            raise ValueError(f"k_max must be at least 1, got {k_max}")
        limit = 1 - 1 / math.e
        return [
            {"k": kk, "bound": category_ratio_bound(kk), "gap_to_limit": limit - category_ratio_bound(kk)}
            for kk in range(1, k_max + 1)
        ]
    if kind == "advice_lb":
        if rho_steps < 1:
            raise ValueError(f"rho_steps must be at least 1, got {rho_steps}")
        low, high = rho_range(c)
        rows = []
        for step in range(rho_steps):
            rho = low + (high - low) * step / rho_steps
            rows.append(
                {
                    "c": c,
                    "rho": rho,
                    "bits_per_request": advice_lb_per_request(c, rho),
                    "bits_total": advice_lb_total(c, rho, requests),
                }
            )
        return rows
    if kind == "partial_sums":
        rows = []
        for i in range(0, 2**k + 1):
            value = partial_sum_bound(k, i)
            residual = 0.0 if i == 0 else abs(value * (1 + 1 / 2**k) - 1 - partial_sum_bound(k, i - 1))
            rows.append({"k": k, "i": i, "partial_sum": value, "recurrence_residual": residual})
        return rows
    raise ValueError(f"Unknown bound table {kind!r}; choose from {', '.join(BOUND_KINDS)}")


def rows_to_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buffer.getvalue()
