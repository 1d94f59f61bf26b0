"""Category algorithms: the randomized k-bit variant and the m-bit advice variant.

A category algorithm runs Ranking with the permutation induced by a coarse
category map c: B -> {1..2^k}, lower categories first and ties by vertex id.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from matching_advice.advice import AdviceTape
from matching_advice.engine import (
    ArrivalOrder,
    BitSource,
    CategoryAssignment,
    RankingPermutation,
    category_to_permutation,
    ranking_run,
)
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, Matching

logger = logging.getLogger(__name__)

# Above this k the exact rational power gets large; fall back to log1p.
EXACT_BOUND_MAX_K = 12


class CategoryError(ValueError):
    """Raised when a category algorithm is applied outside its definition."""


class CategoryRun(NamedTuple):
    matching: Matching
    bits_used: int
    categories: CategoryAssignment


def randomized_category(graph: BipartiteGraph, pi: ArrivalOrder, k: int, rng: BitSource) -> CategoryRun:
    """Draw c(b) uniformly from {1..2^k} with k bits each, then run Ranking(sigma_c).

    Args:
        graph: Input graph
        pi: Arrival order
        k: Bits per category
        rng: Bit source; exactly k*m bits are drawn

    Returns:
        CategoryRun with the matching, bits used and the drawn categories

    Raises:
        CategoryError: If k < 1 or 2^k >= m
    """
    if k < 1 or 2**k >= graph.m:
        raise CategoryError(f"Category algorithm needs k >= 1 and 2^k < m, got k={k}, m={graph.m}")
    start = rng.bits_consumed
    categories = CategoryAssignment(k, tuple(rng.take(k) + 1 for _ in range(graph.m)))
    sigma = category_to_permutation(categories, graph.m)
    matching = ranking_run(graph, pi, sigma)
    return CategoryRun(matching, rng.bits_consumed - start, categories)


def category_ratio_bound_exact(k: int) -> Fraction:
    """1 - (2^k / (2^k + 1))^(2^k) as an exact rational."""
    if k < 1:
        raise CategoryError(f"k must be at least 1, got {k}")
    size = 2**k
    return 1 - Fraction(size, size + 1) ** size


def category_ratio_bound(k: int) -> float:
    """Competitive ratio guaranteed in expectation by the randomized category algorithm."""
    if k <= EXACT_BOUND_MAX_K:
        return float(category_ratio_bound_exact(k))
    size = 2**k
    return -math.expm1(size * math.log1p(-1 / (size + 1)))


def partial_sum_bound_exact(k: int, i: int) -> Fraction:
    """S_i = 2^k (1 - (2^k / (2^k + 1))^i) as an exact rational, 0 <= i <= 2^k."""
    size = 2**k
    if k < 1 or not 0 <= i <= size:
        raise CategoryError(f"Need k >= 1 and 0 <= i <= 2^k, got k={k}, i={i}")
    return size * (1 - Fraction(size, size + 1) ** i)


def partial_sum_bound(k: int, i: int) -> float:
    """Lower bound S_i on x_1 + ... + x_i; satisfies S_i (1 + 1/2^k) = 1 + S_(i-1)."""
    return float(partial_sum_bound_exact(k, i))


def advice_category_oracle(graph: BipartiteGraph, pi: ArrivalOrder) -> AdviceTape:
    """Write one bit per B-vertex: 1 if matched by identity-ranked Ranking, else 0."""
    reference = ranking_run(graph, pi, RankingPermutation.identity(graph.m))
    tape = AdviceTape()
    for b in graph.b_vertices:
        tape.write_bit(0 if reference.partner_of_b(b) is None else 1)
    return tape


def advice_categories(tape: AdviceTape, m: int) -> CategoryAssignment:
    """Decode m advice bits into categories: bit 0 -> 1, bit 1 -> 2."""
    return CategoryAssignment(1, tuple(tape.read_bit() + 1 for _ in range(m)), strict=False)


def advice_category_online(graph: BipartiteGraph, pi: ArrivalOrder, tape: AdviceTape) -> Matching:
    """Read the m category bits and run Ranking(sigma_c).

    Raises:
        TapeUnderrunError: If the tape holds fewer than m bits
    """
    categories = advice_categories(tape, graph.m)
    return ranking_run(graph, pi, category_to_permutation(categories, graph.m))


@dataclass(frozen=True)
class AdviceCategoryBreakdown:
    """Quantities from the 3/5 analysis, recomputed from one run.

    A_1 / A_2: A-vertices unmatched / matched by the identity run M_G.
    B_1 / B_2: B-vertices in category 1 / 2. B_1*: B_1 vertices matched in M*.
    M_ij: pairs of the advice run with a in A_i and b in B_j.
    """

    reference: Matching
    optimum: Matching
    result: Matching
    a1: FrozenSet[int]
    a2: FrozenSet[int]
    b1: FrozenSet[int]
    b2: FrozenSet[int]
    b1_star: FrozenSet[int]
    m11: FrozenSet[tuple]
    m12: FrozenSet[tuple]
    m21: FrozenSet[tuple]
    m22: FrozenSet[tuple]

    @property
    def size_lower_bound(self) -> Fraction:
        """max(|M_G|, 3/4 |M*| - 1/4 |M_G|)."""
        reference, optimum = len(self.reference), len(self.optimum)
        return max(Fraction(reference), Fraction(3 * optimum - reference, 4))

    def violations(self) -> List[str]:
        """Return the proof identities this run fails, if any."""
        problems = []
        if self.m11:
            problems.append(f"M_11 is not empty: {sorted(self.m11)}")
        if 2 * len(self.m21) < len(self.b1_star):
            problems.append(f"|M_21|={len(self.m21)} is below half of |B_1*|={len(self.b1_star)}")
        if len(self.m22) != len(self.a2) - len(self.m21):
            expected = len(self.a2) - len(self.m21)
            problems.append(f"|M_22|={len(self.m22)} differs from |A_2|-|M_21|={expected}")
        if len(self.result) < self.size_lower_bound:
            problems.append(f"|M|={len(self.result)} is below {self.size_lower_bound}")
        return problems


def advice_category_breakdown(
    graph: BipartiteGraph, pi: ArrivalOrder, optimum: Optional[Matching] = None
) -> AdviceCategoryBreakdown:
    """Run the advice algorithm and split its matching by category."""
    reference = ranking_run(graph, pi, RankingPermutation.identity(graph.m))
    optimum = optimum if optimum is not None else max_matching(graph)
    result = advice_category_online(graph, pi, advice_category_oracle(graph, pi))
    a2 = frozenset(a for a in graph.a_vertices if reference.partner_of_a(a) is not None)
    a1 = frozenset(graph.a_vertices) - a2
    b2 = reference.b_vertices
    b1 = frozenset(graph.b_vertices) - b2

    def split(a_side: FrozenSet[int], b_side: FrozenSet[int]) -> FrozenSet[tuple]:
        return frozenset((a, b) for a, b in result.pairs if a in a_side and b in b_side)

    return AdviceCategoryBreakdown(
        reference=reference,
        optimum=optimum,
        result=result,
        a1=a1,
        a2=a2,
        b1=b1,
        b2=b2,
        b1_star=frozenset(b for b in b1 if optimum.partner_of_b(b) is not None),
        m11=split(a1, b1),
        m12=split(a1, b2),
        m21=split(a2, b1),
        m22=split(a2, b2),
    )


class CategoryCounts(NamedTuple):
    """Per-category sizes and matched counts of one run; index i-1 is category i."""

    sizes: tuple
    matched: tuple

    def fractions(self) -> Tuple[Optional[Fraction], ...]:
        """x_i for this run: matched share of category i, None when the category is empty."""
        return tuple(
            None if size == 0 else Fraction(hit, size) for size, hit in zip(self.sizes, self.matched)
        )

    def consistent(self, matched_b: int) -> bool:
        """Check sum_i x_i * |B_i| equals the number of matched B-vertices."""
        total = sum(x * size for x, size in zip(self.fractions(), self.sizes) if x is not None)
        return total == matched_b


def category_counts(categories: CategoryAssignment, matching: Matching) -> CategoryCounts:
    sizes = [0] * categories.num_categories
    matched = [0] * categories.num_categories
    for b in range(1, categories.m + 1):
        index = categories.category(b) - 1
        sizes[index] += 1
        if matching.partner_of_b(b) is not None:
            matched[index] += 1
    return CategoryCounts(tuple(sizes), tuple(matched))


def _finite(values: Sequence[float]) -> List[Optional[float]]:
    return [None if math.isnan(v) else float(v) for v in values]


@dataclass(frozen=True)
class CategoryStatistics:
    """Empirical x_i = Pr[b matched | b in category i] pooled over trials.

    x_i is estimated as (matched in category i) / (size of category i), both
    summed over trials. Standard errors linearize that ratio per trial.
    Categories that stayed empty in every trial are NaN and skipped by the checks.
    """

    k: int
    trials: int
    means: tuple
    standard_errors: tuple
    recurrence_means: tuple
    recurrence_errors: tuple

    def x1_holds(self, sigmas: float = 3.0) -> bool:
        """x_1 >= 1 - 1/(2^k + 1), up to ``sigmas`` standard errors."""
        if math.isnan(self.means[0]):
            return False
        return self.means[0] >= 1 - 1 / (2**self.k + 1) - sigmas * self.standard_errors[0]

    def recurrence_holds(self, sigmas: float = 3.0) -> bool:
        """1 - x_i <= (1/2^k) sum_{j<=i} x_j for every i, up to ``sigmas`` standard errors."""
        return all(
            mean <= sigmas * error
            for mean, error in zip(self.recurrence_means, self.recurrence_errors)
            if not math.isnan(mean)
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "x_hat": _finite(self.means),
            "x_hat_se": _finite(self.standard_errors),
            "recurrence_residual": _finite(self.recurrence_means),
            "recurrence_residual_se": _finite(self.recurrence_errors),
        }


def _standard_error(samples: np.ndarray) -> np.ndarray:
    if samples.shape[0] < 2:
        return np.zeros(samples.shape[1:])
    return samples.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])


def category_statistics(k: int, counts: Sequence[CategoryCounts]) -> CategoryStatistics:
    """Aggregate per-trial category counts into x_i estimates.

    Args:
        k: Category bits
        counts: One CategoryCounts per trial

    Raises:
        CategoryError: If there are no trials or a row has the wrong width
    """
    width = 2**k
    if not counts or any(len(c.sizes) != width or len(c.matched) != width for c in counts):
        raise CategoryError(f"Expected a nonempty list of per-trial counts over {width} categories")
    sizes = np.array([c.sizes for c in counts], dtype=float)
    matched = np.array([c.matched for c in counts], dtype=float)
    total = sizes.sum(axis=0)
    populated = total > 0
    safe_total = np.where(populated, total, 1.0)
    means = np.where(populated, matched.sum(axis=0) / safe_total, np.nan)
    mean_size = np.where(populated, sizes.mean(axis=0), 1.0)
    # Per-trial influence of the ratio estimator; its spread gives the standard error.
    influence = (matched - means * sizes) / mean_size
    residuals = (1 - means) - np.cumsum(means) / width
    residual_influence = -influence - np.cumsum(influence, axis=1) / width
    return CategoryStatistics(
        k=k,
        trials=len(counts),
        means=tuple(float(v) for v in means),
        standard_errors=tuple(float(v) for v in _standard_error(influence)),
        recurrence_means=tuple(float(v) for v in residuals),
        recurrence_errors=tuple(float(v) for v in _standard_error(residual_influence)),
    )
