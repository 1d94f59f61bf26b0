"""Reduction from string guessing with known history to online matching.

Each character r_j of the hidden string over an alphabet of c! symbols is
encoded as a c-semi-complete block whose B-ids are permuted by the r_j-th
permutation. A matching algorithm that matches a block perfectly reveals that
permutation, so it can be turned into a string guesser.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from matching_advice.advice import AdviceTape, fixed_width
from matching_advice.engine import ArrivalOrder, RankingPermutation
from matching_advice.matching import max_matching
from matching_advice.models import BipartiteGraph, Matching, build_graph

logger = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-12


class ProtocolViolationError(ValueError):
    """Raised when an online algorithm picks a non-neighbor or a taken vertex."""


def semi_complete(c: int) -> BipartiteGraph:
    """c-semi-complete graph: a_i adjacent to b_j exactly when j >= i."""
    if c < 1:
        raise ValueError(f"Semi-complete graphs need c >= 1, got {c}")
    return build_graph(c, c, ((i, j) for i in range(1, c + 1) for j in range(i, c + 1)))


class PermutationIndex:
    """Lehmer-code ranking of the c! permutations of 1..c.

    Indices are 1-based; symbol r of the alphabet maps to index r + 1.
    """

    def __init__(self, c: int) -> None:
        if c < 1:
            raise ValueError(f"Block size must be at least 1, got {c}")
        self.c = c
        self.size = math.factorial(c)

    def rank(self, perm: Sequence[int]) -> int:
        """Return the 1-based index of ``perm``."""
        if sorted(perm) != list(range(1, self.c + 1)):
            raise ValueError(f"Not a permutation of 1..{self.c}: {list(perm)}")
        index = 0
        for i, value in enumerate(perm):
            smaller = sum(1 for later in perm[i + 1:] if later < value)
            index += smaller * math.factorial(self.c - 1 - i)
        return index + 1

    def unrank(self, index: int) -> Tuple[int, ...]:
        """Return the permutation with 1-based ``index``."""
        if not 1 <= index <= self.size:
            raise ValueError(f"Permutation index must lie in 1..{self.size}, got {index}")
        remaining = list(range(1, self.c + 1))
        code = index - 1
        perm = []
        for i in range(self.c - 1, -1, -1):
            digit, code = divmod(code, math.factorial(i))
            perm.append(remaining.pop(digit))
        return tuple(perm)

    def symbol_to_index(self, symbol: int) -> int:
        return symbol + 1

    def index_to_symbol(self, index: int) -> int:
        return index - 1


@dataclass(frozen=True)
class SgkhInstance:
    """Hidden string over the alphabet {0..q-1}."""

    q: int
    target: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", tuple(int(r) for r in self.target))
        if self.q < 2:
            raise ValueError(f"Alphabet size must be at least 2, got {self.q}")
        for position, symbol in enumerate(self.target):
            if not 0 <= symbol < self.q:
                raise ValueError(f"Character {position} is {symbol}, outside 0..{self.q - 1}")

    @classmethod
    def random(cls, q: int, length: int, seed: Optional[int] = None) -> "SgkhInstance":
        rng = np.random.default_rng(seed)
        return cls(q, tuple(int(r) for r in rng.integers(0, q, size=length)))

    def __len__(self) -> int:
        return len(self.target)


class OnlineMatcher(ABC):
    """Deterministic online matching algorithm reading an optional advice tape."""

    name = "matcher"

    def advise(self, graph: BipartiteGraph, pi: ArrivalOrder) -> AdviceTape:
        """Oracle side: the advice this algorithm wants for the whole instance."""
        return AdviceTape()

    @abstractmethod
    def reset(self, n: int, m: int, tape: AdviceTape) -> None:
        """Start a new run."""

    @abstractmethod
    def arrive(self, a: int, neighbors: Tuple[int, ...]) -> Optional[int]:
        """Handle one arrival; return the chosen B-vertex or None."""


class GreedyMatcher(OnlineMatcher):
    """Match to the free neighbor of smallest id."""

    name = "greedy"

    def reset(self, n: int, m: int, tape: AdviceTape) -> None:
        self._taken: Set[int] = set()

    def arrive(self, a: int, neighbors: Tuple[int, ...]) -> Optional[int]:
        for b in sorted(neighbors):
            if b not in self._taken:
                self._taken.add(b)
                return b
        return None


class RankingMatcher(OnlineMatcher):
    """Match to the free neighbor of minimum rank under a fixed permutation."""

    name = "ranking"

    def __init__(self, sigma: RankingPermutation) -> None:
        self.sigma = sigma

    def reset(self, n: int, m: int, tape: AdviceTape) -> None:
        self._taken: Set[int] = set()

    def arrive(self, a: int, neighbors: Tuple[int, ...]) -> Optional[int]:
        free = [b for b in neighbors if b not in self._taken]
        if not free:
            return None
        choice = min(free, key=self.sigma.rank)
        self._taken.add(choice)
        return choice


class OptimalAdviceMatcher(OnlineMatcher):
    """Reads its partner in a maximum matching from the tape, one field per arrival."""

    name = "optimal"

    def advise(self, graph: BipartiteGraph, pi: ArrivalOrder) -> AdviceTape:
        optimum = max_matching(graph)
        tape = AdviceTape()
        tape.write_self_delimited(graph.n)
        tape.write_self_delimited(graph.m)
        width = fixed_width(graph.m)
        for a in pi.sequence:
            tape.write_fixed(optimum.partner_of_a(a) or 0, width)
        return tape

    def reset(self, n: int, m: int, tape: AdviceTape) -> None:
        self._tape = tape
        self._taken: Set[int] = set()
        tape.read_self_delimited()
        self._width = fixed_width(tape.read_self_delimited())

    def arrive(self, a: int, neighbors: Tuple[int, ...]) -> Optional[int]:
        partner = self._tape.read_fixed(self._width)
        if partner == 0 or partner not in neighbors or partner in self._taken:
            return None
        self._taken.add(partner)
        return partner


def _offer(matcher: OnlineMatcher, a: int, neighbors: Tuple[int, ...], taken: Set[int]) -> Optional[int]:
    choice = matcher.arrive(a, neighbors)
    if choice is None:
        return None
    if choice not in neighbors:
        raise ProtocolViolationError(f"{matcher.name} matched a{a} to non-neighbor b{choice}")
    if choice in taken:
        raise ProtocolViolationError(f"{matcher.name} matched a{a} to already matched b{choice}")
    taken.add(choice)
    return choice


def run_online(
    matcher: OnlineMatcher, graph: BipartiteGraph, pi: ArrivalOrder, tape: Optional[AdviceTape] = None
) -> Matching:
    """Drive a matcher over a whole instance, checking every choice.

    Raises:
        ProtocolViolationError: If the matcher makes an illegal choice
    """
    tape = tape if tape is not None else matcher.advise(graph, pi)
    matcher.reset(graph.n, graph.m, tape)
    taken: Set[int] = set()
    pairs = []
    for a in pi.sequence:
        b = _offer(matcher, a, graph.neighbors(a), taken)
        if b is not None:
            pairs.append((a, b))
    return Matching(frozenset(pairs))


def reduction_instance(instance: SgkhInstance, c: int) -> Tuple[BipartiteGraph, ArrivalOrder]:
    """Build the matching instance encoding the whole hidden string.

    Block j occupies A- and B-ids j*c+1 .. j*c+c; its k-th A-vertex is adjacent
    to the B-vertices at offsets perm[i] for i >= k, with perm the permutation
    indexed by the j-th character.
    """
    index = PermutationIndex(c)
    if instance.q != index.size:
        raise ValueError(f"Alphabet size {instance.q} must equal {c}! = {index.size}")
    edges = []
    for j, symbol in enumerate(instance.target):
        perm = index.unrank(index.symbol_to_index(symbol))
        base = j * c
        for k in range(1, c + 1):
            edges.extend((base + k, base + perm[i - 1]) for i in range(k, c + 1))
    size = c * len(instance)
    return build_graph(size, size, edges), ArrivalOrder.identity(size)


@dataclass(frozen=True)
class BlockOutcome:
    """One character: the guess, whether it was right and whether the real block was matched perfectly."""

    index: int
    target: int
    prediction: int
    correct: bool
    perfect: bool
    adaptive_complete: bool

    def __post_init__(self) -> None:
        if self.correct and not self.adaptive_complete:
            raise ValueError(f"Block {self.index}: an incomplete adaptive run cannot be correct")

    @property
    def consistent(self) -> bool:
        """The guess is right exactly when the real block was matched perfectly."""
        return self.correct == self.perfect


@dataclass(frozen=True)
class ReductionResult:
    blocks: Tuple[BlockOutcome, ...]
    requests: int
    advice_bits: int

    @property
    def predictions(self) -> Tuple[int, ...]:
        return tuple(block.prediction for block in self.blocks)

    @property
    def correct_count(self) -> int:
        return sum(1 for block in self.blocks if block.correct)

    @property
    def perfect_count(self) -> int:
        return sum(1 for block in self.blocks if block.perfect)

    @property
    def equivalence_holds(self) -> bool:
        return all(block.consistent for block in self.blocks)

    def to_dict(self) -> dict:
        return {
            "characters": len(self.blocks),
            "requests": self.requests,
            "advice_bits": self.advice_bits,
            "correct": self.correct_count,
            "perfect_blocks": self.perfect_count,
            "equivalence_holds": self.equivalence_holds,
            "predictions": list(self.predictions),
        }


def sgkh_reduction_run(matcher: OnlineMatcher, instance: SgkhInstance, c: int) -> ReductionResult:
    """Guess every character by simulating the matcher on the known prefix plus an adaptive block.

    For character j the matcher is restarted on its tape, fed the real blocks
    0..j-1, then shown a fresh block whose k-th A-vertex sees exactly the still
    unmatched B-vertices of that block. The permutation traced by its choices is
    the guess. A-vertices it leaves unmatched are filled with the remaining
    offsets in ascending order, and such a guess is scored as incorrect.

    Raises:
        ProtocolViolationError: If the matcher picks a non-neighbor or a taken vertex
    """
    index = PermutationIndex(c)
    graph, pi = reduction_instance(instance, c)
    tape = matcher.advise(graph, pi)
    real = run_online(matcher, graph, pi, tape.copy())

    blocks: List[BlockOutcome] = []
    for j, symbol in enumerate(instance.target):
        base = j * c
        matcher.reset(graph.n, graph.m, tape.copy())
        taken: Set[int] = set()
        for a in range(1, base + 1):
            _offer(matcher, a, graph.neighbors(a), taken)
        choices: List[Optional[int]] = []
        for k in range(1, c + 1):
            free = tuple(base + offset for offset in range(1, c + 1) if base + offset not in taken)
            b = _offer(matcher, base + k, free, taken)
            choices.append(None if b is None else b - base)
        leftovers = iter(sorted(set(range(1, c + 1)) - {o for o in choices if o is not None}))
        perm = tuple(o if o is not None else next(leftovers) for o in choices)
        prediction = index.index_to_symbol(index.rank(perm))
        perfect = all(real.partner_of_a(base + k) is not None for k in range(1, c + 1))
        complete = all(o is not None for o in choices)
        blocks.append(
            BlockOutcome(
                index=j,
                target=symbol,
                prediction=prediction,
                correct=complete and prediction == symbol,
                perfect=perfect,
                adaptive_complete=complete,
            )
        )
    result = ReductionResult(tuple(blocks), requests=graph.n, advice_bits=tape.bits_written)
    logger.info(
        f"Reduction with {matcher.name}, c={c}: {result.correct_count}/{len(blocks)} correct, "
        f"{result.perfect_count} perfect blocks"
    )
    return result


def entropy_q(q: int, p: float) -> float:
    """q-ary entropy H_q(p), with 0 log 0 taken as 0."""
    if q < 2 or not 0 <= p <= 1:
        raise ValueError(f"Need q >= 2 and 0 <= p <= 1, got q={q}, p={p}")

    def term(x: float) -> float:
        return 0.0 if x == 0 else x * math.log(x, q)

    return p * math.log(q - 1, q) - term(p) - term(1 - p)


def rho_range(c: int) -> Tuple[float, float]:
    """Competitive ratios covered by the string-guessing bound: [1 - 1/c + 1/c!, 1)."""
    return 1 - 1 / c + 1 / math.factorial(c), 1.0


def advice_lb_per_request(c: int, rho: float) -> float:
    """Advice bits per request any rho-competitive algorithm needs.

    (1 - H_q(1 - alpha)) / 2 * log2 c with q = c! and alpha = 1 - (1 - rho) c.

    Raises:
        ValueError: If c < 3 or rho lies outside [1 - 1/c + 1/c!, 1)
    """
    if c < 3:
        raise ValueError(f"Block size must be at least 3, got {c}")
    low, high = rho_range(c)
    if not low - RANGE_TOLERANCE <= rho < high:
        raise ValueError(f"rho={rho} is outside the valid interval [{low}, {high}) for c={c}")
    alpha = 1 - (1 - rho) * c
    miss = min(max(1 - alpha, 0.0), 1.0)
    return (1 - entropy_q(math.factorial(c), miss)) / 2 * math.log2(c)


def advice_lb_total(c: int, rho: float, n: int) -> float:
    """Total advice lower bound over n requests."""
    return advice_lb_per_request(c, rho) * n


def eps_advice_lower_bound(epsilon: float) -> Tuple[int, float]:
    """Per-request advice needed for ratio 1 - eps, using blocks of size floor(1/(2 eps)).

    Grows like log(1/eps); this is a lower bound, so the matching upper
    bound of the (1 - eps) scheme sits above it.

    Returns:
        Tuple of (block size c, bits per request)

    Raises:
        ValueError: If eps > 1/6 (the block size would drop below 3)
    """
    if not 0 < epsilon <= 1 / 6:
        raise ValueError(f"epsilon must lie in (0, 1/6], got {epsilon}")
    c = math.floor(1 / (2 * epsilon) + RANGE_TOLERANCE)
    return c, advice_lb_per_request(c, 1 - epsilon)
