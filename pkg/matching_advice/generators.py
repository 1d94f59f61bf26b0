"""Instance generators, deterministic given kind, parameters and seed."""

import logging
from typing import Any, Callable, Dict, List, Mapping, Optional

import numpy as np

from matching_advice.engine import ArrivalOrder, RankingPermutation
from matching_advice.lowerbounds.ranking import h_gadget, ranking_lb_instance
from matching_advice.lowerbounds.string_guessing import semi_complete
from matching_advice.models import BipartiteGraph, build_graph

logger = logging.getLogger(__name__)


def _int(params: Mapping[str, Any], key: str, default: Optional[int] = None) -> int:
    if key not in params:
        if default is None:
            raise ValueError(f"Missing generator parameter {key!r}")
        return default
    try:
        return int(params[key])
    except (TypeError, ValueError):
        raise ValueError(f"Generator parameter {key!r} must be an integer, got {params[key]!r}")


def _semi_complete(params: Mapping[str, Any], rng: np.random.Generator) -> BipartiteGraph:
    return semi_complete(_int(params, "c"))


def _h_gadget(params: Mapping[str, Any], rng: np.random.Generator) -> BipartiteGraph:
    return h_gadget(_int(params, "z"))


def _random_bipartite(params: Mapping[str, Any], rng: np.random.Generator) -> BipartiteGraph:
    n = _int(params, "n")
    m = _int(params, "m", n)
    p = float(params.get("p", 0.5))
    if not 0 <= p <= 1:
        raise ValueError(f"Edge probability must lie in [0, 1], got {p}")
    mask = rng.random((n, m)) < p
    return build_graph(n, m, ((a + 1, b + 1) for a, b in zip(*np.nonzero(mask))))


def _perfect_random(params: Mapping[str, Any], rng: np.random.Generator) -> BipartiteGraph:
    """Planted perfect matching a -> planted[a] plus ``extra_edges`` uniform extra edges."""
    n = _int(params, "n")
    extra = _int(params, "extra_edges", 0)
    planted = rng.permutation(n) + 1
    edges = [(a + 1, int(planted[a])) for a in range(n)]
    if extra:
        tails = rng.integers(1, n + 1, size=extra)
        heads = rng.integers(1, n + 1, size=extra)
        edges.extend((int(a), int(b)) for a, b in zip(tails, heads))
    return build_graph(n, n, edges)


def _sigma(name: str, n: int, rng: np.random.Generator) -> RankingPermutation:
    if name == "identity":
        return RankingPermutation.identity(n)
    if name == "reverse":
        return RankingPermutation.reverse(n)
    if name == "random":
        return RankingPermutation(tuple(int(r) for r in rng.permutation(n) + 1))
    raise ValueError(f"Unknown permutation {name!r}; use identity, reverse or random")


def ranking_lb_permutations(params: Mapping[str, Any], rng: np.random.Generator) -> List[RankingPermutation]:
    """The k permutations named by ``sigma`` (space-separated: identity, reverse, random)."""
    n = _int(params, "n")
    k = _int(params, "k", 1)
    names = str(params.get("sigma", "identity")).split()
    if len(names) == 1:
        names = names * k
    if len(names) != k:
        raise ValueError(f"Expected {k} permutation names, got {names}")
    return [_sigma(name, n, rng) for name in names]


def _ranking_lb(params: Mapping[str, Any], rng: np.random.Generator) -> BipartiteGraph:
    n = _int(params, "n")
    epsilon = float(params.get("eps", 0.5))
    perms = ranking_lb_permutations(params, rng)
    return ranking_lb_instance(perms, ArrivalOrder.identity(n), epsilon).graph


GENERATORS: Dict[str, Callable[[Mapping[str, Any], np.random.Generator], BipartiteGraph]] = {
    "semi_complete": _semi_complete,
    "h_gadget": _h_gadget,
    "random_bipartite": _random_bipartite,
    "perfect_random": _perfect_random,
    "ranking_lb": _ranking_lb,
}


def generate(
    kind: str, params: Optional[Mapping[str, Any]] = None, seed: Optional[int] = None
) -> BipartiteGraph:
    """Generate an instance.

    Args:
        kind: One of GENERATORS
        params: Kind-specific parameters
        seed: Seed for numpy's default_rng

    Returns:
        Generated graph

    Raises:
        ValueError: For unknown kinds or invalid parameters
    """
    if kind not in GENERATORS:
        raise ValueError(f"Unknown generator kind {kind!r}; choose from {', '.join(sorted(GENERATORS))}")
    graph = GENERATORS[kind](params or {}, np.random.default_rng(seed))
    logger.debug(f"Generated {kind} {dict(params or {})} seed={seed}: {graph.summary()}")
    return graph
