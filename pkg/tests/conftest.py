"""Pytest fixtures for matching-advice tests."""

import logging

import pytest

from matching_advice.engine import ArrivalOrder, RankingPermutation
from matching_advice.lowerbounds.string_guessing import semi_complete
from matching_advice.models import BipartiteGraph, build_graph

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def pytest_addoption(parser):
    """Add command-line options to pytest."""
    parser.addoption(
        "--skip-slow",
        action="store_true",
        default=False,
        help="Skip full-scale statistical and exhaustive tests",
    )


def pytest_configure(config):
    """Configure pytest with additional markers."""
    config.addinivalue_line("markers", "slow: full-scale statistical and exhaustive runs")


def pytest_collection_modifyitems(config, items):
    """Skip slow tests if --skip-slow is provided."""
    if config.getoption("--skip-slow"):
        skip_slow = pytest.mark.skip(reason="Slow tests skipped with --skip-slow")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture
def semi3() -> BipartiteGraph:
    """The 3-semi-complete graph: a_i adjacent to b_j for j >= i."""
    return semi_complete(3)


@pytest.fixture
def path_graph() -> BipartiteGraph:
    """a1-b1, a1-b2, a2-b1: Greedy by id can block a2, the optimum is 2."""
    return build_graph(2, 2, [(1, 1), (1, 2), (2, 1)])


@pytest.fixture
def star_graph() -> BipartiteGraph:
    """Three A-vertices that all see only b1."""
    return build_graph(3, 1, [(1, 1), (2, 1), (3, 1)])


@pytest.fixture
def empty_graph() -> BipartiteGraph:
    """Two A-vertices, two B-vertices, no edges."""
    return build_graph(2, 2, [])


@pytest.fixture
def identity_order():
    """Factory for identity arrival orders."""
    return ArrivalOrder.identity


@pytest.fixture
def identity_ranking():
    """Factory for identity ranking permutations."""
    return RankingPermutation.identity
