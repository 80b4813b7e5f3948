"""Shared fixtures: small graphs, their expressions and a few queries."""

from fractions import Fraction

import pytest

from boxmso.core.config import Limits
from boxmso.engine.generators import edgeless_expression, path_graph
from boxmso.engine.queries import parse_query
from boxmso.models.graph import Graph


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running brute-force or engine checks")


# ============================================================================
# GRAPHS
# ============================================================================


@pytest.fixture
def k2() -> Graph:
    return Graph.build(2, [(0, 1)])


@pytest.fixture
def triangle() -> Graph:
    return Graph.build(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def p4() -> Graph:
    return path_graph(4)


@pytest.fixture
def star3() -> Graph:
    """K_{1,3} with center 0."""
    return Graph.build(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def items() -> Graph:
    """Edgeless graph carrying the multiset {3, 5, 8} as weight ``w``."""
    return Graph.build(3, weights={"w": {0: 3, 1: 5, 2: 8}})


@pytest.fixture
def items_expression():
    return edgeless_expression(3)


# ============================================================================
# QUERIES
# ============================================================================


def subset_sum_query(target: int):
    return parse_query(
        "(query (free X)"
        f" (constraint (and (cmp <= (term 0 (coef w X 1)) {target})"
        f" (cmp >= (term 0 (coef w X 1)) {target})))"
        " (target 0))"
    )


@pytest.fixture
def subset_sum_8():
    return subset_sum_query(8)


@pytest.fixture
def subset_sum_9():
    return subset_sum_query(9)


@pytest.fixture
def independent_set_query():
    """Heaviest independent set under weight ``w``."""
    return parse_query(
        "(query (free X)"
        " (constraint (forall x (forall y (not (and (in x X) (in y X) (edge x y))))))"
        " (target (term 0 (coef w X 1))))"
    )


@pytest.fixture
def limits() -> Limits:
    return Limits(budget=2**20)


@pytest.fixture
def quarter() -> Fraction:
    return Fraction(1, 4)
