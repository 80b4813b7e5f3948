"""Expression generators and depth balancing."""

import networkx as nx
import pytest

from boxmso.core.errors import InvalidInstanceError
from boxmso.engine.balance import balance, output_labels
from boxmso.engine.expressions import depth, evaluate, max_label
from boxmso.engine.generators import (
    cograph_expression,
    cotree_graph,
    edgeless_expression,
    expression_for,
    forest_expression,
    path_expression,
    path_graph,
    random_cotree,
    random_tree,
    trivial_expression,
    tree_expression,
)
from boxmso.engine.graphs import from_networkx
from boxmso.models.expression import Action, Composite, Leaf
from boxmso.models.graph import Graph


def edges_of(e):
    return evaluate(e, tagged=True).edges


def test_edgeless_expression():
    e = edgeless_expression(5)
    assert edges_of(e) == frozenset()
    assert max_label(e) == 1
    assert depth(e) == 4


def test_trivial_expression_builds_any_graph(triangle):
    assert edges_of(trivial_expression(triangle)) == triangle.edges
    assert trivial_expression(Graph.build(1)) == Leaf(1)
    with pytest.raises(InvalidInstanceError):
        trivial_expression(Graph.build(0))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 8])
def test_path_expression(n):
    e = path_expression(n)
    assert edges_of(e) == path_graph(n).edges
    assert max_label(e) <= 5


def test_path_expression_depth_is_logarithmic():
    assert depth(path_expression(8)) == 4
    assert depth(path_expression(16)) == 5


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_linear_path_expression(n):
    e = path_expression(n, linear=True)
    assert edges_of(e) == path_graph(n).edges
    assert max_label(e) <= 3
    assert depth(e) == n


def test_tree_expression_uses_three_labels():
    tree = nx.balanced_tree(2, 3)
    e = tree_expression(tree, 0)
    assert edges_of(e) == from_networkx(tree).edges
    assert max_label(e) <= 3


def test_forest_expression():
    forest = Graph.build(6, [(0, 1), (1, 2), (4, 5)])
    assert edges_of(forest_expression(forest)) == forest.edges
    with pytest.raises(InvalidInstanceError):
        forest_expression(Graph.build(3, [(0, 1), (1, 2), (0, 2)]))


def test_expression_for_picks_a_construction(triangle):
    tree = random_tree(9, seed=4)
    assert edges_of(expression_for(tree)) == tree.edges
    assert edges_of(expression_for(triangle)) == triangle.edges


def test_random_tree_is_seeded():
    assert random_tree(10, seed=1) == random_tree(10, seed=1)
    assert len(random_tree(10, seed=1).edges) == 9


def test_cograph_expression():
    cotree = ("join", [("union", [("leaf", 0), ("leaf", 1)]), ("leaf", 2), ("leaf", 3)])
    g = cotree_graph(cotree)
    assert len(g.edges) == 5
    e = cograph_expression(cotree)
    assert edges_of(e) == g.edges
    assert max_label(e) <= 2


@pytest.mark.parametrize("seed", range(5))
def test_random_cotrees_need_two_labels(seed):
    cotree = random_cotree(12, seed=seed)
    g = cotree_graph(cotree)
    assert g.n == 12
    e = cograph_expression(cotree)
    assert edges_of(e) == g.edges
    assert max_label(e) <= 2


def test_cograph_rejects_unknown_nodes():
    with pytest.raises(InvalidInstanceError):
        cograph_expression(("meet", [("leaf", 0)]))
    with pytest.raises(InvalidInstanceError):
        cograph_expression(("union", []))


# ============================================================================
# BALANCING
# ============================================================================


def caterpillar(n):
    """Left-deep expression of depth ``n``: each step joins a new vertex to all before it."""
    e = Leaf(1, 0)
    for v in range(1, n):
        e = Composite(Action.of({2: 1}, [(1, 2)]), e, Leaf(2, v))
    return e


def test_balance_reduces_deep_expressions():
    e = caterpillar(64)
    outcome = balance(e, max_labels=64)
    assert not outcome.unbalanced
    assert depth(outcome.expression) < depth(e)
    assert edges_of(outcome.expression) == edges_of(e)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_balance_never_deepens(seed):
    tree = random_tree(12, seed=seed)
    e = forest_expression(tree)
    outcome = balance(e)
    assert depth(outcome.expression) <= depth(e)
    assert edges_of(outcome.expression) == tree.edges


def test_balance_reports_label_overflow():
    e = caterpillar(32)
    outcome = balance(e, max_labels=1)
    assert outcome.unbalanced
    assert depth(outcome.expression) == depth(e)


def test_output_labels():
    e = Composite(Action.of({2: 1}, [(1, 2)]), Leaf(1), Leaf(2))
    assert output_labels(e) == frozenset({1})


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("shape", ["path", "caterpillar"])
def test_balanced_depth_is_logarithmic(shape, m):
    n = 2**m
    e = path_expression(n, linear=True) if shape == "path" else caterpillar(n)
    outcome = balance(e, max_labels=64)
    assert not outcome.unbalanced
    assert depth(outcome.expression) <= 3 * m + 4
    assert edges_of(outcome.expression) == edges_of(e)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_balance_keeps_random_graphs(seed):
    if seed % 2:
        g = random_tree(6 + seed % 20, seed=seed)
        e = forest_expression(g)
    else:
        cotree = random_cotree(6 + seed % 20, seed=seed)
        g, e = cotree_graph(cotree), cograph_expression(cotree)
    outcome = balance(e, max_labels=64)
    assert edges_of(outcome.expression) == g.edges
    assert depth(outcome.expression) <= depth(e)
