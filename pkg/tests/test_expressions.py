"""k-expressions: evaluation, normal forms and the s-expression text form."""

import itertools
import random

import pytest

from boxmso.core.errors import InvalidInstanceError, MalformedExpressionError, ParseError
from boxmso.engine.expressions import (
    apply_action,
    canonical_action,
    check_matches,
    depth,
    describe,
    evaluate,
    fold_leaf_chains,
    normalize_unary_chains,
    parse,
    relabeled,
    serialize,
    size,
    tag_leaves,
)
from boxmso.models.expression import Action, AddEdges, Composite, Leaf, Relabel, Union
from boxmso.models.graph import Graph


def k2_expression():
    return AddEdges(1, 2, Union(Leaf(1), Leaf(2)))


def test_depth_and_size():
    e = k2_expression()
    assert depth(Leaf(1)) == 1
    assert depth(e) == 3
    assert size(e) == 4
    assert describe(e) == {"depth": 3, "size": 4, "labels": 2, "leaves": 2}


def test_evaluate_single_edge():
    g = evaluate(k2_expression())
    assert g.n == 2
    assert g.edges == frozenset({(0, 1)})
    assert g.labels == {0: 1, 1: 2}


def test_evaluate_relabel_then_join():
    # rho(2 -> 1) merges both vertices into label 1, so a later eta(1, 3) reaches both
    e = AddEdges(1, 3, Union(Relabel(2, 1, Union(Leaf(1), Leaf(2))), Leaf(3)))
    g = evaluate(e)
    assert g.edges == frozenset({(0, 2), (1, 2)})
    assert g.labels == {0: 1, 1: 1, 2: 3}


def test_evaluate_rejects_bad_labels():
    with pytest.raises(MalformedExpressionError):
        evaluate(AddEdges(1, 1, Leaf(1)))
    with pytest.raises(MalformedExpressionError):
        evaluate(Leaf(0))
    with pytest.raises(MalformedExpressionError):
        evaluate(k2_expression(), k=1)


def test_tagged_evaluation_follows_tags():
    e = AddEdges(1, 2, Union(Leaf(1, 1), Union(Leaf(2, 0), Leaf(1, 2))))
    g = evaluate(e, tagged=True)
    assert g.edges == frozenset({(0, 1), (0, 2)})
    assert g.labels[0] == 2


def test_tag_leaves_uses_positions():
    tagged = tag_leaves(Union(Leaf(1), Union(Leaf(2), Leaf(1, 7))))
    assert [leaf.vertex for leaf in (tagged.left, tagged.right.left, tagged.right.right)] == [
        0,
        1,
        7,
    ]


def test_check_matches(k2):
    check_matches(tag_leaves(k2_expression()), k2)
    with pytest.raises(InvalidInstanceError):
        check_matches(tag_leaves(k2_expression()), Graph.build(2))


def test_action_then_composes_relabel_and_join():
    action = Action.relabel(1, 2).then(Action.add_edges(2, 3))
    assert action.mapping == ((1, 2),)
    assert action.edges == frozenset({(1, 3), (2, 3)})
    assert action.apply(1) == 2


@pytest.mark.parametrize("seed", range(40))
def test_canonical_action_matches_stepwise_application(seed):
    rng = random.Random(seed)
    k = rng.randint(2, 4)
    chain = [
        (rng.choice(("rho", "eta")), *rng.sample(range(1, k + 1), 2))
        for _ in range(rng.randint(1, 6))
    ]
    start = {v: rng.randint(1, k) for v in range(rng.randint(1, 6))}

    labels, edges = dict(start), set()
    for op, a, b in chain:
        if op == "rho":
            labels = {v: b if label == a else label for v, label in labels.items()}
        else:
            for u, v in itertools.combinations(sorted(labels), 2):
                if {labels[u], labels[v]} == {a, b}:
                    edges.add((u, v))

    applied, added = dict(start), set()
    apply_action(start, applied, added, canonical_action(chain))
    assert applied == labels
    assert added == edges


def test_normalize_unary_chains():
    a, b = Leaf(1, 0), Leaf(2, 1)
    e = Relabel(2, 1, AddEdges(1, 2, Union(a, b)))
    assert normalize_unary_chains(e) == Composite(Action.of({2: 1}, [(1, 2)]), a, b)
    assert evaluate(normalize_unary_chains(e), tagged=True) == evaluate(e, tagged=True)


def test_fold_leaf_chains():
    e = Union(Relabel(1, 3, Leaf(1, 0)), Leaf(2, 1))
    assert fold_leaf_chains(e) == Union(Leaf(3, 0), Leaf(2, 1))


def test_relabeled_preserves_the_graph():
    e = AddEdges(1, 2, Union(Leaf(1), Leaf(2)))
    action = Action.of({1: 2, 2: 1})
    after = evaluate(relabeled(e, action))
    assert after.edges == evaluate(e).edges
    assert after.labels == {0: 2, 1: 1}


def test_parse_and_serialize():
    text = "(composite (map 2:1) (edges (1 2)) (leaf 1) (union (leaf 2) (leaf 2)))"
    e = parse(text)
    assert isinstance(e, Composite)
    assert e.action == Action.of({2: 1}, [(1, 2)])
    assert serialize(e) == text
    assert parse(serialize(k2_expression())) == k2_expression()


def test_parse_accepts_empty_action_lists():
    e = parse("(composite (map) (edges) (leaf 1) (leaf 1))")
    assert e.action.is_identity
    assert serialize(e) == "(composite (map) (edges) (leaf 1) (leaf 1))"


@pytest.mark.parametrize(
    "text",
    [
        "(leaf 0)",
        "(eta 2 2 (leaf 1))",
        "(union (leaf 1))",
        "(join (leaf 1) (leaf 2))",
        "(leaf 1",
        "(composite (map 2-1) (edges) (leaf 1) (leaf 2))",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)
