"""Evaluation, measurement, normalization and the text form of k-expressions."""

import logging
from collections.abc import Callable, Iterable, Iterator, Sequence
from typing import Any, TypeVar

from boxmso.core.errors import InvalidInstanceError, MalformedExpressionError
from boxmso.engine.sexpr import (
    SExpr,
    SList,
    Token,
    expect_list,
    expect_natural,
    expect_token,
    fail,
    read_one,
)
from boxmso.models.expression import (
    Action,
    AddEdges,
    Composite,
    CwExpression,
    Leaf,
    Relabel,
    Union,
    label_pair,
)
from boxmso.models.graph import Edge, Graph, edge_key

logger = logging.getLogger(__name__)

T = TypeVar("T")


# ============================================================================
# TRAVERSAL
# ============================================================================


def children(e: CwExpression) -> tuple[CwExpression, ...]:
    if isinstance(e, Leaf):
        return ()
    if isinstance(e, (Relabel, AddEdges)):
        return (e.child,)
    return (e.left, e.right)


def postorder(e: CwExpression) -> Iterator[CwExpression]:
    """Nodes bottom-up, left to right; shared subtrees are visited once per use."""
    stack: list[tuple[CwExpression, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        stack.append((node, True))
        for child in reversed(children(node)):
            stack.append((child, False))


def fold(e: CwExpression, combine: Callable[[CwExpression, list[T]], T]) -> T:
    """Bottom-up fold without recursion: ``combine(node, child_results)``."""
    values: list[T] = []
    for node in postorder(e):
        arity = len(children(node))
        args = values[len(values) - arity:] if arity else []
        if arity:
            del values[len(values) - arity:]
        values.append(combine(node, args))
    return values[0]


def node_action(e: CwExpression) -> Action | None:
    """The action a node applies on top of its children (``None`` for leaves)."""
    if isinstance(e, Relabel):
        return Action.relabel(e.source, e.target)
    if isinstance(e, AddEdges):
        return Action.add_edges(e.first, e.second)
    if isinstance(e, Composite):
        return e.action
    if isinstance(e, Union):
        return Action()
    return None


# ============================================================================
# MEASURES
# ============================================================================


def depth(e: CwExpression) -> int:
    """Maximum number of nested operations; a leaf has depth 1."""
    return fold(e, lambda node, sub: 1 + max(sub, default=0))


def size(e: CwExpression) -> int:
    """Number of operation nodes."""
    return fold(e, lambda node, sub: 1 + sum(sub))


def leaves(e: CwExpression) -> list[Leaf]:
    return [node for node in postorder(e) if isinstance(node, Leaf)]


def labels_used(e: CwExpression) -> set[int]:
    found: set[int] = set()
    for node in postorder(e):
        if isinstance(node, Leaf):
            found.add(node.label)
        elif isinstance(node, Relabel):
            found.update((node.source, node.target))
        elif isinstance(node, AddEdges):
            found.update((node.first, node.second))
        elif isinstance(node, Composite):
            found.update(node.action.labels())
    return found


def max_label(e: CwExpression) -> int:
    return max(labels_used(e), default=1)


def leaf_vertices(e: CwExpression) -> list[int]:
    """Vertex id of every leaf, left to right (untagged leaves use their position)."""
    return [leaf.vertex if leaf.vertex is not None else i for i, leaf in enumerate(leaves(e))]


def tag_leaves(e: CwExpression) -> CwExpression:
    """Pin every untagged leaf to its left-to-right position."""
    counter = iter(range(size(e)))

    def combine(node: CwExpression, sub: list[CwExpression]) -> CwExpression:
        if isinstance(node, Leaf):
            index = next(counter)
            return node if node.vertex is not None else Leaf(node.label, index)
        return rebuild(node, sub)

    return fold(e, combine)


def rebuild(node: CwExpression, sub: Sequence[CwExpression]) -> CwExpression:
    """Copy of ``node`` with new children."""
    if isinstance(node, Leaf):
        return node
    if isinstance(node, Relabel):
        return Relabel(node.source, node.target, sub[0])
    if isinstance(node, AddEdges):
        return AddEdges(node.first, node.second, sub[0])
    if isinstance(node, Composite):
        return Composite(node.action, sub[0], sub[1])
    return Union(sub[0], sub[1])


# ============================================================================
# EVALUATION
# ============================================================================


def _check_labels(e: CwExpression, k: int | None) -> None:
    for node in postorder(e):
        if isinstance(node, AddEdges) and node.first == node.second:
            raise MalformedExpressionError(f"eta needs two different labels, got {node.first}")
    used = labels_used(e)
    if any(a < 1 for a in used):
        raise MalformedExpressionError("labels must be at least 1")
    if k is not None and any(a > k for a in used):
        raise MalformedExpressionError(f"label {max(used)} exceeds the bound k={k}")


def apply_action(
    vertices: Iterable[int], labels: dict[int, int], edges: set[Edge], action: Action
) -> None:
    """Apply ``action`` in place to the labeled vertices given."""
    members = list(vertices)
    if action.edges:
        by_label: dict[int, list[int]] = {}
        for v in members:
            by_label.setdefault(labels[v], []).append(v)
        for a, b in action.edges:
            for u in by_label.get(a, ()):
                for v in by_label.get(b, ()):
                    edges.add(edge_key(u, v))
    if action.mapping:
        for v in members:
            labels[v] = action.apply(labels[v])


def evaluate(e: CwExpression, k: int | None = None, tagged: bool = False) -> Graph:
    """
    The labeled graph an expression builds.

    Leaf ids follow left-to-right leaf order, or the leaf tags when
    ``tagged`` is set.
    """
    _check_labels(e, k)
    labels: dict[int, int] = {}
    edges: set[Edge] = set()
    ids = iter(leaf_vertices(e) if tagged else range(size(e)))

    def combine(node: CwExpression, sub: list[list[int]]) -> list[int]:
        if isinstance(node, Leaf):
            v = next(ids)
            if v in labels:
                raise MalformedExpressionError(f"vertex {v} appears in two leaves")
            labels[v] = node.label
            return [v]
        members = [v for part in sub for v in part]
        action = node_action(node)
        if action is not None and not action.is_identity:
            apply_action(members, labels, edges, action)
        return members

    members = fold(e, combine)
    n = len(members)
    if sorted(members) != list(range(n)):
        raise MalformedExpressionError("leaf tags must be exactly 0..n-1")
    return Graph(n=n, edges=frozenset(edges), labels=labels)


def check_matches(e: CwExpression, g: Graph) -> None:
    """Raise unless the tagged expression builds exactly the edges of ``g``."""
    built = evaluate(e, tagged=True)
    if built.n != g.n or built.edges != g.edges:
        raise InvalidInstanceError(
            "expression does not evaluate to the graph",
            expression_vertices=built.n,
            graph_vertices=g.n,
        )


# ============================================================================
# NORMALIZATION
# ============================================================================


def canonical_action(chain: Iterable[tuple[str, int, int]]) -> Action:
    """Normal form of ``("rho", i, j)`` / ``("eta", i, j)`` steps in application order."""
    action = Action()
    for op, a, b in chain:
        step = Action.relabel(a, b) if op == "rho" else Action.add_edges(a, b)
        action = action.then(step)
    return action


def normalize_unary_chains(e: CwExpression) -> CwExpression:
    """Fold every relabel/edge-add chain sitting above a union into one composite."""

    def combine(node: CwExpression, sub: list[CwExpression]) -> CwExpression:
        if isinstance(node, (Relabel, AddEdges)):
            child = sub[0]
            step = node_action(node)
            if isinstance(child, Union):
                return Composite(step, child.left, child.right)
            if isinstance(child, Composite):
                return Composite(child.action.then(step), child.left, child.right)
        return rebuild(node, sub)

    return fold(e, combine)


def fold_leaf_chains(e: CwExpression) -> CwExpression:
    """Replace relabel/edge-add chains sitting directly on a leaf by a relabeled leaf."""

    def combine(node: CwExpression, sub: list[CwExpression]) -> CwExpression:
        if isinstance(node, (Relabel, AddEdges)) and isinstance(sub[0], Leaf):
            leaf = sub[0]
            return Leaf(node_action(node).apply(leaf.label), leaf.vertex)
        return rebuild(node, sub)

    return fold(e, combine)


def relabeled(e: CwExpression, action: Action) -> CwExpression:
    """``e`` followed by ``action``, merged into the root where possible."""
    if action.is_identity:
        return e
    if isinstance(e, Leaf):
        return Leaf(action.apply(e.label), e.vertex)
    if isinstance(e, Composite):
        return Composite(e.action.then(action), e.left, e.right)
    if isinstance(e, Union):
        return Composite(action, e.left, e.right)
    result = e
    for a, b in sorted(action.edges):
        result = AddEdges(a, b, result)
    spare = max(max_label(e), *action.labels()) + 1
    for i, (source, _) in enumerate(action.mapping):
        result = Relabel(source, spare + i, result)
    for i, (_, target) in enumerate(action.mapping):
        result = Relabel(spare + i, target, result)
    return result


# ============================================================================
# TEXT FORM
# ============================================================================


def serialize(e: CwExpression) -> str:
    def combine(node: CwExpression, sub: list[str]) -> str:
        if isinstance(node, Leaf):
            return f"(leaf {node.label})"
        if isinstance(node, Union):
            return f"(union {sub[0]} {sub[1]})"
        if isinstance(node, Relabel):
            return f"(rho {node.source} {node.target} {sub[0]})"
        if isinstance(node, AddEdges):
            return f"(eta {node.first} {node.second} {sub[0]})"
        mapping = " ".join(f"{a}:{b}" for a, b in node.action.mapping)
        edges = " ".join(f"({a} {b})" for a, b in sorted(node.action.edges))
        return f"(composite (map {mapping}) (edges {edges}) {sub[0]} {sub[1]})".replace(
            "(map )", "(map)"
        ).replace("(edges )", "(edges)")

    return fold(e, combine)


def _parse_node(node: SExpr) -> CwExpression:
    items = expect_list(node, "an expression").items
    if not items:
        raise fail(node, "empty expression")
    head = expect_token(items[0], "an operator")
    args = items[1:]

    def arity(count: int) -> None:
        if len(args) != count:
            raise fail(node, f"{head} takes {count} arguments, got {len(args)}")

    if head == "leaf":
        arity(1)
        return Leaf(expect_natural(args[0], "a label", 1))
    if head == "union":
        arity(2)
        return Union(_parse_node(args[0]), _parse_node(args[1]))
    if head == "rho":
        arity(3)
        return Relabel(
            expect_natural(args[0], "a label", 1),
            expect_natural(args[1], "a label", 1),
            _parse_node(args[2]),
        )
    if head == "eta":
        arity(3)
        first = expect_natural(args[0], "a label", 1)
        second = expect_natural(args[1], "a label", 1)
        if first == second:
            raise fail(args[1], "eta needs two different labels")
        return AddEdges(first, second, _parse_node(args[2]))
    if head == "composite":
        arity(4)
        action = _parse_action(args[0], args[1])
        return Composite(action, _parse_node(args[2]), _parse_node(args[3]))
    raise fail(items[0], f"unknown operator {head!r}")


def _parse_action(map_node: SExpr, edge_node: SExpr) -> Action:
    map_items = expect_list(map_node, "(map ...)").items
    if not map_items or expect_token(map_items[0], "map") != "map":
        raise fail(map_node, "expected (map ...)")
    mapping: dict[int, int] = {}
    for item in map_items[1:]:
        text = expect_token(item, "I:J")
        source, _, target = text.partition(":")
        if not (source.isdigit() and target.isdigit()) or int(source) < 1 or int(target) < 1:
            raise fail(item, f"expected I:J with labels >= 1, got {text!r}")
        mapping[int(source)] = int(target)
    edge_items = expect_list(edge_node, "(edges ...)").items
    if not edge_items or expect_token(edge_items[0], "edges") != "edges":
        raise fail(edge_node, "expected (edges ...)")
    pairs: list[tuple[int, int]] = []
    for item in edge_items[1:]:
        pair = expect_list(item, "(I J)")
        if len(pair.items) != 2:
            raise fail(item, "expected (I J)")
        a = expect_natural(pair.items[0], "a label", 1)
        b = expect_natural(pair.items[1], "a label", 1)
        if a == b:
            raise fail(item, "edge pair needs two different labels")
        pairs.append(label_pair(a, b))
    return Action.of(mapping, pairs)


def parse(text: str) -> CwExpression:
    """Parse the s-expression form of a k-expression."""
    return _parse_node(read_one(text))


def describe(e: CwExpression) -> dict[str, Any]:
    return {"depth": depth(e), "size": size(e), "labels": max_label(e), "leaves": len(leaves(e))}


__all__ = [
    "SList",
    "Token",
    "apply_action",
    "canonical_action",
    "check_matches",
    "depth",
    "evaluate",
    "fold",
    "leaf_vertices",
    "leaves",
    "max_label",
    "normalize_unary_chains",
    "parse",
    "postorder",
    "relabeled",
    "serialize",
    "size",
    "tag_leaves",
]
