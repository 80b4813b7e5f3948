"""Bounded-width k-expressions of low depth for common graph classes."""

import logging
import random
from collections.abc import Sequence
from typing import Any

import networkx as nx

from boxmso.core.errors import InvalidInstanceError
from boxmso.engine.expressions import relabeled
from boxmso.engine.graphs import from_networkx, is_forest, to_networkx
from boxmso.models.expression import Action, Composite, CwExpression, Leaf, Union
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

Cotree = tuple[str, Any]


def balanced_union(parts: Sequence[CwExpression]) -> CwExpression:
    """Disjoint union of ``parts`` as a tree of logarithmic depth."""
    if not parts:
        raise InvalidInstanceError("cannot build an expression for the empty graph")
    layer = list(parts)
    while len(layer) > 1:
        paired = [Union(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            paired.append(layer[-1])
        layer = paired
    return layer[0]


def _balanced_merge(parts: Sequence[CwExpression], merge) -> CwExpression:
    layer = list(parts)
    while len(layer) > 1:
        paired = [merge(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            paired.append(layer[-1])
        layer = paired
    return layer[0]


# ============================================================================
# EDGELESS AND TRIVIAL
# ============================================================================


def edgeless_expression(n: int) -> CwExpression:
    """Edgeless graph on ``n`` vertices: one label, balanced unions."""
    return balanced_union([Leaf(1, v) for v in range(n)])


def trivial_expression(g: Graph) -> CwExpression:
    """Fallback for any graph: one label per vertex, every edge added at the root."""
    if g.n == 0:
        raise InvalidInstanceError("cannot build an expression for the empty graph")
    if g.n == 1:
        return Leaf(1, 0)
    root = balanced_union([Leaf(v + 1, v) for v in range(g.n)])
    action = Action.of({v + 1: 1 for v in range(g.n)}, [(u + 1, v + 1) for u, v in g.edges])
    return Composite(action, root.left, root.right)


# ============================================================================
# PATHS
# ============================================================================


def path_expression(n: int, linear: bool = False) -> CwExpression:
    """
    Path ``0 - 1 - ... - n-1``.

    A segment carries label 1 on its left end, 2 on its right end and 3
    inside; merging relabels the right segment's ends to 4 and 5 first.
    With ``linear`` the path grows one vertex at a time from the left on
    three labels: the right end carries 2, the rest 1, the new vertex 3.
    The depth is then ``n``.
    """
    if n == 0:
        raise InvalidInstanceError("cannot build an expression for the empty graph")
    if linear:
        built: CwExpression = Leaf(2, 0)
        for v in range(1, n):
            built = Composite(Action.of({2: 1, 3: 2}, [(2, 3)]), built, Leaf(3, v))
        return built
    layer: list[tuple[CwExpression, int]] = [(Leaf(1, v), 1) for v in range(n)]

    def merge(left: tuple[CwExpression, int], right: tuple[CwExpression, int]):
        left_expr, left_len = left
        right_expr, right_len = right
        shifted = relabeled(right_expr, Action.of({1: 4, 2: 5}))
        left_end = 1 if left_len == 1 else 2
        mapping = {} if left_len == 1 else {2: 3}
        mapping.update({4: 2} if right_len == 1 else {4: 3, 5: 2})
        action = Action.of(mapping, [(left_end, 4)])
        return Composite(action, left_expr, shifted), left_len + right_len

    while len(layer) > 1:
        paired = [merge(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            paired.append(layer[-1])
        layer = paired
    return layer[0][0]


# ============================================================================
# TREES AND FORESTS
# ============================================================================


def tree_expression(tree: nx.Graph, root: int) -> CwExpression:
    """
    Rooted tree with three labels: the root of a subtree carries 1, the rest 2.

    Depth grows with the tree height, not with the vertex count.
    """
    if root not in tree:
        raise InvalidInstanceError(f"root {root} is not a tree vertex")
    order = list(nx.dfs_preorder_nodes(tree, root))
    parent = {root: None}
    for u, v in nx.dfs_edges(tree, root):
        parent[v] = u
    children: dict[int, list[int]] = {v: [] for v in order}
    for v in order[1:]:
        children[parent[v]].append(v)

    built: dict[int, CwExpression] = {}
    for v in reversed(order):
        if not children[v]:
            built[v] = Leaf(1, v)
            continue
        below = [relabeled(built.pop(c), Action.of({1: 3})) for c in sorted(children[v])]
        action = Action.of({3: 2}, [(1, 3)])
        built[v] = Composite(action, Leaf(1, v), balanced_union(below))
    return built[root]


def forest_expression(g: Graph) -> CwExpression:
    """Expression for a forest: one tree expression per component, rooted at its smallest vertex."""
    if not is_forest(g):
        raise InvalidInstanceError("graph is not a forest")
    nxg = to_networkx(g)
    parts = []
    for component in sorted(nx.connected_components(nxg), key=min):
        parts.append(tree_expression(nxg.subgraph(component), min(component)))
    return balanced_union(parts)


def path_graph(n: int) -> Graph:
    return from_networkx(nx.path_graph(n))


def random_tree(n: int, seed: int = 0) -> Graph:
    """Random recursive tree: vertex ``v`` attaches to a uniform earlier vertex."""
    rng = random.Random(seed)
    return Graph.build(n, [(v, rng.randrange(v)) for v in range(1, n)])


# ============================================================================
# COGRAPHS
# ============================================================================


def _join(left: CwExpression, right: CwExpression) -> CwExpression:
    return Composite(Action.of({2: 1}, [(1, 2)]), left, relabeled(right, Action.of({1: 2})))


def cograph_expression(cotree: Cotree) -> CwExpression:
    """
    Cograph from its cotree: ``("leaf", v)``, ``("union", [...])`` or ``("join", [...])``.

    Two labels suffice.
    """
    kind, payload = cotree
    if kind == "leaf":
        return Leaf(1, payload)
    if not payload:
        raise InvalidInstanceError(f"{kind} node without children")
    parts = [cograph_expression(child) for child in payload]
    if kind == "union":
        return balanced_union(parts)
    if kind == "join":
        return _balanced_merge(parts, _join)
    raise InvalidInstanceError(f"unknown cotree node {kind!r}")


def cotree_graph(cotree: Cotree) -> Graph:
    """The cograph a cotree denotes."""

    def walk(node: Cotree) -> tuple[list[int], list[tuple[int, int]]]:
        kind, payload = node
        if kind == "leaf":
            return [payload], []
        vertices: list[int] = []
        edges: list[tuple[int, int]] = []
        groups = []
        for child in payload:
            vs, es = walk(child)
            groups.append(vs)
            vertices.extend(vs)
            edges.extend(es)
        if kind == "join":
            for i, first in enumerate(groups):
                for second in groups[i + 1:]:
                    edges.extend((u, v) for u in first for v in second)
        return vertices, edges

    vertices, edges = walk(cotree)
    return Graph.build(len(vertices), edges)


def random_cotree(n: int, seed: int = 0) -> Cotree:
    """Random cotree on leaves ``0..n-1``; union and join nodes alternate by level."""
    if n < 1:
        raise InvalidInstanceError("a cotree needs at least one leaf")
    rng = random.Random(seed)
    leaves = iter(range(n))

    def build(size: int, kind: str) -> Cotree:
        if size == 1:
            return ("leaf", next(leaves))
        cuts = sorted(rng.sample(range(1, size), rng.randint(1, min(size - 1, 2))))
        sizes = [b - a for a, b in zip([0, *cuts], [*cuts, size])]
        other = "join" if kind == "union" else "union"
        return (kind, [build(s, other) for s in sizes])

    return build(n, rng.choice(("union", "join")))


def expression_for(g: Graph) -> CwExpression:
    """A forest expression when ``g`` is a forest, the trivial expression otherwise."""
    if g.n and is_forest(g):
        return forest_expression(g)
    logger.info(f"no bounded-width expression known for this graph; using {g.n} labels")
    return trivial_expression(g)
