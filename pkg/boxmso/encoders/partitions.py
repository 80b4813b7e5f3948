"""Equitable partitions: colorings, connected partitions and the edge-deletion variant."""

import logging
from fractions import Fraction

import networkx as nx

from boxmso.core.errors import InvalidInstanceError
from boxmso.encoders.base import (
    EncodedInstance,
    compile_query,
    connected,
    graph_expression,
    joined,
    partition,
    size,
)
from boxmso.engine.graphs import to_networkx
from boxmso.models.answer import Witness
from boxmso.models.expression import CwExpression
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)


def _parts(k: int) -> list[str]:
    if k < 1:
        raise InvalidInstanceError("the number of parts must be at least 1", parts=k)
    return [f"X{i + 1}" for i in range(k)]


def _balanced(parts: list[str]) -> list[str]:
    """``|Xi| <= |Xj| + 1`` for every ordered pair."""
    return [
        f"(cmp <= {size(p)} (term 1 (coef # {q} 1)))"
        for p in parts
        for q in parts
        if p != q
    ]


def _independent(name: str) -> str:
    return f"(forall x (forall y (not (and (in x {name}) (in y {name}) (edge x y)))))"


def _classes(witness: Witness, parts: list[str]) -> list[list[int]]:
    return [sorted(witness.get(p, frozenset())) for p in parts]


def _ratio(classes: list[list[int]]) -> str | None:
    sizes = [len(c) for c in classes]
    if not sizes or min(sizes) == 0:
        return None
    return str(Fraction(max(sizes), min(sizes)))


EQUITABLE_NOTE = (
    "class sizes differ by at most one in conservative witnesses; in eager witnesses the "
    "ratio of any two class sizes is at most 1+eps for large classes (1+2*eps when the "
    "+1 offset is also absorbed by the loosening)"
)


def encode_equitable_coloring(
    g: Graph, expression: CwExpression | None, k: int
) -> EncodedInstance:
    """``X1..Xk`` is a proper coloring whose class sizes differ by at most one."""
    parts = _parts(k)
    expression = graph_expression(g, expression)
    constraint = " ".join([partition(parts), *map(_independent, parts), *_balanced(parts)])
    query = compile_query(parts, f"(and {constraint})")

    def decode(witness: Witness, slack: Fraction) -> dict:
        classes = _classes(witness, parts)
        return {"classes": classes, "ratio": _ratio(classes)}

    return EncodedInstance(
        problem="equitable-coloring",
        graph=g,
        expression=expression,
        query=query,
        decoder=decode,
        note=EQUITABLE_NOTE,
        parameters={"parts": k},
    )


def encode_equitable_connected_partition(
    g: Graph, expression: CwExpression | None, k: int
) -> EncodedInstance:
    """``X1..Xk`` partitions the vertices into connected parts of balanced size."""
    parts = _parts(k)
    expression = graph_expression(g, expression)
    constraint = " ".join([partition(parts), *map(connected, parts), *_balanced(parts)])
    query = compile_query(parts, f"(and {constraint})")

    def decode(witness: Witness, slack: Fraction) -> dict:
        classes = _classes(witness, parts)
        return {"parts": classes, "ratio": _ratio(classes)}

    return EncodedInstance(
        problem="equitable-connected-partition",
        graph=g,
        expression=expression,
        query=query,
        decoder=decode,
        note=EQUITABLE_NOTE,
        parameters={"parts": k},
    )


def _component(name: str, removed: str) -> str:
    """``name`` is a connected component of the graph without the edges ``removed``."""
    closed = (
        f"(forall a (forall b (or (not (in a {name})) (not {joined('a', 'b', removed)})"
        f" (in b {name}))))"
    )
    return f"(and (exists y (in y {name})) {closed} {connected(name, removed)})"


def _reachable(a: str, b: str, removed: str) -> str:
    closed = f"(forall c (forall d (or (not (in c Z)) (not {joined('c', 'd', removed)}) (in d Z))))"
    return f"(forall-set Z (or (not (in {a} Z)) (not {closed}) (in {b} Z)))"


def _representatives(name: str, removed: str) -> str:
    """``name`` holds exactly one vertex of every component."""
    covers = f"(forall r (exists t (and (in t {name}) {_reachable('t', 'r', removed)})))"
    apart = (
        f"(forall p (forall q (or (not (in p {name})) (not (in q {name})) (= p q)"
        f" (not {_reachable('p', 'q', removed)}))))"
    )
    return f"(and {covers} {apart})"


def encode_equitable_connected_partition_edges(
    g: Graph, expression: CwExpression | None, k: int
) -> EncodedInstance:
    """
    Delete an edge set ``X`` so that ``G - X`` has exactly ``k`` components
    of sizes ``floor(n/k)`` to ``ceil(n/k)``.

    The query quantifies over edges and is answered on the subdivided
    graph; its blocks have quantifier rank well above the default limit.
    """
    _parts(k)
    expression = graph_expression(g, expression)
    low, high = g.n // k, -(-g.n // k)
    component = _component("Y", "X")
    reps = _representatives("Y", "X")
    clauses = [
        f"(forall-set Y (or (not {component}) (cmp >= {size('Y')} {low})))",
        f"(forall-set Y (or (not {component}) (cmp <= {size('Y')} {high})))",
        f"(forall-set Y (or (not {reps}) (cmp <= {size('Y')} {k})))",
        f"(forall-set Y (or (not {reps}) (cmp >= {size('Y')} {k})))",
    ]
    query = compile_query(["(edge-set X)"], f"(and {' '.join(clauses)})")

    def decode(witness: Witness, slack: Fraction) -> dict:
        removed = sorted(witness.get("X", frozenset()))
        rest = to_networkx(g)
        rest.remove_edges_from(removed)
        components = sorted(sorted(c) for c in nx.connected_components(rest))
        return {"removed": [list(e) for e in removed], "parts": components}

    return EncodedInstance(
        problem="equitable-connected-partition-edges",
        graph=g,
        expression=expression,
        query=query,
        decoder=decode,
        note=EQUITABLE_NOTE + "; answering needs BOXMSO_MAX_RANK raised to the block rank",
        parameters={"parts": k},
    )
