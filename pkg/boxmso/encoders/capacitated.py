"""Capacitated dominating set and capacitated vertex cover over edge-set witnesses."""

import logging
import math
from collections.abc import Iterable, Mapping
from fractions import Fraction

import networkx as nx

from boxmso.core.errors import InvalidInstanceError
from boxmso.encoders.base import EncodedInstance, compile_query, graph_expression, size
from boxmso.engine.generators import expression_for
from boxmso.models.answer import Witness
from boxmso.models.expression import CwExpression
from boxmso.models.graph import Edge, Graph

logger = logging.getLogger(__name__)

RED = "red"
SPARE = "spare"


def _capacities(g: Graph, capacities: Mapping[int, int]) -> dict[int, int]:
    for v, c in capacities.items():
        if not 0 <= v < g.n:
            raise InvalidInstanceError(f"capacity given for unknown vertex {v}", vertex=v)
        if c < 0:
            raise InvalidInstanceError(f"capacity of vertex {v} is negative", vertex=v)
    return {v: int(capacities.get(v, 0)) for v in g.vertices}


def _spare(capacity: dict[int, int]) -> tuple[int, dict[int, int]]:
    """``lambda = max c`` and the complementary weights ``lambda - c(v)``."""
    top = max(capacity.values(), default=0)
    return top, {v: top - c for v, c in capacity.items()}


def _within_capacity(top: int) -> str:
    """Every ``x`` in ``X`` has at most ``c(x)`` vertices in its ``F``-neighbourhood ``A``."""
    neighbourhood = (
        "(forall u (or (and (in u A) (exists-edge e (and (in e F) (inc x e) (inc u e)"
        " (not (= u x))))) (and (not (in u A)) (not (exists-edge e (and (in e F) (inc x e)"
        " (inc u e) (not (= u x))))))))"
    )
    load = f"(term 0 (coef # A 1) (coef {SPARE} (single x) 1))"
    return (
        f"(forall x (forall-set A (or (not (in x X)) (not {neighbourhood})"
        f" (cmp <= {load} {top}))))"
    )


def _exactly_one_f_edge(vertex_ok: str) -> str:
    """Each vertex ``v`` not excused by ``vertex_ok`` is incident to precisely one ``F`` edge."""
    return (
        f"(forall v (or {vertex_ok} (exists-edge e (and (in e F) (inc v e)"
        " (forall-edge f (or (not (in f F)) (not (inc v f)) (= f e)))))))"
    )


def assign(
    demands: Iterable[tuple[object, Iterable[int]]], capacity: dict[int, int]
) -> dict[object, int] | None:
    """Assign each demand to one of its allowed vertices within capacity, by max flow."""
    demands = [(d, list(allowed)) for d, allowed in demands]
    if not demands:
        return {}
    flow = nx.DiGraph()
    flow.add_nodes_from(["source", "sink"])
    for d, allowed in demands:
        flow.add_edge("source", ("demand", d), capacity=1)
        for v in allowed:
            flow.add_edge(("demand", d), ("vertex", v), capacity=1)
    for v, c in capacity.items():
        flow.add_edge(("vertex", v), "sink", capacity=c)
    value, routed = nx.maximum_flow(flow, "source", "sink")
    if value < len(demands):
        return None
    result: dict[object, int] = {}
    for d, allowed in demands:
        for v in allowed:
            if routed[("demand", d)].get(("vertex", v), 0) > 0:
                result[d] = v
                break
    return result


def _widened(capacity: dict[int, int], top: int, slack: Fraction) -> dict[int, int]:
    extra = math.floor(slack * top)
    return {v: c + extra for v, c in capacity.items()}


def encode_cds(
    g: Graph, expression: CwExpression | None, capacities: Mapping[int, int]
) -> EncodedInstance:
    """
    Smallest ``X`` such that every vertex outside ``X`` can be assigned to a
    neighbour in ``X`` with vertex ``x`` receiving at most ``c(x)`` of them.

    The assignment is the edge set ``F``: each vertex outside ``X`` meets
    exactly one ``F`` edge, every ``F`` edge joins ``X`` to its complement.
    """
    expression = graph_expression(g, expression)
    capacity = _capacities(g, capacities)
    top, spare = _spare(capacity)
    graph = Graph.build(g.n, g.edges, weights={SPARE: spare})
    toward_x = (
        "(forall-edge e (or (not (in e F)) (exists u (exists w (and (inc u e) (inc w e)"
        " (in u X) (not (in w X)))))))"
    )
    constraint = (
        f"(exists-edge-set F (and {_exactly_one_f_edge('(in v X)')} {toward_x}"
        f" {_within_capacity(top)}))"
    )
    query = compile_query(["X"], constraint, size("X", -1))

    def decode(witness: Witness, slack: Fraction) -> dict:
        chosen = set(witness.get("X", frozenset()))
        demands = [(v, sorted(g.neighbors[v] & chosen)) for v in g.vertices if v not in chosen]
        assignment = assign(demands, {x: c for x, c in _widened(capacity, top, slack).items()
                                      if x in chosen})
        if assignment is not None:
            assignment = {str(v): x for v, x in sorted(assignment.items())}
        return {"dominating_set": sorted(chosen), "assignment": assignment}

    return EncodedInstance(
        problem="cds",
        graph=graph,
        expression=expression,
        query=query,
        decoder=decode,
        note=(
            f"conservative: respects c and is no larger than an optimum for c(v) - eps*{top}; "
            f"eager: exceeds c by at most eps*{top} and is no larger than an optimum for c"
        ),
        parameters={"capacities": capacity, "lambda": top},
    )


def red_subdivision(g: Graph, weights: dict[int, int]) -> tuple[Graph, dict[Edge, int]]:
    """Every edge gets a midpoint colored red; original vertices keep their ids."""
    midpoint = {e: g.n + i for i, e in enumerate(sorted(g.edges))}
    edges = [(u, m) for (u, _), m in midpoint.items()]
    edges += [(m, v) for (_, v), m in midpoint.items()]
    colors = {RED: list(midpoint.values())}
    return Graph.build(g.n + len(midpoint), edges, colors, {SPARE: weights}), midpoint


def encode_cvc(
    g: Graph, expression: CwExpression | None, capacities: Mapping[int, int]
) -> EncodedInstance:
    """
    Smallest vertex cover ``X`` in which each ``x`` covers at most ``c(x)`` edges.

    Edges become red midpoints; ``F`` assigns every red vertex to one
    endpoint, which must lie in ``X``.
    """
    graph_expression(g, expression)
    capacity = _capacities(g, capacities)
    top, spare = _spare(capacity)
    graph, midpoint = red_subdivision(g, spare)
    not_red = f"(forall x (or (not (in x X)) (not (color {RED} x))))"
    toward_x = (
        "(forall-edge e (forall u (or (not (in e F)) (not (inc u e))"
        f" (color {RED} u) (in u X))))"
    )
    constraint = (
        f"(exists-edge-set F (and {not_red} {_exactly_one_f_edge(f'(not (color {RED} v))')}"
        f" {toward_x} {_within_capacity(top)}))"
    )
    query = compile_query(["X"], constraint, size("X", -1))

    def decode(witness: Witness, slack: Fraction) -> dict:
        cover = set(witness.get("X", frozenset()))
        demands = [(e, sorted(set(e) & cover)) for e in midpoint]
        assignment = assign(demands, {x: c for x, c in _widened(capacity, top, slack).items()
                                      if x in cover})
        if assignment is not None:
            assignment = {f"{u}-{v}": x for (u, v), x in sorted(assignment.items())}
        return {"cover": sorted(cover), "assignment": assignment}

    return EncodedInstance(
        problem="cvc",
        graph=graph,
        expression=expression_for(graph),
        query=query,
        decoder=decode,
        note=(
            f"conservative: respects c and is no larger than an optimum for c(v) - eps*{top}; "
            f"eager: covers at most c(v) + eps*{top} edges per vertex, no larger than an "
            f"optimum for c"
        ),
        parameters={"capacities": capacity, "lambda": top},
    )
