"""Number problems over edgeless graphs: subset sum, knapsack and its multidimensional cousin."""

import logging
from collections.abc import Sequence
from fractions import Fraction

from boxmso.core.errors import InvalidInstanceError
from boxmso.encoders.base import EncodedInstance, compile_query, exactly, require_natural, weight_of
from boxmso.engine.generators import edgeless_expression
from boxmso.models.answer import Witness
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)


def _item_graph(count: int, weights: dict[str, list[int]]) -> Graph:
    """One vertex per item; an empty instance gets a single weightless vertex."""
    n = max(count, 1)
    return Graph.build(n, weights={w: dict(enumerate(values)) for w, values in weights.items()})


def _chosen(witness: Witness, count: int) -> list[int]:
    return sorted(v for v in witness.get("X", frozenset()) if v < count)


def encode_subset_sum(items: Sequence[int], target: int) -> EncodedInstance:
    """Select ``X`` with ``w(X) = T``; the answer is 0 when a subset exists."""
    items = require_natural(items, "items")
    [target] = require_natural([target], "the target sum")
    graph = _item_graph(len(items), {"w": items})
    query = compile_query(["X"], exactly(weight_of("w", "X"), target))

    def decode(witness: Witness, slack: Fraction) -> dict:
        chosen = _chosen(witness, len(items))
        return {"items": chosen, "sum": sum(items[i] for i in chosen)}

    return EncodedInstance(
        problem="subset-sum",
        graph=graph,
        expression=edgeless_expression(graph.n),
        query=query,
        decoder=decode,
        note=(
            "conservative: none for T >= 1, the tightened equality is unsatisfiable; "
            "eager: a subset summing to a value in [(1-eps)T, (1+eps)T] after rescaling eps"
        ),
        parameters={"items": items, "target": target},
    )


def encode_knapsack(values: Sequence[int], sizes: Sequence[int], capacity: int) -> EncodedInstance:
    """Maximize ``value(X)`` subject to ``size(X) <= T``."""
    values = require_natural(values, "values")
    sizes = require_natural(sizes, "sizes")
    [capacity] = require_natural([capacity], "the capacity")
    if len(values) != len(sizes):
        raise InvalidInstanceError("values and sizes must have the same length")
    graph = _item_graph(len(values), {"value": values, "size": sizes})
    query = compile_query(
        ["X"], f"(cmp <= {weight_of('size', 'X')} {capacity})", weight_of("value", "X")
    )

    def decode(witness: Witness, slack: Fraction) -> dict:
        chosen = _chosen(witness, len(values))
        return {
            "items": chosen,
            "value": sum(values[i] for i in chosen),
            "size": sum(sizes[i] for i in chosen),
        }

    return EncodedInstance(
        problem="knapsack",
        graph=graph,
        expression=edgeless_expression(graph.n),
        query=query,
        decoder=decode,
        note=(
            "conservative: fits capacity T and is worth at least the optimum at capacity "
            "(1-eps)T; eager: fits (1+eps)T and is worth at least the optimum at T"
        ),
        parameters={"values": values, "sizes": sizes, "capacity": capacity},
    )


def encode_md_subset_sum(
    vectors: Sequence[Sequence[int]], target: Sequence[int]
) -> EncodedInstance:
    """Select ``X`` whose vector sum equals ``T`` in every coordinate."""
    target = require_natural(target, "the target vector")
    dimension = len(target)
    if dimension == 0:
        raise InvalidInstanceError("the target vector is empty")
    rows = [require_natural(vector, "vector entries") for vector in vectors]
    for i, row in enumerate(rows):
        if len(row) != dimension:
            raise InvalidInstanceError(
                f"vector {i} has dimension {len(row)}, expected {dimension}", vector=i
            )
    weights = {f"w{j + 1}": [row[j] for row in rows] for j in range(dimension)}
    graph = _item_graph(len(rows), weights)
    parts = " ".join(exactly(weight_of(f"w{j + 1}", "X"), t) for j, t in enumerate(target))
    query = compile_query(["X"], f"(and {parts})")

    def decode(witness: Witness, slack: Fraction) -> dict:
        chosen = _chosen(witness, len(rows))
        return {"items": chosen, "sum": [sum(rows[i][j] for i in chosen) for j in range(dimension)]}

    return EncodedInstance(
        problem="md-subset-sum",
        graph=graph,
        expression=edgeless_expression(graph.n),
        query=query,
        decoder=decode,
        note=(
            "conservative: none once some T[j] >= 1, the tightened equalities are unsatisfiable; "
            "eager: every coordinate within [(1-eps)T[j], (1+eps)T[j]] after rescaling eps"
        ),
        parameters={"vectors": rows, "target": target},
    )
