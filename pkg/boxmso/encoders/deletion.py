"""Bounded degree vertex deletion."""

import logging
from fractions import Fraction

from boxmso.core.errors import InvalidInstanceError
from boxmso.encoders.base import EncodedInstance, compile_query, graph_expression, size
from boxmso.models.answer import Witness
from boxmso.models.expression import CwExpression
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)


def remaining_degree(g: Graph, deleted: set[int]) -> int:
    """Largest degree of ``g`` after removing ``deleted``."""
    return max(
        (len(g.neighbors[v] - deleted) for v in g.vertices if v not in deleted),
        default=0,
    )


def encode_bdvd(g: Graph, expression: CwExpression | None, p: int) -> EncodedInstance:
    """
    Smallest ``X`` such that ``G - X`` has maximum degree at most ``p``.

    Every set ``A`` avoiding ``X`` with a vertex adjacent to the rest of
    ``A`` must satisfy ``|A| <= p + 1``; the target is ``-|X|``.
    """
    if p < 0:
        raise InvalidInstanceError("the degree bound must be nonnegative", degree=p)
    expression = graph_expression(g, expression)
    hits = "(exists x (and (in x X) (in x A)))"
    star = (
        "(exists v (and (in v A)"
        " (forall u (or (not (in u A)) (= u v) (edge u v)))))"
    )
    constraint = f"(forall-set A (or {hits} (not {star}) (cmp <= {size('A')} {p + 1})))"
    query = compile_query(["X"], constraint, size("X", -1))

    def decode(witness: Witness, slack: Fraction) -> dict:
        deleted = set(witness.get("X", frozenset()))
        return {"deleted": sorted(deleted), "max_degree": remaining_degree(g, deleted)}

    return EncodedInstance(
        problem="bdvd",
        graph=g,
        expression=expression,
        query=query,
        decoder=decode,
        note=(
            f"conservative: a {p}-bounded-degree deletion set; eager: a set X such that every "
            f"star avoiding X has at most (1+eps)*{p + 1} vertices, with |X| no larger than "
            f"the smallest {p}-bounded-degree deletion set; max_degree reports the actual "
            f"remaining degree"
        ),
        parameters={"degree": p},
    )
