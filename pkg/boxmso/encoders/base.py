"""Shared pieces of the problem encoders: the encoded instance and formula snippets."""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from boxmso.core.errors import InvalidInstanceError
from boxmso.engine.expressions import check_matches, tag_leaves
from boxmso.engine.generators import expression_for
from boxmso.engine.logic import check_boxed, negation_normalize
from boxmso.engine.queries import parse_query
from boxmso.models.answer import Witness
from boxmso.models.expression import CwExpression
from boxmso.models.formula import Query
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

Decoder = Callable[[Witness, Fraction], dict[str, Any]]


@dataclass(frozen=True)
class EncodedInstance:
    """
    A problem compiled to ``(graph, expression, query)``.

    ``decoder`` maps a witness of the query back to a problem-level
    solution. It receives the loosening slack the witness was found under
    (0 for conservative witnesses) so that capacity-style decoders can
    widen their feasibility checks accordingly.
    """
    problem: str
    graph: Graph
    expression: CwExpression
    query: Query
    decoder: Decoder
    note: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def decode(
        self, witness: Witness | None, slack: Fraction = Fraction(0)
    ) -> dict[str, Any] | None:
        if witness is None:
            return None
        return self.decoder(witness, Fraction(slack))


# ============================================================================
# INPUT CHECKS
# ============================================================================


def require_natural(values: Sequence[int], what: str) -> list[int]:
    checked = [int(x) for x in values]
    if any(x < 0 for x in checked):
        raise InvalidInstanceError(f"{what} must be nonnegative")
    return checked


def graph_expression(g: Graph, expression: CwExpression | None) -> CwExpression:
    """The supplied expression checked against ``g``, or a generated one."""
    if g.n == 0:
        raise InvalidInstanceError("the graph has no vertices")
    if expression is None:
        return expression_for(g)
    expression = tag_leaves(expression)
    check_matches(expression, g)
    return expression


def compile_query(free: Sequence[str], constraint: str, target: str = "0") -> Query:
    """Parse the emitted text and make sure it lands in the boxed fragment."""
    text = f"(query (free {' '.join(free)}) (constraint {constraint}) (target {target}))"
    query = parse_query(text)
    check_boxed(negation_normalize(query.constraint))
    return query


# ============================================================================
# FORMULA SNIPPETS
# ============================================================================


def size(name: str, coefficient: int = 1) -> str:
    """``|X|`` as a term."""
    return f"(term 0 (coef # {name} {coefficient}))"


def weight_of(weight: str, name: str) -> str:
    return f"(term 0 (coef {weight} {name} 1))"


def exactly(term: str, value: int) -> str:
    return f"(and (cmp <= {term} {value}) (cmp >= {term} {value}))"


def subset(inner: str, outer: str) -> str:
    return f"(forall s (implies (in s {inner}) (in s {outer})))"


def connected(name: str, edge_free: str | None = None) -> str:
    """
    ``G[name]`` is connected: every proper nonempty part has a neighbour
    in the rest. With ``edge_free`` only edges outside that edge set count.
    """
    link = "(edge u v)" if edge_free is None else joined("u", "v", edge_free)
    return (
        f"(forall-set P (or (not (and {subset('P', name)} (exists y (in y P))"
        f" (exists z (and (in z {name}) (not (in z P))))))"
        f" (exists u (exists v (and (in u P) (in v {name}) (not (in v P)) {link})))))"
    )


def joined(a: str, b: str, removed: str) -> str:
    """``a`` and ``b`` are adjacent through an edge outside ``removed``."""
    return (
        f"(and (not (= {a} {b}))"
        f" (exists-edge j (and (inc {a} j) (inc {b} j) (not (in j {removed})))))"
    )


def partition(parts: Sequence[str]) -> str:
    """Every vertex lies in exactly one part."""
    some = f"(or {' '.join(f'(in x {p})' for p in parts)})"
    pairs = [
        f"(not (and (in x {p}) (in x {q})))"
        for i, p in enumerate(parts)
        for q in parts[i + 1:]
    ]
    return f"(forall x (and {some} {' '.join(pairs)}))"
