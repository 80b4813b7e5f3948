"""Edge quantification through subdivision: rewriting CMSO2 queries over vertices only."""

import itertools
import logging

from boxmso.engine.graphs import subdivide, subdivision_midpoints
from boxmso.engine.logic import negation_normalize, quantified_variables, subformulas
from boxmso.models.formula import (
    ATOMS,
    Adjacent,
    And,
    Exists,
    ForAll,
    Formula,
    HasColor,
    Incident,
    Not,
    Or,
    Query,
    VarKind,
    Within,
    conjunction,
    disjunction,
)
from boxmso.models.graph import EDGE_COLOR, Edge, Graph

logger = logging.getLogger(__name__)


def uses_edges(f: Formula, free: tuple[tuple[str, VarKind], ...] = ()) -> bool:
    """True when ``f`` quantifies over edges or uses incidence."""
    if any(kind.is_edge for _, kind in free):
        return True
    return any(
        isinstance(n, Incident) or (isinstance(n, (Exists, ForAll)) and n.kind.is_edge)
        for n in subformulas(f)
    )


def guard(name: str, kind: VarKind) -> Formula:
    """Holds iff the variable denotes an element (or set) of its original sort."""
    if kind is VarKind.VERTEX:
        return Not(HasColor(EDGE_COLOR, name))
    if kind is VarKind.SET:
        return Not(HasColor(EDGE_COLOR, name))
    if kind is VarKind.EDGE:
        return HasColor(EDGE_COLOR, name)
    return Within(EDGE_COLOR, name)


def _demoted(kind: VarKind) -> VarKind:
    return {VarKind.EDGE: VarKind.VERTEX, VarKind.EDGE_SET: VarKind.SET}.get(kind, kind)


def translate_formula(f: Formula, taken: set[str] | None = None) -> Formula:
    """Vertex-only formula over the subdivided graph; guards follow each quantifier chain."""
    taken = set(taken or ()) | set(quantified_variables(f))
    counter = itertools.count(1)

    def midpoint_name() -> str:
        while True:
            name = f"m_{next(counter)}"
            if name not in taken:
                taken.add(name)
                return name

    def walk(node: Formula) -> Formula:
        if isinstance(node, Incident):
            return Adjacent(node.vertex, node.edge)
        if isinstance(node, Adjacent):
            m = midpoint_name()
            return Exists(
                m,
                VarKind.VERTEX,
                And((HasColor(EDGE_COLOR, m), Adjacent(node.left, m), Adjacent(m, node.right))),
            )
        if isinstance(node, ATOMS):
            return node
        if isinstance(node, And):
            return And(tuple(walk(p) for p in node.parts))
        if isinstance(node, Or):
            return Or(tuple(walk(p) for p in node.parts))
        if isinstance(node, Not):
            return Not(walk(node.body))
        cls = type(node)
        chain: list[tuple[str, VarKind]] = []
        body = node
        while type(body) is cls:
            chain.append((body.var, body.kind))
            body = body.body
        inner = walk(body)
        guards = [guard(name, kind) for name, kind in chain]
        if cls is Exists:
            result = conjunction(*guards, inner)
        else:
            result = disjunction(*(Not(g) for g in guards), inner)
        for name, kind in reversed(chain):
            result = cls(name, _demoted(kind), result)
        return result

    return walk(f)


def translate_mso2(
    f: Formula, g: Graph, free: tuple[tuple[str, VarKind], ...] = ()
) -> tuple[Formula, Graph]:
    """``(f', subdivide(g))`` with ``f'`` quantifying over vertices only."""
    names = {name for name, _ in free}
    body = translate_formula(f, names)
    top = [guard(name, kind) for name, kind in free]
    return negation_normalize(conjunction(*top, body)), subdivide(g)


def translate_query(query: Query, g: Graph) -> tuple[Query, Graph]:
    constraint, subdivided = translate_mso2(query.constraint, g, query.free)
    free = tuple((name, _demoted(kind)) for name, kind in query.free)
    logger.info(f"subdivided {len(g.edges)} edges for edge quantification")
    return Query(free, constraint, query.target), subdivided


def lift_witness(
    witness: dict[str, frozenset[int]],
    g: Graph,
    kinds: dict[str, VarKind],
) -> dict[str, frozenset]:
    """Map midpoint ids of edge variables back to the edges of ``g``."""
    edge_of: dict[int, Edge] = {m: e for e, m in subdivision_midpoints(g).items()}
    lifted: dict[str, frozenset] = {}
    for name, members in witness.items():
        if kinds.get(name, VarKind.SET).is_edge:
            lifted[name] = frozenset(edge_of[m] for m in members)
        else:
            lifted[name] = members
    return lifted
