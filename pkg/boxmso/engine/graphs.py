"""Graph text format, weight arithmetic, subdivision and the term range bound."""

import logging
import math
import re
from collections import defaultdict
from collections.abc import Iterable

import networkx as nx

from boxmso.core.errors import InvalidInstanceError, ParseError, SymbolNotFoundError
from boxmso.models.formula import WeightTerm
from boxmso.models.graph import EDGE_COLOR, UNIT_WEIGHT, Edge, Graph, edge_key

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\S+")


# ============================================================================
# WEIGHTS
# ============================================================================


def accumulated_weight(g: Graph, weight: str, vertices: Iterable[int]) -> int:
    """Sum of ``weight`` over ``vertices``."""
    if not g.has_weight(weight):
        raise SymbolNotFoundError(f"unknown weight symbol {weight}", symbol=weight)
    return sum(g.weight(weight, v) for v in vertices)


def term_range_bound(g: Graph, terms: Iterable[WeightTerm]) -> int:
    """
    ``mu + k^2 mu^2 n``: every term value on ``g`` lies in ``0..N``.

    ``mu`` is the largest weight or (rounded up, absolute) coefficient,
    ``k`` the largest number of variables or weight symbols in one term.
    """
    terms = list(terms)
    for term in terms:
        for weight in term.weight_symbols:
            if not g.has_weight(weight) and weight not in g.edge_weights:
                raise SymbolNotFoundError(f"unknown weight symbol {weight}", symbol=weight)
    coefficients = [abs(c) for t in terms for _, c in t.coefficients]
    coefficients += [abs(t.constant) for t in terms]
    candidates = [g.max_weight()] + [math.ceil(c) for c in coefficients]
    if any(UNIT_WEIGHT in t.weight_symbols for t in terms):
        candidates.append(1)
    mu = max(candidates)
    k = max((max(len(t.variables), len(t.weight_symbols)) for t in terms), default=0)
    return mu + k * k * mu * mu * g.n


# ============================================================================
# SUBDIVISION
# ============================================================================


def subdivision_midpoints(g: Graph) -> dict[Edge, int]:
    """Id of the midpoint vertex that ``subdivide`` creates for each edge."""
    return {e: g.n + i for i, e in enumerate(sorted(g.edges))}


def subdivide(g: Graph) -> Graph:
    """Replace every edge by a path through a fresh ``__edge__`` vertex."""
    if EDGE_COLOR in g.color_sets:
        raise InvalidInstanceError(f"graph already uses the reserved color {EDGE_COLOR}")
    midpoint = subdivision_midpoints(g)
    edges: list[Edge] = []
    for (u, v), m in midpoint.items():
        edges.extend([edge_key(u, m), edge_key(m, v)])
    colors: dict[str, set[int]] = {c: set(vs) for c, vs in g.color_sets.items()}
    colors[EDGE_COLOR] = set(midpoint.values())
    for name, members in g.edge_color_sets.items():
        colors.setdefault(name, set()).update(midpoint[e] for e in members)
    weights: dict[str, dict[int, int]] = {w: dict(t) for w, t in g.weights.items()}
    for name, table in g.edge_weights.items():
        target = weights.setdefault(name, {})
        for e, value in table.items():
            target[midpoint[e]] = value
    if not midpoint:
        del colors[EDGE_COLOR]
    return Graph.build(g.n + len(midpoint), edges, colors, weights)


# ============================================================================
# NETWORKX BRIDGE
# ============================================================================


def to_networkx(g: Graph) -> nx.Graph:
    """Undirected networkx graph carrying colors, weights and labels as node data."""
    nxg = nx.Graph()
    for v in g.vertices:
        nxg.add_node(
            v,
            colors=g.vertex_colors[v],
            weights=tuple(sorted((w, t.get(v, 0)) for w, t in g.weights.items())),
            label=g.labels.get(v),
        )
    nxg.add_edges_from(g.edges)
    return nxg


def from_networkx(nxg: nx.Graph) -> Graph:
    """Plain graph from a networkx graph whose nodes are ``0..n-1``."""
    n = nxg.number_of_nodes()
    if sorted(nxg.nodes) != list(range(n)):
        raise InvalidInstanceError("networkx nodes must be the integers 0..n-1")
    return Graph.build(n, nxg.edges)


def is_forest(g: Graph) -> bool:
    return nx.is_forest(to_networkx(g)) if g.n else True


def isomorphic(g: Graph, h: Graph, labels: bool = True) -> bool:
    """Isomorphism preserving colors and weights (and labels when asked)."""

    def match(a: dict, b: dict) -> bool:
        same = a["colors"] == b["colors"] and a["weights"] == b["weights"]
        return same and (not labels or a["label"] == b["label"])

    return nx.is_isomorphic(to_networkx(g), to_networkx(h), node_match=match)


# ============================================================================
# TEXT FORMAT
# ============================================================================


def _natural(token: str, line: int, column: int) -> int:
    if not token.isdigit():
        raise ParseError(f"expected a natural number, got {token!r}", line, column)
    return int(token)


def parse_graph(text: str) -> Graph:
    """Parse the line-oriented graph format (``v``, ``e``, ``color``, ``weight``, ...)."""
    declared: set[int] = set()
    edges: list[tuple[int, int]] = []
    colors: dict[str, set[int]] = defaultdict(set)
    weights: dict[str, dict[int, int]] = defaultdict(dict)
    edge_colors: dict[str, set[Edge]] = defaultdict(set)
    edge_weights: dict[str, dict[Edge, int]] = defaultdict(dict)
    seen_edges: set[Edge] = set()

    for number, raw in enumerate(text.splitlines(), start=1):
        tokens: list[tuple[str, int]] = []
        for match in _TOKEN.finditer(raw):
            if match.group().startswith("#"):
                break
            tokens.append((match.group(), match.start() + 1))
        if not tokens:
            continue
        directive, col = tokens[0]
        args = tokens[1:]

        def nat(i: int) -> int:
            if i >= len(args):
                raise ParseError(f"missing argument for {directive}", number, col)
            return _natural(args[i][0], number, args[i][1])

        def name(i: int) -> str:
            if i >= len(args):
                raise ParseError(f"missing name for {directive}", number, col)
            value = args[i][0]
            if value in (EDGE_COLOR, UNIT_WEIGHT):
                raise ParseError(f"{value} is reserved", number, args[i][1])
            return value

        if directive == "v":
            for i in range(len(args)):
                declared.add(nat(i))
            if not args:
                raise ParseError("missing vertex id", number, col)
        elif directive == "e":
            if len(args) != 2:
                raise ParseError("edge needs two endpoints", number, col)
            u, v = nat(0), nat(1)
            if u == v:
                raise ParseError(f"self-loop at {u}", number, col)
            if edge_key(u, v) in seen_edges:
                raise ParseError(f"duplicate edge {u} {v}", number, col)
            seen_edges.add(edge_key(u, v))
            edges.append((u, v))
        elif directive == "color":
            label = name(0)
            colors[label].update(nat(i) for i in range(1, len(args)))
        elif directive == "weight":
            if len(args) != 3:
                raise ParseError("weight needs a name, a vertex and a value", number, col)
            weights[name(0)][nat(1)] = nat(2)
        elif directive == "ecolor":
            if len(args) != 3:
                raise ParseError("ecolor needs a name and two endpoints", number, col)
            edge_colors[name(0)].add(edge_key(nat(1), nat(2)))
        elif directive == "eweight":
            if len(args) != 4:
                raise ParseError("eweight needs a name, two endpoints and a value", number, col)
            edge_weights[name(0)][edge_key(nat(1), nat(2))] = nat(3)
        else:
            raise ParseError(f"unknown directive {directive!r}", number, col)

    n = max(declared, default=-1) + 1
    if declared != set(range(n)):
        raise InvalidInstanceError("vertex ids must be exactly 0..n-1")
    return Graph.build(n, edges, colors, weights, None, edge_colors, edge_weights)


def serialize_graph(g: Graph) -> str:
    lines = [f"v {v}" for v in g.vertices]
    lines += [f"e {u} {v}" for u, v in sorted(g.edges)]
    for name in sorted(g.color_sets):
        if name == EDGE_COLOR:
            continue
        members = " ".join(str(v) for v in sorted(g.color_sets[name]))
        lines.append(f"color {name} {members}".rstrip())
    for name in sorted(g.weights):
        for v, value in sorted(g.weights[name].items()):
            lines.append(f"weight {name} {v} {value}")
    for name in sorted(g.edge_color_sets):
        for u, v in sorted(g.edge_color_sets[name]):
            lines.append(f"ecolor {name} {u} {v}")
    for name in sorted(g.edge_weights):
        for (u, v), value in sorted(g.edge_weights[name].items()):
            lines.append(f"eweight {name} {u} {v} {value}")
    return "\n".join(lines) + "\n"
