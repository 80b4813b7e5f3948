"""
Line-oriented problem instance files.

The first directive names the problem, e.g. ``problem knapsack``; the
remaining directives carry its data. Graph problems embed the graph in
the graph file syntax (``v``, ``e``, ``color``, ...)::

    problem subset-sum          items 3 5 8 / target 8
    problem knapsack            values 5 4 3 / sizes 4 3 2 / capacity 5
    problem md-subset-sum       vector 1 2 / vector 2 1 / target 3 3
    problem equitable-coloring  parts 2 + graph lines
    problem equitable-connected-partition         parts 2 + graph lines
    problem equitable-connected-partition-edges   parts 2 + graph lines
    problem bdvd                degree 2 + graph lines
    problem cds | cvc           capacity VERTEX C (repeated) + graph lines
    problem graph-motif         motif COLOR COUNT (repeated) + graph lines
"""

import logging
import re
from collections import defaultdict
from collections.abc import Callable

from boxmso.core.errors import ParseError
from boxmso.encoders.base import EncodedInstance
from boxmso.encoders.capacitated import encode_cds, encode_cvc
from boxmso.encoders.deletion import encode_bdvd
from boxmso.encoders.motif import encode_graph_motif
from boxmso.encoders.numbers import encode_knapsack, encode_md_subset_sum, encode_subset_sum
from boxmso.encoders.partitions import (
    encode_equitable_coloring,
    encode_equitable_connected_partition,
    encode_equitable_connected_partition_edges,
)
from boxmso.engine.graphs import parse_graph
from boxmso.models.expression import CwExpression

logger = logging.getLogger(__name__)

GRAPH_DIRECTIVES = {"v", "e", "color", "weight", "ecolor", "eweight"}
_TOKEN = re.compile(r"\S+")


class _Directives:
    """Non-graph directives by name: the line number and raw tokens of each occurrence."""

    def __init__(self) -> None:
        self.lines: dict[str, list[tuple[int, list[str]]]] = defaultdict(list)

    def all(self, name: str) -> list[tuple[int, list[str]]]:
        return self.lines.get(name, [])

    def one(self, name: str, arity: int | None = None) -> tuple[int, list[str]]:
        found = self.all(name)
        if len(found) != 1:
            raise ParseError(f"expected exactly one {name!r} line, got {len(found)}")
        line, args = found[0]
        if arity is not None and len(args) != arity:
            raise ParseError(f"{name} takes {arity} arguments", line, 1)
        return line, args

    def numbers(self, name: str) -> list[int]:
        line, args = self.one(name)
        return [_integer(token, line) for token in args]

    def number(self, name: str) -> int:
        line, args = self.one(name, 1)
        return _integer(args[0], line)


def _integer(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", line, 1) from None


def _split(text: str) -> tuple[str, _Directives, str]:
    """Problem name, data directives and the graph text (line numbers preserved)."""
    problem: str | None = None
    directives = _Directives()
    graph_lines: list[str] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens: list[str] = []
        for match in _TOKEN.finditer(raw):
            if match.group().startswith("#"):
                break
            tokens.append(match.group())
        if tokens and tokens[0] in GRAPH_DIRECTIVES:
            graph_lines.append(raw)
            continue
        graph_lines.append("")
        if not tokens:
            continue
        if tokens[0] == "problem":
            if problem is not None or len(tokens) != 2:
                raise ParseError("expected a single 'problem NAME' line", number, 1)
            problem = tokens[1]
            continue
        directives.lines[tokens[0]].append((number, tokens[1:]))
    if problem is None:
        raise ParseError("missing 'problem NAME' line")
    return problem, directives, "\n".join(graph_lines)


def _pairs(directives: _Directives, name: str) -> list[tuple[str, int]]:
    pairs = []
    for line, args in directives.all(name):
        if len(args) != 2:
            raise ParseError(f"{name} takes two arguments", line, 1)
        pairs.append((args[0], _integer(args[1], line)))
    return pairs


Loader = Callable[[_Directives, str, CwExpression | None], EncodedInstance]


def _capacities(d: _Directives) -> dict[int, int]:
    capacities: dict[int, int] = {}
    for line, args in d.all("capacity"):
        if len(args) != 2:
            raise ParseError("capacity takes a vertex and a value", line, 1)
        capacities[_integer(args[0], line)] = _integer(args[1], line)
    return capacities


LOADERS: dict[str, Loader] = {
    "subset-sum": lambda d, g, e: encode_subset_sum(d.numbers("items"), d.number("target")),
    "knapsack": lambda d, g, e: encode_knapsack(
        d.numbers("values"), d.numbers("sizes"), d.number("capacity")
    ),
    "md-subset-sum": lambda d, g, e: encode_md_subset_sum(
        [[_integer(t, line) for t in args] for line, args in d.all("vector")], d.numbers("target")
    ),
    "equitable-coloring": lambda d, g, e: encode_equitable_coloring(
        parse_graph(g), e, d.number("parts")
    ),
    "equitable-connected-partition": lambda d, g, e: encode_equitable_connected_partition(
        parse_graph(g), e, d.number("parts")
    ),
    "equitable-connected-partition-edges": (
        lambda d, g, e: encode_equitable_connected_partition_edges(
            parse_graph(g), e, d.number("parts")
        )
    ),
    "bdvd": lambda d, g, e: encode_bdvd(parse_graph(g), e, d.number("degree")),
    "cds": lambda d, g, e: encode_cds(parse_graph(g), e, _capacities(d)),
    "cvc": lambda d, g, e: encode_cvc(parse_graph(g), e, _capacities(d)),
    "graph-motif": lambda d, g, e: encode_graph_motif(
        parse_graph(g), e, dict(_pairs(d, "motif"))
    ),
}


def load_instance(text: str, expression: CwExpression | None = None) -> EncodedInstance:
    """Parse an instance file and encode it; ``expression`` is used for graph problems."""
    problem, directives, graph_text = _split(text)
    if problem not in LOADERS:
        raise ParseError(f"unknown problem {problem!r}")
    encoded = LOADERS[problem](directives, graph_text, expression)
    logger.info(
        f"encoded {problem}: {encoded.graph.n} vertices, free {list(encoded.query.names)}"
    )
    return encoded
