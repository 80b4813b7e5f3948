"""Graph model, subdivision, weight accumulation and the graph text format."""

import networkx as nx
import pytest

from boxmso.core.errors import InvalidInstanceError, ParseError, SymbolNotFoundError
from boxmso.engine.graphs import (
    accumulated_weight,
    from_networkx,
    is_forest,
    isomorphic,
    parse_graph,
    serialize_graph,
    subdivide,
    subdivision_midpoints,
    term_range_bound,
    to_networkx,
)
from boxmso.models.formula import WeightTerm
from boxmso.models.graph import EDGE_COLOR, UNIT_WEIGHT, Graph


def test_graph_rejects_bad_edges():
    with pytest.raises(InvalidInstanceError):
        Graph.build(2, [(0, 0)])
    with pytest.raises(InvalidInstanceError):
        Graph.build(2, [(0, 2)])
    with pytest.raises(InvalidInstanceError):
        Graph.build(2, [(0, 1), (1, 0)])


def test_unit_weight_is_reserved():
    with pytest.raises(InvalidInstanceError):
        Graph.build(1, weights={UNIT_WEIGHT: {0: 1}})
    g = Graph.build(2)
    assert g.has_weight(UNIT_WEIGHT)
    assert g.weight(UNIT_WEIGHT, 1) == 1


def test_unknown_weight_symbol(items):
    with pytest.raises(SymbolNotFoundError):
        items.weight("missing", 0)
    with pytest.raises(SymbolNotFoundError):
        accumulated_weight(items, "missing", [0])


def test_accumulated_weight(items):
    assert accumulated_weight(items, "w", []) == 0
    assert accumulated_weight(items, "w", [0, 1]) == 8
    assert accumulated_weight(items, "w", items.vertices) == 16
    assert accumulated_weight(items, UNIT_WEIGHT, [0, 2]) == 2


def test_term_range_bound():
    g = Graph.build(3, weights={"w": {0: 5, 1: 2, 2: 0}})
    term = WeightTerm.of(0, {("w", "X"): 5, ("w", "Y"): 1})
    assert term_range_bound(g, [term]) == 5 + 4 * 25 * 3
    assert term_range_bound(g, []) == 5


def test_term_range_bound_covers_every_value(items):
    term = WeightTerm.of(0, {("w", "X"): 1})
    bound = term_range_bound(items, [term])
    assert accumulated_weight(items, "w", items.vertices) <= bound


def test_subdivide_edgeless_graph_is_unchanged():
    g = Graph.build(3)
    assert subdivide(g) == g
    assert EDGE_COLOR not in subdivide(g).color_sets


def test_subdivide_single_edge(k2):
    s = subdivide(k2)
    assert s.n == 3
    assert s.edges == frozenset({(0, 2), (1, 2)})
    assert s.color_sets[EDGE_COLOR] == frozenset({2})


def test_subdivide_moves_edge_data():
    g = Graph.build(
        3,
        [(0, 1), (1, 2), (0, 2)],
        edge_weights={"len": {(1, 2): 7}},
        edge_colors={"red": [(0, 2)]},
    )
    midpoint = subdivision_midpoints(g)
    s = subdivide(g)
    assert s.n == 6 and len(s.edges) == 6
    assert s.weight("len", midpoint[(1, 2)]) == 7
    assert s.color_sets["red"] == frozenset({midpoint[(0, 2)]})


def test_subdivide_refuses_reserved_color():
    g = Graph.build(2, [(0, 1)], colors={EDGE_COLOR: [0]})
    with pytest.raises(InvalidInstanceError):
        subdivide(g)


def test_networkx_bridge(p4, triangle):
    assert from_networkx(to_networkx(p4)) == p4
    assert is_forest(p4)
    assert not is_forest(triangle)
    assert isomorphic(p4, from_networkx(nx.path_graph(4)))
    assert not isomorphic(p4, triangle)


def test_isomorphism_respects_colors(p4):
    end = Graph.build(4, p4.edges, colors={"red": [0]})
    middle = Graph.build(4, p4.edges, colors={"red": [1]})
    assert isomorphic(end, end.permuted([3, 2, 1, 0]))
    assert not isomorphic(end, middle)


GRAPH_TEXT = """\
# a weighted path
v 0 1 2
e 0 1
e 1 2
color red 0 2
weight w 1 4
eweight len 0 1 3
"""


def test_parse_graph():
    g = parse_graph(GRAPH_TEXT)
    assert g.n == 3
    assert g.edges == frozenset({(0, 1), (1, 2)})
    assert g.color_sets["red"] == frozenset({0, 2})
    assert g.weight("w", 1) == 4
    assert g.edge_weights["len"][(0, 1)] == 3


def test_serialized_graph_reads_back():
    g = parse_graph(GRAPH_TEXT)
    assert parse_graph(serialize_graph(g)) == g


@pytest.mark.parametrize(
    "text",
    [
        "v 0 1\ne 0 0\n",
        "v 0 1\ne 0 1\ne 1 0\n",
        "v 0\nvertex 1\n",
        "v 0\ncolor __edge__ 0\n",
        "v 0\nweight # 0 1\n",
        "v 0\nweight w 0 -3\n",
    ],
)
def test_parse_graph_errors(text):
    with pytest.raises(ParseError):
        parse_graph(text)


def test_parse_graph_needs_dense_ids():
    with pytest.raises(InvalidInstanceError):
        parse_graph("v 0 2\n")
