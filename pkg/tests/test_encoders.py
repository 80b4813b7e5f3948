"""Problem encoders checked against the brute-force oracle, and instance files."""

import itertools
from fractions import Fraction

import networkx as nx
import pytest

from boxmso.core.config import Limits
from boxmso.core.errors import (
    BudgetExceededError,
    InvalidInstanceError,
    ParseError,
    SignatureMismatchError,
)
from boxmso.encoders import (
    LOADERS,
    encode_bdvd,
    encode_cds,
    encode_cvc,
    encode_equitable_coloring,
    encode_equitable_connected_partition,
    encode_equitable_connected_partition_edges,
    encode_graph_motif,
    encode_knapsack,
    encode_md_subset_sum,
    encode_subset_sum,
    load_instance,
)
from boxmso.encoders.deletion import remaining_degree
from boxmso.engine.extract import approximate_answer, build_plan, exact_answer, prepare
from boxmso.engine.graphs import from_networkx
from boxmso.engine.oracle import evaluate_formula, exact_maximum
from boxmso.models.answer import NEG_INF
from boxmso.models.formula import VarKind
from boxmso.models.graph import Graph


def solve(encoded, budget=None):
    return exact_maximum(encoded.graph, encoded.query, budget=budget)


# ============================================================================
# NUMBER PROBLEMS
# ============================================================================


def test_subset_sum():
    encoded = encode_subset_sum([3, 5, 8], 8)
    answer = solve(encoded)
    assert answer.value == 0
    assert encoded.decode(answer.witness) == {"items": [0, 1], "sum": 8}
    assert solve(encode_subset_sum([3, 5, 8], 9)).value == NEG_INF


def test_empty_subset_sum_still_has_a_vertex():
    encoded = encode_subset_sum([], 0)
    assert encoded.graph.n == 1
    assert solve(encoded).value == 0


def test_knapsack_decodes_value_and_size():
    encoded = encode_knapsack([5, 4, 3], [4, 3, 2], 5)
    answer = solve(encoded)
    assert encoded.decode(answer.witness) == {"items": [1, 2], "value": 7, "size": 5}
    assert encoded.decode(None) is None


def test_knapsack_rejects_bad_input():
    with pytest.raises(InvalidInstanceError):
        encode_knapsack([1, 2], [1], 3)
    with pytest.raises(InvalidInstanceError):
        encode_knapsack([1], [-1], 3)


def test_md_subset_sum():
    encoded = encode_md_subset_sum([[1, 2], [2, 1], [3, 0]], [3, 3])
    answer = solve(encoded)
    assert answer.value == 0
    assert encoded.decode(answer.witness) == {"items": [0, 1], "sum": [3, 3]}
    with pytest.raises(InvalidInstanceError):
        encode_md_subset_sum([[1, 2], [1]], [3, 3])


# ============================================================================
# PARTITIONS
# ============================================================================


def test_equitable_coloring_of_a_path(p4):
    encoded = encode_equitable_coloring(p4, None, 2)
    answer = solve(encoded)
    assert answer.value == 0
    assert encoded.decode(answer.witness) == {"classes": [[0, 2], [1, 3]], "ratio": "1"}


def test_triangle_has_no_two_coloring(triangle):
    assert solve(encode_equitable_coloring(triangle, None, 2)).value == NEG_INF


def test_parts_must_be_positive(p4):
    with pytest.raises(InvalidInstanceError):
        encode_equitable_coloring(p4, None, 0)


@pytest.mark.slow
def test_equitable_connected_partition_of_a_path(p4):
    encoded = encode_equitable_connected_partition(p4, None, 2)
    answer = solve(encoded, budget=2**22)
    assert answer.value == 0
    parts = encoded.decode(answer.witness)["parts"]
    assert sorted(parts) == [[0, 1], [2, 3]]


def test_edge_deletion_partition_quantifies_over_edges(p4):
    encoded = encode_equitable_connected_partition_edges(p4, None, 2)
    assert encoded.query.kinds["X"] is VarKind.EDGE_SET
    assert "BOXMSO_MAX_RANK" in encoded.note
    decoded = encoded.decode({"X": frozenset({(1, 2)})})
    assert decoded == {"removed": [[1, 2]], "parts": [[0, 1], [2, 3]]}


# ============================================================================
# DELETION AND CAPACITIES
# ============================================================================


@pytest.mark.parametrize("degree, value", [(2, -1), (3, 0)])
def test_bdvd_on_a_star(star3, degree, value):
    encoded = encode_bdvd(star3, None, degree)
    answer = solve(encoded)
    assert answer.value == value
    decoded = encoded.decode(answer.witness)
    assert decoded["max_degree"] <= degree
    if value == -1:
        assert decoded["deleted"] == [0]


def test_bdvd_rejects_negative_degree(star3):
    with pytest.raises(InvalidInstanceError):
        encode_bdvd(star3, None, -1)


def test_cds_on_an_edge(k2):
    encoded = encode_cds(k2, None, {0: 1, 1: 1})
    answer = solve(encoded)
    assert answer.value == -1
    assert encoded.decode(answer.witness) == {"dominating_set": [0], "assignment": {"1": 0}}


@pytest.mark.slow
@pytest.mark.parametrize("capacity, value", [(3, -1), (2, -2)])
def test_cds_center_capacity(star3, capacity, value):
    encoded = encode_cds(star3, None, {0: capacity})
    answer = solve(encoded, budget=2**22)
    assert answer.value == value
    assert encoded.decode(answer.witness)["assignment"] is not None


def test_cds_rejects_unknown_vertices(k2):
    with pytest.raises(InvalidInstanceError):
        encode_cds(k2, None, {5: 1})


def test_cvc_on_an_edge(k2):
    encoded = encode_cvc(k2, None, {0: 1})
    assert encoded.graph.n == 3
    answer = solve(encoded)
    assert answer.value == -1
    assert encoded.decode(answer.witness) == {"cover": [0], "assignment": {"0-1": 0}}


def test_cvc_without_capacity(k2):
    assert solve(encode_cvc(k2, None, {0: 0, 1: 0})).value == NEG_INF


def test_cvc_decoder_widens_capacities_for_eager_witnesses():
    path = Graph.build(3, [(0, 1), (1, 2)])
    roomy = encode_cvc(path, None, {1: 2})
    assert roomy.decode({"X": frozenset({1})}) == {
        "cover": [1],
        "assignment": {"0-1": 1, "1-2": 1},
    }
    tight = encode_cvc(path, None, {1: 1})
    assert tight.decode({"X": frozenset({1})})["assignment"] is None
    assert tight.decode({"X": frozenset({1})}, slack=1)["assignment"] is not None


# ============================================================================
# MOTIF
# ============================================================================


@pytest.fixture
def colored_path() -> Graph:
    return Graph.build(3, [(0, 1), (1, 2)], colors={"a": [0, 2], "b": [1]})


def test_motif_constraint(colored_path):
    encoded = encode_graph_motif(colored_path, None, {"a": 1, "b": 1})
    assert evaluate_formula(colored_path, encoded.query.constraint, {"X": {0, 1}})
    assert not evaluate_formula(colored_path, encoded.query.constraint, {"X": {0, 2}})
    assert not evaluate_formula(colored_path, encoded.query.constraint, {"X": {0}})


def test_motif_answer(colored_path):
    encoded = encode_graph_motif(colored_path, None, {"a": 1, "b": 1})
    answer = solve(encoded)
    assert answer.value == 0
    assert encoded.decode(answer.witness) == {"vertices": [0, 1], "colors": {"a": 1, "b": 1}}


def test_motif_checks_colors(colored_path, k2):
    with pytest.raises(SignatureMismatchError):
        encode_graph_motif(colored_path, None, {"c": 1})
    with pytest.raises(InvalidInstanceError):
        encode_graph_motif(k2, None, {})


# ============================================================================
# INSTANCE FILES
# ============================================================================


def test_every_problem_has_a_loader():
    assert len(LOADERS) == 10


def test_load_knapsack():
    encoded = load_instance("problem knapsack\nvalues 5 4 3\nsizes 4 3 2\ncapacity 5\n")
    assert encoded.problem == "knapsack"
    assert encoded.parameters["capacity"] == 5
    assert solve(encoded).value == 7


def test_load_graph_problem():
    text = "problem bdvd  # deletion\ndegree 2\nv 0 1 2 3\ne 0 1\ne 0 2\ne 0 3\n"
    encoded = load_instance(text)
    assert encoded.graph.n == 4
    assert encoded.parameters == {"degree": 2}


def test_load_capacities():
    encoded = load_instance("problem cds\ncapacity 0 1\ncapacity 1 1\nv 0 1\ne 0 1\n")
    assert encoded.parameters["capacities"] == {0: 1, 1: 1}


@pytest.mark.parametrize(
    "text",
    [
        "items 1 2\ntarget 3\n",
        "problem teleport\n",
        "problem subset-sum\nproblem knapsack\n",
        "problem subset-sum\nitems 1 x\ntarget 3\n",
        "problem subset-sum\nitems 1 2\n",
        "problem knapsack\nvalues 1\nsizes 1\ncapacity 1 2\n",
    ],
)
def test_malformed_instances(text):
    with pytest.raises(ParseError):
        load_instance(text)


@pytest.mark.slow
def test_edge_deletion_partition_of_a_path(p4):
    encoded = encode_equitable_connected_partition_edges(p4, None, 2)
    answer = solve(encoded, budget=2**22)
    assert answer.value == 0
    assert encoded.decode(answer.witness) == {"removed": [[1, 2]], "parts": [[0, 1], [2, 3]]}


@pytest.mark.slow
def test_a_star_has_no_edge_deletion_partition(star3):
    encoded = encode_equitable_connected_partition_edges(star3, None, 2)
    assert solve(encoded, budget=2**22).value == NEG_INF


def test_edge_deletion_partition_needs_a_higher_rank(p4):
    encoded = encode_equitable_connected_partition_edges(p4, None, 2)
    prepared = prepare(encoded.graph, None, encoded.query)
    q = prepared.query
    plan = build_plan(q.constraint, q.free, prepared.graph)
    assert plan.rank > Limits().max_rank
    with pytest.raises(BudgetExceededError):
        Limits().check_context(plan.rank, plan.arity, 2)
    raised = Limits(max_rank=max(8, plan.rank), max_arity=max(6, plan.arity))
    raised.check_context(plan.rank, plan.arity, 2)


def min_deletion(g, p):
    for r in range(g.n + 1):
        for deleted in itertools.combinations(range(g.n), r):
            if remaining_degree(g, set(deleted)) <= p:
                return r
    return g.n


@pytest.mark.slow
@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("n", range(2, 7))
def test_bdvd_on_every_small_tree(n, p):
    epsilon = Fraction(1, 5)
    limits = Limits(budget=2**24)
    for tree in nx.nonisomorphic_trees(n):
        g = from_networkx(tree)
        encoded = encode_bdvd(g, None, p)
        smallest = min_deletion(g, p)
        exact = exact_answer(g, None, encoded.query, limits=limits)
        assert exact.value == solve(encoded, budget=2**22).value == -smallest
        answer = approximate_answer(g, None, encoded.query, epsilon, limits=limits, threads=1)
        assert answer.max_minus <= -smallest
        assert encoded.decode(answer.witness_minus)["max_degree"] <= p
        eager = encoded.decode(answer.witness_plus)
        assert len(eager["deleted"]) <= smallest
        assert eager["max_degree"] + 1 <= (1 + epsilon) * (p + 1)
