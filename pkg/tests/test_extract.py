"""Planning, preparation and the two-sided answers."""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

from boxmso.core.config import Limits
from boxmso.core.errors import BudgetExceededError, InvalidInstanceError, OutOfRangeError
from boxmso.core.events import TraceRecorder
from boxmso.encoders import encode_equitable_coloring, encode_knapsack, encode_subset_sum
from boxmso.engine.extract import (
    approximate_answer,
    exact_answer,
    half_answer,
    half_b,
    prepare,
    value_bound,
)
from boxmso.engine.generators import path_expression, path_graph
from boxmso.engine.oracle import exact_maximum, validate_answer
from boxmso.engine.queries import parse_query
from boxmso.models.answer import NEG_INF
from boxmso.models.formula import VarKind, WeightTerm
from boxmso.models.graph import Graph

ALL_EDGES = (
    "(query (free (edge-set F))"
    " (constraint (forall-edge e (in e F)))"
    " (target (term 0 (coef # F 1))))"
)


def test_half_b():
    assert half_b(Fraction(1, 12), 3) == 180
    assert half_b(Fraction(1, 2), 1) == 10
    with pytest.raises(OutOfRangeError):
        half_b(Fraction(0), 2)


def test_value_bound(items):
    assert value_bound(items, [WeightTerm.of(0, {("w", "X"): 1})]) == 16
    assert value_bound(items, []) == 1


def test_prepare_rejects_an_empty_graph(subset_sum_8):
    with pytest.raises(InvalidInstanceError):
        prepare(Graph.build(0), None, subset_sum_8)


def test_prepare_routes_edge_sets_through_subdivision(k2):
    prepared = prepare(k2, None, parse_query(ALL_EDGES))
    assert prepared.translated
    assert prepared.graph.n == 3
    assert prepared.query.free == (("F", VarKind.SET),)
    assert prepared.restore({"F": frozenset({2})}) == {"F": frozenset({(0, 1)})}


def test_half_answer_rejects_large_epsilon(items, items_expression, subset_sum_8):
    with pytest.raises(OutOfRangeError):
        half_answer(items, items_expression, subset_sum_8, Fraction(3, 4))


def test_half_answer_finds_the_heaviest_fitting_subset(items, items_expression, quarter):
    q = parse_query(
        "(query (free X) (constraint (cmp <= (term 0 (coef w X 1)) 10))"
        " (target (term 0 (coef w X 1))))"
    )
    half = half_answer(items, items_expression, q, quarter)
    assert half.found
    assert half.value >= exact_maximum(items, q).value
    assert sum(items.weight("w", v) for v in half.witness["X"]) <= Fraction(5, 4) * 10


def test_approximate_subset_sum(items, items_expression, subset_sum_8, quarter):
    answer = approximate_answer(items, items_expression, subset_sum_8, quarter, threads=1)
    assert answer.alpha == Fraction(5, 4)
    assert answer.epsilon_used <= quarter
    assert answer.max_plus == 0
    assert sum(items.weight("w", v) for v in answer.witness_plus["X"]) == 8
    assert validate_answer(answer, items, subset_sum_8, answer.alpha).valid


def test_approximate_subset_sum_without_solution(items, items_expression, subset_sum_9, quarter):
    answer = approximate_answer(items, items_expression, subset_sum_9, quarter, threads=1)
    assert answer.max_minus == NEG_INF
    # loosening admits the subsets of weight 8
    if answer.witness_plus is not None:
        assert sum(items.weight("w", v) for v in answer.witness_plus["X"]) == 8
    assert validate_answer(answer, items, subset_sum_9, answer.alpha).valid


def test_both_sides_in_parallel(items, items_expression, subset_sum_8, quarter):
    serial = approximate_answer(items, items_expression, subset_sum_8, quarter, threads=1)
    parallel = approximate_answer(items, items_expression, subset_sum_8, quarter, threads=2)
    assert (parallel.max_minus, parallel.max_plus) == (serial.max_minus, serial.max_plus)
    assert parallel.witness_plus == serial.witness_plus


def test_exact_answer_matches_the_oracle(items, items_expression, subset_sum_8, subset_sum_9):
    answer = exact_answer(items, items_expression, subset_sum_8)
    assert answer.value == 0
    assert answer.witness == {"X": frozenset({0, 1})}
    assert exact_answer(items, items_expression, subset_sum_9).value == NEG_INF


def test_exact_knapsack():
    encoded = encode_knapsack([5, 4, 3], [4, 3, 2], 5)
    answer = exact_answer(encoded.graph, encoded.expression, encoded.query)
    assert answer.value == 7
    assert answer.witness == {"X": frozenset({1, 2})}
    assert answer.stats.depth >= 1


def test_exact_heaviest_independent_set(p4, independent_set_query):
    g = Graph.build(4, p4.edges, weights={"w": {0: 1, 1: 5, 2: 1, 3: 2}})
    answer = exact_answer(g, None, independent_set_query)
    assert answer.value == 7
    assert answer.witness == {"X": frozenset({1, 3})}


def test_exact_answer_over_edge_sets(k2):
    answer = exact_answer(k2, None, parse_query(ALL_EDGES))
    assert answer.value == 1
    assert answer.witness == {"F": frozenset({(0, 1)})}


def test_answers_are_traced(items, items_expression, subset_sum_8):
    trace = TraceRecorder()
    exact_answer(items, items_expression, subset_sum_8, trace=trace)
    assert trace.events
    assert all(line.startswith("{") for line in trace.lines())


def test_the_budget_applies_to_table_construction(items, items_expression):
    largest_independent = parse_query(
        "(query (free X)"
        " (constraint (forall x (forall y (not (and (in x X) (in y X) (edge x y))))))"
        " (target (term 0 (coef # X 1))))"
    )
    with pytest.raises(BudgetExceededError):
        exact_answer(items, items_expression, largest_independent, limits=Limits(budget=2))


# ============================================================================
# ACCURACY ON RANDOM INSTANCES
# ============================================================================


def subset_sums(sizes):
    return {
        sum(chosen)
        for r in range(len(sizes) + 1)
        for chosen in itertools.combinations(sizes, r)
    }


def best_value(values, sizes, capacity):
    best = 0
    for r in range(len(values) + 1):
        for chosen in itertools.combinations(range(len(values)), r):
            if sum(sizes[i] for i in chosen) <= capacity:
                best = max(best, sum(values[i] for i in chosen))
    return best


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_subset_sum_at_a_tenth(seed):
    rng = random.Random(seed)
    items = [rng.randint(1, 100) for _ in range(rng.randint(1, 10))]
    if rng.random() < 0.5:
        target = sum(rng.sample(items, rng.randint(1, len(items))))
    else:
        target = rng.randint(1, sum(items))
    encoded = encode_subset_sum(items, target)
    epsilon = Fraction(1, 10)
    answer = approximate_answer(
        encoded.graph, encoded.expression, encoded.query, epsilon,
        limits=Limits(budget=2**24), threads=1,
    )
    reachable = target in subset_sums(items)
    # a tightened equality has no solution
    assert answer.max_minus == NEG_INF
    if reachable:
        assert answer.max_plus == 0
    if answer.witness_plus is not None:
        total = encoded.decode(answer.witness_plus)["sum"]
        assert (1 - epsilon) * target <= total <= (1 + epsilon) * target
    else:
        assert not reachable


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(30))
def test_knapsack_at_a_fifth(seed):
    rng = random.Random(1000 + seed)
    n = rng.randint(1, 10)
    values = [rng.randint(1, 100) for _ in range(n)]
    sizes = [rng.randint(1, 100) for _ in range(n)]
    capacity = rng.randint(1, sum(sizes))
    encoded = encode_knapsack(values, sizes, capacity)
    epsilon = Fraction(1, 5)
    answer = approximate_answer(
        encoded.graph, encoded.expression, encoded.query, epsilon,
        limits=Limits(budget=2**24), threads=1,
    )
    conservative = encoded.decode(answer.witness_minus)
    assert conservative["size"] <= capacity
    assert conservative["value"] == answer.max_minus
    assert answer.max_minus >= best_value(values, sizes, math.floor((1 - epsilon) * capacity))
    eager = encoded.decode(answer.witness_plus)
    assert eager["size"] <= (1 + epsilon) * capacity
    assert answer.max_plus >= best_value(values, sizes, capacity)
    assert answer.max_minus <= best_value(values, sizes, capacity) <= answer.max_plus


@pytest.mark.slow
def test_finer_accuracy_stays_within_a_polynomial_factor():
    g = path_graph(32)
    encoded = encode_equitable_coloring(g, path_expression(32), 2)
    elapsed = {}
    for epsilon in (Fraction(2, 5), Fraction(1, 20)):
        started = time.perf_counter()
        answer = approximate_answer(
            encoded.graph, encoded.expression, encoded.query, epsilon,
            limits=Limits(budget=2**24), threads=1,
        )
        elapsed[epsilon] = time.perf_counter() - started
        assert answer.max_plus == 0
        first, second = encoded.decode(answer.witness_plus)["classes"]
        assert sorted(first + second) == list(range(32))
        assert all(not ({u, v} <= set(first) or {u, v} <= set(second)) for u, v in g.edges)
    assert elapsed[Fraction(1, 20)] <= 200 * max(elapsed[Fraction(2, 5)], 0.05)
