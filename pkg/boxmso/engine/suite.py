"""Randomized acceptance suite: boxed queries from templates, checked against the oracle."""

import logging
import random
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from boxmso.core.config import Limits, settings
from boxmso.core.errors import BoxmsoError, BudgetExceededError
from boxmso.encoders import (
    encode_bdvd,
    encode_knapsack,
    encode_md_subset_sum,
    encode_subset_sum,
)
from boxmso.engine.extract import approximate_answer, exact_answer
from boxmso.engine.generators import expression_for, path_graph, random_tree
from boxmso.engine.graphs import term_range_bound
from boxmso.engine.logic import weight_terms
from boxmso.engine.oracle import exact_maximum, validate_answer
from boxmso.engine.queries import parse_query
from boxmso.models.expression import CwExpression
from boxmso.models.formula import Query
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

EPSILONS = (Fraction(1, 10), Fraction(1, 4), Fraction(1, 2))
EXACT_RANGE = 50


@dataclass(frozen=True)
class SuiteCase:
    name: str
    graph: Graph
    expression: CwExpression
    query: Query
    epsilon: Fraction


@dataclass
class CaseResult:
    name: str
    passed: bool
    skipped: bool = False
    exact_checked: bool = False
    reasons: list[str] = field(default_factory=list)


@dataclass
class SuiteReport:
    results: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def skipped(self) -> int:
        return sum(r.skipped for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed - self.skipped

    def as_dict(self) -> dict[str, Any]:
        return {
            "cases": len(self.results),
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "failures": [
                {"name": r.name, "reasons": r.reasons}
                for r in self.results
                if not r.passed and not r.skipped
            ],
        }


# ============================================================================
# TEMPLATES
# ============================================================================


def _small_graph(rng: random.Random) -> Graph:
    n = rng.randint(2, 6)
    shape = rng.choice(["edgeless", "path", "tree"])
    if shape == "edgeless":
        return Graph.build(n)
    if shape == "path":
        return path_graph(n)
    return random_tree(n, seed=rng.randrange(2**32))


def _weighted(g: Graph, rng: random.Random, top: int = 5) -> Graph:
    return Graph.build(
        g.n, g.edges, weights={"w": {v: rng.randint(0, top) for v in g.vertices}}
    )


def _subset_sum(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    items = [rng.randint(0, 10) for _ in range(rng.randint(1, 5))]
    encoded = encode_subset_sum(items, rng.randint(0, sum(items) + 2))
    return encoded.graph, encoded.expression, encoded.query


def _knapsack(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    count = rng.randint(1, 5)
    values = [rng.randint(0, 8) for _ in range(count)]
    sizes = [rng.randint(0, 8) for _ in range(count)]
    encoded = encode_knapsack(values, sizes, rng.randint(0, sum(sizes)))
    return encoded.graph, encoded.expression, encoded.query


def _md_subset_sum(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    vectors = [[rng.randint(0, 5) for _ in range(2)] for _ in range(rng.randint(1, 4))]
    chosen = [v for v in vectors if rng.random() < 0.5]
    target = [sum(v[j] for v in chosen) + rng.randint(0, 1) for j in range(2)]
    encoded = encode_md_subset_sum(vectors, target)
    return encoded.graph, encoded.expression, encoded.query


def _card(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    g = _weighted(_small_graph(rng), rng)
    residue, modulus = rng.choice([(0, 2), (1, 2), (0, 3)])
    bound = rng.randint(0, g.total_weight("w"))
    query = parse_query(
        f"(query (free X)"
        f" (constraint (and (card {residue} {modulus} X)"
        f" (forall x (forall y (not (and (in x X) (in y X) (edge x y)))))"
        f" (cmp <= (term 0 (coef w X 1)) {bound})))"
        f" (target (term 0 (coef # X 1))))"
    )
    return g, expression_for(g), query


def _coloring(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    g = _weighted(_small_graph(rng), rng)
    query = parse_query(
        "(query (free X Y)"
        " (constraint (and"
        " (forall x (forall y (not (and (in x X) (in y X) (edge x y)))))"
        " (forall x (forall y (not (and (in x Y) (in y Y) (edge x y)))))"
        " (forall x (not (and (in x X) (in x Y))))"
        " (cmp <= (term 0 (coef # X 1)) (term 1 (coef # Y 1)))))"
        " (target (term 0 (coef w X 1) (coef w Y 1))))"
    )
    return g, expression_for(g), query


def _bdvd(rng: random.Random) -> tuple[Graph, CwExpression, Query]:
    g = random_tree(rng.randint(2, 6), seed=rng.randrange(2**32))
    encoded = encode_bdvd(g, None, rng.choice([1, 2]))
    return encoded.graph, encoded.expression, encoded.query


TEMPLATES: dict[str, Callable[[random.Random], tuple[Graph, CwExpression, Query]]] = {
    "subset-sum": _subset_sum,
    "knapsack": _knapsack,
    "md-subset-sum": _md_subset_sum,
    "card": _card,
    "coloring": _coloring,
    "bdvd": _bdvd,
}


def generate_suite(count: int, seed: int = 0) -> list[SuiteCase]:
    """``count`` cases cycling through the templates; equal seeds give equal suites."""
    rng = random.Random(seed)
    names = list(TEMPLATES)
    cases = []
    for i in range(count):
        name = names[i % len(names)]
        g, e, query = TEMPLATES[name](rng)
        cases.append(SuiteCase(f"{name}-{i}", g, e, query, rng.choice(EPSILONS)))
    return cases


# ============================================================================
# RUNNING
# ============================================================================


def run_case(case: SuiteCase, limits: Limits | None = None) -> CaseResult:
    """Sandwich-check the approximate answer; compare exact mode on small ranges."""
    limits = limits or Limits.from_settings(settings)
    result = CaseResult(case.name, passed=False)
    try:
        answer = approximate_answer(case.graph, case.expression, case.query, case.epsilon, limits)
        verdict = validate_answer(answer, case.graph, case.query, answer.alpha, limits.budget)
        result.reasons.extend(verdict.reasons)
        terms = weight_terms(case.query.constraint) + [case.query.target]
        if term_range_bound(case.graph, terms) <= EXACT_RANGE:
            result.exact_checked = True
            exact = exact_answer(case.graph, case.expression, case.query, limits)
            expected = exact_maximum(case.graph, case.query, limits.budget)
            if exact.value != expected.value:
                result.reasons.append(f"exact mode gave {exact.value}, oracle {expected.value}")
    except BudgetExceededError as exc:
        logger.warning(f"{case.name} skipped: {exc}")
        result.skipped = True
        return result
    except BoxmsoError as exc:
        result.reasons.append(str(exc))
    result.passed = not result.reasons
    if not result.passed:
        logger.warning(f"{case.name} failed: {'; '.join(result.reasons)}")
    return result


def run_suite(cases: list[SuiteCase], limits: Limits | None = None) -> SuiteReport:
    report = SuiteReport([run_case(case, limits) for case in cases])
    logger.info(f"suite: {report.passed} passed, {report.failed} failed, {report.skipped} skipped")
    return report
