"""Brute-force reference semantics: formula evaluation and exact query maxima."""

import itertools
import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from boxmso.core.budget import EnumerationBudget
from boxmso.core.config import settings
from boxmso.core.errors import SignatureMismatchError, UnboundVariableError
from boxmso.engine.logic import free_variables, loosen, negation_normalize, tighten
from boxmso.models.answer import NEG_INF, ApproximateAnswer, ExactAnswer, Value, Witness
from boxmso.models.formula import (
    Adjacent,
    And,
    Card,
    Compare,
    Equals,
    Exists,
    ForAll,
    Formula,
    HasColor,
    In,
    Incident,
    Not,
    Or,
    Query,
    Single,
    Truth,
    VarKind,
    WeightTerm,
    Within,
)
from boxmso.models.graph import EDGE_COLOR, Graph

logger = logging.getLogger(__name__)

Assignment = Mapping[str, Any]


# ============================================================================
# ASSIGNMENTS
# ============================================================================


def as_set(value: Any) -> frozenset:
    """Vertex ids and edges become singletons; sets pass through."""
    if isinstance(value, (set, frozenset, list)):
        return frozenset(value)
    return frozenset({value})


def witness_key(witness: Mapping[str, frozenset]) -> tuple:
    """Total order on witnesses; smaller keys win ties."""
    return tuple((name, tuple(sorted(witness[name]))) for name in sorted(witness))


def domain(g: Graph, kind: VarKind) -> list[frozenset]:
    if kind is VarKind.VERTEX:
        return [frozenset({v}) for v in g.vertices]
    if kind is VarKind.EDGE:
        return [frozenset({e}) for e in sorted(g.edges)]
    ground = list(g.vertices) if kind is VarKind.SET else sorted(g.edges)
    return [
        frozenset(x for i, x in enumerate(ground) if mask >> i & 1)
        for mask in range(1 << len(ground))
    ]


def domain_size(g: Graph, kind: VarKind) -> int:
    if kind is VarKind.VERTEX:
        return g.n
    if kind is VarKind.EDGE:
        return len(g.edges)
    return 1 << (g.n if kind is VarKind.SET else len(g.edges))


def evaluation_cost(g: Graph, f: Formula) -> int:
    """Worst-case number of atom evaluations."""
    if isinstance(f, (And, Or)):
        return sum(evaluation_cost(g, p) for p in f.parts)
    if isinstance(f, Not):
        return evaluation_cost(g, f.body)
    if isinstance(f, (Exists, ForAll)):
        return max(1, domain_size(g, f.kind)) * evaluation_cost(g, f.body)
    return 1


# ============================================================================
# EVALUATION
# ============================================================================


def term_value(g: Graph, term: WeightTerm, assignment: Assignment) -> Fraction:
    def accumulated(weight: str, var: str) -> int:
        if var not in assignment:
            raise UnboundVariableError(f"unbound variable {var!r}", variable=var)
        total = 0
        for x in as_set(assignment[var]):
            total += g.edge_weight(weight, x) if isinstance(x, tuple) else g.weight(weight, x)
        return total

    return term.evaluate(accumulated)


def _colored(g: Graph, color: str) -> frozenset:
    if color not in g.color_sets and color not in g.edge_color_sets and color != EDGE_COLOR:
        raise SignatureMismatchError(f"graph has no color {color!r}", color=color)
    return g.color_sets.get(color, frozenset()) | g.edge_color_sets.get(color, frozenset())


def evaluate_formula(g: Graph, f: Formula, assignment: Assignment) -> bool:
    """Truth of ``f`` on ``g`` under ``assignment`` by direct recursion."""
    missing = free_variables(f) - set(assignment)
    if missing:
        name = sorted(missing)[0]
        raise UnboundVariableError(f"unbound variable {name!r}", variable=name)
    env = {name: as_set(value) for name, value in assignment.items()}
    for value in env.values():
        for x in value:
            unknown = x not in g.edges if isinstance(x, tuple) else not 0 <= x < g.n
            if unknown:
                raise SignatureMismatchError(f"{x} is not an element of the graph")
    return _eval(g, f, env)


def _adjacent(g: Graph, left: frozenset, right: frozenset) -> bool:
    return any(g.has_edge(u, v) for u in left for v in right if isinstance(u, int) and u != v)


def _eval(g: Graph, f: Formula, env: dict[str, frozenset]) -> bool:
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, In):
        return env[f.element] <= env[f.collection]
    if isinstance(f, Equals):
        return env[f.left] == env[f.right]
    if isinstance(f, Adjacent):
        return _adjacent(g, env[f.left], env[f.right])
    if isinstance(f, HasColor):
        return bool(env[f.var] & _colored(g, f.color))
    if isinstance(f, Within):
        return env[f.var] <= _colored(g, f.color)
    if isinstance(f, Card):
        return len(env[f.var]) % f.modulus == f.residue
    if isinstance(f, Single):
        return len(env[f.var]) == 1
    if isinstance(f, Incident):
        return any(v in e for v in env[f.vertex] for e in env[f.edge])
    if isinstance(f, Compare):
        return f.op.holds(term_value(g, f.left, env), term_value(g, f.right, env))
    if isinstance(f, And):
        return all(_eval(g, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(g, p, env) for p in f.parts)
    if isinstance(f, Not):
        return not _eval(g, f.body, env)
    want = isinstance(f, Exists)
    saved = env.get(f.var)
    try:
        for value in domain(g, f.kind):
            env[f.var] = value
            if _eval(g, f.body, env) == want:
                return want
        return not want
    finally:
        if saved is None:
            env.pop(f.var, None)
        else:
            env[f.var] = saved


# ============================================================================
# MAXIMA
# ============================================================================


def assignments(
    g: Graph, free: tuple[tuple[str, VarKind], ...]
) -> Iterator[dict[str, frozenset]]:
    names = [name for name, _ in free]
    for values in itertools.product(*(domain(g, kind) for _, kind in free)):
        yield dict(zip(names, values))


def exact_maximum(g: Graph, query: Query, budget: int | None = None) -> ExactAnswer:
    """Maximum of the target over all satisfying assignments, with the smallest argmax."""
    limit = EnumerationBudget(budget or settings.budget)
    total = 1
    for _, kind in query.free:
        total *= domain_size(g, kind)
    limit.ensure("oracle assignments", total)
    limit.ensure("oracle evaluation", total * evaluation_cost(g, query.constraint))

    best: Value = NEG_INF
    best_witness: Witness | None = None
    for candidate in assignments(g, query.free):
        if not _eval(g, query.constraint, dict(candidate)):
            continue
        value = term_value(g, query.target, candidate)
        if value > best or (value == best and witness_key(candidate) < witness_key(best_witness)):
            best, best_witness = value, candidate
    if best_witness is not None:
        best = int(best)
    logger.debug(f"oracle maximum {best} over {total} assignments")
    return ExactAnswer(value=best, witness=best_witness)


def oversatisfied_maximum(
    g: Graph, query: Query, alpha: Fraction, budget: int | None = None
) -> Value:
    """Maximum under the constraint tightened by ``alpha``."""
    tightened = tighten(negation_normalize(query.constraint), Fraction(alpha))
    return exact_maximum(g, Query(query.free, tightened, query.target), budget).value


def undersatisfied_maximum(
    g: Graph, query: Query, alpha: Fraction, budget: int | None = None
) -> Value:
    """Maximum under the constraint loosened by ``alpha``."""
    loosened = loosen(negation_normalize(query.constraint), Fraction(alpha))
    return exact_maximum(g, Query(query.free, loosened, query.target), budget).value


@dataclass
class Verdict:
    valid: bool = True
    reasons: list[str] = field(default_factory=list)

    def fail(self, reason: str) -> None:
        self.valid = False
        self.reasons.append(reason)


def validate_answer(
    answer: ApproximateAnswer, g: Graph, query: Query, alpha: Fraction, budget: int | None = None
) -> Verdict:
    """Check the sandwich ``over <= max- <= exact <= max+ <= under`` and both witnesses."""
    alpha = Fraction(alpha)
    verdict = Verdict()
    over = oversatisfied_maximum(g, query, alpha, budget)
    exact = exact_maximum(g, query, budget).value
    under = undersatisfied_maximum(g, query, alpha, budget)
    chain = [
        ("oversatisfied maximum", over),
        ("max_minus", answer.max_minus),
        ("exact maximum", exact),
        ("max_plus", answer.max_plus),
        ("undersatisfied maximum", under),
    ]
    for (low_name, low), (high_name, high) in zip(chain, chain[1:]):
        if low > high:
            verdict.fail(f"{low_name} {low} exceeds {high_name} {high}")

    loosened = loosen(negation_normalize(query.constraint), alpha)
    for label, value, witness, constraint in (
        ("minus", answer.max_minus, answer.witness_minus, query.constraint),
        ("plus", answer.max_plus, answer.witness_plus, loosened),
    ):
        if value == NEG_INF:
            continue
        if witness is None:
            verdict.fail(f"max_{label} is finite but has no witness")
            continue
        if not evaluate_formula(g, constraint, witness):
            verdict.fail(f"witness_{label} violates its constraint")
        achieved = term_value(g, query.target, witness)
        if achieved != value:
            verdict.fail(f"witness_{label} has target {achieved}, reported {value}")
    return verdict
