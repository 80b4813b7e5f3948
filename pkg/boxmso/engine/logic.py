"""Static semantics of formulas: normalization, boxed blocks, loosening and tightening."""

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Union as TypingUnion

from boxmso.core.errors import NotBoxedError, OutOfRangeError
from boxmso.engine.queries import serialize_formula
from boxmso.models.formula import (
    ATOMS,
    And,
    Compare,
    Exists,
    ForAll,
    Formula,
    HasColor,
    In,
    Incident,
    Not,
    Op,
    Or,
    Query,
    Truth,
    VarKind,
    WeightTerm,
    Adjacent,
    Card,
    Equals,
    Single,
    Within,
    conjunction,
    disjunction,
)

logger = logging.getLogger(__name__)


# ============================================================================
# TRAVERSAL
# ============================================================================


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (And, Or)):
            stack.extend(reversed(node.parts))
        elif isinstance(node, Not):
            stack.append(node.body)
        elif isinstance(node, (Exists, ForAll)):
            stack.append(node.body)


def comparisons(f: Formula) -> list[Compare]:
    return [node for node in subformulas(f) if isinstance(node, Compare)]


def weight_terms(f: Formula) -> list[WeightTerm]:
    found: list[WeightTerm] = []
    for c in comparisons(f):
        found.extend((c.left, c.right))
    return found


def atom_variables(atom: Formula) -> tuple[str, ...]:
    if isinstance(atom, (In,)):
        return (atom.element, atom.collection)
    if isinstance(atom, (Equals, Adjacent)):
        return (atom.left, atom.right)
    if isinstance(atom, (HasColor, Within, Card, Single)):
        return (atom.var,)
    if isinstance(atom, Incident):
        return (atom.vertex, atom.edge)
    if isinstance(atom, Compare):
        return tuple(sorted(atom.left.variables | atom.right.variables))
    return ()


def free_variables(f: Formula) -> frozenset[str]:
    """Variables occurring outside the scope of their quantifier."""
    if isinstance(f, ATOMS):
        return frozenset(atom_variables(f))
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in f.parts))
    if isinstance(f, Not):
        return free_variables(f.body)
    return free_variables(f.body) - {f.var}


def quantified_variables(f: Formula) -> dict[str, VarKind]:
    return {n.var: n.kind for n in subformulas(f) if isinstance(n, (Exists, ForAll))}


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, (And, Or)):
        return max((quantifier_rank(p) for p in f.parts), default=0)
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    return 1 + quantifier_rank(f.body)


def level_kinds(f: Formula) -> tuple[bool, ...]:
    """Per quantifier depth: True when every quantifier at that depth binds a single element."""
    kinds: dict[int, bool] = {}

    def walk(node: Formula, at: int) -> None:
        if isinstance(node, (And, Or)):
            for part in node.parts:
                walk(part, at)
        elif isinstance(node, Not):
            walk(node.body, at)
        elif isinstance(node, (Exists, ForAll)):
            kinds[at] = kinds.get(at, True) and not node.kind.is_set
            walk(node.body, at + 1)

    walk(f, 1)
    return tuple(kinds.get(i, True) for i in range(1, quantifier_rank(f) + 1))


def map_comparisons(f: Formula, rewrite: Callable[[Compare], Formula]) -> Formula:
    """Replace every comparison by ``rewrite(comparison)``."""
    if isinstance(f, Compare):
        return rewrite(f)
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, And):
        return And(tuple(map_comparisons(p, rewrite) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(map_comparisons(p, rewrite) for p in f.parts))
    if isinstance(f, Not):
        return Not(map_comparisons(f.body, rewrite))
    return type(f)(f.var, f.kind, map_comparisons(f.body, rewrite))


def granularity(f: Formula) -> int:
    return math.lcm(1, *(t.granularity for t in weight_terms(f)))


# ============================================================================
# NEGATION NORMAL FORM
# ============================================================================


def negation_normalize(f: Formula) -> Formula:
    """Push negations to the atoms; negated comparisons flip their operator."""

    def push(node: Formula, negate: bool) -> Formula:
        if isinstance(node, Not):
            return push(node.body, not negate)
        if isinstance(node, Truth):
            return Truth(node.value != negate)
        if isinstance(node, Compare):
            return Compare(node.op.negated, node.left, node.right) if negate else node
        if isinstance(node, ATOMS):
            return Not(node) if negate else node
        if isinstance(node, And):
            parts = tuple(push(p, negate) for p in node.parts)
            return Or(parts) if negate else And(parts)
        if isinstance(node, Or):
            parts = tuple(push(p, negate) for p in node.parts)
            return And(parts) if negate else Or(parts)
        if isinstance(node, Exists):
            body = push(node.body, negate)
            quantifier = ForAll if negate else Exists
            return quantifier(node.var, node.kind, body)
        body = push(node.body, negate)
        return Exists(node.var, node.kind, body) if negate else ForAll(node.var, node.kind, body)

    return push(f, False)


def is_negation_normal(f: Formula) -> bool:
    return all(
        not isinstance(n, Not) or (isinstance(n.body, ATOMS) and not isinstance(n.body, Compare))
        for n in subformulas(f)
    )


# ============================================================================
# BOXED FRAGMENT
# ============================================================================


@dataclass(frozen=True)
class Block:
    """
    ``forall universal: body`` where every weight term but at most one
    (``universal_term``) mentions only the block's free variables.
    """
    universal: tuple[tuple[str, VarKind], ...]
    body: Formula
    free: frozenset[str]
    existential_terms: tuple[WeightTerm, ...]
    universal_comparison: Compare | None = None
    universal_on_left: bool = True

    @property
    def universal_term(self) -> WeightTerm | None:
        if self.universal_comparison is None:
            return None
        c = self.universal_comparison
        return c.left if self.universal_on_left else c.right

    @property
    def bound_term(self) -> WeightTerm | None:
        """The other side of the universal comparison."""
        if self.universal_comparison is None:
            return None
        c = self.universal_comparison
        return c.right if self.universal_on_left else c.left

    @property
    def formula(self) -> Formula:
        result = self.body
        for name, kind in reversed(self.universal):
            result = ForAll(name, kind, result)
        return result


@dataclass(frozen=True)
class BlockConj:
    parts: tuple["BlockDecomposition", ...]


@dataclass(frozen=True)
class BlockDisj:
    parts: tuple["BlockDecomposition", ...]


@dataclass(frozen=True)
class BlockExists:
    var: str
    kind: VarKind
    body: "BlockDecomposition"


BlockDecomposition = TypingUnion[Block, BlockConj, BlockDisj, BlockExists]


def _make_block(f: Formula) -> Block:
    universal: list[tuple[str, VarKind]] = []
    body = f
    while isinstance(body, ForAll):
        universal.append((body.var, body.kind))
        body = body.body
    ys = {name for name, _ in universal}
    free = free_variables(f)
    inner = set(quantified_variables(body))

    existential: list[WeightTerm] = []
    exceptional: Compare | None = None
    on_left = True
    for c in comparisons(body):
        for side, term in ((True, c.left), (False, c.right)):
            if not term.is_nonnegative:
                raise NotBoxedError(
                    "block contains a negative weight term", serialize_formula(c),
                    reason="negative-term",
                )
            if term.variables & inner:
                raise NotBoxedError(
                    "weight term mentions a variable quantified inside the block",
                    serialize_formula(c),
                    reason="inner-variable",
                )
            if not term.variables & ys:
                existential.append(term)
                continue
            if exceptional is not None:
                raise NotBoxedError(
                    "more than one weight term mentions universally quantified variables",
                    serialize_formula(f),
                    reason="two-universal-terms",
                )
            exceptional, on_left = c, side
    return Block(
        universal=tuple(universal),
        body=body,
        free=free,
        existential_terms=tuple(dict.fromkeys(existential)),
        universal_comparison=exceptional,
        universal_on_left=on_left,
    )


def check_boxed(f: Formula) -> BlockDecomposition:
    """Decompose a negation-normal formula into blocks joined by and/or/exists."""
    if not is_negation_normal(f):
        raise NotBoxedError(
            "formula is not in negation normal form", serialize_formula(f), reason="not-normalized"
        )
    if isinstance(f, And):
        return BlockConj(tuple(check_boxed(p) for p in f.parts))
    if isinstance(f, Or):
        return BlockDisj(tuple(check_boxed(p) for p in f.parts))
    if isinstance(f, Exists):
        return BlockExists(f.var, f.kind, check_boxed(f.body))
    return _make_block(f)


def violation_persists(body: Formula, anchored: frozenset[str]) -> bool:
    """
    Whether a quantifier-free block body that fails on a partial tuple
    fails on every extension of it.

    ``anchored`` are the element variables already placed in the subgraph.
    Membership, equality and colors of anchored variables never change
    once the subgraph is fixed; adjacency only grows, so it may appear
    negated only. Comparisons are decided separately for every verdict.
    """

    def walk(node: Formula, positive: bool) -> bool:
        if isinstance(node, (Truth, Compare)):
            return True
        if isinstance(node, In):
            return node.element in anchored
        if isinstance(node, Equals):
            return node.left in anchored or node.right in anchored
        if isinstance(node, HasColor):
            return node.var in anchored
        if isinstance(node, Adjacent):
            return not positive
        if isinstance(node, (And, Or)):
            return all(walk(p, positive) for p in node.parts)
        if isinstance(node, Not):
            return walk(node.body, not positive)
        return False

    return walk(body, True)


def blocks(d: BlockDecomposition) -> list[Block]:
    if isinstance(d, Block):
        return [d]
    if isinstance(d, BlockExists):
        return blocks(d.body)
    return [b for part in d.parts for b in blocks(part)]


def strip_existentials(f: Formula) -> tuple[Formula, tuple[tuple[str, VarKind], ...]]:
    """
    Turn existentials outside of blocks into free variables.

    Variables are assumed renamed apart, so ``f(W)`` holds iff ``f'(A, W)``
    holds for some ``A``.
    """
    stripped: list[tuple[str, VarKind]] = []

    def walk(node: Formula) -> Formula:
        if isinstance(node, And):
            return And(tuple(walk(p) for p in node.parts))
        if isinstance(node, Or):
            return Or(tuple(walk(p) for p in node.parts))
        if isinstance(node, Exists):
            stripped.append((node.var, node.kind))
            return walk(node.body)
        return node

    check_boxed(f)
    return walk(f), tuple(stripped)


# ============================================================================
# LOOSENING, TIGHTENING, STRICTNESS
# ============================================================================


def _scale(f: Formula, alpha: Fraction, loosen: bool) -> Formula:
    alpha = Fraction(alpha)
    if alpha < 1:
        raise OutOfRangeError(f"scaling factor must be at least 1, got {alpha}")
    if alpha == 1:
        return f

    def rewrite(c: Compare) -> Compare:
        small, large = (1 / alpha, alpha) if loosen else (alpha, 1 / alpha)
        if c.op.is_upper:
            return Compare(c.op, c.left.scaled(small), c.right.scaled(large))
        return Compare(c.op, c.left.scaled(large), c.right.scaled(small))

    return map_comparisons(f, rewrite)


def loosen(f: Formula, alpha: Fraction) -> Formula:
    """``t <= t'`` becomes ``t/alpha <= alpha t'`` (and dually for ``>=``)."""
    return _scale(f, alpha, loosen=True)


def tighten(f: Formula, alpha: Fraction) -> Formula:
    """``t <= t'`` becomes ``alpha t <= t'/alpha`` (and dually for ``>=``)."""
    return _scale(f, alpha, loosen=False)


def rescale_epsilon(epsilon: Fraction) -> Fraction:
    """``epsilon/3``: with it, ``(1+e/3)^2 <= 1+e`` and ``1/(1+e/3)^2 >= 1-e``."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= Fraction(1, 2):
        raise OutOfRangeError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    return epsilon / 3


def snap_epsilon(epsilon: Fraction) -> tuple[int, Fraction]:
    """Largest ``3/b <= epsilon`` with ``b`` natural; returns ``(b, 3/b)``."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= Fraction(1, 2):
        raise OutOfRangeError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    b = math.ceil(3 / epsilon)
    return b, Fraction(3, b)


def _shift_factor(epsilon: Fraction) -> Fraction:
    b = Fraction(3) / Fraction(epsilon)
    if b.denominator != 1:
        raise OutOfRangeError(f"3/epsilon must be natural, got {b}")
    return 1 + 1 / b


def shift_constraint_minus(f: Formula, epsilon: Fraction) -> Formula:
    """Conservative side: every comparison tightened by ``1 + epsilon/3``."""
    return tighten(f, _shift_factor(epsilon))


def shift_constraint_plus(f: Formula, epsilon: Fraction) -> Formula:
    """Eager side: every comparison loosened by ``1 + epsilon/3``."""
    return loosen(f, _shift_factor(epsilon))


def weaken_strict(f: Formula, gamma: int | None = None) -> Formula:
    """Rewrite ``p < q`` as ``p + 1/gamma <= q``; exact when all values are ``gamma``-granular."""
    step = Fraction(1, gamma or granularity(f))

    def rewrite(c: Compare) -> Compare:
        if c.op is Op.LT:
            return Compare(Op.LE, c.left.shifted(step), c.right)
        if c.op is Op.GT:
            return Compare(Op.GE, c.left, c.right.shifted(step))
        return c

    return map_comparisons(f, rewrite)


def substitute(f: Formula, target: Compare, value: bool) -> Formula:
    """``f`` with the comparison ``target`` replaced by a truth constant."""
    return map_comparisons(f, lambda c: Truth(value) if c == target else c)


def normalized_query(query: Query) -> Query:
    return Query(query.free, negation_normalize(query.constraint), query.target)


__all__ = [
    "Block",
    "BlockConj",
    "BlockDecomposition",
    "BlockDisj",
    "BlockExists",
    "blocks",
    "check_boxed",
    "comparisons",
    "conjunction",
    "disjunction",
    "free_variables",
    "granularity",
    "level_kinds",
    "loosen",
    "map_comparisons",
    "negation_normalize",
    "quantifier_rank",
    "rescale_epsilon",
    "shift_constraint_minus",
    "shift_constraint_plus",
    "snap_epsilon",
    "strip_existentials",
    "substitute",
    "tighten",
    "violation_persists",
    "weaken_strict",
    "weight_terms",
]
