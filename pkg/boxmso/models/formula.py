"""CMSO formulas with weight-term comparisons, and optimization queries."""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union as TypingUnion


# ============================================================================
# ENUMS
# ============================================================================


class VarKind(str, Enum):
    """Sort of a variable."""
    VERTEX = "vertex"
    SET = "set"
    EDGE = "edge"
    EDGE_SET = "edge-set"

    @property
    def is_set(self) -> bool:
        return self in (VarKind.SET, VarKind.EDGE_SET)

    @property
    def is_edge(self) -> bool:
        return self in (VarKind.EDGE, VarKind.EDGE_SET)


class Op(str, Enum):
    """Comparison operator of a weight comparison."""
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"

    @property
    def negated(self) -> "Op":
        return {Op.LE: Op.GT, Op.LT: Op.GE, Op.GE: Op.LT, Op.GT: Op.LE}[self]

    @property
    def is_strict(self) -> bool:
        return self in (Op.LT, Op.GT)

    @property
    def is_upper(self) -> bool:
        """True for ``<=`` and ``<`` (left side bounded from above)."""
        return self in (Op.LE, Op.LT)

    def holds(self, left: Fraction, right: Fraction) -> bool:
        if self is Op.LE:
            return left <= right
        if self is Op.LT:
            return left < right
        if self is Op.GE:
            return left >= right
        return left > right


# ============================================================================
# WEIGHT TERMS
# ============================================================================

TermKey = tuple[str, str]  # (weight symbol, variable)


@dataclass(frozen=True)
class WeightTerm:
    """
    ``constant + sum(coefficient * weight(variable))``.

    Coefficients are exact rationals; entries are kept sorted by key with
    zero coefficients dropped, so equal terms compare equal.
    """
    constant: Fraction = Fraction(0)
    coefficients: tuple[tuple[TermKey, Fraction], ...] = ()

    @classmethod
    def of(cls, constant=0, entries: Mapping[TermKey, Fraction] | None = None) -> "WeightTerm":
        merged: dict[TermKey, Fraction] = {}
        for key, value in (entries or {}).items():
            merged[key] = merged.get(key, Fraction(0)) + Fraction(value)
        items = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        return cls(constant=Fraction(constant), coefficients=items)

    @classmethod
    def constant_term(cls, value) -> "WeightTerm":
        return cls(constant=Fraction(value))

    @property
    def entries(self) -> dict[TermKey, Fraction]:
        return dict(self.coefficients)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(var for (_, var), _ in self.coefficients)

    @property
    def weight_symbols(self) -> frozenset[str]:
        return frozenset(w for (w, _), _ in self.coefficients)

    @property
    def granularity(self) -> int:
        dens = [self.constant.denominator] + [c.denominator for _, c in self.coefficients]
        return math.lcm(*dens)

    @property
    def is_nonnegative(self) -> bool:
        return self.constant >= 0 and all(c >= 0 for _, c in self.coefficients)

    @property
    def is_integral(self) -> bool:
        return self.granularity == 1

    @property
    def is_natural(self) -> bool:
        return self.is_integral and self.is_nonnegative

    @property
    def linear(self) -> "WeightTerm":
        return WeightTerm(constant=Fraction(0), coefficients=self.coefficients)

    @property
    def is_constant(self) -> bool:
        return not self.coefficients

    def scaled(self, factor: Fraction) -> "WeightTerm":
        return WeightTerm.of(self.constant * factor, {k: v * factor for k, v in self.coefficients})

    def shifted(self, amount: Fraction) -> "WeightTerm":
        return WeightTerm(constant=self.constant + amount, coefficients=self.coefficients)

    def renamed(self, renaming: Mapping[str, str]) -> "WeightTerm":
        return WeightTerm.of(
            self.constant, {(w, renaming.get(x, x)): c for (w, x), c in self.coefficients}
        )

    def evaluate(self, accumulated: Callable[[str, str], int]) -> Fraction:
        """Value given ``accumulated(weight, variable)``."""
        total = self.constant
        for (weight, var), coefficient in self.coefficients:
            total += coefficient * accumulated(weight, var)
        return total


# ============================================================================
# FORMULAS
# ============================================================================


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class In:
    """``element in collection`` (vertex in vertex set, or edge in edge set)."""
    element: str
    collection: str


@dataclass(frozen=True)
class Equals:
    left: str
    right: str


@dataclass(frozen=True)
class Adjacent:
    left: str
    right: str


@dataclass(frozen=True)
class HasColor:
    """``C(x)``; on a set variable: the set meets ``C``."""
    color: str
    var: str


@dataclass(frozen=True)
class Within:
    """The set (or vertex) lies inside color ``C``."""
    color: str
    var: str


@dataclass(frozen=True)
class Card:
    """``|X| = residue (mod modulus)``."""
    residue: int
    modulus: int
    var: str


@dataclass(frozen=True)
class Single:
    """``|X| = 1``."""
    var: str


@dataclass(frozen=True)
class Incident:
    """``inc(v, e)``: vertex ``v`` is an endpoint of edge ``e``."""
    vertex: str
    edge: str


@dataclass(frozen=True)
class Compare:
    op: Op
    left: WeightTerm
    right: WeightTerm


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    kind: VarKind
    body: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: str
    kind: VarKind
    body: "Formula"


Atom = TypingUnion[Truth, In, Equals, Adjacent, HasColor, Within, Card, Single, Incident, Compare]
Formula = TypingUnion[Atom, And, Or, Not, Exists, ForAll]

ATOMS = (Truth, In, Equals, Adjacent, HasColor, Within, Card, Single, Incident, Compare)
QUANTIFIERS = (Exists, ForAll)

TRUE = Truth(True)
FALSE = Truth(False)


def conjunction(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for part in parts:
        flat.extend(part.parts if isinstance(part, And) else (part,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disjunction(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for part in parts:
        flat.extend(part.parts if isinstance(part, Or) else (part,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


@dataclass(frozen=True)
class Query:
    """Maximize ``target`` over assignments of ``free`` satisfying ``constraint``."""
    free: tuple[tuple[str, VarKind], ...]
    constraint: Formula
    target: WeightTerm

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.free)

    @property
    def kinds(self) -> dict[str, VarKind]:
        return dict(self.free)
