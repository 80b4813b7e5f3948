"""
Table formulas and their composition under disjoint union.

A table formula bounds every existential weight term from both sides and,
for every block, bounds the block's universal term per type of the
universally quantified tuple (or forbids that type altogether). An upper
bound of ``None`` means unbounded.
"""

import itertools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any

import orjson

from boxmso.core.errors import ContextMismatchError
from boxmso.engine.oracle import domain, term_value
from boxmso.engine.qtypes import QType, TypeUniverse
from boxmso.engine.queries import format_rational
from boxmso.engine.rounding import RoundedSet
from boxmso.models.formula import VarKind, WeightTerm
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

Threshold = Fraction | None


def _add(a: Threshold, b: Threshold) -> Threshold:
    return None if a is None or b is None else a + b


def _at_most(a: Threshold, b: Threshold) -> bool:
    """``a <= b`` where ``None`` stands for infinity."""
    if b is None:
        return True
    return a is not None and a <= b


def _smaller(a: Threshold, b: Threshold) -> Threshold:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _larger(a: Threshold, b: Threshold) -> Threshold:
    if a is None or b is None:
        return None
    return max(a, b)


# ============================================================================
# FORMULAS
# ============================================================================


@dataclass(frozen=True)
class Bounds:
    """``ge <= value <= le``."""
    le: Threshold = None
    ge: Fraction = Fraction(0)

    def admits(self, value: Fraction, factor: Fraction = Fraction(1)) -> bool:
        """
        Check ``value`` against the bounds scaled by ``factor``.

        ``factor > 1`` loosens (undersatisfaction), ``factor < 1`` tightens
        (oversatisfaction at ``1/factor``).
        """
        if self.le is not None and value / factor > factor * self.le:
            return False
        return value * factor >= self.ge / factor

    def conjoin(self, other: "Bounds") -> "Bounds":
        return Bounds(_smaller(self.le, other.le), max(self.ge, other.ge))

    def to_list(self) -> list[str | None]:
        le = None if self.le is None else format_rational(self.le)
        return [le, format_rational(self.ge)]


VACUOUS = Bounds()


@dataclass(frozen=True)
class Section:
    """Per-type bounds of one block; ``None`` forbids the type."""
    entries: tuple[tuple[QType, Bounds | None], ...] = ()
    default: Bounds | None = None

    @classmethod
    def of(cls, entries: dict[QType, Bounds | None], default: Bounds | None = None) -> "Section":
        return cls(tuple(sorted(entries.items())), default)

    @cached_property
    def _index(self) -> dict[QType, Bounds | None]:
        return dict(self.entries)

    def bounds(self, t: QType) -> Bounds | None:
        return self._index.get(t, self.default)

    def options(self) -> list[Bounds | None]:
        return [b for _, b in self.entries] + [self.default]


@dataclass(frozen=True)
class TableFormula:
    existential: tuple[Bounds, ...]
    universal: tuple[Section, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "existential": [b.to_list() for b in self.existential],
            "universal": [
                {
                    "entries": [[t.key, None if b is None else b.to_list()] for t, b in s.entries],
                    "default": None if s.default is None else s.default.to_list(),
                }
                for s in self.universal
            ],
        }


def dump_table(omega: TableFormula) -> str:
    """Sorted JSON listing of every threshold, for golden comparisons."""
    return orjson.dumps(omega.to_dict(), option=orjson.OPT_SORT_KEYS).decode()


# ============================================================================
# PARAMETERS
# ============================================================================


@dataclass(frozen=True)
class BlockSlot:
    """
    One block as seen by the tables: where its free variables sit in the
    global tuple, its universally quantified variables and the linear part
    of its universal term (if any).
    """
    universe: TypeUniverse = field(compare=False, hash=False)
    positions: tuple[int, ...]
    universal: tuple[tuple[str, VarKind], ...] = ()
    term: WeightTerm | None = None
    vertex_positions: tuple[int, ...] = ()

    @property
    def width(self) -> int:
        return len(self.positions) + len(self.universal)

    def realizable(self, t: QType) -> bool:
        """Whether every element variable of the type holds exactly one vertex."""
        return all(self.universe.size(t, p) == 1 for p in self.vertex_positions)


@dataclass(frozen=True)
class TableParams:
    free: tuple[tuple[str, VarKind], ...]
    existential: tuple[WeightTerm, ...] = ()
    slots: tuple[BlockSlot, ...] = ()
    granularity: int = 1
    limit: Fraction = Fraction(1)
    b: int | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.free)

    def vacuous(self) -> TableFormula:
        return TableFormula(
            tuple(VACUOUS for _ in self.existential),
            tuple(Section(default=VACUOUS) for _ in self.slots),
        )

    def check(self, *formulas: TableFormula) -> None:
        for omega in formulas:
            if len(omega.existential) != len(self.existential) or len(omega.universal) != len(
                self.slots
            ):
                raise ContextMismatchError("table formula does not fit the table parameters")


# ============================================================================
# SATISFACTION
# ============================================================================


def satisfies(
    g: Graph,
    sets: Sequence[frozenset[int]],
    omega: TableFormula,
    params: TableParams,
    factor: Fraction = Fraction(1),
) -> bool:
    """Brute-force truth of ``omega`` on ``g`` with the free tuple set to ``sets``."""
    params.check(omega)
    assignment = dict(zip(params.names, sets))
    for term, bounds in zip(params.existential, omega.existential):
        if not bounds.admits(term_value(g, term, assignment), factor):
            return False
    for slot, section in zip(params.slots, omega.universal):
        names = [name for name, _ in slot.universal]
        outer = [sets[p] for p in slot.positions]
        for choice in itertools.product(*(domain(g, kind) for _, kind in slot.universal)):
            t = slot.universe.type_of(g, outer + list(choice))
            bounds = section.bounds(t)
            if bounds is None:
                return False
            if slot.term is None:
                continue
            value = term_value(g, slot.term, {**assignment, **dict(zip(names, choice))})
            if not bounds.admits(value, factor):
                return False
    return True


def derived_bounds(section: Section, outside: Sequence[QType]) -> Bounds | None:
    """
    Thresholds of ``section`` for the formula satisfied by every type except
    ``outside``: the tightest bounds over the excluded types, ``None`` when
    one of them is forbidden.
    """
    le: Threshold = None
    ge = Fraction(0)
    for t in outside:
        bounds = section.bounds(t)
        if bounds is None:
            return None
        le = _smaller(le, bounds.le)
        ge = max(ge, bounds.ge)
    return Bounds(le, ge)


# ============================================================================
# COMPOSITION
# ============================================================================


def fv_plus_member(
    omega: TableFormula, first: TableFormula, second: TableFormula, params: TableParams
) -> bool:
    """Whether ``first`` on one side and ``second`` on the other force ``omega`` on the union."""
    params.check(omega, first, second)
    for bounds, a, b in zip(omega.existential, first.existential, second.existential):
        if not _at_most(_add(a.le, b.le), bounds.le) or a.ge + b.ge < bounds.ge:
            return False
    for slot, section, left, right in zip(
        params.slots, omega.universal, first.universal, second.universal
    ):
        pool = slot.universe.discovered(slot.width)
        for t1 in pool:
            a = left.bounds(t1)
            if a is None:
                continue
            for t2 in pool:
                b = right.bounds(t2)
                if b is None:
                    continue
                wanted = section.bounds(slot.universe.compose(t1, t2))
                if wanted is None:
                    return False
                if slot.term is None:
                    continue
                if not _at_most(_add(a.le, b.le), wanted.le) or a.ge + b.ge < wanted.ge:
                    return False
    return True


def cutoff(
    first: TableFormula, second: TableFormula, omega: TableFormula
) -> tuple[TableFormula, TableFormula]:
    """Cap every child threshold at the matching threshold of ``omega``."""

    def cap(bounds: Bounds | None, le: Threshold, ge: Fraction) -> Bounds | None:
        if bounds is None:
            return None
        return Bounds(_smaller(bounds.le, le), min(bounds.ge, ge))

    def cut(child: TableFormula) -> TableFormula:
        existential = tuple(
            cap(b, top.le, top.ge) for b, top in zip(child.existential, omega.existential)
        )
        universal = []
        for section, top in zip(child.universal, omega.universal):
            allowed = [b for b in top.options() if b is not None]
            le: Threshold = Fraction(0)
            for b in allowed:
                le = _larger(le, b.le)
            ge = max((b.ge for b in allowed), default=Fraction(0))
            universal.append(
                Section(
                    tuple((t, cap(b, le, ge)) for t, b in section.entries),
                    cap(section.default, le, ge),
                )
            )
        return TableFormula(existential, tuple(universal))

    return cut(first), cut(second)


def conjoin(first: TableFormula, second: TableFormula) -> TableFormula:
    """One table formula equivalent to ``first and second``."""
    if len(first.existential) != len(second.existential):
        raise ContextMismatchError("cannot conjoin table formulas of different shapes")

    def meet(a: Bounds | None, b: Bounds | None) -> Bounds | None:
        return None if a is None or b is None else a.conjoin(b)

    universal = []
    for left, right in zip(first.universal, second.universal):
        types = {t for t, _ in left.entries} | {t for t, _ in right.entries}
        universal.append(
            Section.of(
                {t: meet(left.bounds(t), right.bounds(t)) for t in types},
                meet(left.default, right.default),
            )
        )
    existential = tuple(a.conjoin(b) for a, b in zip(first.existential, second.existential))
    return TableFormula(existential, tuple(universal))


def fv_granularity(granularity: int, b: int, s: int) -> int:
    """Granularity of the children of a node whose subtrees have depth ``s``."""
    return granularity * (b * (b + 1)) ** (4 * s + 4)


def approx_fv_pairs(
    omega: TableFormula,
    params: TableParams,
    b: int,
    s: int,
    cut: bool = False,
) -> Iterator[tuple[TableFormula, TableFormula]]:
    """
    Every pair of rounded table formulas that composes to ``omega``.

    Thresholds range over the grid at accuracy ``1 + 1/b`` and the finer
    granularity for child depth ``s``; with ``cut`` only thresholds not
    above ``omega``'s are tried. The enumeration is exhaustive and meant
    for small contexts.
    """
    params.check(omega)
    grid = RoundedSet(1 + Fraction(1, b), params.limit, fv_granularity(params.granularity, b, s))
    values = grid.values

    def split(bounds: Bounds) -> list[tuple[Bounds, Bounds]]:
        if bounds.le is None:
            uppers: list[tuple[Threshold, Threshold]] = [(None, None)]
            uppers += [(x, y) for x in values for y in values]
        else:
            uppers = [(x, y) for x in values for y in values if x + y <= bounds.le]
        cap = bounds.ge if cut else params.limit
        lowers = [(x, y) for x in values for y in values if x <= cap and y <= cap]
        lowers = [(x, y) for x, y in lowers if x + y >= bounds.ge]
        return [
            (Bounds(le1, ge1), Bounds(le2, ge2))
            for (le1, le2), (ge1, ge2) in itertools.product(uppers, lowers)
            if (le1 is None or ge1 <= le1) and (le2 is None or ge2 <= le2)
        ]

    def section_options(slot: BlockSlot) -> list[Section]:
        pool = slot.universe.discovered(slot.width)
        if slot.term is None:
            choices: list[Bounds | None] = [None, VACUOUS]
        else:
            choices = [None] + [
                Bounds(le, ge) for le in [None, *values] for ge in values if _at_most(ge, le)
            ]
        return [
            Section(tuple(zip(pool, picked)))
            for picked in itertools.product(choices, repeat=len(pool))
        ]

    per_term = [split(bounds) for bounds in omega.existential]
    per_slot = [section_options(slot) for slot in params.slots]
    for existential in itertools.product(*per_term):
        first_e = tuple(pair[0] for pair in existential)
        second_e = tuple(pair[1] for pair in existential)
        for left in itertools.product(*per_slot):
            for right in itertools.product(*per_slot):
                first = TableFormula(first_e, tuple(left))
                second = TableFormula(second_e, tuple(right))
                if fv_plus_member(omega, first, second, params):
                    yield first, second


__all__ = [
    "VACUOUS",
    "BlockSlot",
    "Bounds",
    "Section",
    "TableFormula",
    "TableParams",
    "approx_fv_pairs",
    "conjoin",
    "cutoff",
    "derived_bounds",
    "dump_table",
    "fv_granularity",
    "fv_plus_member",
    "satisfies",
]
