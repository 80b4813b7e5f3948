"""Witness tables over a k-expression: the best tuple for every rounded record, bottom-up."""

import itertools
import logging
import math
from collections import defaultdict
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction

from boxmso.core.budget import EnumerationBudget
from boxmso.core.config import settings
from boxmso.core.errors import OutOfRangeError, RangeTooSmallError
from boxmso.core.events import Stopwatch, TraceRecorder
from boxmso.engine.expressions import depth as expression_depth
from boxmso.engine.expressions import fold, node_action, tag_leaves
from boxmso.engine.qtypes import QType
from boxmso.engine.rounding import GranularRational, RoundedSet, rounded_set
from boxmso.engine.tables import BlockSlot, TableFormula, TableParams
from boxmso.models.expression import Action, CwExpression, Leaf
from boxmso.models.formula import WeightTerm
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

# (type, rounded maximum, rounded minimum) of the universal term per realized type
SectionRecord = tuple[tuple[QType, int | None, int | None], ...]
Tuple = tuple[frozenset[int], ...]
Doomed = Callable[[tuple[SectionRecord, ...]], bool]


@dataclass(frozen=True)
class Record:
    """
    What the table remembers about a tuple restricted to a subgraph.

    ``sums`` are rounded-up numerators of the existential terms, ``sizes``
    the capped sizes of element variables, ``sections`` one pooled section
    record per block.
    """
    sums: tuple[int, ...]
    sizes: tuple[int, ...]
    sections: tuple[int, ...]


@dataclass
class Entry:
    value: int
    witness: Tuple
    _order: tuple | None = field(default=None, repr=False)

    @property
    def order(self) -> tuple:
        if self._order is None:
            self._order = tuple(tuple(sorted(s)) for s in self.witness)
        return self._order

    def beats(self, other: "Entry") -> bool:
        return self.value > other.value or (
            self.value == other.value and self.order < other.order
        )


Table = dict[Record, Entry]


def _offer(table: Table, record: Record, value: int, witness: Tuple) -> None:
    current = table.get(record)
    candidate = Entry(value, witness)
    if current is None or candidate.beats(current):
        table[record] = candidate


class SectionPool:
    """Interned section records; a record holds indices into the pool."""

    def __init__(self) -> None:
        self._records: list[SectionRecord] = []
        self._ids: dict[SectionRecord, int] = {}
        self._covers: dict[tuple[int, int], bool] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, index: int) -> SectionRecord:
        return self._records[index]

    def intern(self, section: SectionRecord) -> int:
        index = self._ids.get(section)
        if index is None:
            index = len(self._records)
            self._ids[section] = index
            self._records.append(section)
        return index

    def covers(self, small: int, large: int) -> bool:
        """
        Every type of ``small`` is realized in ``large`` too, with a universal
        term range no wider than there.
        """
        if small == large:
            return True
        cached = self._covers.get((small, large))
        if cached is None:
            ranges = {t: (hi, lo) for t, hi, lo in self._records[large]}
            cached = True
            for t, hi, lo in self._records[small]:
                other = ranges.get(t)
                if other is None or (hi is not None and (hi > other[0] or lo < other[1])):
                    cached = False
                    break
            self._covers[(small, large)] = cached
        return cached


# ============================================================================
# WITNESS MAP
# ============================================================================


@dataclass
class WitnessMap:
    """The root table together with the parameters needed to read it."""
    params: TableParams
    grid: RoundedSet
    slack: Fraction
    depth: int
    b: int
    entries: Table
    pool: SectionPool = field(default_factory=SectionPool)
    vertex_positions: tuple[int, ...] = ()
    states: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def items(self) -> Iterator[tuple[Record, Entry]]:
        return iter(self.entries.items())

    def section(self, record: Record, index: int) -> SectionRecord:
        return self.pool[record.sections[index]]

    def complete(self, record: Record) -> bool:
        """Every element variable holds exactly one vertex."""
        return all(s == 1 for s in record.sizes)

    def upper(self, numerator: int) -> Fraction:
        return Fraction(numerator, self.grid.granularity)

    def lower(self, numerator: int) -> Fraction:
        """Smallest true value a rounded numerator can stand for."""
        return Fraction(numerator, self.grid.granularity) / self.slack

    def compatible(self, record: Record, omega: TableFormula) -> bool:
        """The rounded record is consistent with every bound of ``omega``."""
        self.params.check(omega)
        for numerator, bounds in zip(record.sums, omega.existential):
            if self.upper(numerator) < bounds.ge:
                return False
            if bounds.le is not None and self.lower(numerator) > bounds.le:
                return False
        for index, (slot, section) in enumerate(zip(self.params.slots, omega.universal)):
            for t, largest, smallest in self.section(record, index):
                if not slot.realizable(t):
                    continue
                bounds = section.bounds(t)
                if bounds is None:
                    return False
                if slot.term is None:
                    continue
                if bounds.le is not None and self.lower(largest) > bounds.le:
                    return False
                if self.upper(smallest) < bounds.ge:
                    return False
        return True

    def best(self, accept: Callable[[Record], bool]) -> Entry | None:
        """Best entry over complete records passing ``accept``; ties go to the smaller tuple."""
        chosen: Entry | None = None
        for record, entry in self.entries.items():
            if not self.complete(record) or not accept(record):
                continue
            if chosen is None or entry.beats(chosen):
                chosen = entry
        return chosen

    def lookup(self, omega: TableFormula) -> Entry | None:
        """Best witness among the records consistent with ``omega``."""
        return self.best(lambda record: self.compatible(record, omega))


# ============================================================================
# CONSTRUCTION
# ============================================================================


class _Builder:
    def __init__(
        self,
        g: Graph,
        params: TableParams,
        target: WeightTerm,
        grid: RoundedSet,
        budget: EnumerationBudget,
        trace: TraceRecorder | None,
        doomed: Doomed | None = None,
    ) -> None:
        self.g = g
        self.params = params
        self.target = target.linear
        self.grid = grid
        self.gamma = grid.granularity
        self.budget = budget
        self.trace = trace
        self.doomed = doomed
        self.names = params.names
        self.vertex_positions = tuple(
            i for i, (_, kind) in enumerate(params.free) if not kind.is_set
        )
        self.pool = SectionPool()
        self._doomed_memo: dict[tuple[int, ...], bool] = {}
        self._compose_memo: dict[tuple[int, int, int], int] = {}
        self._transform_memo: dict[tuple[int, int, Action], int] = {}
        self.largest = 0
        self.dropped = 0

    # ------------------------------------------------------------------ values

    def _numerator(self, term: WeightTerm, v: int, chosen: dict[str, int]) -> int:
        total = Fraction(0)
        for (weight, var), coefficient in term.coefficients:
            if chosen.get(var):
                total += coefficient * self.g.weight(weight, v)
        return GranularRational.of(total, self.gamma).numerator

    def _round(self, numerator: int) -> int:
        if numerator > self.grid.top:
            raise RangeTooSmallError(
                f"term value {Fraction(numerator, self.gamma)} exceeds the range limit "
                f"{self.grid.limit}",
                limit=str(self.grid.limit),
            )
        return self.grid.round_up_numerator(numerator)

    def _finish(self, found: dict[QType, tuple[int | None, int | None]]) -> int:
        rounded = []
        for t, (hi, lo) in sorted(found.items()):
            if hi is None:
                rounded.append((t, None, None))
            else:
                rounded.append((t, self._round(hi), self._round(lo)))
        return self.pool.intern(tuple(rounded))

    @staticmethod
    def _merge(
        found: dict[QType, tuple[int | None, int | None]],
        t: QType,
        hi: int | None,
        lo: int | None,
    ) -> None:
        current = found.get(t)
        if current is None:
            found[t] = (hi, lo)
        elif hi is not None:
            found[t] = (max(current[0], hi), min(current[1], lo))

    def _is_doomed(self, sections: tuple[int, ...]) -> bool:
        if self.doomed is None:
            return False
        verdict = self._doomed_memo.get(sections)
        if verdict is None:
            verdict = self.doomed(tuple(self.pool[i] for i in sections))
            self._doomed_memo[sections] = verdict
        return verdict

    # ------------------------------------------------------------------ leaves

    def _leaf_section(self, slot: BlockSlot, label: int, v: int, bits: tuple[int, ...]) -> int:
        colors = self.g.vertex_colors[v]
        outer = tuple(bits[p] for p in slot.positions)
        chosen = {self.names[p]: bits[p] for p in slot.positions}
        found: dict[QType, tuple[int | None, int | None]] = {}
        for inner in itertools.product((0, 1), repeat=len(slot.universal)):
            t = slot.universe.leaf_type(label, colors, outer + inner)
            value = None
            if slot.term is not None:
                local = {**chosen, **{name: b for (name, _), b in zip(slot.universal, inner)}}
                value = self._numerator(slot.term, v, local)
            self._merge(found, t, value, value)
        return self._finish(found)

    def leaf(self, node: Leaf) -> Table:
        v = node.vertex
        table: Table = {}
        for bits in itertools.product((0, 1), repeat=len(self.names)):
            chosen = dict(zip(self.names, bits))
            sections = tuple(
                self._leaf_section(slot, node.label, v, bits) for slot in self.params.slots
            )
            if self._is_doomed(sections):
                self.dropped += 1
                continue
            record = Record(
                sums=tuple(
                    self._round(self._numerator(term, v, chosen))
                    for term in self.params.existential
                ),
                sizes=tuple(bits[p] for p in self.vertex_positions),
                sections=sections,
            )
            value = int(self.target.evaluate(lambda w, x: self.g.weight(w, v) if chosen[x] else 0))
            witness = tuple(frozenset({v}) if bit else frozenset() for bit in bits)
            _offer(table, record, value, witness)
        return table

    # ------------------------------------------------------------------ union

    def _compose_section(self, index: int, left: int, right: int) -> int:
        memo_key = (index, left, right)
        cached = self._compose_memo.get(memo_key)
        if cached is not None:
            return cached
        universe = self.params.slots[index].universe
        found: dict[QType, tuple[int | None, int | None]] = {}
        for t1, hi1, lo1 in self.pool[left]:
            for t2, hi2, lo2 in self.pool[right]:
                t = universe.compose(t1, t2)
                if hi1 is None:
                    self._merge(found, t, None, None)
                else:
                    self._merge(found, t, hi1 + hi2, lo1 + lo2)
        result = self._finish(found)
        self._compose_memo[memo_key] = result
        return result

    @staticmethod
    def _by_sections(table: Table) -> dict[tuple[int, ...], list[tuple[Record, Entry]]]:
        grouped: dict[tuple[int, ...], list[tuple[Record, Entry]]] = defaultdict(list)
        for record, entry in table.items():
            grouped[record.sections].append((record, entry))
        return grouped

    def union(self, left: Table, right: Table) -> Table:
        self.budget.ensure("table pairs", len(left) * len(right))
        table: Table = {}
        right_groups = self._by_sections(right)
        for s1, rows1 in self._by_sections(left).items():
            for s2, rows2 in right_groups.items():
                sections = tuple(
                    self._compose_section(i, a, b) for i, (a, b) in enumerate(zip(s1, s2))
                )
                if self._is_doomed(sections):
                    self.dropped += len(rows1) * len(rows2)
                    continue
                for r1, e1 in rows1:
                    for r2, e2 in rows2:
                        record = Record(
                            sums=tuple(self._round(a + b) for a, b in zip(r1.sums, r2.sums)),
                            sizes=tuple(min(2, a + b) for a, b in zip(r1.sizes, r2.sizes)),
                            sections=sections,
                        )
                        witness = tuple(a | b for a, b in zip(e1.witness, e2.witness))
                        _offer(table, record, e1.value + e2.value, witness)
        return table

    # ------------------------------------------------------------------ actions

    def _transform_section(self, index: int, section: int, action: Action) -> int:
        memo_key = (index, section, action)
        cached = self._transform_memo.get(memo_key)
        if cached is not None:
            return cached
        universe = self.params.slots[index].universe
        found: dict[QType, tuple[int | None, int | None]] = {}
        for t, hi, lo in self.pool[section]:
            self._merge(found, universe.transform(t, action), hi, lo)
        result = self.pool.intern(tuple((t, hi, lo) for t, (hi, lo) in sorted(found.items())))
        self._transform_memo[memo_key] = result
        return result

    def transform(self, table: Table, action: Action) -> Table:
        if action.is_identity or not self.params.slots:
            return table
        result: Table = {}
        for record, entry in table.items():
            sections = tuple(
                self._transform_section(i, s, action) for i, s in enumerate(record.sections)
            )
            if self._is_doomed(sections):
                self.dropped += 1
                continue
            _offer(result, Record(record.sums, record.sizes, sections), entry.value, entry.witness)
        return result

    # ------------------------------------------------------------------ pruning

    def _dominates(self, strong: Record, weak: Record) -> bool:
        return all(self.pool.covers(a, b) for a, b in zip(strong.sections, weak.sections))

    def prune(self, table: Table) -> Table:
        """
        Drop every record another record of equal sums and sizes dominates:
        no more realized types, no wider universal ranges, no worse entry.
        """
        if not self.params.slots or len(table) < 2:
            return table
        groups: dict[tuple, list[Record]] = defaultdict(list)
        for record in table:
            groups[(record.sums, record.sizes)].append(record)
        if len(groups) == len(table):
            return table
        kept: Table = {}
        for records in groups.values():
            records.sort(key=lambda r: (-table[r].value, table[r].order))
            survivors: list[Record] = []
            for record in records:
                if any(self._dominates(s, record) for s in survivors):
                    continue
                survivors.append(record)
            for record in survivors:
                kept[record] = table[record]
        self.dropped += len(table) - len(kept)
        return kept

    # ------------------------------------------------------------------ driver

    def combine(self, node: CwExpression, sub: list[Table]) -> Table:
        watch = Stopwatch()
        if isinstance(node, Leaf):
            table = self.leaf(node)
        elif len(sub) == 2:
            table = self.transform(self.union(sub[0], sub[1]), node_action(node))
        else:
            table = self.transform(sub[0], node_action(node))
        table = self.prune(table)
        self.budget.charge("table states", len(table))
        self.largest = max(self.largest, len(table))
        kind = type(node).__name__.lower()
        logger.debug(f"{kind} node: {len(table)} records in {watch.elapsed_ms} ms")
        if self.trace is not None:
            self.trace.record("node", kind=kind, states=len(table), elapsed_ms=watch.elapsed_ms)
        return table


def slack_for(b: int, depth: int) -> Fraction:
    """``(1 + 1/b)^depth``: how far a rounded record may overestimate."""
    return (1 + Fraction(1, b)) ** depth


def compute_witnesses(
    e: CwExpression,
    g: Graph,
    params: TableParams,
    target: WeightTerm,
    b: int,
    depth: int | None = None,
    budget: int | None = None,
    trace: TraceRecorder | None = None,
    doomed: Doomed | None = None,
) -> WitnessMap:
    """
    Best tuple for every rounded record of the graph ``e`` builds.

    Values are rounded up to the grid at accuracy ``1 + 1/b`` after every
    leaf and every union, so a record overestimates each term by at most
    ``(1 + 1/b)^depth``. ``depth`` may exceed the true depth.

    ``doomed`` marks section combinations no larger graph can accept; their
    records are dropped as soon as they appear.
    """
    if b < 1:
        raise OutOfRangeError(f"b must be positive, got {b}")
    tagged = tag_leaves(e)
    true_depth = expression_depth(tagged)
    d = max(depth or true_depth, true_depth)
    slack = slack_for(b, d)
    gamma = params.granularity
    top = math.ceil(Fraction(params.limit) * gamma * slack)
    grid = rounded_set(b, Fraction(top, gamma), gamma)
    if grid.dense:
        slack = Fraction(1)
    logger.info(
        f"witness tables: depth {d}, b {b}, limit {params.limit}, granularity {gamma}, "
        f"grid size {len(grid)}{' (dense)' if grid.dense else ''}"
    )
    builder = _Builder(
        g, params, target, grid, EnumerationBudget(budget or settings.budget), trace, doomed
    )
    entries = fold(tagged, builder.combine)
    logger.info(
        f"witness tables done: {builder.budget.spent('table states')} states stored, "
        f"{builder.dropped} dropped, {len(builder.pool)} section records"
    )
    return WitnessMap(
        params=params,
        grid=grid,
        slack=slack,
        depth=d,
        b=b,
        entries=entries,
        pool=builder.pool,
        vertex_positions=builder.vertex_positions,
        states=builder.largest,
    )


__all__ = ["Entry", "Record", "SectionPool", "WitnessMap", "compute_witnesses", "slack_for"]
