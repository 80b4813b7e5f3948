"""
From boxed queries to table lookups, and the two-sided answer built on top.

A query is planned once: existentials outside of blocks become extra free
variables, every block gets a type universe and a slot in the tables, and
every weight term outside the universal comparisons becomes an existential
table term. A root record of the witness tables is accepted when the block
structure can hold on some tuple the record stands for.
"""

import itertools
import logging
import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union as TypingUnion

from boxmso.core.config import Limits, settings
from boxmso.core.errors import InvalidInstanceError, OutOfRangeError
from boxmso.core.events import Stopwatch, TraceRecorder
from boxmso.engine.balance import balance
from boxmso.engine.dp import Entry, Record, SectionRecord, WitnessMap, compute_witnesses
from boxmso.engine.expressions import check_matches, depth, max_label, tag_leaves
from boxmso.engine.generators import expression_for
from boxmso.engine.graphs import term_range_bound
from boxmso.engine.logic import (
    Block,
    BlockConj,
    BlockDecomposition,
    BlockDisj,
    BlockExists,
    check_boxed,
    comparisons,
    granularity,
    normalized_query,
    quantifier_rank,
    rescale_epsilon,
    shift_constraint_minus,
    shift_constraint_plus,
    snap_epsilon,
    strip_existentials,
    violation_persists,
    weaken_strict,
    weight_terms,
)
from boxmso.engine.mso2 import lift_witness, translate_query, uses_edges
from boxmso.engine.qtypes import FactSchema, QType, TypeUniverse, holds
from boxmso.engine.tables import (
    VACUOUS,
    BlockSlot,
    Bounds,
    Section,
    TableFormula,
    TableParams,
    conjoin,
)
from boxmso.models.answer import (
    NEG_INF,
    ApproximateAnswer,
    ExactAnswer,
    HalfAnswer,
    RunStatistics,
    Witness,
)
from boxmso.models.expression import CwExpression
from boxmso.models.formula import Compare, Formula, Op, Query, VarKind, WeightTerm
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)


# ============================================================================
# PLANNING
# ============================================================================


@dataclass(frozen=True)
class Side:
    """One side of a comparison: a constant plus (optionally) an existential table term."""
    constant: Fraction
    index: int | None = None


@dataclass(frozen=True)
class Inequality:
    """``small <= large``, the normal form of a comparison."""
    small: Side
    large: Side


@dataclass
class BlockPlan:
    block: Block
    slot_index: int
    slot: BlockSlot
    env: dict[str, int]
    existential: dict[Compare, Inequality]
    universal_constant: Fraction = Fraction(0)
    universal_upper: bool = True
    other: Side | None = None
    persistent: bool = False
    _holds: dict[tuple, bool] = field(default_factory=dict, repr=False)
    _violated: dict[QType, bool] = field(default_factory=dict, repr=False)

    @property
    def universal_comparison(self) -> Compare | None:
        return self.block.universal_comparison

    def violated(self, t: QType) -> bool:
        """
        The body fails on ``t`` whatever the comparisons decide, with every
        universal element variable already placed.

        On a persistent block such a type keeps failing on every larger graph.
        """
        cached = self._violated.get(t)
        if cached is not None:
            return cached
        universe = self.slot.universe
        placed = all(
            universe.size(t, self.env[name]) == 1
            for name, kind in self.block.universal
            if not kind.is_set
        )
        result = placed
        if placed:
            comps = list(self.existential)
            universal = (False, True) if self.universal_comparison is not None else (False,)
            for picked in itertools.product((False, True), repeat=len(comps)):
                true = frozenset(c for c, on in zip(comps, picked) if on)
                if any(self.body_holds(t, true, u) for u in universal):
                    result = False
                    break
        self._violated[t] = result
        return result

    def body_holds(self, t: QType, true: frozenset[Compare], universal: bool) -> bool:
        """The block body on type ``t`` with the given comparisons decided true."""
        memo_key = (t, true, universal)
        cached = self._holds.get(memo_key)
        if cached is not None:
            return cached
        verdicts = {c: c in true for c in self.existential}
        if self.universal_comparison is not None:
            verdicts[self.universal_comparison] = universal
        result = holds(self.slot.universe, self.block.body, t, self.env, verdicts)
        self._holds[memo_key] = result
        return result


@dataclass(frozen=True)
class PlanAnd:
    parts: tuple["PlanNode", ...]


@dataclass(frozen=True)
class PlanOr:
    parts: tuple["PlanNode", ...]


PlanNode = TypingUnion[BlockPlan, PlanAnd, PlanOr]


@dataclass
class Plan:
    """Everything needed to build the witness tables for one constraint and to read them."""
    constraint: Formula
    free: tuple[tuple[str, VarKind], ...]
    stripped: tuple[tuple[str, VarKind], ...]
    root: PlanNode
    blocks: list[BlockPlan]
    params: TableParams

    @property
    def rank(self) -> int:
        return max((quantifier_rank(b.block.body) for b in self.blocks), default=0)

    @property
    def arity(self) -> int:
        return max((b.slot.width for b in self.blocks), default=0)

    # ------------------------------------------------------------------ acceptance

    def verdicts(self, record: Record, wm: WitnessMap) -> frozenset[Compare]:
        """Comparisons that some tuple behind the record can satisfy."""
        true: set[Compare] = set()
        for plan in self.blocks:
            for c, inequality in plan.existential.items():
                if _low(inequality.small, record, wm) <= _high(inequality.large, record, wm):
                    true.add(c)
        return frozenset(true)

    def _universal_ok(
        self, plan: BlockPlan, largest: int, smallest: int, record: Record, wm: WitnessMap
    ) -> bool:
        if plan.universal_upper:
            return plan.universal_constant + wm.lower(largest) <= _high(plan.other, record, wm)
        return plan.universal_constant + wm.upper(smallest) >= _low(plan.other, record, wm)

    def block_accepts(
        self, plan: BlockPlan, record: Record, wm: WitnessMap, true: frozenset[Compare]
    ) -> bool:
        mine = true & frozenset(plan.existential)
        for t, largest, smallest in wm.section(record, plan.slot_index):
            if not plan.slot.realizable(t):
                continue
            if plan.body_holds(t, mine, False):
                continue
            if plan.universal_comparison is None or not plan.body_holds(t, mine, True):
                return False
            if not self._universal_ok(plan, largest, smallest, record, wm):
                return False
        return True

    def accepts(self, record: Record, wm: WitnessMap) -> bool:
        """
        Whether the record can stand for a satisfying tuple.

        Every tuple satisfying the constraint exactly is accepted, and every
        accepted record only holds tuples satisfying the constraint loosened
        by the map's slack.
        """
        true = self.verdicts(record, wm)

        def walk(node: PlanNode) -> bool:
            if isinstance(node, PlanAnd):
                return all(walk(p) for p in node.parts)
            if isinstance(node, PlanOr):
                return any(walk(p) for p in node.parts)
            return self.block_accepts(node, record, wm, true)

        return walk(self.root)

    def doomed(self, sections: tuple[SectionRecord, ...]) -> bool:
        """No record with these sections can be accepted on any larger graph."""

        def walk(node: PlanNode) -> bool:
            if isinstance(node, PlanAnd):
                return any(walk(p) for p in node.parts)
            if isinstance(node, PlanOr):
                return all(walk(p) for p in node.parts)
            if not node.persistent:
                return False
            return any(node.violated(t) for t, _, _ in sections[node.slot_index])

        return walk(self.root)


def _high(side: Side, record: Record, wm: WitnessMap) -> Fraction:
    if side.index is None:
        return side.constant
    return side.constant + wm.upper(record.sums[side.index])


def _low(side: Side, record: Record, wm: WitnessMap) -> Fraction:
    if side.index is None:
        return side.constant
    return side.constant + wm.lower(record.sums[side.index])


def value_bound(g: Graph, terms: Iterable[WeightTerm]) -> int:
    """Largest value the linear part of any of ``terms`` can take on ``g`` (at least 1)."""
    bound = 1
    for term in terms:
        total = sum(abs(c) * g.total_weight(w) for (w, _), c in term.coefficients)
        bound = max(bound, math.ceil(total))
    return bound


def build_plan(
    constraint: Formula, free: tuple[tuple[str, VarKind], ...], g: Graph
) -> Plan:
    """Plan the witness tables for a negation-normal boxed constraint on ``g``."""
    weakened = weaken_strict(constraint)
    body, stripped = strip_existentials(weakened)
    decomposition = check_boxed(body)
    names = tuple(free) + stripped
    index = {name: i for i, (name, _) in enumerate(names)}
    kinds = dict(names)

    terms: dict[WeightTerm, int] = {}

    def side(term: WeightTerm) -> Side:
        if term.is_constant:
            return Side(term.constant)
        return Side(term.constant, terms.setdefault(term.linear, len(terms)))

    def inequality(c: Compare) -> Inequality:
        if c.op.is_strict:
            raise OutOfRangeError(f"strict comparison {c.op.value} left after weakening")
        if c.op is Op.LE:
            return Inequality(side(c.left), side(c.right))
        return Inequality(side(c.right), side(c.left))

    plans: list[BlockPlan] = []

    def plan_block(block: Block) -> BlockPlan:
        outer = tuple(name for name, _ in names if name in block.free)
        local = outer + tuple(name for name, _ in block.universal)
        local_kinds = {**kinds, **dict(block.universal)}
        env = {name: i for i, name in enumerate(local)}
        vertex_positions = tuple(i for i, name in enumerate(local) if not local_kinds[name].is_set)
        schema = FactSchema.for_formula(block.body, env, sized=vertex_positions)
        universal = block.universal_comparison
        term = block.universal_term.linear if universal is not None else None
        slot = BlockSlot(
            universe=TypeUniverse(schema),
            positions=tuple(index[name] for name in outer),
            universal=block.universal,
            term=term,
            vertex_positions=vertex_positions,
        )
        existential = {c: inequality(c) for c in comparisons(block.body) if c != universal}
        plan = BlockPlan(block, len(plans), slot, env, existential)
        anchored = frozenset(name for name, kind in block.universal if not kind.is_set)
        plan.persistent = violation_persists(block.body, anchored)
        if universal is not None:
            plan.universal_constant = block.universal_term.constant
            plan.universal_upper = universal.op.is_upper == block.universal_on_left
            plan.other = side(block.bound_term)
        plans.append(plan)
        return plan

    def walk(node: BlockDecomposition) -> PlanNode:
        if isinstance(node, BlockConj):
            return PlanAnd(tuple(walk(p) for p in node.parts))
        if isinstance(node, BlockDisj):
            return PlanOr(tuple(walk(p) for p in node.parts))
        if isinstance(node, BlockExists):
            raise InvalidInstanceError("existentials must be stripped before planning")
        return plan_block(node)

    root = walk(decomposition)
    existential = tuple(terms)
    slots = tuple(p.slot for p in plans)
    limit = value_bound(g, existential + tuple(s.term for s in slots if s.term is not None))
    params = TableParams(
        free=names,
        existential=existential,
        slots=slots,
        granularity=granularity(body),
        limit=Fraction(limit),
    )
    logger.debug(
        f"plan: {len(plans)} blocks, {len(existential)} existential terms, "
        f"{len(stripped)} stripped variables, limit {limit}"
    )
    return Plan(weakened, tuple(free), stripped, root, plans, params)


# ============================================================================
# TABLE FORMULAS FROM BLOCKS
# ============================================================================


@dataclass(frozen=True)
class TableAnd:
    parts: tuple["TableExpr", ...]


@dataclass(frozen=True)
class TableOr:
    parts: tuple["TableExpr", ...]


TableExpr = TypingUnion[TableFormula, TableAnd, TableOr]


def _threshold_options(
    inequality: Inequality, values: list[int], gamma: int
) -> list[list[tuple[int, Bounds]]]:
    """
    Ways to certify ``low(small) <= high(large)`` by bounds on single terms.

    Each option is a list of ``(term index, bounds)`` to conjoin; no option
    means the comparison can never be certified.
    """
    small, large = inequality.small, inequality.large
    if small.index is None and large.index is None:
        return [[]] if small.constant <= large.constant else []
    if large.index is None:
        room = large.constant - small.constant
        return [[(small.index, Bounds(le=room))]] if room >= 0 else []
    if small.index is None:
        floor = max(Fraction(0), small.constant - large.constant)
        return [[(large.index, Bounds(ge=floor))]]
    options = []
    for z in values:
        room = large.constant - small.constant + Fraction(z, gamma)
        if room < 0:
            continue
        floor = Fraction(z, gamma)
        options.append([(large.index, Bounds(ge=floor)), (small.index, Bounds(le=room))])
    return options


def _universal_options(
    plan: BlockPlan, values: list[int], gamma: int, slack: Fraction
) -> list[tuple[list[tuple[int, Bounds]], Bounds | None]]:
    """``(existential bounds, per-type bounds)`` pairs certifying the universal comparison."""
    other, a_u = plan.other, plan.universal_constant
    if plan.universal_upper:
        if other.index is None:
            pairs = [([], other.constant - a_u)]
        else:
            pairs = []
            for z in values:
                floor = Fraction(z, gamma)
                pairs.append(([(other.index, Bounds(ge=floor))], other.constant - a_u + floor))
        return [(e, Bounds(le=le) if le >= 0 else None) for e, le in pairs]
    if other.index is None:
        return [([], Bounds(ge=max(Fraction(0), other.constant - a_u)))]
    options = []
    for z in values:
        scaled = Fraction(z, gamma) / slack
        ge = max(Fraction(0), other.constant - a_u + scaled)
        options.append(([(other.index, Bounds(le=scaled))], Bounds(ge=ge)))
    return options


def _blank(params: TableParams) -> list[Bounds]:
    return [VACUOUS for _ in params.existential]


def block_to_tables(plan: Plan, block: BlockPlan, wm: WitnessMap) -> list[TableFormula]:
    """
    Table formulas, one per guessed set of satisfiable comparisons and per
    grid value of each guessed threshold, such that a root record is
    accepted for ``block`` iff it is consistent with one of them.
    """
    params = plan.params
    values = wm.grid.numerators
    gamma = wm.grid.granularity
    comps = list(block.existential)
    types = block.slot.universe.discovered(block.slot.width)
    if block.universal_comparison is not None:
        universal_options = _universal_options(block, values, gamma, wm.slack)
    else:
        universal_options = [([], None)]
    found: list[TableFormula] = []
    for picked in itertools.product((False, True), repeat=len(comps)):
        true = frozenset(c for c, on in zip(comps, picked) if on)
        per_comparison = [
            _threshold_options(block.existential[c], values, gamma) for c in comps if c in true
        ]
        entries: dict[QType, Bounds | None] = {}
        needs_universal: list[QType] = []
        for t in types:
            if not block.slot.realizable(t) or block.body_holds(t, true, False):
                entries[t] = VACUOUS
            elif block.universal_comparison is not None and block.body_holds(t, true, True):
                needs_universal.append(t)
            else:
                entries[t] = None
        certifying = universal_options if needs_universal else [([], None)]
        for choice in itertools.product(*per_comparison, certifying):
            *certificates, (universal_bounds, per_type) = choice
            existential = _blank(params)
            for index, bounds in itertools.chain(*certificates, universal_bounds):
                existential[index] = existential[index].conjoin(bounds)
            section = dict(entries)
            for t in needs_universal:
                section[t] = per_type
            sections = [Section(default=VACUOUS) for _ in params.slots]
            sections[block.slot_index] = Section.of(section)
            found.append(TableFormula(tuple(existential), tuple(sections)))
    return list(dict.fromkeys(found))


def table_expression(plan: Plan, wm: WitnessMap) -> TableExpr:
    """The constraint as an and/or combination of table formulas."""

    def walk(node: PlanNode) -> TableExpr:
        if isinstance(node, PlanAnd):
            return TableAnd(tuple(walk(p) for p in node.parts))
        if isinstance(node, PlanOr):
            return TableOr(tuple(walk(p) for p in node.parts))
        return TableOr(tuple(block_to_tables(plan, node, wm)))

    return walk(plan.root)


def flatten(xi: TableExpr) -> list[TableFormula]:
    """Table formulas whose disjunction is equivalent to ``xi``."""
    if isinstance(xi, TableFormula):
        return [xi]
    if isinstance(xi, TableOr):
        found = [omega for part in xi.parts for omega in flatten(part)]
        return list(dict.fromkeys(found))
    product: list[TableFormula] | None = None
    for part in xi.parts:
        options = flatten(part)
        if product is None:
            product = options
        else:
            product = [conjoin(a, b) for a in product for b in options]
    if product is None:
        raise InvalidInstanceError("empty conjunction of table formulas")
    return list(dict.fromkeys(product))


def lookup_best(wm: WitnessMap, formulas: Iterable[TableFormula]) -> Entry | None:
    """Best witness over several table formulas; ties go to the smaller tuple."""
    best: Entry | None = None
    for omega in formulas:
        entry = wm.lookup(omega)
        if entry is None:
            continue
        if best is None or entry.beats(best):
            best = entry
    return best


# ============================================================================
# PREPARATION
# ============================================================================


@dataclass
class Prepared:
    """The query and expression a run actually works on."""
    query: Query
    original: Query
    graph: Graph
    source: Graph
    expression: CwExpression
    depth: int
    balanced: bool = False
    unbalanced: bool = False
    translated: bool = False

    def restore(self, witness: Witness) -> Witness:
        if not self.translated:
            return witness
        return lift_witness(dict(witness), self.source, self.original.kinds)


def prepare(
    g: Graph,
    e: CwExpression | None,
    query: Query,
    balance_expression: bool = True,
    limits: Limits | None = None,
) -> Prepared:
    """Normalize the query, route edge quantification through subdivision, and balance."""
    limits = limits or Limits.from_settings(settings)
    if g.n == 0:
        raise InvalidInstanceError("the graph has no vertices")
    normalized = normalized_query(query)
    graph, translated = g, False
    if uses_edges(normalized.constraint, normalized.free):
        normalized, graph = translate_query(normalized, g)
        translated = True
        if e is not None:
            logger.info("expression replaced: edge quantification needs the subdivided graph")
        e = expression_for(graph)
    elif e is None:
        e = expression_for(graph)
    tagged = tag_leaves(e)
    check_matches(tagged, graph)
    balanced, unbalanced = False, False
    if balance_expression:
        outcome = balance(tagged, limits.max_labels)
        unbalanced = outcome.unbalanced
        balanced = depth(outcome.expression) < depth(tagged)
        tagged = outcome.expression
    d = depth(tagged)
    logger.info(f"expression depth {d}, {max_label(tagged)} labels, balanced {balanced}")
    return Prepared(normalized, query, graph, g, tagged, d, balanced, unbalanced, translated)


# ============================================================================
# ANSWERS
# ============================================================================


def _run(
    prepared: Prepared,
    plan: Plan,
    b: int,
    limits: Limits,
    trace: TraceRecorder | None,
) -> HalfAnswer:
    watch = Stopwatch()
    limits.check_context(plan.rank, plan.arity, max_label(prepared.expression))
    wm = compute_witnesses(
        prepared.expression,
        prepared.graph,
        plan.params,
        prepared.query.target,
        b=b,
        budget=limits.budget,
        trace=trace,
        doomed=plan.doomed,
    )
    entry = wm.best(lambda record: plan.accepts(record, wm))
    stats = RunStatistics(
        depth=prepared.depth,
        balanced=prepared.balanced,
        unbalanced=prepared.unbalanced,
        b=b,
        limit=math.ceil(plan.params.limit),
        states=wm.states,
        elapsed_ms=watch.elapsed_ms,
    )
    if entry is None:
        logger.info(f"no record accepted at b={b}")
        return HalfAnswer(NEG_INF, None, stats)
    witness = {name: entry.witness[i] for i, (name, _) in enumerate(prepared.query.free)}
    value = int(entry.value + prepared.query.target.constant)
    logger.info(f"accepted witness of value {value} at b={b}")
    return HalfAnswer(value, prepared.restore(witness), stats)


def half_b(epsilon: Fraction, d: int) -> int:
    """Smallest ``b`` with ``1/b <= epsilon/(5d)``."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise OutOfRangeError(f"epsilon must be positive, got {epsilon}")
    return math.ceil(5 * d / epsilon)


def half_answer(
    g: Graph,
    e: CwExpression | None,
    query: Query,
    epsilon: Fraction,
    limits: Limits | None = None,
    balance_expression: bool = True,
    trace: TraceRecorder | None = None,
    prepared: Prepared | None = None,
    constraint: Formula | None = None,
) -> HalfAnswer:
    """
    Either certify that the constraint tightened by ``1 + epsilon`` has no
    solution, or return a tuple satisfying it loosened by ``1 + epsilon``
    whose target is at least the exact maximum.

    ``constraint`` replaces the prepared query's constraint; it must have
    the same free variables.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= Fraction(1, 2):
        raise OutOfRangeError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    limits = limits or Limits.from_settings(settings)
    prepared = prepared or prepare(g, e, query, balance_expression, limits)
    plan = build_plan(
        constraint if constraint is not None else prepared.query.constraint,
        prepared.query.free,
        prepared.graph,
    )
    return _run(prepared, plan, half_b(epsilon, prepared.depth), limits, trace)


def approximate_answer(
    g: Graph,
    e: CwExpression | None,
    query: Query,
    epsilon: Fraction,
    limits: Limits | None = None,
    balance_expression: bool = True,
    threads: int | None = None,
    trace: TraceRecorder | None = None,
) -> ApproximateAnswer:
    """
    Conservative and eager answers at accuracy ``1 + epsilon``.

    Both sides are half answers at a third of the snapped accuracy, one on
    the constraint tightened and one on it loosened by ``1 + epsilon/3``.
    """
    epsilon = Fraction(epsilon)
    b, used = snap_epsilon(epsilon)
    limits = limits or Limits.from_settings(settings)
    prepared = prepare(g, e, query, balance_expression, limits)
    constraint = prepared.query.constraint
    inner = rescale_epsilon(used)
    logger.info(f"epsilon {epsilon} snapped to {used} (b={b})")

    def side(shift: Callable[[Formula, Fraction], Formula]) -> HalfAnswer:
        return half_answer(
            prepared.graph,
            prepared.expression,
            prepared.query,
            inner,
            limits,
            trace=trace,
            prepared=prepared,
            constraint=shift(constraint, used),
        )

    workers = threads if threads is not None else settings.threads
    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            minus_future = pool.submit(side, shift_constraint_minus)
            plus_future = pool.submit(side, shift_constraint_plus)
            minus, plus = minus_future.result(), plus_future.result()
    else:
        minus = side(shift_constraint_minus)
        plus = side(shift_constraint_plus)
    return ApproximateAnswer(
        max_minus=minus.value,
        witness_minus=minus.witness,
        max_plus=plus.value,
        witness_plus=plus.witness,
        alpha=1 + epsilon,
        epsilon_used=used,
        stats=minus.stats.merge(plus.stats),
    )


def exact_answer(
    g: Graph,
    e: CwExpression | None,
    query: Query,
    limits: Limits | None = None,
    balance_expression: bool = True,
    trace: TraceRecorder | None = None,
) -> ExactAnswer:
    """
    The exact maximum, or no solution.

    With ``epsilon = 1/(2 gamma N)`` the rounding grid holds every value up
    to the range limit, so the tables are exact and one run suffices.
    """
    limits = limits or Limits.from_settings(settings)
    prepared = prepare(g, e, query, balance_expression, limits)
    plan = build_plan(prepared.query.constraint, prepared.query.free, prepared.graph)
    terms = weight_terms(plan.constraint)
    n_bound = max(term_range_bound(prepared.graph, terms) if terms else 1, int(plan.params.limit))
    gamma = plan.params.granularity
    b = half_b(Fraction(1, 2 * gamma * n_bound), prepared.depth)
    logger.info(f"exact mode: N={n_bound}, granularity {gamma}, b={b}")
    half = _run(prepared, plan, b, limits, trace)
    return ExactAnswer(half.value, half.witness, half.stats)


__all__ = [
    "BlockPlan",
    "Inequality",
    "Plan",
    "Prepared",
    "Side",
    "TableAnd",
    "TableExpr",
    "TableOr",
    "approximate_answer",
    "block_to_tables",
    "build_plan",
    "exact_answer",
    "flatten",
    "half_answer",
    "half_b",
    "lookup_best",
    "prepare",
    "table_expression",
    "value_bound",
]
