"""Depth reduction for k-expressions by heavy-path contraction."""

import logging
from dataclasses import dataclass

from boxmso.core.config import settings
from boxmso.engine.expressions import (
    depth,
    fold,
    fold_leaf_chains,
    labels_used,
    normalize_unary_chains,
    postorder,
    relabeled,
    tag_leaves,
)
from boxmso.models.expression import Action, Composite, CwExpression, Leaf, label_pair

logger = logging.getLogger(__name__)

Record = tuple[int, frozenset[int]]  # (final label, hole labels it is joined to)


@dataclass(frozen=True)
class BalanceOutcome:
    expression: CwExpression
    unbalanced: bool = False


@dataclass(frozen=True)
class _Context:
    """
    A one-hole context ``X -> relabel(X, g) + D`` with extra edges.

    ``hole_edges`` joins hole vertices by their original labels; vertices of
    ``D`` labelled ``r`` end with label ``records[r][0]`` and are joined to
    every hole vertex whose original label lies in ``records[r][1]``.
    """
    relabel: dict[int, int]
    hole_edges: frozenset[tuple[int, int]]
    other: CwExpression
    records: dict[int, Record]
    weight: int


def output_labels(e: CwExpression) -> frozenset[int]:
    def combine(node: CwExpression, sub: list[frozenset[int]]) -> frozenset[int]:
        if isinstance(node, Leaf):
            return frozenset({node.label})
        merged = sub[0] | sub[1]
        if isinstance(node, Composite):
            return frozenset(node.action.apply(a) for a in merged)
        return merged

    return fold(e, combine)


def _leaf_counts(e: CwExpression) -> dict[int, int]:
    counts: dict[int, int] = {}
    for node in postorder(e):
        if isinstance(node, Leaf):
            counts[id(node)] = 1
        else:
            counts[id(node)] = counts[id(node.left)] + counts[id(node.right)]
    return counts


def _canonical(records: dict[int, Record]) -> tuple[dict[int, int], dict[int, Record]]:
    """Merge interchangeable records; returns old id -> new id and the new table."""
    distinct = sorted(set(records.values()), key=lambda r: (r[0], sorted(r[1])))
    index = {record: i + 1 for i, record in enumerate(distinct)}
    renumber = {old: index[record] for old, record in records.items()}
    return renumber, {i + 1: record for i, record in enumerate(distinct)}


def _step_context(action: Action, light: CwExpression, k: int, weight: int) -> _Context:
    relabel = {h: action.apply(h) for h in range(1, k + 1)}
    present = output_labels(light)
    records = {
        a: (action.apply(a), frozenset(h for h in range(1, k + 1) if action.connects(h, a)))
        for a in present
    }
    renumber, table = _canonical(records)
    inside = [(a, b) for a, b in action.edges if a in present and b in present]
    other = relabeled(light, Action.of(renumber, inside))
    return _Context(relabel, action.edges, other, table, weight)


def _compose(inner: _Context, outer: _Context, k: int) -> _Context:
    """The context ``outer(inner(X))``."""
    g_in, g_out = inner.relabel, outer.relabel

    def outer_joins(a: int, b: int) -> bool:
        return a != b and label_pair(a, b) in outer.hole_edges

    relabel = {h: g_out[g_in[h]] for h in range(1, k + 1)}
    hole_edges = set(inner.hole_edges)
    for h in range(1, k + 1):
        for h2 in range(h + 1, k + 1):
            if outer_joins(g_in[h], g_in[h2]):
                hole_edges.add((h, h2))

    shift = len(inner.records)
    merged: dict[int, Record] = {}
    for r, (label, joined) in inner.records.items():
        extra = {h for h in range(1, k + 1) if outer_joins(g_in[h], label)}
        merged[r] = (g_out[label], frozenset(joined | extra))
    for r, (label, joined) in outer.records.items():
        merged[shift + r] = (label, frozenset(h for h in range(1, k + 1) if g_in[h] in joined))

    bridges: set[tuple[int, int]] = set()
    for r, (label, _) in inner.records.items():
        for r2, (_, joined) in outer.records.items():
            if label in joined:
                bridges.add((r, shift + r2))
        for r2, (label2, _) in inner.records.items():
            if r < r2 and outer_joins(label, label2):
                bridges.add((r, r2))

    renumber, table = _canonical(merged)
    shifted = relabeled(outer.other, Action.of({r: shift + r for r in outer.records}))
    other = Composite(Action.of(renumber, bridges), inner.other, shifted)
    return _Context(relabel, frozenset(hole_edges), other, table, inner.weight + outer.weight)


def _combine(steps: list[_Context], k: int) -> _Context:
    """Compose ``steps`` (outermost first) splitting at the weighted midpoint."""
    if len(steps) == 1:
        return steps[0]
    total = sum(s.weight for s in steps)
    running, cut = 0, 1
    for i, step in enumerate(steps[:-1]):
        running += step.weight
        cut = i + 1
        if 2 * running >= total:
            break
    return _compose(_combine(steps[cut:], k), _combine(steps[:cut], k), k)


def _close(ctx: _Context, hole: CwExpression, k: int) -> CwExpression:
    mapping = dict(ctx.relabel)
    edges = set(ctx.hole_edges)
    for r, (label, joined) in ctx.records.items():
        mapping[k + r] = label
        edges.update((h, k + r) for h in joined)
    shifted = relabeled(ctx.other, Action.of({r: k + r for r in ctx.records}))
    return Composite(Action.of(mapping, edges), hole, shifted)


def _balance_tree(e: CwExpression, k: int) -> CwExpression:
    counts = _leaf_counts(e)
    if isinstance(e, Leaf):
        return e
    steps: list[_Context] = []
    node = e
    while not isinstance(node, Leaf):
        action = node.action if isinstance(node, Composite) else Action()
        heavy, light = node.left, node.right
        if counts[id(light)] > counts[id(heavy)]:
            heavy, light = light, heavy
        steps.append(_step_context(action, _balance_tree(light, k), k, counts[id(light)]))
        node = heavy
    return _close(_combine(steps, k), node, k)


def balance(e: CwExpression, max_labels: int | None = None) -> BalanceOutcome:
    """
    An equivalent expression of logarithmic depth.

    Leaves keep their vertex tags. The input comes back unchanged when the
    result is no shallower, and flagged ``unbalanced`` when the contraction
    would need more than ``max_labels`` labels.
    """
    limit = max_labels if max_labels is not None else settings.max_labels
    tagged = tag_leaves(e)
    flat = fold_leaf_chains(normalize_unary_chains(tagged))
    k = max(labels_used(flat), default=1)
    candidate = _balance_tree(flat, k)
    before, after = depth(e), depth(candidate)
    width = max(labels_used(candidate), default=1)
    if width > limit:
        logger.warning(f"balancing needs {width} labels (limit {limit}); keeping depth {before}")
        return BalanceOutcome(tagged, unbalanced=True)
    if after >= before:
        logger.debug(f"balancing gives depth {after}, input has {before}; keeping input")
        return BalanceOutcome(tagged)
    logger.info(f"balanced expression depth {before} -> {after} with {width} labels")
    return BalanceOutcome(candidate)


__all__ = ["BalanceOutcome", "balance", "output_labels"]
