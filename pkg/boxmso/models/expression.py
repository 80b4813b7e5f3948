"""k-expression syntax trees."""

from dataclasses import dataclass, field
from typing import Union as TypingUnion

LabelPair = tuple[int, int]


def label_pair(a: int, b: int) -> LabelPair:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Action:
    """
    Normal form of a relabel/edge-add sequence: first add edges between
    every pair of (original) labels in ``edges``, then relabel by ``mapping``.

    ``mapping`` lists only non-identity pairs, sorted.
    """
    mapping: tuple[LabelPair, ...] = ()
    edges: frozenset[LabelPair] = frozenset()

    @classmethod
    def of(cls, mapping: dict[int, int] | None = None, edges=()) -> "Action":
        pairs = tuple(sorted((a, b) for a, b in (mapping or {}).items() if a != b))
        normalized = frozenset(label_pair(a, b) for a, b in edges if a != b)
        return cls(mapping=pairs, edges=normalized)

    @classmethod
    def relabel(cls, source: int, target: int) -> "Action":
        return cls.of({source: target})

    @classmethod
    def add_edges(cls, first: int, second: int) -> "Action":
        return cls.of(edges=[(first, second)])

    @property
    def is_identity(self) -> bool:
        return not self.mapping and not self.edges

    def apply(self, label: int) -> int:
        for source, target in self.mapping:
            if source == label:
                return target
        return label

    def preimage(self, label: int) -> set[int]:
        sources = {s for s, t in self.mapping if t == label}
        if all(s != label for s, _ in self.mapping):
            sources.add(label)
        return sources

    def then(self, later: "Action") -> "Action":
        """The action of applying ``self`` and afterwards ``later``."""
        edges = set(self.edges)
        for x, y in later.edges:
            for i in self.preimage(x):
                for j in self.preimage(y):
                    if i != j:
                        edges.add(label_pair(i, j))
        labels = {s for s, _ in self.mapping} | {s for s, _ in later.mapping}
        mapping = {a: later.apply(self.apply(a)) for a in labels}
        return Action.of(mapping, edges)

    def connects(self, a: int, b: int) -> bool:
        return a != b and label_pair(a, b) in self.edges

    def labels(self) -> set[int]:
        found = {x for pair in self.mapping for x in pair}
        found.update(x for pair in self.edges for x in pair)
        return found


@dataclass(frozen=True)
class Leaf:
    """A single vertex. ``vertex`` optionally pins the id it stands for."""
    label: int
    vertex: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Union:
    left: "CwExpression"
    right: "CwExpression"


@dataclass(frozen=True)
class Relabel:
    source: int
    target: int
    child: "CwExpression"


@dataclass(frozen=True)
class AddEdges:
    first: int
    second: int
    child: "CwExpression"


@dataclass(frozen=True)
class Composite:
    """Disjoint union of two children followed by one normalized action."""
    action: Action
    left: "CwExpression"
    right: "CwExpression"


CwExpression = TypingUnion[Leaf, Union, Relabel, AddEdges, Composite]
