"""Vertex-colored, vertex-weighted graphs (edge colors and weights before subdivision)."""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property

from boxmso.core.errors import InvalidInstanceError, SymbolNotFoundError

EDGE_COLOR = "__edge__"
UNIT_WEIGHT = "#"

Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    """Unordered edge as a sorted pair."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """
    Immutable graph on the dense vertex ids ``0..n-1``.

    Colors are vertex sets, weights are maps from vertex to natural
    number (a missing vertex weighs 0). ``labels`` is only populated
    while evaluating expressions.
    """
    n: int
    edges: frozenset[Edge] = frozenset()
    color_sets: Mapping[str, frozenset[int]] = field(default_factory=dict)
    weights: Mapping[str, Mapping[int, int]] = field(default_factory=dict)
    labels: Mapping[int, int] = field(default_factory=dict)
    edge_color_sets: Mapping[str, frozenset[Edge]] = field(default_factory=dict)
    edge_weights: Mapping[str, Mapping[Edge, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInstanceError("vertex count must be nonnegative")
        for u, v in self.edges:
            if u == v:
                raise InvalidInstanceError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInstanceError(f"edge ({u}, {v}) has an endpoint outside the graph")
            if u > v:
                raise InvalidInstanceError(f"edge ({u}, {v}) is not normalized")
        for name, members in self.color_sets.items():
            if any(not 0 <= v < self.n for v in members):
                raise InvalidInstanceError(f"color {name} mentions an unknown vertex")
        for name, table in self.weights.items():
            if name == UNIT_WEIGHT:
                raise InvalidInstanceError(f"weight symbol {UNIT_WEIGHT} is reserved")
            for v, value in table.items():
                if not 0 <= v < self.n:
                    raise InvalidInstanceError(f"weight {name} mentions unknown vertex {v}")
                if value < 0:
                    raise InvalidInstanceError(f"weight {name} of vertex {v} is negative")
        for name, table in self.edge_weights.items():
            if any(e not in self.edges for e in table):
                raise InvalidInstanceError(f"edge weight {name} mentions a missing edge")
            if any(value < 0 for value in table.values()):
                raise InvalidInstanceError(f"edge weight {name} is negative")
        for name, members in self.edge_color_sets.items():
            if any(e not in self.edges for e in members):
                raise InvalidInstanceError(f"edge color {name} mentions a missing edge")

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]] = (),
        colors: Mapping[str, Iterable[int]] | None = None,
        weights: Mapping[str, Mapping[int, int]] | None = None,
        labels: Mapping[int, int] | None = None,
        edge_colors: Mapping[str, Iterable[tuple[int, int]]] | None = None,
        edge_weights: Mapping[str, Mapping[tuple[int, int], int]] | None = None,
    ) -> "Graph":
        """Build a graph, rejecting duplicate edges instead of merging them."""
        seen: set[Edge] = set()
        for u, v in edges:
            key = edge_key(u, v)
            if key in seen:
                raise InvalidInstanceError(f"duplicate edge ({u}, {v})")
            seen.add(key)
        return cls(
            n=n,
            edges=frozenset(seen),
            color_sets={c: frozenset(vs) for c, vs in (colors or {}).items()},
            weights={w: dict(t) for w, t in (weights or {}).items()},
            labels=dict(labels or {}),
            edge_color_sets={
                c: frozenset(edge_key(*e) for e in es) for c, es in (edge_colors or {}).items()
            },
            edge_weights={
                w: {edge_key(*e): x for e, x in t.items()} for w, t in (edge_weights or {}).items()
            },
        )

    @property
    def vertices(self) -> range:
        return range(self.n)

    @cached_property
    def neighbors(self) -> dict[int, frozenset[int]]:
        adjacent: dict[int, set[int]] = {v: set() for v in range(self.n)}
        for u, v in self.edges:
            adjacent[u].add(v)
            adjacent[v].add(u)
        return {v: frozenset(ns) for v, ns in adjacent.items()}

    @cached_property
    def vertex_colors(self) -> dict[int, frozenset[str]]:
        owned: dict[int, set[str]] = {v: set() for v in range(self.n)}
        for name, members in self.color_sets.items():
            for v in members:
                owned[v].add(name)
        return {v: frozenset(cs) for v, cs in owned.items()}

    @property
    def has_edge_data(self) -> bool:
        return bool(self.edge_color_sets) or bool(self.edge_weights)

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def has_weight(self, name: str) -> bool:
        return name == UNIT_WEIGHT or name in self.weights

    def weight(self, name: str, v: int) -> int:
        if name == UNIT_WEIGHT:
            return 1
        try:
            return self.weights[name].get(v, 0)
        except KeyError:
            raise SymbolNotFoundError(f"unknown weight symbol {name}", symbol=name) from None

    def edge_weight(self, name: str, e: Edge) -> int:
        if name == UNIT_WEIGHT:
            return 1
        try:
            return self.edge_weights[name].get(e, 0)
        except KeyError:
            raise SymbolNotFoundError(f"unknown edge weight symbol {name}", symbol=name) from None

    def total_weight(self, name: str) -> int:
        return sum(self.weight(name, v) for v in range(self.n))

    def max_weight(self) -> int:
        values = [x for table in self.weights.values() for x in table.values()]
        values += [x for table in self.edge_weights.values() for x in table.values()]
        return max(values, default=0)

    def with_labels(self, labels: Mapping[int, int]) -> "Graph":
        return replace(self, labels=dict(labels))

    def without_labels(self) -> "Graph":
        return replace(self, labels={})

    def permuted(self, order: list[int]) -> "Graph":
        """Renumber so that new vertex ``i`` is old vertex ``order[i]``."""
        if sorted(order) != list(range(self.n)):
            raise InvalidInstanceError("vertex order is not a permutation")
        new_id = {old: new for new, old in enumerate(order)}

        def move(e: Edge) -> Edge:
            return edge_key(new_id[e[0]], new_id[e[1]])

        return Graph(
            n=self.n,
            edges=frozenset(move(e) for e in self.edges),
            color_sets={c: frozenset(new_id[v] for v in vs) for c, vs in self.color_sets.items()},
            weights={w: {new_id[v]: x for v, x in t.items()} for w, t in self.weights.items()},
            labels={new_id[v]: a for v, a in self.labels.items()},
            edge_color_sets={
                c: frozenset(move(e) for e in es) for c, es in self.edge_color_sets.items()
            },
            edge_weights={
                w: {move(e): x for e, x in t.items()} for w, t in self.edge_weights.items()
            },
        )
