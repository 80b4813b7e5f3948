"""
Hash-consed logical types of labeled graphs with a tuple of vertex sets.

A type records the atomic facts of the tuple (which positions meet, are
adjacent, touch a color, leave a color, carry a label), capped sizes and
residues of the positions, and the types of all one-step extensions of the
tuple. Types compose under disjoint union and transform under relabeling
and edge insertion without looking at the graph again.
"""

import hashlib
import itertools
import logging
import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from boxmso.core.budget import EnumerationBudget
from boxmso.core.config import settings
from boxmso.core.errors import ContextMismatchError, MalformedExpressionError
from boxmso.engine.logic import level_kinds
from boxmso.models.expression import Action
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
    Single,
    Truth,
    Within,
)
from boxmso.models.graph import Graph

logger = logging.getLogger(__name__)

Flag = tuple


# ============================================================================
# SCHEMA
# ============================================================================


@dataclass(frozen=True)
class FactSchema:
    """Which facts a type keeps, by tuple position.

    The variable bound at quantifier depth ``d`` takes position ``arity + d - 1``.
    """
    arity: int
    levels: tuple[bool, ...] = ()
    meets: frozenset[tuple[int, int]] = frozenset()
    adjacency: frozenset[tuple[int, int]] = frozenset()
    colors: frozenset[tuple[int, str]] = frozenset()
    within: frozenset[tuple[int, str]] = frozenset()
    residues: tuple[tuple[int, int], ...] = ()
    sized: tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.levels)

    @property
    def labeled(self) -> frozenset[int]:
        return frozenset(p for pair in self.adjacency for p in pair)

    def size_index(self, position: int) -> int:
        return self.sized.index(position)

    def residue_index(self, position: int, modulus: int) -> int:
        return self.residues.index((position, modulus))

    @classmethod
    def for_formula(
        cls, body: Formula, positions: Mapping[str, int], sized: Iterable[int] = ()
    ) -> "FactSchema":
        """Collect the facts ``body`` can ask about when its free variables sit at ``positions``."""
        arity = len(set(positions.values())) if positions else 0
        levels = level_kinds(body)
        meets, adjacency, colors, within = set(), set(), set(), set()
        residues: set[tuple[int, int]] = set()
        sizes = set(sized)

        def pair(a: int, b: int) -> tuple[int, int]:
            return (a, b) if a < b else (b, a)

        def walk(node: Formula, env: dict[str, int], at: int) -> None:
            if isinstance(node, (In, Equals)):
                if isinstance(node, In):
                    a, b = node.element, node.collection
                else:
                    a, b = node.left, node.right
                if env[a] != env[b]:
                    meets.add(pair(env[a], env[b]))
            elif isinstance(node, Adjacent):
                if env[node.left] != env[node.right]:
                    adjacency.add(pair(env[node.left], env[node.right]))
            elif isinstance(node, HasColor):
                colors.add((env[node.var], node.color))
            elif isinstance(node, Within):
                within.add((env[node.var], node.color))
            elif isinstance(node, Card):
                residues.add((env[node.var], node.modulus))
            elif isinstance(node, Single):
                sizes.add(env[node.var])
            elif isinstance(node, Incident):
                raise MalformedExpressionError("incidence atoms must be translated before typing")
            elif isinstance(node, (And, Or)):
                for part in node.parts:
                    walk(part, env, at)
            elif isinstance(node, Not):
                walk(node.body, env, at)
            elif isinstance(node, (Exists, ForAll)):
                position = arity + at
                if not node.kind.is_set and not levels[at]:
                    sizes.add(position)
                walk(node.body, {**env, node.var: position}, at + 1)

        walk(body, dict(positions), 0)
        return cls(
            arity=arity,
            levels=levels,
            meets=frozenset(meets),
            adjacency=frozenset(adjacency),
            colors=frozenset(colors),
            within=frozenset(within),
            residues=tuple(sorted(residues)),
            sized=tuple(sorted(sizes)),
        )


@dataclass(frozen=True)
class Facts:
    sizes: tuple[int, ...] = ()
    residues: tuple[int, ...] = ()
    flags: frozenset[Flag] = frozenset()

    def encode(self) -> str:
        return repr((self.sizes, self.residues, tuple(sorted(self.flags, key=repr))))


# ============================================================================
# TYPES
# ============================================================================


@dataclass(frozen=True, eq=False)
class QType:
    """
    Interned type of a tuple of ``width`` positions.

    ``empty``/``singles`` describe extensions by the empty set and by single
    vertices (element levels); ``ext`` all extensions (set levels).
    """
    key: str
    width: int
    facts: Facts
    empty: "QType | None" = None
    singles: frozenset["QType"] | None = None
    ext: frozenset["QType"] | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QType) and other.key == self.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: "QType") -> bool:
        return self.key < other.key

    @property
    def children(self) -> frozenset["QType"]:
        if self.ext is not None:
            return self.ext
        return self.singles or frozenset()

    def __repr__(self) -> str:
        return f"QType({self.key[:10]}, width={self.width})"


@dataclass
class TypeUniverse:
    """All types discovered for one schema, with memoized composition and transformation."""
    schema: FactSchema
    _types: dict[str, QType] = field(default_factory=dict)
    _compose: dict[tuple[str, str], QType] = field(default_factory=dict)
    _transform: dict[tuple[str, Action], QType] = field(default_factory=dict)
    _leaves: dict[tuple, QType] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __len__(self) -> int:
        return len(self._types)

    def discovered(self, width: int | None = None) -> list[QType]:
        with self._lock:
            found = list(self._types.values())
        return sorted(t for t in found if width is None or t.width == width)

    def intern(
        self,
        width: int,
        facts: Facts,
        empty: QType | None = None,
        singles: Iterable[QType] | None = None,
        ext: Iterable[QType] | None = None,
    ) -> QType:
        singles = frozenset(singles) if singles is not None else None
        ext = frozenset(ext) if ext is not None else None
        content = repr((
            width,
            facts.encode(),
            empty.key if empty else None,
            sorted(t.key for t in singles) if singles is not None else None,
            sorted(t.key for t in ext) if ext is not None else None,
        ))
        key = hashlib.blake2b(content.encode(), digest_size=16).hexdigest()
        candidate = QType(key, width, facts, empty, singles, ext)
        with self._lock:
            return self._types.setdefault(key, candidate)

    # ------------------------------------------------------------------ facts

    def _sizes_at(self, width: int) -> list[int]:
        return [p for p in self.schema.sized if p < width]

    def _residues_at(self, width: int) -> list[tuple[int, int]]:
        return [(p, r) for p, r in self.schema.residues if p < width]

    def size(self, t: QType, position: int) -> int:
        return t.facts.sizes[self._sizes_at(t.width).index(position)]

    def residue(self, t: QType, position: int, modulus: int) -> int:
        return t.facts.residues[self._residues_at(t.width).index((position, modulus))]

    def _facts_from_sets(self, g: Graph, sets: Sequence[frozenset[int]]) -> Facts:
        s = self.schema
        width = len(sets)
        flags: set[Flag] = set()
        for i, j in s.meets:
            if j < width and sets[i] & sets[j]:
                flags.add(("meet", i, j))
        for i, j in s.adjacency:
            if j < width and any(g.has_edge(u, v) for u in sets[i] for v in sets[j] if u != v):
                flags.add(("adj", i, j))
        for i, c in s.colors:
            if i < width and sets[i] & g.color_sets.get(c, frozenset()):
                flags.add(("color", i, c))
        for i, c in s.within:
            if i < width and sets[i] - g.color_sets.get(c, frozenset()):
                flags.add(("out", i, c))
        for i in s.labeled:
            if i < width:
                flags.update(("label", i, g.labels[v]) for v in sets[i] if v in g.labels)
        return Facts(
            sizes=tuple(min(2, len(sets[p])) for p in self._sizes_at(width)),
            residues=tuple(len(sets[p]) % r for p, r in self._residues_at(width)),
            flags=frozenset(flags),
        )

    # ------------------------------------------------------------------ leaves

    def leaf_type(self, label: int, colors: frozenset[str], bits: tuple[int, ...]) -> QType:
        """Type of a single vertex with ``label`` and ``colors`` under membership ``bits``."""
        memo_key = (label, colors, bits)
        cached = self._leaves.get(memo_key)
        if cached is not None:
            return cached
        g = Graph(n=1, color_sets={c: frozenset({0}) for c in colors}, labels={0: label})
        facts = self._facts_from_sets(g, [frozenset({0}) if b else frozenset() for b in bits])
        depth = len(bits) - self.schema.arity
        if depth == self.schema.rank:
            result = self.intern(len(bits), facts)
        elif self.schema.levels[depth]:
            result = self.intern(
                len(bits),
                facts,
                empty=self.leaf_type(label, colors, bits + (0,)),
                singles=[self.leaf_type(label, colors, bits + (1,))],
            )
        else:
            result = self.intern(
                len(bits),
                facts,
                ext=[self.leaf_type(label, colors, bits + (b,)) for b in (0, 1)],
            )
        self._leaves[memo_key] = result
        return result

    # ------------------------------------------------------------------ algebra

    def compose(self, left: QType, right: QType) -> QType:
        """Type of the disjoint union, from the types of the two sides."""
        if left.width != right.width:
            raise ContextMismatchError(f"cannot compose widths {left.width} and {right.width}")
        memo_key = (left.key, right.key) if left.key <= right.key else (right.key, left.key)
        cached = self._compose.get(memo_key)
        if cached is not None:
            return cached
        facts = Facts(
            sizes=tuple(min(2, a + b) for a, b in zip(left.facts.sizes, right.facts.sizes)),
            residues=tuple(
                (a + b) % r
                for (a, b), (_, r) in zip(
                    zip(left.facts.residues, right.facts.residues), self._residues_at(left.width)
                )
            ),
            flags=left.facts.flags | right.facts.flags,
        )
        if left.ext is not None:
            result = self.intern(
                left.width, facts, ext={self.compose(a, b) for a in left.ext for b in right.ext}
            )
        elif left.empty is not None:
            singles = {self.compose(s, right.empty) for s in left.singles}
            singles |= {self.compose(left.empty, s) for s in right.singles}
            result = self.intern(
                left.width, facts, empty=self.compose(left.empty, right.empty), singles=singles
            )
        else:
            result = self.intern(left.width, facts)
        self._compose[memo_key] = result
        return result

    def transform(self, t: QType, action: Action) -> QType:
        """Type after adding the action's edges between labels and then relabeling."""
        if action.is_identity:
            return t
        memo_key = (t.key, action)
        cached = self._transform.get(memo_key)
        if cached is not None:
            return cached
        flags = set(t.facts.flags)
        for i, j in self.schema.adjacency:
            if j >= t.width or ("adj", i, j) in flags:
                continue
            for a, b in action.edges:
                if (("label", i, a) in flags and ("label", j, b) in flags) or (
                    ("label", i, b) in flags and ("label", j, a) in flags
                ):
                    flags.add(("adj", i, j))
                    break
        if action.mapping:
            flags = {
                ("label", f[1], action.apply(f[2])) if f[0] == "label" else f for f in flags
            }
        facts = Facts(t.facts.sizes, t.facts.residues, frozenset(flags))
        if t.ext is not None:
            result = self.intern(t.width, facts, ext={self.transform(c, action) for c in t.ext})
        elif t.empty is not None:
            result = self.intern(
                t.width,
                facts,
                empty=self.transform(t.empty, action),
                singles={self.transform(c, action) for c in t.singles},
            )
        else:
            result = self.intern(t.width, facts)
        self._transform[memo_key] = result
        return result

    # ------------------------------------------------------------------ brute force

    def type_of(
        self, g: Graph, sets: Sequence[frozenset[int]], budget: int | None = None
    ) -> QType:
        """Type of ``(g, sets)`` by enumerating every extension."""
        if len(sets) != self.schema.arity:
            raise ContextMismatchError(f"expected {self.schema.arity} sets, got {len(sets)}")
        work = 1
        for element_level in self.schema.levels:
            work *= (g.n + 1) if element_level else 2 ** g.n
        EnumerationBudget(budget or settings.budget).ensure("type enumeration", work)
        subsets = [
            frozenset(itertools.compress(range(g.n), mask_bits))
            for mask_bits in itertools.product((0, 1), repeat=g.n)
        ]
        return self._type_of(g, tuple(sets), subsets)

    def _type_of(self, g: Graph, sets: tuple[frozenset[int], ...], subsets) -> QType:
        facts = self._facts_from_sets(g, sets)
        depth = len(sets) - self.schema.arity
        if depth == self.schema.rank:
            return self.intern(len(sets), facts)
        if self.schema.levels[depth]:
            return self.intern(
                len(sets),
                facts,
                empty=self._type_of(g, sets + (frozenset(),), subsets),
                singles=[self._type_of(g, sets + (frozenset({v}),), subsets) for v in g.vertices],
            )
        extensions = [self._type_of(g, sets + (q,), subsets) for q in subsets]
        return self.intern(len(sets), facts, ext=extensions)


# ============================================================================
# EVALUATION ON TYPES
# ============================================================================


def holds(
    universe: TypeUniverse,
    f: Formula,
    t: QType,
    env: Mapping[str, int],
    verdicts: Mapping[Compare, bool],
) -> bool:
    """
    Truth of ``f`` on any structure of type ``t``.

    ``env`` maps free variables to positions, ``verdicts`` decides weight
    comparisons (they never mention variables bound inside ``f``).
    """
    schema = universe.schema

    def meet(a: int, b: int, node: QType) -> bool:
        if a == b:
            return True
        return ("meet", min(a, b), max(a, b)) in node.facts.flags

    def walk(node: Formula, where: QType, scope: Mapping[str, int]) -> bool:
        if isinstance(node, Truth):
            return node.value
        if isinstance(node, Compare):
            return verdicts[node]
        if isinstance(node, In):
            return meet(scope[node.element], scope[node.collection], where)
        if isinstance(node, Equals):
            return meet(scope[node.left], scope[node.right], where)
        if isinstance(node, Adjacent):
            a, b = scope[node.left], scope[node.right]
            return a != b and ("adj", min(a, b), max(a, b)) in where.facts.flags
        if isinstance(node, HasColor):
            return ("color", scope[node.var], node.color) in where.facts.flags
        if isinstance(node, Within):
            return ("out", scope[node.var], node.color) not in where.facts.flags
        if isinstance(node, Card):
            return universe.residue(where, scope[node.var], node.modulus) == node.residue
        if isinstance(node, Single):
            return universe.size(where, scope[node.var]) == 1
        if isinstance(node, And):
            return all(walk(p, where, scope) for p in node.parts)
        if isinstance(node, Or):
            return any(walk(p, where, scope) for p in node.parts)
        if isinstance(node, Not):
            return not walk(node.body, where, scope)
        if isinstance(node, (Exists, ForAll)):
            position = where.width
            if where.ext is not None:
                options = list(where.ext)
                if not node.kind.is_set:
                    options = [c for c in options if universe.size(c, position) == 1]
            else:
                options = list(where.singles or ())
            inner = {**scope, node.var: position}
            if isinstance(node, Exists):
                return any(walk(node.body, c, inner) for c in options)
            return all(walk(node.body, c, inner) for c in options)
        raise MalformedExpressionError(f"cannot evaluate {type(node).__name__} on a type")

    if schema.arity != t.width:
        raise ContextMismatchError(f"type has width {t.width}, schema arity {schema.arity}")
    return walk(f, t, env)


def fv_pairs(universe: TypeUniverse, accepted: Iterable[QType]) -> set[tuple[QType, QType]]:
    """All discovered pairs whose composition lies in ``accepted``."""
    wanted = set(accepted)
    if not wanted:
        return set()
    width = next(iter(wanted)).width
    pool = universe.discovered(width)
    return {(a, b) for a in pool for b in pool if universe.compose(a, b) in wanted}
