"""Parser and printer for the s-expression query language."""

import logging
from collections.abc import Mapping
from fractions import Fraction

from boxmso.core.errors import ParseError, UnboundVariableError
from boxmso.engine.sexpr import (
    SExpr,
    SList,
    Token,
    expect_list,
    expect_natural,
    expect_token,
    fail,
    read_one,
)
from boxmso.models.formula import (
    FALSE,
    TRUE,
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
    Op,
    Or,
    Query,
    Single,
    Truth,
    VarKind,
    WeightTerm,
    Within,
)
from boxmso.models.graph import UNIT_WEIGHT

logger = logging.getLogger(__name__)

QUANTIFIERS = {
    "exists": (Exists, VarKind.VERTEX),
    "forall": (ForAll, VarKind.VERTEX),
    "exists-set": (Exists, VarKind.SET),
    "forall-set": (ForAll, VarKind.SET),
    "exists-edge": (Exists, VarKind.EDGE),
    "forall-edge": (ForAll, VarKind.EDGE),
    "exists-edge-set": (Exists, VarKind.EDGE_SET),
    "forall-edge-set": (ForAll, VarKind.EDGE_SET),
}
KEYWORDS = {kind: (exists, forall) for exists, forall, kind in [
    ("exists", "forall", VarKind.VERTEX),
    ("exists-set", "forall-set", VarKind.SET),
    ("exists-edge", "forall-edge", VarKind.EDGE),
    ("exists-edge-set", "forall-edge-set", VarKind.EDGE_SET),
]}
OPERATORS = {op.value: op for op in Op}
ELEMENTS = (VarKind.VERTEX, VarKind.EDGE)
COLLECTIONS = (VarKind.SET, VarKind.EDGE_SET)


def parse_rational(node: SExpr, what: str = "a rational") -> Fraction:
    text = expect_token(node, what)
    numerator, slash, denominator = text.partition("/")
    try:
        value = int(numerator)
        if slash:
            if not denominator.isdigit() or int(denominator) == 0:
                raise ValueError(text)
            return Fraction(value, int(denominator))
        return Fraction(value)
    except ValueError:
        raise fail(node, f"expected {what} (int or int/nat), got {text!r}") from None


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ============================================================================
# PARSER
# ============================================================================


class _Scope:
    """Variable bindings; quantified names are renamed apart from every other name."""

    def __init__(self, free: Mapping[str, VarKind]) -> None:
        self.frames: list[dict[str, tuple[str, VarKind]]] = [
            {name: (name, kind) for name, kind in free.items()}
        ]
        self.used: set[str] = set(free)

    def lookup(self, node: Token) -> tuple[str, VarKind]:
        for frame in reversed(self.frames):
            if node.text in frame:
                return frame[node.text]
        raise UnboundVariableError(
            f"unbound variable {node.text!r} at {node.line}:{node.column}",
            variable=node.text, line=node.line, column=node.column,
        )

    def bind(self, name: str, kind: VarKind) -> str:
        fresh, i = name, 1
        while fresh in self.used:
            i += 1
            fresh = f"{name}_{i}"
        self.used.add(fresh)
        self.frames.append({name: (fresh, kind)})
        return fresh

    def pop(self) -> None:
        self.frames.pop()


class _FormulaParser:
    def __init__(self, free: Mapping[str, VarKind], constraint: bool = True) -> None:
        self.scope = _Scope(free)
        self.constraint = constraint

    def var(self, node: SExpr, kinds: tuple[VarKind, ...], what: str) -> tuple[str, VarKind]:
        if not isinstance(node, Token):
            raise fail(node, f"expected {what}")
        name, kind = self.scope.lookup(node)
        if kind not in kinds:
            raise fail(node, f"{node.text} is a {kind.value} variable, expected {what}")
        return name, kind

    def formula(self, node: SExpr) -> Formula:
        if isinstance(node, Token):
            if node.text == "true":
                return TRUE
            if node.text == "false":
                return FALSE
            raise fail(node, f"expected a formula, got {node.text!r}")
        items = node.items
        if not items:
            raise fail(node, "empty formula")
        head = expect_token(items[0], "a connective")
        args = items[1:]

        def arity(count: int) -> None:
            if len(args) != count:
                raise fail(node, f"{head} takes {count} arguments, got {len(args)}")

        if head in QUANTIFIERS:
            arity(2)
            cls, kind = QUANTIFIERS[head]
            name = expect_token(args[0], "a variable name")
            fresh = self.scope.bind(name, kind)
            try:
                body = self.formula(args[1])
            finally:
                self.scope.pop()
            return cls(fresh, kind, body)
        if head in ("and", "or"):
            parts = tuple(self.formula(a) for a in args)
            if not parts:
                return TRUE if head == "and" else FALSE
            if len(parts) == 1:
                return parts[0]
            return And(parts) if head == "and" else Or(parts)
        if head == "not":
            arity(1)
            return Not(self.formula(args[0]))
        if head == "implies":
            arity(2)
            return Or((Not(self.formula(args[0])), self.formula(args[1])))
        if head == "in":
            arity(2)
            element, kind = self.var(args[0], ELEMENTS, "a vertex or edge variable")
            expected = VarKind.SET if kind is VarKind.VERTEX else VarKind.EDGE_SET
            collection, _ = self.var(args[1], (expected,), f"a {expected.value} variable")
            return In(element, collection)
        if head == "=":
            arity(2)
            left, kind = self.var(args[0], ELEMENTS, "a vertex or edge variable")
            right, _ = self.var(args[1], (kind,), f"a {kind.value} variable")
            return Equals(left, right)
        if head == "edge":
            arity(2)
            left, _ = self.var(args[0], (VarKind.VERTEX,), "a vertex variable")
            right, _ = self.var(args[1], (VarKind.VERTEX,), "a vertex variable")
            return Adjacent(left, right)
        if head in ("color", "within"):
            arity(2)
            color = expect_token(args[0], "a color name")
            name, _ = self.var(args[1], tuple(VarKind), "a variable")
            return HasColor(color, name) if head == "color" else Within(color, name)
        if head == "card":
            arity(3)
            residue = expect_natural(args[0], "a residue")
            modulus = expect_natural(args[1], "a modulus", 1)
            if residue >= modulus:
                raise fail(args[0], f"residue {residue} must be below the modulus {modulus}")
            name, _ = self.var(args[2], COLLECTIONS, "a set variable")
            return Card(residue, modulus, name)
        if head == "single":
            arity(1)
            name, _ = self.var(args[0], COLLECTIONS, "a set variable")
            return Single(name)
        if head == "inc":
            arity(2)
            vertex, _ = self.var(args[0], (VarKind.VERTEX,), "a vertex variable")
            edge, _ = self.var(args[1], (VarKind.EDGE,), "an edge variable")
            return Incident(vertex, edge)
        if head == "cmp":
            arity(3)
            op_text = expect_token(args[0], "a comparison operator")
            if op_text not in OPERATORS:
                raise fail(args[0], f"unknown comparison {op_text!r}")
            left, right = self.term(args[1]), self.term(args[2])
            if self.constraint:
                for t, at in ((left, args[1]), (right, args[2])):
                    if not t.is_nonnegative:
                        raise fail(at, "constraint weight terms must be nonnegative")
            return Compare(OPERATORS[op_text], left, right)
        raise fail(items[0], f"unknown connective {head!r}")

    def term(self, node: SExpr) -> WeightTerm:
        if isinstance(node, Token):
            return WeightTerm.constant_term(parse_rational(node, "a term"))
        items = node.items
        if not items or expect_token(items[0], "term") != "term" or len(items) < 2:
            raise fail(node, "expected (term CONST (coef w X RAT) ...)")
        constant = parse_rational(items[1], "a constant")
        entries: dict[tuple[str, str], Fraction] = {}
        for item in items[2:]:
            coef = expect_list(item, "(coef w X RAT)")
            if len(coef.items) != 4 or coef.head() != "coef":
                raise fail(item, "expected (coef w X RAT)")
            weight = expect_token(coef.items[1], "a weight symbol")
            name = self.term_variable(coef.items[2])
            key = (weight, name)
            entries[key] = entries.get(key, Fraction(0)) + parse_rational(coef.items[3])
        return WeightTerm.of(constant, entries)

    def term_variable(self, node: SExpr) -> str:
        if isinstance(node, SList):
            if node.head() != "single" or len(node.items) != 2:
                raise fail(node, "expected a set variable or (single x)")
            name, _ = self.var(node.items[1], ELEMENTS, "a vertex or edge variable")
            return name
        name, _ = self.var(node, COLLECTIONS, "a set variable (write (single x) for a vertex)")
        return name


def parse_formula(text: str, free: Mapping[str, VarKind] | None = None) -> Formula:
    return _FormulaParser(free or {}).formula(read_one(text))


def parse_term(text: str, free: Mapping[str, VarKind] | None = None) -> WeightTerm:
    return _FormulaParser(free or {}, constraint=False).term(read_one(text))


def _parse_free(node: SExpr) -> tuple[tuple[str, VarKind], ...]:
    items = expect_list(node, "(free ...)").items
    if not items or expect_token(items[0], "free") != "free":
        raise fail(node, "expected (free ...)")
    declared: list[tuple[str, VarKind]] = []
    for item in items[1:]:
        if isinstance(item, Token):
            declared.append((item.text, VarKind.SET))
            continue
        if len(item.items) != 2:
            raise fail(item, "expected (KIND name)")
        kind_text = expect_token(item.items[0], "a variable kind")
        try:
            kind = VarKind(kind_text)
        except ValueError:
            raise fail(item.items[0], f"unknown variable kind {kind_text!r}") from None
        declared.append((expect_token(item.items[1], "a variable name"), kind))
    names = [name for name, _ in declared]
    if len(set(names)) != len(names):
        raise fail(node, "free variables must be distinct")
    if UNIT_WEIGHT in names:
        raise fail(node, f"{UNIT_WEIGHT} is not a variable name")
    return tuple(declared)


def parse_query(text: str) -> Query:
    """``(query (free X ...) (constraint F) (target TERM))``."""
    root = expect_list(read_one(text), "(query ...)")
    if root.head() != "query" or len(root.items) != 4:
        raise fail(root, "expected (query (free ...) (constraint F) (target TERM))")
    free = _parse_free(root.items[1])
    sections = {}
    for item in root.items[2:]:
        section = expect_list(item, "a query section")
        if section.head() not in ("constraint", "target") or len(section.items) != 2:
            raise fail(item, "expected (constraint F) or (target TERM)")
        sections[section.head()] = section.items[1]
    if set(sections) != {"constraint", "target"}:
        raise fail(root, "query needs one constraint and one target")
    constraint = _FormulaParser(dict(free)).formula(sections["constraint"])
    target = _FormulaParser(dict(free), constraint=False).term(sections["target"])
    if not target.is_integral:
        raise fail(sections["target"], "the target must have integer coefficients")
    return Query(free=free, constraint=constraint, target=target)


# ============================================================================
# PRINTER
# ============================================================================


def serialize_term(term: WeightTerm, kinds: Mapping[str, VarKind] | None = None) -> str:
    kinds = kinds or {}
    parts = [f"(term {format_rational(term.constant)}"]
    for (weight, var), coefficient in term.coefficients:
        ref = var if kinds.get(var, VarKind.SET).is_set else f"(single {var})"
        parts.append(f"(coef {weight} {ref} {format_rational(coefficient)})")
    return " ".join(parts) + ")"


def serialize_formula(f: Formula, kinds: Mapping[str, VarKind] | None = None) -> str:
    kinds = dict(kinds or {})

    def show(node: Formula) -> str:
        if isinstance(node, Truth):
            return "true" if node.value else "false"
        if isinstance(node, In):
            return f"(in {node.element} {node.collection})"
        if isinstance(node, Equals):
            return f"(= {node.left} {node.right})"
        if isinstance(node, Adjacent):
            return f"(edge {node.left} {node.right})"
        if isinstance(node, HasColor):
            return f"(color {node.color} {node.var})"
        if isinstance(node, Within):
            return f"(within {node.color} {node.var})"
        if isinstance(node, Card):
            return f"(card {node.residue} {node.modulus} {node.var})"
        if isinstance(node, Single):
            return f"(single {node.var})"
        if isinstance(node, Incident):
            return f"(inc {node.vertex} {node.edge})"
        if isinstance(node, Compare):
            return (
                f"(cmp {node.op.value} {serialize_term(node.left, kinds)} "
                f"{serialize_term(node.right, kinds)})"
            )
        if isinstance(node, (And, Or)):
            head = "and" if isinstance(node, And) else "or"
            return f"({head} {' '.join(show(p) for p in node.parts)})"
        if isinstance(node, Not):
            return f"(not {show(node.body)})"
        exists_kw, forall_kw = KEYWORDS[node.kind]
        keyword = exists_kw if isinstance(node, Exists) else forall_kw
        kinds[node.var] = node.kind
        return f"({keyword} {node.var} {show(node.body)})"

    return show(f)


def serialize_query(query: Query) -> str:
    free = " ".join(
        name if kind is VarKind.SET else f"({kind.value} {name})" for name, kind in query.free
    )
    kinds = query.kinds
    return (
        f"(query (free {free})\n"
        f"  (constraint {serialize_formula(query.constraint, kinds)})\n"
        f"  (target {serialize_term(query.target, kinds)}))\n"
    ).replace("(free )", "(free)")
