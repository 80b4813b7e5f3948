"""Immutable domain values: graphs, expressions, formulas and answers."""

from boxmso.models.answer import (
    NEG_INF,
    ApproximateAnswer,
    ExactAnswer,
    HalfAnswer,
    RunStatistics,
    Witness,
)
from boxmso.models.expression import (
    Action,
    AddEdges,
    Composite,
    CwExpression,
    Leaf,
    Relabel,
    Union,
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
    conjunction,
    disjunction,
)
from boxmso.models.graph import EDGE_COLOR, UNIT_WEIGHT, Graph, edge_key

__all__ = [
    "NEG_INF",
    "ApproximateAnswer",
    "ExactAnswer",
    "HalfAnswer",
    "RunStatistics",
    "Witness",
    "Action",
    "AddEdges",
    "Composite",
    "CwExpression",
    "Leaf",
    "Relabel",
    "Union",
    "FALSE",
    "TRUE",
    "Adjacent",
    "And",
    "Card",
    "Compare",
    "Equals",
    "Exists",
    "ForAll",
    "Formula",
    "HasColor",
    "In",
    "Incident",
    "Not",
    "Op",
    "Or",
    "Query",
    "Single",
    "Truth",
    "VarKind",
    "WeightTerm",
    "Within",
    "conjunction",
    "disjunction",
    "EDGE_COLOR",
    "UNIT_WEIGHT",
    "Graph",
    "edge_key",
]
