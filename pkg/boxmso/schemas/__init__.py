"""Pydantic documents for everything the command line reads or writes."""

from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import orjson
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from boxmso.engine.queries import format_rational
from boxmso.models.answer import (
    NEG_INF,
    ApproximateAnswer,
    ExactAnswer,
    RunStatistics,
    Value,
    Witness,
)
from boxmso.models.formula import VarKind

# ============================================================================
# HELPER FUNCTIONS
# ============================================================================


def dumps(document: BaseModel) -> bytes:
    """Stable JSON: sorted keys, unset optional fields dropped."""
    return orjson.dumps(
        document.model_dump(mode="json", exclude_none=True),
        option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2,
    )


def encode_value(value: Value) -> int | str:
    if value == NEG_INF:
        return "-inf"
    return int(value)


def decode_value(value: int | str) -> Value:
    if value == "-inf":
        return NEG_INF
    return int(value)


def encode_witness(witness: Witness | None) -> dict[str, list] | None:
    """Members in sorted order; edges as ``[u, v]`` pairs."""
    if witness is None:
        return None
    return {
        name: [list(x) if isinstance(x, tuple) else x for x in sorted(members)]
        for name, members in witness.items()
    }


def decode_witness(
    document: dict[str, list] | None, kinds: dict[str, VarKind]
) -> Witness | None:
    if document is None:
        return None
    witness: Witness = {}
    for name, members in document.items():
        if kinds.get(name, VarKind.SET).is_edge:
            witness[name] = frozenset(tuple(sorted(m)) for m in members)
        else:
            witness[name] = frozenset(int(m) for m in members)
    return witness


def parse_epsilon(value: Any) -> Fraction:
    """A decimal or rational literal, read exactly."""
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"epsilon must be a decimal or rational literal, got {value!r}") from None


# ============================================================================
# ENUMS
# ============================================================================


class Mode(str, Enum):
    """Which answer a run computes."""
    APPROX = "approx"
    EXACT = "exact"
    CHECK = "check"


class OutputFormat(str, Enum):
    TEXT = "text"
    STRUCTURED = "structured"


# ============================================================================
# RUN DOCUMENTS
# ============================================================================


class RunStats(BaseModel):
    """Counters of one run; ``elapsed_ms`` only when tracing, so plain output is reproducible."""
    depth: int
    balanced: bool
    unbalanced: bool
    b: int
    N: int
    states: int
    elapsed_ms: float | None = None

    @classmethod
    def from_statistics(cls, stats: RunStatistics, timed: bool = False) -> "RunStats":
        return cls(
            depth=stats.depth,
            balanced=stats.balanced,
            unbalanced=stats.unbalanced,
            b=stats.b,
            N=stats.limit,
            states=stats.states,
            elapsed_ms=stats.elapsed_ms if timed else None,
        )


class AnswerDocument(BaseModel):
    """An approximate answer as written by ``solve`` and read by ``check``."""
    max_minus: int | str
    witness_minus: dict[str, list] | None = None
    max_plus: int | str
    witness_plus: dict[str, list] | None = None
    alpha: str
    epsilon_used: str
    stats: RunStats | None = None
    decoded_minus: dict[str, Any] | None = None
    decoded_plus: dict[str, Any] | None = None
    note: str | None = None

    @field_validator("max_minus", "max_plus")
    @classmethod
    def check_value(cls, v: int | str) -> int | str:
        if isinstance(v, str) and v != "-inf":
            raise ValueError("values are integers or the string '-inf'")
        return v

    @classmethod
    def from_answer(cls, answer: ApproximateAnswer, timed: bool = False) -> "AnswerDocument":
        return cls(
            max_minus=encode_value(answer.max_minus),
            witness_minus=encode_witness(answer.witness_minus),
            max_plus=encode_value(answer.max_plus),
            witness_plus=encode_witness(answer.witness_plus),
            alpha=format_rational(answer.alpha),
            epsilon_used=format_rational(answer.epsilon_used),
            stats=RunStats.from_statistics(answer.stats, timed),
        )

    def to_answer(self, kinds: dict[str, VarKind]) -> ApproximateAnswer:
        return ApproximateAnswer(
            max_minus=decode_value(self.max_minus),
            witness_minus=decode_witness(self.witness_minus, kinds),
            max_plus=decode_value(self.max_plus),
            witness_plus=decode_witness(self.witness_plus, kinds),
            alpha=Fraction(self.alpha),
            epsilon_used=Fraction(self.epsilon_used),
        )


class ExactDocument(BaseModel):
    status: Literal["solution", "no-solution"]
    value: int | str
    witness: dict[str, list] | None = None
    stats: RunStats | None = None
    decoded: dict[str, Any] | None = None

    @classmethod
    def from_answer(cls, answer: ExactAnswer, timed: bool = False) -> "ExactDocument":
        return cls(
            status="solution" if answer.found else "no-solution",
            value=encode_value(answer.value),
            witness=encode_witness(answer.witness),
            stats=RunStats.from_statistics(answer.stats, timed),
        )


class VerdictDocument(BaseModel):
    verdict: Literal["valid", "invalid"]
    reasons: list[str] = Field(default_factory=list)


class SuiteFailure(BaseModel):
    name: str
    reasons: list[str]


class SuiteDocument(BaseModel):
    cases: int
    passed: int
    failed: int
    skipped: int
    failures: list[SuiteFailure] = Field(default_factory=list)


class ErrorDocument(BaseModel):
    error: str
    message: str
    detail: dict[str, Any] = Field(default_factory=dict)


# ============================================================================
# RUN CONFIGURATION
# ============================================================================


class RunConfig(BaseModel):
    """Everything one command invocation needs."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    graph: Path | None = None
    expression: Path | None = None
    query: Path | None = None
    instance: Path | None = None
    answer: Path | None = None
    epsilon: Fraction = Fraction(1, 4)
    mode: Mode = Mode.APPROX
    output_format: OutputFormat = OutputFormat.TEXT
    budget: int | None = Field(default=None, gt=0)
    balance: bool = True
    threads: int = Field(default=1, ge=1)
    trace: bool = False
    seed: int = 0

    @field_validator("epsilon", mode="before")
    @classmethod
    def read_epsilon(cls, v: Any) -> Fraction:
        if isinstance(v, Fraction):
            return v
        return parse_epsilon(v)

    @field_validator("graph", "expression", "query", "instance", "answer")
    @classmethod
    def must_exist(cls, v: Path | None) -> Path | None:
        if v is not None and not v.is_file():
            raise ValueError(f"{v} is not a readable file")
        return v

    @model_validator(mode="after")
    def check_epsilon(self) -> "RunConfig":
        if self.mode is Mode.APPROX and not 0 < self.epsilon <= Fraction(1, 2):
            raise ValueError(f"epsilon must lie in (0, 1/2], got {format_rational(self.epsilon)}")
        return self


__all__ = [
    "dumps",
    "encode_value",
    "decode_value",
    "encode_witness",
    "decode_witness",
    "parse_epsilon",
    "Mode",
    "OutputFormat",
    "RunStats",
    "AnswerDocument",
    "ExactDocument",
    "VerdictDocument",
    "SuiteFailure",
    "SuiteDocument",
    "ErrorDocument",
    "RunConfig",
]
