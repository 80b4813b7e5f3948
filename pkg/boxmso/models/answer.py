"""Answer records produced by the solver."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

NEG_INF = float("-inf")

Witness = dict[str, frozenset]
Value = int | float  # the only float ever stored is NEG_INF


@dataclass
class RunStatistics:
    depth: int = 0
    balanced: bool = False
    unbalanced: bool = False
    b: int = 0
    limit: int = 0
    states: int = 0
    elapsed_ms: float = 0.0

    def merge(self, other: "RunStatistics") -> "RunStatistics":
        return RunStatistics(
            depth=max(self.depth, other.depth),
            balanced=self.balanced or other.balanced,
            unbalanced=self.unbalanced or other.unbalanced,
            b=max(self.b, other.b),
            limit=max(self.limit, other.limit),
            states=max(self.states, other.states),
            elapsed_ms=round(self.elapsed_ms + other.elapsed_ms, 3),
        )


@dataclass
class HalfAnswer:
    """Either ``value == NEG_INF`` (certified) or a witness with its value."""
    value: Value
    witness: Witness | None
    stats: RunStatistics = field(default_factory=RunStatistics)

    @property
    def found(self) -> bool:
        return self.witness is not None


@dataclass
class ApproximateAnswer:
    max_minus: Value
    witness_minus: Witness | None
    max_plus: Value
    witness_plus: Witness | None
    alpha: Fraction
    epsilon_used: Fraction
    stats: RunStatistics = field(default_factory=RunStatistics)


@dataclass
class ExactAnswer:
    value: Value
    witness: Witness | None
    stats: RunStatistics = field(default_factory=RunStatistics)

    @property
    def found(self) -> bool:
        return self.witness is not None

    def as_dict(self) -> dict[str, Any]:
        return {"value": self.value, "witness": self.witness}
