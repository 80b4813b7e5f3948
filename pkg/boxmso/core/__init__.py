"""Core infrastructure components."""

from boxmso.core.budget import EnumerationBudget
from boxmso.core.config import Limits, Settings, get_settings, settings
from boxmso.core.errors import (
    BoxmsoError,
    BudgetExceededError,
    ContextMismatchError,
    InvalidInstanceError,
    MalformedExpressionError,
    NotBoxedError,
    OutOfRangeError,
    ParseError,
    RangeTooSmallError,
    SignatureMismatchError,
    SymbolNotFoundError,
    UnboundVariableError,
)
from boxmso.core.events import Stopwatch, TraceEvent, TraceRecorder

__all__ = [
    "settings",
    "get_settings",
    "Settings",
    "Limits",
    "EnumerationBudget",
    "TraceEvent",
    "TraceRecorder",
    "Stopwatch",
    "BoxmsoError",
    "BudgetExceededError",
    "ContextMismatchError",
    "InvalidInstanceError",
    "MalformedExpressionError",
    "NotBoxedError",
    "OutOfRangeError",
    "ParseError",
    "RangeTooSmallError",
    "SignatureMismatchError",
    "SymbolNotFoundError",
    "UnboundVariableError",
]
