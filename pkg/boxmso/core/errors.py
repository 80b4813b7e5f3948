"""Exception hierarchy with stable, machine-parsable error codes."""

from typing import Any


class BoxmsoError(Exception):
    """Base error. Every subclass carries a fixed ``code``."""

    code = "error"

    def __init__(self, message: str, **detail: Any) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_dict(self) -> dict[str, Any]:
        """Structured form used by the CLI's structured output."""
        return {"error": self.code, "message": self.message, "detail": self.detail}

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ParseError(BoxmsoError):
    """Malformed text input, with the position of the offending token."""

    code = "syntax-error"

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"{message} at {line}:{column}", line=line, column=column)
        self.line = line
        self.column = column


class SymbolNotFoundError(BoxmsoError):
    code = "symbol-not-found"


class MalformedExpressionError(BoxmsoError):
    code = "malformed-expression"


class NotBoxedError(BoxmsoError):
    """The formula leaves the boxed fragment; ``subformula`` names the culprit."""

    code = "not-boxed"

    def __init__(self, message: str, subformula: str = "", reason: str = "") -> None:
        super().__init__(message, subformula=subformula, reason=reason)
        self.subformula = subformula
        self.reason = reason


class UnboundVariableError(BoxmsoError):
    code = "unbound-variable"


class SignatureMismatchError(BoxmsoError):
    code = "signature-mismatch"


class BudgetExceededError(BoxmsoError):
    code = "budget-exceeded"


class OutOfRangeError(BoxmsoError):
    code = "out-of-range"


class ContextMismatchError(BoxmsoError):
    code = "context-mismatch"


class RangeTooSmallError(BoxmsoError):
    code = "range-too-small"


class InvalidInstanceError(BoxmsoError):
    code = "invalid-instance"
