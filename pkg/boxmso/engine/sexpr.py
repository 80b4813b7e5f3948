"""Position-tracking s-expression reader shared by the expression and query parsers."""

from dataclasses import dataclass

from boxmso.core.errors import ParseError


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int
    column: int

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Token):
            return self.items[0].text
        return None


SExpr = Token | SList


class _Reader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.i = 0
        self.line = 1
        self.column = 1

    def _advance(self) -> None:
        if self.text[self.i] == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        self.i += 1

    def skip_whitespace(self) -> None:
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch == ";":
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self._advance()
            elif ch.isspace():
                self._advance()
            else:
                return

    def read(self) -> SExpr:
        self.skip_whitespace()
        if self.i >= len(self.text):
            raise ParseError("unexpected end of input", self.line, self.column)
        ch = self.text[self.i]
        if ch == "(":
            return self._read_list()
        if ch == ")":
            raise ParseError("unbalanced ')'", self.line, self.column)
        return self._read_token()

    def _read_list(self) -> SList:
        line, column = self.line, self.column
        self._advance()
        items: list[SExpr] = []
        while True:
            self.skip_whitespace()
            if self.i >= len(self.text):
                raise ParseError("list not closed", line, column)
            if self.text[self.i] == ")":
                self._advance()
                return SList(tuple(items), line, column)
            items.append(self.read())

    def _read_token(self) -> Token:
        line, column = self.line, self.column
        start = self.i
        while (
            self.i < len(self.text)
            and not self.text[self.i].isspace()
            and self.text[self.i] not in "();"
        ):
            self._advance()
        return Token(self.text[start:self.i], line, column)


def read_one(text: str) -> SExpr:
    """Read exactly one s-expression; trailing content is an error."""
    reader = _Reader(text)
    value = reader.read()
    reader.skip_whitespace()
    if reader.i < len(text):
        raise ParseError("trailing content after expression", reader.line, reader.column)
    return value


def fail(node: SExpr, message: str) -> ParseError:
    return ParseError(message, node.line, node.column)


def expect_list(node: SExpr, what: str) -> SList:
    if not isinstance(node, SList):
        raise fail(node, f"expected {what}")
    return node


def expect_token(node: SExpr, what: str) -> str:
    if not isinstance(node, Token):
        raise fail(node, f"expected {what}")
    return node.text


def expect_natural(node: SExpr, what: str, minimum: int = 0) -> int:
    text = expect_token(node, what)
    if not text.isdigit():
        raise fail(node, f"expected {what}, got {text!r}")
    value = int(text)
    if value < minimum:
        raise fail(node, f"{what} must be at least {minimum}")
    return value


def expect_integer(node: SExpr, what: str) -> int:
    text = expect_token(node, what)
    try:
        return int(text)
    except ValueError:
        raise fail(node, f"expected {what}, got {text!r}") from None
