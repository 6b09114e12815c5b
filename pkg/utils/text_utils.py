"""Reading and writing of SMT-LIB style s-expressions."""
from __future__ import annotations

from typing import Iterable, List, Tuple, Union

SExpr = Union[str, List["SExpr"]]
Position = Tuple[int, int]


class SExprSyntaxError(ValueError):
    """Raised for unbalanced parentheses or unterminated literals."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


def text_matches(text: str, triggers: Iterable[str]) -> bool:
    """Return True if any trigger is present in lowercase ``text``."""
    lower = text.lower()
    return any(t in lower for t in triggers)


def _tokens(text: str):
    """Yield ``(token, line, column)``; quoted symbols lose their bars."""
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield ch, line, col
            i, col = i + 1, col + 1
            continue
        start_line, start_col = line, col
        if ch in "|\"":
            end = text.find(ch, i + 1)
            if end < 0:
                raise SExprSyntaxError("unterminated literal", start_line, start_col)
            body = text[i + 1:end]
            token = body if ch == "|" else text[i:end + 1]
            newlines = body.count("\n")
            if newlines:
                line += newlines
                col = len(body) - body.rfind("\n") + 1
            else:
                col += end + 1 - i
            i = end + 1
            yield token, start_line, start_col
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        yield text[i:j], start_line, start_col
        col += j - i
        i = j


def read_sexps(text: str) -> List[Tuple[SExpr, Position]]:
    """Parse ``text`` into top-level forms, each with its start position."""
    forms: List[Tuple[SExpr, Position]] = []
    stack: List[Tuple[list, Position]] = []
    for token, line, col in _tokens(text):
        if token == "(":
            stack.append(([], (line, col)))
        elif token == ")":
            if not stack:
                raise SExprSyntaxError("unexpected ')'", line, col)
            done, pos = stack.pop()
            if stack:
                stack[-1][0].append(done)
            else:
                forms.append((done, pos))
        elif stack:
            stack[-1][0].append(token)
        else:
            forms.append((token, (line, col)))
    if stack:
        _, (line, col) = stack[-1]
        raise SExprSyntaxError("unclosed '('", line, col)
    return forms


def format_sexp(expr: SExpr) -> str:
    if isinstance(expr, str):
        return expr
    return "(" + " ".join(format_sexp(e) for e in expr) + ")"
