"""Position-tracking s-expression reader for PDDL text.

Atoms are returned as :class:`Token` (a ``str`` subclass carrying its
source position) and lists as :class:`SList`. Everything is lowercased
because PDDL identifiers are case-insensitive.
"""

from __future__ import annotations

from .errors import PddlSyntaxError


class Token(str):
    line: int
    column: int

    def __new__(cls, value: str, line: int = 0, column: int = 0):
        tok = super().__new__(cls, value)
        tok.line = line
        tok.column = column
        return tok


class SList(list):
    def __init__(self, items=(), line: int = 0, column: int = 0):
        super().__init__(items)
        self.line = line
        self.column = column


_DELIMS = frozenset("();")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    line, line_start = 1, 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, i - line_start + 1))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS:
                j += 1
            tokens.append(Token(text[i:j].lower(), line, i - line_start + 1))
            i = j
    return tokens


def parse_all(text: str) -> list:
    """Read every top-level expression in ``text``."""
    tokens = tokenize(text)
    out = []
    pos = 0
    while pos < len(tokens):
        expr, pos = _read(tokens, pos)
        out.append(expr)
    return out


def parse_one(text: str):
    exprs = parse_all(text)
    if not exprs:
        raise PddlSyntaxError("empty document", expected="'('")
    if len(exprs) > 1:
        extra = exprs[1]
        raise PddlSyntaxError("trailing content after document", extra.line, extra.column, "end of input")
    return exprs[0]


def _read(tokens: list[Token], pos: int):
    tok = tokens[pos]
    if tok == ")":
        raise PddlSyntaxError("unbalanced ')'", tok.line, tok.column, "'(' or atom")
    if tok != "(":
        return tok, pos + 1
    items = SList(line=tok.line, column=tok.column)
    pos += 1
    while True:
        if pos >= len(tokens):
            raise PddlSyntaxError(f"list opened at line {tok.line}, column {tok.column} is never closed",
                                  expected="')'")
        if tokens[pos] == ")":
            return items, pos + 1
        item, pos = _read(tokens, pos)
        items.append(item)


def dump(expr) -> str:
    if isinstance(expr, list):
        return "(" + " ".join(dump(e) for e in expr) + ")"
    return str(expr)
