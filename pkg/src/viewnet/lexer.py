"""Tokenizer and cursor shared by the .cd/.od/.stm/.sd/.cmp/.dol parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, List, Optional

from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<raw>\"\"\"(?:.|\n)*?\"\"\")
  | (?P<string>"[^"\n]*")
  | (?P<annot>%[A-Za-z_]\w*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op>\|->|->|--|\.\.|:=|==|!=|<=|>=|&&|\|\||[<>+\-!(){}\[\],;:.=*/|∧∨¬])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, string, raw, annot, op, eof
    text: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.column})"


def tokenize(text: str, source: str = "") -> List[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "string":
                value = value[1:-1]
            elif kind == "raw":
                value = value[3:-3]
            tokens.append(Token(kind, value, line, col))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            col = len(m.group()) - m.group().rfind("\n")
        else:
            col += len(m.group())
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class Cursor:
    """Recursive-descent helper over a token list."""

    def __init__(self, text: str, source: str = ""):
        self.source = source
        self.tokens = tokenize(text, source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def at_kind(self, kind: str) -> bool:
        return self.tok.kind == kind

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, *texts: str) -> Optional[Token]:
        if self.at(*texts):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance().text

    def integer(self) -> int:
        neg = self.accept("-") is not None
        if self.tok.kind != "int":
            self.error(f"expected integer, found {self.describe(self.tok)}")
        v = int(self.advance().text)
        return -v if neg else v

    def skip_semis(self) -> None:
        while self.accept(";"):
            pass

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.describe(self.tok)}")

    def error(self, message: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(message, t.line, t.column, self.source)

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)


def join_names(names: Iterable[str]) -> str:
    return ", ".join(names)
