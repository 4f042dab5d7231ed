"""Exception hierarchy shared by all view languages and the checker."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A located, taxonomy-tagged finding about a model."""

    message: str
    line: int = 0
    column: int = 0
    code: str = "error"
    # taxonomy tags used by reports
    level: str = "syntactic"
    aspect: str = "structural"

    def __str__(self) -> str:
        if self.line:
            return f"{self.line}:{self.column}: {self.message}"
        return self.message


class ViewNetError(Exception):
    pass


class ParseError(ViewNetError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.message = message


class DiagnosticError(ViewNetError):
    """Raised when a parsed model fails its well-formedness checks."""

    def __init__(self, diagnostics, source: str = ""):
        self.diagnostics = list(diagnostics)
        self.source = source
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{source + ': ' if source else ''}{lines}")


class TypingError(ViewNetError):
    pass


class UnresolvedSymbol(ViewNetError):
    pass


class ResolveError(ViewNetError):
    pass


class AmbiguityError(ResolveError):
    pass
