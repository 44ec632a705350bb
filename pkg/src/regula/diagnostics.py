"""Diagnostics: source spans and accumulated error reporting.

Every front-end stage (parse, schema validation, type checking, dataset
loading) reports *all* independent violations, not just the first, so a
diagnostic is a value and failures carry lists of them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError("span start after end")

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        start = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        end = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return SourceSpan(self.file, start[0], start[1], end[0], end[1])


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan | None = None

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.span}: {self.code}: {self.message}"
        return f"{self.code}: {self.message}"


class DiagnosticError(Exception):
    """Raised by operations whose contract is "succeed or return every violation"."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
