"""Diagnostics and error tags shared by the checker, the interpreter and the CLI."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """1-based line/column range plus absolute offsets into the source."""

    line: int = 0
    column: int = 0
    end_line: int = 0
    end_column: int = 0
    start: int = 0
    end: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"

    def to(self, other: Span) -> Span:
        if other is NO_SPAN:
            return self
        if self is NO_SPAN:
            return other
        return Span(self.line, self.column, other.end_line, other.end_column, self.start, other.end)


NO_SPAN = Span()


class Tag(str, enum.Enum):
    MISSING_MAIN = "ERROR_MISSING_MAIN"
    DUPLICATE_FUNCTION = "ERROR_DUPLICATE_FUNCTION"
    EXTENSION_NOT_ENABLED = "ERROR_EXTENSION_NOT_ENABLED"
    UNDEFINED_VARIABLE = "ERROR_UNDEFINED_VARIABLE"
    NOT_A_FUNCTION = "ERROR_NOT_A_FUNCTION"
    INCORRECT_NUMBER_OF_ARGUMENTS = "ERROR_INCORRECT_NUMBER_OF_ARGUMENTS"
    UNEXPECTED_TYPE_FOR_EXPRESSION = "ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION"
    UNEXPECTED_LAMBDA = "ERROR_UNEXPECTED_LAMBDA"
    UNEXPECTED_TUPLE_LENGTH = "ERROR_UNEXPECTED_TUPLE_LENGTH"
    MISSING_RECORD_FIELDS = "ERROR_MISSING_RECORD_FIELDS"
    UNEXPECTED_RECORD_FIELDS = "ERROR_UNEXPECTED_RECORD_FIELDS"
    UNEXPECTED_VARIANT_LABEL = "ERROR_UNEXPECTED_VARIANT_LABEL"
    AMBIGUOUS_SUM_TYPE = "ERROR_AMBIGUOUS_SUM_TYPE"
    AMBIGUOUS_VARIANT_TYPE = "ERROR_AMBIGUOUS_VARIANT_TYPE"
    AMBIGUOUS_LIST_TYPE = "ERROR_AMBIGUOUS_LIST_TYPE"
    AMBIGUOUS_PANIC_TYPE = "ERROR_AMBIGUOUS_PANIC_TYPE"
    AMBIGUOUS_THROW_TYPE = "ERROR_AMBIGUOUS_THROW_TYPE"
    NONEXHAUSTIVE_MATCH_PATTERNS = "ERROR_NONEXHAUSTIVE_MATCH_PATTERNS"
    ILLEGAL_EMPTY_MATCHING = "ERROR_ILLEGAL_EMPTY_MATCHING"
    UNEXPECTED_PATTERN_FOR_TYPE = "ERROR_UNEXPECTED_PATTERN_FOR_TYPE"
    EXCEPTION_TYPE_NOT_DECLARED = "ERROR_EXCEPTION_TYPE_NOT_DECLARED"
    UNEXPECTED_SUBTYPE = "ERROR_UNEXPECTED_SUBTYPE"
    UNDEFINED_TYPE_VARIABLE = "ERROR_UNDEFINED_TYPE_VARIABLE"
    NOT_A_GENERIC_FUNCTION = "ERROR_NOT_A_GENERIC_FUNCTION"
    INCORRECT_NUMBER_OF_TYPE_ARGUMENTS = "ERROR_INCORRECT_NUMBER_OF_TYPE_ARGUMENTS"
    OCCURS_CHECK_INFINITE_TYPE = "ERROR_OCCURS_CHECK_INFINITE_TYPE"
    UNDEFINED_TYPE_ALIAS = "ERROR_UNDEFINED_TYPE_ALIAS"
    CYCLIC_TYPE_ALIAS = "ERROR_CYCLIC_TYPE_ALIAS"
    AMBIGUOUS_REFERENCE_TYPE = "ERROR_AMBIGUOUS_REFERENCE_TYPE"
    # Tags below are named by individual operations but absent from the base list.
    DUPLICATE_PATTERN_VARIABLE = "ERROR_DUPLICATE_PATTERN_VARIABLE"
    NOT_A_REFERENCE = "ERROR_NOT_A_REFERENCE"
    INCORRECT_ARITY_OF_MAIN = "ERROR_INCORRECT_ARITY_OF_MAIN"
    CONFLICTING_EXTENSIONS = "ERROR_CONFLICTING_EXTENSIONS"
    UNKNOWN_EXTENSION = "ERROR_UNKNOWN_EXTENSION"
    NOT_A_TUPLE = "ERROR_NOT_A_TUPLE"
    NOT_A_RECORD = "ERROR_NOT_A_RECORD"
    NOT_A_LIST = "ERROR_NOT_A_LIST"
    TUPLE_INDEX_OUT_OF_BOUNDS = "ERROR_TUPLE_INDEX_OUT_OF_BOUNDS"
    UNEXPECTED_FIELD_ACCESS = "ERROR_UNEXPECTED_FIELD_ACCESS"
    DUPLICATE_RECORD_FIELDS = "ERROR_DUPLICATE_RECORD_FIELDS"
    DUPLICATE_VARIANT_LABELS = "ERROR_DUPLICATE_VARIANT_LABELS"
    DUPLICATE_PARAMETER = "ERROR_DUPLICATE_PARAMETER"
    DUPLICATE_TYPE_ALIAS = "ERROR_DUPLICATE_TYPE_ALIAS"
    DUPLICATE_EXCEPTION_TYPE = "ERROR_DUPLICATE_EXCEPTION_TYPE"

    def __str__(self) -> str:
        return self.value


ALL_TAGS = frozenset(t.value for t in Tag)


@dataclass(frozen=True)
class Diagnostic:
    tag: Tag
    message: str
    span: Span = NO_SPAN
    notes: tuple[str, ...] = field(default=())

    def format(self, path: str = "<input>") -> str:
        return f"{self.tag.value}: {self.message} at {path}:{self.span.line}:{self.span.column}"

    def as_json(self, path: str = "<input>") -> dict:
        return {
            "tag": self.tag.value,
            "message": self.message,
            "line": self.span.line,
            "column": self.span.column,
            "file": path,
        }


class StellaTypeError(Exception):
    """Raised by the checker; carries a single diagnostic (first error wins)."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(f"{diagnostic.tag.value}: {diagnostic.message}")
        self.diagnostic = diagnostic

    @property
    def tag(self) -> Tag:
        return self.diagnostic.tag


def fail(tag: Tag, message: str, span: Span = NO_SPAN, *notes: str) -> StellaTypeError:
    return StellaTypeError(Diagnostic(tag, message, span, tuple(notes)))
