"""Stella: a small typed functional language with opt-in extensions.

The pipeline is ``parse_program`` → ``typecheck_program`` → ``eval_program``.
"""

from .errors import Diagnostic, Span, StellaTypeError, Tag
from .interp import eval_program, show_outcome, show_value
from .parser import ParseError, parse_expr, parse_pattern, parse_program, parse_type
from .pretty import pretty_expr, pretty_print, pretty_type
from .subtype import subtype
from .typer import Checker, Context, check_program, type_eq, typecheck_program

__all__ = [
    "Checker", "Context", "Diagnostic", "ParseError", "Span", "StellaTypeError", "Tag",
    "check_program", "eval_program", "parse_expr", "parse_pattern", "parse_program", "parse_type",
    "pretty_expr", "pretty_print", "pretty_type", "show_outcome", "show_value", "subtype",
    "type_eq", "typecheck_program",
]
