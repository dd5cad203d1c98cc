"""Typing rules for references, sequencing, panics and exceptions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from . import syntax as s
from .errors import Tag, fail
from .matching import pattern_bindings

if TYPE_CHECKING:
    from .typer import Checker, Context


@dataclass(frozen=True)
class ExceptionEnv:
    """How exceptions are declared: not at all, one fixed type, or open variant labels."""

    mode: str = "none"
    fixed: Optional[s.Type] = None
    labels: tuple[tuple[str, s.Type], ...] = ()

    @property
    def carrier(self) -> Optional[s.Type]:
        if self.mode == "fixed":
            return self.fixed
        if self.mode == "open":
            return s.TyVariant(self.labels)
        return None


NO_EXCEPTIONS = ExceptionEnv()


def exception_env(checker: Checker, ctx: Context, program: s.Program) -> ExceptionEnv:
    fixed: Optional[s.Type] = None
    labels: dict[str, s.Type] = {}
    for d in program.decls:
        match d:
            case s.ExceptionTypeDecl(ty):
                checker.require(ctx, ("#exception-type-declaration",), "exception type declarations", d.span)
                if fixed is not None:
                    raise fail(Tag.DUPLICATE_EXCEPTION_TYPE, "the exception type is declared twice", d.span)
                fixed = checker.resolve(ctx, ty, d.span)
            case s.ExceptionVariantDecl(label, ty):
                checker.require(ctx, ("#open-variant-exceptions",), "exception variants", d.span)
                if label in labels:
                    raise fail(Tag.DUPLICATE_VARIANT_LABELS, f"exception variant {label} is declared twice",
                               d.span)
                labels[label] = checker.resolve(ctx, ty, d.span)
    if fixed is not None and labels:
        raise fail(Tag.CONFLICTING_EXTENSIONS,
                   "a program cannot declare both an exception type and exception variants")
    if fixed is not None:
        return ExceptionEnv("fixed", fixed)
    if labels:
        return ExceptionEnv("open", labels=tuple(labels.items()))
    return NO_EXCEPTIONS


def check_sequence(checker: Checker, ctx: Context, first: s.Expr, second: s.Expr,
                   expected: Optional[s.Type], e: s.Expr) -> s.Type:
    checker.require(ctx, ("#sequencing",), "sequencing", e.span)
    checker.check(ctx, first, s.UNIT)
    if expected is None:
        return checker.infer(ctx, second)
    checker.check(ctx, second, expected)
    return expected


def _ref_elem(checker: Checker, ctx: Context, target: s.Expr) -> s.Type:
    t = checker.infer(ctx, target)
    if checker.is_meta(t):
        t = checker.constrain(t, s.TyRef(checker.fresh()), target.span)
    if not isinstance(t, s.TyRef):
        raise fail(Tag.NOT_A_REFERENCE, f"expected a reference but got {checker.show(t)}", target.span)
    return t.elem


def check_ref_ops(checker: Checker, ctx: Context, e: s.NewRef | s.Deref | s.Assign,
                  expected: Optional[s.Type]) -> s.Type:
    checker.require(ctx, ("#references",), "references", e.span)
    match e:
        case s.NewRef(x):
            if isinstance(expected, s.TyRef):
                checker.check(ctx, x, expected.elem)
                return expected
            return s.TyRef(checker.infer(ctx, x))
        case s.Deref(x):
            return _ref_elem(checker, ctx, x)
        case s.Assign(target, value):
            checker.check(ctx, value, _ref_elem(checker, ctx, target))
            return s.UNIT
    raise TypeError(f"not a reference operation: {e!r}")


def _anywhere(checker: Checker, expected: Optional[s.Type], tag: Tag, what: str, e: s.Expr) -> s.Type:
    """Result type for forms that never return normally and so fit any expected type."""
    if expected is not None:
        return expected
    if checker.recon is not None:
        return checker.fresh()
    raise fail(tag, f"cannot infer the type of {what}; add a type ascription", e.span)


def check_exceptions(checker: Checker, ctx: Context, e: s.Expr, expected: Optional[s.Type]) -> s.Type:
    match e:
        case s.Panic():
            checker.require(ctx, ("#panic",), "panic!", e.span)
            return _anywhere(checker, expected, Tag.AMBIGUOUS_PANIC_TYPE, "panic!", e)
        case s.Throw(x):
            checker.require(ctx, ("#exceptions",), "throw", e.span)
            carrier = ctx.exception_type
            if carrier is None:
                raise fail(Tag.EXCEPTION_TYPE_NOT_DECLARED, "throw used without an exception type", e.span)
            checker.check(ctx, x, carrier)
            return _anywhere(checker, expected, Tag.AMBIGUOUS_THROW_TYPE, "throw", e)
        case s.TryWith(body, fallback):
            checker.require(ctx, ("#exceptions",), "try/with", e.span)
            result = _try_body(checker, ctx, body, expected)
            checker.check(ctx, fallback, result)
            return result
        case s.TryCatch(body, pat, handler):
            checker.require(ctx, ("#exceptions",), "try/catch", e.span)
            carrier = ctx.exception_type
            if carrier is None:
                raise fail(Tag.EXCEPTION_TYPE_NOT_DECLARED, "catch used without an exception type", e.span)
            result = _try_body(checker, ctx, body, expected)
            checker.check(ctx.bind(pattern_bindings(checker, ctx, pat, carrier)), handler, result)
            return result
    raise TypeError(f"not an exception form: {e!r}")


def _try_body(checker: Checker, ctx: Context, body: s.Expr, expected: Optional[s.Type]) -> s.Type:
    if expected is None and checker.recon is not None:
        expected = checker.fresh()
    if expected is None:
        return checker.infer(ctx, body)
    checker.check(ctx, body, expected)
    return expected
