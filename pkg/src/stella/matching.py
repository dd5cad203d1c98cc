"""Pattern typing, match expressions and exhaustiveness for simple patterns."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional, Sequence

from . import syntax as s
from .errors import Span, Tag, fail
from .pretty import pretty_pattern

if TYPE_CHECKING:
    from .typer import Checker, Context

_HEAD_GATES: dict[type, tuple[tuple[str, ...], str]] = {
    s.PInl: (("#sum-types",), "sum patterns"),
    s.PInr: (("#sum-types",), "sum patterns"),
    s.PVariant: (("#variants",), "variant patterns"),
    s.PRecord: (("#records",), "record patterns"),
    s.PList: (("#lists",), "list patterns"),
    s.PCons: (("#lists",), "list patterns"),
    s.PUnit: (("#unit-type",), "unit patterns"),
    s.PTrue: (("#structural-patterns",), "boolean patterns"),
    s.PFalse: (("#structural-patterns",), "boolean patterns"),
    s.PZero: (("#structural-patterns",), "natural-number patterns"),
    s.PSucc: (("#structural-patterns",), "natural-number patterns"),
    s.PAscription: (("#type-ascriptions",), "pattern ascriptions"),
}


def _strip(p: s.Pattern) -> s.Pattern:
    while isinstance(p, s.PAscription):
        p = p.pat
    return p


def _is_binder(p: s.Pattern) -> bool:
    return isinstance(_strip(p), (s.PVar, s.PWildcard))


def _gate(checker: Checker, ctx: Context, p: s.Pattern) -> None:
    match p:
        case s.PTuple(ps):
            exts = ("#pairs", "#tuples") if len(ps) == 2 else ("#tuples",)
            checker.require(ctx, exts, "tuple patterns", p.span)
        case s.PInt():
            checker.require(ctx, ("#natural-literals",), "natural literal patterns", p.span)
            checker.require(ctx, ("#structural-patterns",), "natural-number patterns", p.span)
        case _ if type(p) in _HEAD_GATES:
            exts, what = _HEAD_GATES[type(p)]
            checker.require(ctx, exts, what, p.span)
    if not isinstance(p, s.PAscription) and not all(_is_binder(q) for q in s.sub_patterns(p)):
        checker.require(ctx, ("#structural-patterns",), "nested patterns", p.span)


def _refine_meta(checker: Checker, p: s.Pattern, t: s.Type) -> s.Type:
    """Give a metavariable scrutinee the shape demanded by the pattern head."""
    shape: Optional[s.Type]
    match p:
        case s.PTrue() | s.PFalse():
            shape = s.BOOL
        case s.PZero() | s.PSucc() | s.PInt():
            shape = s.NAT
        case s.PUnit():
            shape = s.UNIT
        case s.PInl() | s.PInr():
            shape = s.TySum(checker.fresh(), checker.fresh())
        case s.PTuple(ps):
            shape = s.TyTuple(tuple(checker.fresh() for _ in ps))
        case s.PRecord(fields):
            shape = s.TyRecord(tuple((k, checker.fresh()) for k, _ in fields))
        case s.PList() | s.PCons():
            shape = s.TyList(checker.fresh())
        case s.PVariant():
            raise fail(Tag.AMBIGUOUS_VARIANT_TYPE,
                       "cannot infer a variant type from a pattern; annotate the scrutinee", p.span)
        case _:
            shape = None
    return t if shape is None else checker.constrain(t, shape, p.span)


def _mismatch(checker: Checker, p: s.Pattern, t: s.Type) -> Exception:
    return fail(Tag.UNEXPECTED_PATTERN_FOR_TYPE,
                f"pattern {pretty_pattern(p)} does not match type {checker.show(t)}", p.span)


def _bind(checker: Checker, ctx: Context, p: s.Pattern, t: s.Type, out: dict[str, s.Type]) -> None:
    _gate(checker, ctx, p)
    if checker.is_meta(t):
        t = _refine_meta(checker, p, t)
    if isinstance(t, s.TyBot):
        for q in s.sub_patterns(p):
            _bind(checker, ctx, q, s.BOT, out)
        if isinstance(p, s.PVar):
            _add(out, p, t)
        return
    match p, t:
        case s.PVar(), _:
            _add(out, p, t)
        case s.PWildcard(), _:
            pass
        case s.PAscription(q, ty), _:
            annotated = checker.resolve(ctx, ty, p.span)
            if checker.recon is not None and (s.metavars(t) or s.metavars(annotated)):
                checker.constrain(t, annotated, p.span)
            elif not checker.types_equal(t, annotated):
                raise _mismatch(checker, p, t)
            _bind(checker, ctx, q, annotated, out)
        case (s.PTrue() | s.PFalse()), s.TyBool():
            pass
        case (s.PZero() | s.PInt()), s.TyNat():
            pass
        case s.PSucc(q), s.TyNat():
            _bind(checker, ctx, q, s.NAT, out)
        case s.PUnit(), s.TyUnit():
            pass
        case s.PInl(q), s.TySum(left, _):
            _bind(checker, ctx, q, left, out)
        case s.PInr(q), s.TySum(_, right):
            _bind(checker, ctx, q, right, out)
        case s.PVariant(label, q), s.TyVariant():
            ft = t.get(label)
            if ft is None:
                raise fail(Tag.UNEXPECTED_PATTERN_FOR_TYPE,
                           f"label {label} does not occur in {checker.show(t)}", p.span)
            _bind(checker, ctx, q, ft, out)
        case s.PTuple(ps), s.TyTuple(items) if len(ps) == len(items):
            for q, it in zip(ps, items):
                _bind(checker, ctx, q, it, out)
        case s.PRecord(fields), s.TyRecord():
            for label, q in fields:
                ft = t.get(label)
                if ft is None:
                    raise fail(Tag.UNEXPECTED_PATTERN_FOR_TYPE,
                               f"record type {checker.show(t)} has no field {label}", p.span)
                _bind(checker, ctx, q, ft, out)
        case s.PList(ps), s.TyList(elem):
            for q in ps:
                _bind(checker, ctx, q, elem, out)
        case s.PCons(head, tail), s.TyList(elem):
            _bind(checker, ctx, head, elem, out)
            _bind(checker, ctx, tail, t, out)
        case _:
            raise _mismatch(checker, p, t)


def _add(out: dict[str, s.Type], p: s.PVar, t: s.Type) -> None:
    if p.name in out:
        raise fail(Tag.DUPLICATE_PATTERN_VARIABLE,
                   f"variable {p.name} occurs more than once in a pattern", p.span)
    out[p.name] = t


def pattern_bindings(checker: Checker, ctx: Context, p: s.Pattern, t: s.Type) -> dict[str, s.Type]:
    """Variables bound by ``p`` against a value of type ``t``, in source order."""
    out: dict[str, s.Type] = {}
    _bind(checker, ctx, p, t, out)
    return out


def is_exhaustive(t: s.Type, patterns: Sequence[s.Pattern]) -> bool:
    """Coverage for simple patterns: does every value of ``t`` match some pattern?"""
    heads = [_strip(p) for p in patterns]
    if any(isinstance(p, (s.PVar, s.PWildcard)) for p in heads):
        return True
    kinds = {type(p) for p in heads}
    match t:
        case s.TyBot():
            return True
        case s.TyBool():
            return {s.PTrue, s.PFalse} <= kinds
        case s.TyNat():
            return (any(isinstance(p, s.PZero) or isinstance(p, s.PInt) and p.value == 0 for p in heads)
                    and any(isinstance(p, s.PSucc) and _is_binder(p.pat) for p in heads))
        case s.TyUnit():
            return s.PUnit in kinds
        case s.TySum():
            return {s.PInl, s.PInr} <= kinds
        case s.TyVariant(fields):
            covered = {p.label for p in heads if isinstance(p, s.PVariant) and _is_binder(p.pat)}
            return all(k in covered for k, _ in fields)
        case s.TyList():
            has_nil = any(isinstance(p, s.PList) and not p.pats for p in heads)
            has_cons = any(isinstance(p, s.PCons) and _is_binder(p.head) and _is_binder(p.tail)
                           for p in heads)
            return has_nil and has_cons
        case s.TyTuple():
            return any(isinstance(p, s.PTuple) and all(map(_is_binder, p.pats)) for p in heads)
        case s.TyRecord():
            return any(isinstance(p, s.PRecord) and all(_is_binder(q) for _, q in p.fields)
                       for p in heads)
    return False


def require_exhaustive(checker: Checker, ctx: Context, t: s.Type, patterns: Sequence[s.Pattern],
                       span: Span) -> None:
    if not all(s.is_simple_pattern(p) for p in patterns):
        return
    if checker.recon is not None and checker.solution is None and s.metavars(t):
        checker.deferred.append((t, list(patterns), span))
        return
    if not is_exhaustive(t, patterns):
        raise fail(Tag.NONEXHAUSTIVE_MATCH_PATTERNS,
                   f"match patterns are not exhaustive for type {checker.show(t)}", span)


def check_match(checker: Checker, ctx: Context, scrutinee_type: s.Type,
                cases: Sequence[tuple[s.Pattern, s.Expr]], expected: Optional[s.Type],
                e: s.Expr) -> s.Type:
    if not cases:
        raise fail(Tag.ILLEGAL_EMPTY_MATCHING, "match expression has no cases", e.span)
    result = expected
    if result is None and checker.recon is not None:
        result = checker.fresh()
    for pat, body in cases:
        inner = ctx.bind(pattern_bindings(checker, ctx, pat, scrutinee_type))
        if result is None:
            result = checker.infer(inner, body)
        else:
            checker.check(inner, body, result)
    require_exhaustive(checker, ctx, scrutinee_type, [p for p, _ in cases], e.span)
    return result
