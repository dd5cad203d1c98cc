"""Structural subtyping with Top/Bot and the ``cast as`` rule."""

from __future__ import annotations

from typing import TYPE_CHECKING

from . import syntax as s
from .errors import Tag, fail
from .poly import free_type_vars, fresh_name, substitute

if TYPE_CHECKING:
    from .typer import Checker, Context


def _common_binders(n: int, a: s.Type, b: s.Type) -> list[str]:
    avoid = free_type_vars(a) | free_type_vars(b)
    names = []
    for _ in range(n):
        name = fresh_name("_T", avoid)
        avoid.add(name)
        names.append(name)
    return names


def subtype(sub: s.Type, sup: s.Type) -> bool:
    if isinstance(sub, s.TyBot) or isinstance(sup, s.TyTop):
        return True
    match sub, sup:
        case s.TyRecord(fs), s.TyRecord(_):
            have = dict(fs)
            return all(k in have and subtype(have[k], t) for k, t in sup.fields)
        case s.TyVariant(fs), s.TyVariant(_):
            want = dict(sup.fields)
            return all(k in want and subtype(t, want[k]) for k, t in fs)
        case s.TyFn(p1, r1), s.TyFn(p2, r2):
            return (len(p1) == len(p2)
                    and all(subtype(b, a) for a, b in zip(p1, p2))
                    and subtype(r1, r2))
        case s.TyTuple(i1), s.TyTuple(i2):
            return len(i1) == len(i2) and all(subtype(a, b) for a, b in zip(i1, i2))
        case s.TySum(l1, r1), s.TySum(l2, r2):
            return subtype(l1, l2) and subtype(r1, r2)
        case s.TyList(a), s.TyList(b):
            return subtype(a, b)
        case s.TyRef(a), s.TyRef(b):
            return subtype(a, b) and subtype(b, a)
        case s.TyForall(bs1, body1), s.TyForall(bs2, body2):
            if len(bs1) != len(bs2):
                return False
            names = [s.TyVar(n) for n in _common_binders(len(bs1), sub, sup)]
            return subtype(substitute(body1, dict(zip(bs1, names))),
                           substitute(body2, dict(zip(bs2, names))))
        case s.TyMu(b1, body1), s.TyMu(b2, body2):
            (name,) = _common_binders(1, sub, sup)
            v = s.TyVar(name)
            return subtype(substitute(body1, {b1: v}), substitute(body2, {b2: v}))
        case (s.TyBool(), s.TyBool()) | (s.TyNat(), s.TyNat()) | (s.TyUnit(), s.TyUnit()):
            return True
        case (s.TyVar(_), s.TyVar(_)) | (s.TyMeta(_), s.TyMeta(_)):
            return sub == sup
    return False


def check_cast(checker: Checker, ctx: Context, e: s.CastAs) -> s.Type:
    checker.require(ctx, ("#type-cast",), "cast as", e.span)
    source = checker.infer(ctx, e.expr)
    target = checker.resolve(ctx, e.type, e.span)
    if subtype(source, target) or subtype(target, source):
        return target
    raise fail(Tag.UNEXPECTED_SUBTYPE,
               f"cannot cast {checker.show(source)} to unrelated type {checker.show(target)}", e.span)
