"""Universal and iso-recursive types: substitution, alpha-equivalence and their typing rules."""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable, Mapping

from . import syntax as s
from .errors import Tag, fail

if TYPE_CHECKING:
    from .typer import Checker, Context

TypeSubstitution = Mapping[str, s.Type]


def free_type_vars(t: s.Type) -> set[str]:
    match t:
        case s.TyVar(name):
            return {name}
        case s.TyForall(binders, body):
            return free_type_vars(body) - set(binders)
        case s.TyMu(binder, body):
            return free_type_vars(body) - {binder}
    out: set[str] = set()
    for c in s.children(t):
        out |= free_type_vars(c)
    return out


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """``base`` followed by the smallest positive integer suffix not in ``avoid``."""
    taken = set(avoid)
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _under_binders(binders: tuple[str, ...], body: s.Type, subst: TypeSubstitution):
    """Push ``subst`` under ``binders``, renaming any binder that would capture."""
    body_fv = free_type_vars(body)
    inner = {k: v for k, v in subst.items() if k not in binders and k in body_fv}
    if not inner:
        return binders, body
    danger: set[str] = set()
    for v in inner.values():
        danger |= free_type_vars(v)
    avoid = danger | body_fv | set(binders) | set(inner)
    renaming: dict[str, s.Type] = {}
    new_binders = []
    for b in binders:
        if b in danger:
            nb = fresh_name(b, avoid)
            avoid.add(nb)
            renaming[b] = s.TyVar(nb)
            new_binders.append(nb)
        else:
            new_binders.append(b)
    if renaming:
        body = substitute(body, renaming)
    return tuple(new_binders), substitute(body, inner)


def substitute(t: s.Type, subst: TypeSubstitution) -> s.Type:
    """Capture-avoiding simultaneous substitution of type variables."""
    if not subst:
        return t
    match t:
        case s.TyVar(name):
            return subst.get(name, t)
        case s.TyForall(binders, body):
            bs, new_body = _under_binders(binders, body, subst)
            return s.TyForall(bs, new_body)
        case s.TyMu(binder, body):
            (b,), new_body = _under_binders((binder,), body, subst)
            return s.TyMu(b, new_body)
    return s.map_children(t, lambda c: substitute(c, subst))


def _alpha(a: s.Type, b: s.Type, env_a: dict[str, int], env_b: dict[str, int], depth: int) -> bool:
    match a, b:
        case s.TyVar(x), s.TyVar(y):
            la, lb = env_a.get(x), env_b.get(y)
            if la is None and lb is None:
                return x == y
            return la == lb
        case s.TyForall(bs1, body1), s.TyForall(bs2, body2):
            if len(bs1) != len(bs2):
                return False
            ea, eb = dict(env_a), dict(env_b)
            for i, (x, y) in enumerate(zip(bs1, bs2)):
                ea[x] = eb[y] = depth + i
            return _alpha(body1, body2, ea, eb, depth + len(bs1))
        case s.TyMu(x, body1), s.TyMu(y, body2):
            return _alpha(body1, body2, {**env_a, x: depth}, {**env_b, y: depth}, depth + 1)
        case (s.TyRecord(f1), s.TyRecord(f2)) | (s.TyVariant(f1), s.TyVariant(f2)):
            if [k for k, _ in f1] != [k for k, _ in f2]:
                return False
        case s.TyFn(p1, _), s.TyFn(p2, _):
            if len(p1) != len(p2):
                return False
        case s.TyTuple(i1), s.TyTuple(i2):
            if len(i1) != len(i2):
                return False
    if type(a) is not type(b):
        return False
    if isinstance(a, (s.TyMeta, s.TyAlias)):
        return a == b
    return all(_alpha(x, y, env_a, env_b, depth) for x, y in zip(s.children(a), s.children(b)))


def alpha_eq(a: s.Type, b: s.Type) -> bool:
    """Structural equality up to consistent renaming of forall/µ binders."""
    return _alpha(a, b, {}, {}, 0)


def unroll(mu: s.TyMu) -> s.Type:
    return substitute(mu.body, {mu.binder: mu})


# -- typing rules --------------------------------------------------------------

def check_generic(checker: Checker, ctx: Context, e: s.GenericAbstraction) -> s.Type:
    checker.require(ctx, ("#universal-types",), "generic functions", e.span)
    inner = ctx.bind_type_vars(e.binders)
    fn = checker.infer(inner, s.Abstraction(e.params, e.body, span=e.span))
    return s.TyForall(e.binders, fn)


def check_generic_against(checker: Checker, ctx: Context, e: s.GenericAbstraction,
                          expected: s.TyForall) -> None:
    """Check a generic lambda against a forall type by aligning binder names."""
    checker.require(ctx, ("#universal-types",), "generic functions", e.span)
    clash = set(e.binders) & (free_type_vars(expected) | ctx.type_vars)
    if len(e.binders) != len(expected.binders) or clash:
        checker.expect_type(ctx, check_generic(checker, ctx, e), expected, e)
        return
    renamed = substitute(expected.body, {b: s.TyVar(x) for b, x in zip(expected.binders, e.binders)})
    checker.check(ctx.bind_type_vars(e.binders), s.Abstraction(e.params, e.body, span=e.span), renamed)


def check_type_application(checker: Checker, ctx: Context, e: s.TypeApplication) -> s.Type:
    checker.require(ctx, ("#universal-types",), "type application", e.span)
    fty = checker.infer(ctx, e.fn)
    if not isinstance(fty, s.TyForall):
        raise fail(Tag.NOT_A_GENERIC_FUNCTION,
                   f"expected a generic function but got {checker.show(fty)}", e.fn.span)
    if len(fty.binders) != len(e.type_args):
        raise fail(Tag.INCORRECT_NUMBER_OF_TYPE_ARGUMENTS,
                   f"expected {len(fty.binders)} type argument(s) but got {len(e.type_args)}", e.span)
    args = [checker.resolve(ctx, t, e.span) for t in e.type_args]
    return substitute(fty.body, dict(zip(fty.binders, args)))


def check_fold_unfold(checker: Checker, ctx: Context, e: s.Fold | s.Unfold) -> s.Type:
    checker.require(ctx, ("#recursive-types",), "fold/unfold", e.span)
    mu = checker.resolve(ctx, e.type, e.span)
    if not isinstance(mu, s.TyMu):
        raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                   f"expected a recursive type annotation but got {checker.show(mu)}", e.span)
    if isinstance(e, s.Fold):
        checker.check(ctx, e.expr, unroll(mu))
        return mu
    checker.check(ctx, e.expr, mu)
    return unroll(mu)
