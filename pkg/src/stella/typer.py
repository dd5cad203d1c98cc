"""Bidirectional typechecker for Stella.

``Checker.infer`` synthesizes a type, ``Checker.check`` verifies an expression
against an expected type.  Introduction forms whose type cannot be read off
the term (injections, empty lists, ``panic!``, ``throw``) are checking-only.
Extension-specific rules live in the sibling modules and receive the checker.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, TextIO

from . import effects, matching, poly, reconstruct
from . import syntax as s
from .errors import Diagnostic, Span, StellaTypeError, Tag, fail
from .poly import alpha_eq
from .pretty import pretty_expr, pretty_type
from .subtype import check_cast, subtype


@dataclass(frozen=True)
class Context:
    vars: Mapping[str, s.Type] = field(default_factory=dict)
    type_vars: frozenset[str] = frozenset()
    aliases: Mapping[str, s.Type] = field(default_factory=dict)
    exceptions: effects.ExceptionEnv = effects.NO_EXCEPTIONS
    extensions: frozenset[str] = frozenset()
    subtyping_enabled: bool = False

    @property
    def exception_type(self) -> Optional[s.Type]:
        return self.exceptions.carrier

    def bind(self, bindings: Mapping[str, s.Type] | Iterable[tuple[str, s.Type]]) -> Context:
        new_vars = dict(self.vars)
        new_vars.update(bindings)
        return dataclasses.replace(self, vars=new_vars)

    def bind_type_vars(self, names: Iterable[str]) -> Context:
        return dataclasses.replace(self, type_vars=self.type_vars | frozenset(names))

    def enabled(self, *names: str) -> bool:
        return any(n in self.extensions for n in names)


def type_eq(a: s.Type, b: s.Type, aliases: Mapping[str, s.Type] | None = None) -> bool:
    """Structural equality after alias expansion, up to alpha-renaming of binders."""
    if aliases:
        a = s.resolve_alias(_names_to_aliases(a, aliases), aliases)
        b = s.resolve_alias(_names_to_aliases(b, aliases), aliases)
    return alpha_eq(a, b)


def _names_to_aliases(t: s.Type, aliases: Mapping[str, s.Type], bound: frozenset[str] = frozenset()) -> s.Type:
    match t:
        case s.TyVar(name) if name not in bound and name in aliases:
            return s.TyAlias(name)
        case s.TyForall(bs, body):
            return s.TyForall(bs, _names_to_aliases(body, aliases, bound | set(bs)))
        case s.TyMu(b, body):
            return s.TyMu(b, _names_to_aliases(body, aliases, bound | {b}))
    return s.map_children(t, lambda c: _names_to_aliases(c, aliases, bound))


def _short(e: s.Expr, limit: int = 60) -> str:
    text = pretty_expr(e)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def _max_meta(node) -> int:
    if isinstance(node, s.TyMeta):
        return node.id
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        return max((_max_meta(getattr(node, f.name)) for f in dataclasses.fields(node)), default=0)
    if isinstance(node, (tuple, list)):
        return max((_max_meta(x) for x in node), default=0)
    return 0


class Checker:
    def __init__(self, permissive: bool = False, trace: Optional[TextIO] = None,
                 observer: Optional[Callable[[s.Type, s.Type, bool, bool], None]] = None):
        self.permissive = permissive
        self.trace = trace
        self.observer = observer
        self.depth = 0
        self.recon: Optional[reconstruct.ConstraintCollector] = None
        self.deferred: list[tuple[s.Type, list[s.Pattern], Span]] = []
        self.solution: Optional[reconstruct.Substitution] = None

    # -- helpers used by every rule ------------------------------------------

    def show(self, t: s.Type) -> str:
        return pretty_type(t)

    def require(self, ctx: Context, extensions: tuple[str, ...], what: str, span: Span) -> None:
        if self.permissive or ctx.enabled(*extensions):
            return
        names = " or ".join(extensions)
        raise fail(Tag.EXTENSION_NOT_ENABLED, f"{what} requires {names}", span)

    def fresh(self) -> s.Type:
        assert self.recon is not None
        return self.recon.fresh()

    def types_equal(self, a: s.Type, b: s.Type) -> bool:
        return alpha_eq(a, b)

    def is_meta(self, t: s.Type) -> bool:
        return self.recon is not None and isinstance(t, s.TyMeta)

    def constrain(self, t: s.Type, shape: s.Type, span: Span) -> s.Type:
        assert self.recon is not None
        self.recon.add(t, shape, span)
        return shape

    def expect_type(self, ctx: Context, actual: s.Type, expected: s.Type, e: s.Expr) -> None:
        """Subsumption/equality check at the boundary between synthesis and checking."""
        if self.recon is not None and (s.metavars(actual) or s.metavars(expected)):
            self.recon.add(actual, expected, e.span)
            return
        if ctx.subtyping_enabled:
            ok = subtype(actual, expected)
            if self.observer:
                self.observer(actual, expected, True, ok)
            if not ok:
                raise fail(Tag.UNEXPECTED_SUBTYPE,
                           f"expected a subtype of {self.show(expected)} but got "
                           f"{self.show(actual)} for expression {_short(e)}", e.span)
            return
        ok = alpha_eq(actual, expected)
        if self.observer:
            self.observer(actual, expected, False, ok)
        if not ok:
            raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                       f"expected type {self.show(expected)} but got {self.show(actual)} "
                       f"for expression {_short(e)}", e.span)

    def resolve(self, ctx: Context, t: s.Type, span: Span, bound: frozenset[str] = frozenset()) -> s.Type:
        """Expand aliases, check type-variable scoping and extension gates in a written type."""

        def go(t: s.Type) -> s.Type:
            return self.resolve(ctx, t, span, bound)

        match t:
            case s.TyVar(name) | s.TyAlias(name):
                if isinstance(t, s.TyVar) and (name in bound or name in ctx.type_vars):
                    return t
                if name in ctx.aliases:
                    return ctx.aliases[name]
                if ctx.enabled("#type-aliases") and not ctx.enabled("#universal-types", "#recursive-types"):
                    raise fail(Tag.UNDEFINED_TYPE_ALIAS, f"undefined type {name}", span)
                raise fail(Tag.UNDEFINED_TYPE_VARIABLE, f"undefined type variable {name}", span)
            case s.TyForall(binders, body):
                self.require(ctx, ("#universal-types",), "forall types", span)
                return s.TyForall(binders, self.resolve(ctx, body, span, bound | set(binders)))
            case s.TyMu(binder, body):
                self.require(ctx, ("#recursive-types",), "recursive types", span)
                return s.TyMu(binder, self.resolve(ctx, body, span, bound | {binder}))
            case s.TyMeta():
                self.require(ctx, ("#type-reconstruction",), "auto types", span)
                return t
            case s.TyTop():
                self.require(ctx, ("#top-type", "#structural-subtyping"), "the Top type", span)
            case s.TyBot():
                self.require(ctx, ("#bottom-type", "#structural-subtyping"), "the Bot type", span)
            case s.TyTuple(items):
                exts = ("#pairs", "#tuples") if len(items) == 2 else ("#tuples",)
                self.require(ctx, exts, "tuple types", span)
            case s.TyRecord(fields):
                self.require(ctx, ("#records",), "record types", span)
                self._no_duplicates([k for k, _ in fields], Tag.DUPLICATE_RECORD_FIELDS, "record field", span)
            case s.TySum():
                self.require(ctx, ("#sum-types",), "sum types", span)
            case s.TyVariant(fields):
                self.require(ctx, ("#variants",), "variant types", span)
                self._no_duplicates([k for k, _ in fields], Tag.DUPLICATE_VARIANT_LABELS, "variant label", span)
            case s.TyList():
                self.require(ctx, ("#lists",), "list types", span)
            case s.TyRef():
                self.require(ctx, ("#references",), "reference types", span)
            case s.TyFn(params):
                if len(params) != 1:
                    self.require(ctx, ("#multiparameter-functions",), "functions of arity != 1", span)
        return s.map_children(t, go)

    @staticmethod
    def _no_duplicates(names: list[str], tag: Tag, what: str, span: Span) -> None:
        seen: set[str] = set()
        for n in names:
            if n in seen:
                raise fail(tag, f"duplicate {what} {n}", span)
            seen.add(n)

    def _log(self, ctx: Context, e: s.Expr, arrow: str, t: Optional[s.Type]) -> None:
        if self.trace is None:
            return
        suffix = f" {arrow} {self.show(t)}" if t is not None else f" {arrow} ?"
        print(f"{'  ' * self.depth}⊢ {_short(e)}{suffix}", file=self.trace)

    # -- judgments ---------------------------------------------------------------

    def infer(self, ctx: Context, e: s.Expr) -> s.Type:
        self.depth += 1
        try:
            t = self._infer(ctx, e)
            if self.recon is not None:
                t = self.recon.resolve(t)
        finally:
            self.depth -= 1
        self._log(ctx, e, "⇒", t)
        return t

    def check(self, ctx: Context, e: s.Expr, expected: s.Type) -> None:
        if self.recon is not None:
            expected = self.recon.resolve(expected)
        self._log(ctx, e, "⇐", expected)
        self.depth += 1
        try:
            self._check(ctx, e, expected)
        finally:
            self.depth -= 1

    def _infer(self, ctx: Context, e: s.Expr) -> s.Type:
        match e:
            case s.Var(name):
                if name not in ctx.vars:
                    raise fail(Tag.UNDEFINED_VARIABLE, f"undefined variable {name}", e.span)
                return ctx.vars[name]
            case s.ConstTrue() | s.ConstFalse():
                return s.BOOL
            case s.Zero():
                return s.NAT
            case s.NatLiteral():
                self.require(ctx, ("#natural-literals",), "natural literals", e.span)
                return s.NAT
            case s.ConstUnit():
                self.require(ctx, ("#unit-type",), "unit", e.span)
                return s.UNIT
            case s.Succ(x) | s.NatPred(x):
                self.check(ctx, x, s.NAT)
                return s.NAT
            case s.NatIsZero(x):
                self.check(ctx, x, s.NAT)
                return s.BOOL
            case s.NatRec(n, z, step):
                self.check(ctx, n, s.NAT)
                t = self.infer(ctx, z)
                self.check(ctx, step, s.TyFn((s.NAT,), s.TyFn((t,), t)))
                return t
            case s.If(cond, then, orelse):
                self.check(ctx, cond, s.BOOL)
                if self.recon is not None:
                    t = self.fresh()
                    self.check(ctx, then, t)
                else:
                    t = self.infer(ctx, then)
                self.check(ctx, orelse, t)
                return t
            case s.Abstraction(params, body):
                inner, types = self._bind_params(ctx, params, e.span)
                return s.TyFn(types, self.infer(inner, body))
            case s.GenericAbstraction():
                return poly.check_generic(self, ctx, e)
            case s.Application():
                return self._infer_application(ctx, e)
            case s.TypeApplication():
                return poly.check_type_application(self, ctx, e)
            case s.Tuple(exprs):
                exts = ("#pairs", "#tuples") if len(exprs) == 2 else ("#tuples",)
                self.require(ctx, exts, "tuples", e.span)
                return s.TyTuple(tuple(self.infer(ctx, x) for x in exprs))
            case s.TupleProj(x, index):
                exts = ("#pairs", "#tuples") if index <= 2 else ("#tuples",)
                self.require(ctx, exts, "tuple projection", e.span)
                t = self.infer(ctx, x)
                if not isinstance(t, s.TyTuple):
                    raise fail(Tag.NOT_A_TUPLE, f"expected a tuple but got {self.show(t)}", x.span)
                if not 1 <= index <= len(t.items):
                    raise fail(Tag.TUPLE_INDEX_OUT_OF_BOUNDS,
                               f"index {index} out of bounds for {self.show(t)}", e.span)
                return t.items[index - 1]
            case s.Record(fields):
                self.require(ctx, ("#records",), "records", e.span)
                self._no_duplicates([k for k, _ in fields], Tag.DUPLICATE_RECORD_FIELDS, "record field", e.span)
                return s.TyRecord(tuple((k, self.infer(ctx, v)) for k, v in fields))
            case s.RecordProj(x, label):
                self.require(ctx, ("#records",), "record projection", e.span)
                t = self.infer(ctx, x)
                if not isinstance(t, s.TyRecord):
                    raise fail(Tag.NOT_A_RECORD, f"expected a record but got {self.show(t)}", x.span)
                ft = t.get(label)
                if ft is None:
                    raise fail(Tag.UNEXPECTED_FIELD_ACCESS,
                               f"record type {self.show(t)} has no field {label}", e.span)
                return ft
            case s.Inl(x) | s.Inr(x):
                self.require(ctx, ("#sum-types",), "sum types", e.span)
                if self.recon is not None:
                    t, other = self.infer(ctx, x), self.fresh()
                    return s.TySum(t, other) if isinstance(e, s.Inl) else s.TySum(other, t)
                raise fail(Tag.AMBIGUOUS_SUM_TYPE,
                           f"cannot infer the sum type of {_short(e)}; add a type ascription", e.span)
            case s.VariantInj(label, x):
                self.require(ctx, ("#variants",), "variants", e.span)
                if ctx.subtyping_enabled:
                    return s.TyVariant(((label, self.infer(ctx, x)),))
                raise fail(Tag.AMBIGUOUS_VARIANT_TYPE,
                           f"cannot infer the variant type of {_short(e)}", e.span)
            case s.ListLiteral(exprs):
                self.require(ctx, ("#lists",), "lists", e.span)
                if not exprs:
                    if self.recon is not None:
                        return s.TyList(self.fresh())
                    raise fail(Tag.AMBIGUOUS_LIST_TYPE, "cannot infer the type of an empty list", e.span)
                t = self.infer(ctx, exprs[0])
                for x in exprs[1:]:
                    self.check(ctx, x, t)
                return s.TyList(t)
            case s.ConsList(head, tail):
                self.require(ctx, ("#lists",), "lists", e.span)
                t = self.infer(ctx, head)
                self.check(ctx, tail, s.TyList(t))
                return s.TyList(t)
            case s.ListHead(x) | s.ListTail(x) | s.ListIsEmpty(x):
                self.require(ctx, ("#lists",), "list operations", e.span)
                t = self.infer(ctx, x)
                if self.is_meta(t):
                    t = self.constrain(t, s.TyList(self.fresh()), x.span)
                if not isinstance(t, s.TyList):
                    raise fail(Tag.NOT_A_LIST, f"expected a list but got {self.show(t)}", x.span)
                if isinstance(e, s.ListHead):
                    return t.elem
                return t if isinstance(e, s.ListTail) else s.BOOL
            case s.Match(scrutinee, cases):
                return matching.check_match(self, ctx, self.infer(ctx, scrutinee), cases, None, e)
            case s.Let(bindings, body):
                return self.infer(self._bind_let(ctx, e), body)
            case s.LetRec(bindings, body):
                return self.infer(self._bind_letrec(ctx, e), body)
            case s.Ascription(x, ty):
                self.require(ctx, ("#type-ascriptions",), "type ascriptions", e.span)
                t = self.resolve(ctx, ty, e.span)
                self.check(ctx, x, t)
                return t
            case s.CastAs():
                return check_cast(self, ctx, e)
            case s.Sequence(first, second):
                return effects.check_sequence(self, ctx, first, second, None, e)
            case s.NewRef() | s.Deref() | s.Assign():
                return effects.check_ref_ops(self, ctx, e, None)
            case s.Panic() | s.Throw() | s.TryWith() | s.TryCatch():
                return effects.check_exceptions(self, ctx, e, None)
            case s.Fix(x):
                self.require(ctx, ("#general-recursion",), "fix", e.span)
                t = self.infer(ctx, x)
                if self.is_meta(t):
                    m = self.fresh()
                    t = self.constrain(t, s.TyFn((m,), m), x.span)
                if not isinstance(t, s.TyFn) or len(t.params) != 1:
                    raise fail(Tag.NOT_A_FUNCTION, f"fix expects a function but got {self.show(t)}", x.span)
                self.expect_type(ctx, t.result, t.params[0], x)
                return t.params[0]
            case s.Fold() | s.Unfold():
                return poly.check_fold_unfold(self, ctx, e)
        raise TypeError(f"unknown expression {e!r}")

    def _bind_params(self, ctx: Context, params, span: Span) -> tuple[Context, tuple[s.Type, ...]]:
        if len(params) != 1:
            self.require(ctx, ("#multiparameter-functions",), "functions of arity != 1", span)
        self._no_duplicates([n for n, _ in params], Tag.DUPLICATE_PARAMETER, "parameter", span)
        types = tuple(self.resolve(ctx, t, span) for _, t in params)
        return ctx.bind(zip((n for n, _ in params), types)), types

    def _infer_application(self, ctx: Context, e: s.Application) -> s.Type:
        fty = self.infer(ctx, e.fn)
        args = list(e.args)
        if len(args) != 1:
            self.require(ctx, ("#multiparameter-functions", "#currying"),
                         "applications with arity != 1", e.span)
        while True:
            if self.is_meta(fty):
                shape = s.TyFn(tuple(self.fresh() for _ in args), self.fresh())
                fty = self.constrain(fty, shape, e.fn.span)
            if not isinstance(fty, s.TyFn):
                raise fail(Tag.NOT_A_FUNCTION,
                           f"expected a function but got {self.show(fty)} for {_short(e.fn)}", e.fn.span)
            n = len(fty.params)
            if n != len(args) and not (n < len(args) and ctx.enabled("#currying")):
                raise fail(Tag.INCORRECT_NUMBER_OF_ARGUMENTS,
                           f"expected {n} argument(s) but got {len(args)}", e.span)
            for arg, pt in zip(args, fty.params):
                self.check(ctx, arg, pt)
            args = args[n:]
            if not args:
                return fty.result
            fty = fty.result

    def _bind_let(self, ctx: Context, e: s.Let) -> Context:
        self.require(ctx, ("#let-bindings",), "let bindings", e.span)
        for pat, value in e.bindings:
            t = self.infer(ctx, value)
            binds = matching.pattern_bindings(self, ctx, pat, t)
            matching.require_exhaustive(self, ctx, t, [pat], pat.span)
            ctx = ctx.bind(binds)
        return ctx

    def _bind_letrec(self, ctx: Context, e: s.LetRec) -> Context:
        self.require(ctx, ("#letrec-bindings",), "letrec bindings", e.span)
        resolved = [(n, self.resolve(ctx, t, e.span), v) for n, t, v in e.bindings]
        inner = ctx.bind((n, t) for n, t, _ in resolved)
        for _, t, v in resolved:
            self.check(inner, v, t)
        return inner

    def _check(self, ctx: Context, e: s.Expr, expected: s.Type) -> None:
        if self.is_meta(expected):
            match e:
                case s.Inl() | s.Inr():
                    expected = self.constrain(expected, s.TySum(self.fresh(), self.fresh()), e.span)
                case s.ListLiteral(()):
                    expected = self.constrain(expected, s.TyList(self.fresh()), e.span)
        match e, expected:
            case s.Abstraction(params, body), s.TyFn(eparams, result):
                if len(params) != len(eparams):
                    raise fail(Tag.INCORRECT_NUMBER_OF_ARGUMENTS,
                               f"expected a function of {len(eparams)} parameter(s) but got "
                               f"{len(params)}", e.span)
                inner, types = self._bind_params(ctx, params, e.span)
                for declared, wanted in zip(types, eparams):
                    # contravariant: the expected parameter must fit the annotation
                    self.expect_type(ctx, wanted, declared, e)
                self.check(inner, body, result)
            case s.Abstraction(), _ if not (self.is_meta(expected)
                                          or ctx.subtyping_enabled and isinstance(expected, s.TyTop)):
                raise fail(Tag.UNEXPECTED_LAMBDA,
                           f"expected an expression of type {self.show(expected)} but got a function",
                           e.span)
            case s.GenericAbstraction(), s.TyForall():
                poly.check_generic_against(self, ctx, e, expected)
            case s.Tuple(exprs), s.TyTuple(items):
                exts = ("#pairs", "#tuples") if len(exprs) == 2 else ("#tuples",)
                self.require(ctx, exts, "tuples", e.span)
                if len(exprs) != len(items):
                    raise fail(Tag.UNEXPECTED_TUPLE_LENGTH,
                               f"expected a tuple of length {len(items)} but got {len(exprs)}", e.span)
                for x, t in zip(exprs, items):
                    self.check(ctx, x, t)
            case s.Record(fields), s.TyRecord(efields):
                self._check_record(ctx, e, fields, expected)
            case (s.Inl(x), s.TySum(left, _)) | (s.Inr(x), s.TySum(_, left)):
                self.require(ctx, ("#sum-types",), "sum types", e.span)
                self.check(ctx, x, left)
            case s.Inl() | s.Inr(), _:
                self.require(ctx, ("#sum-types",), "sum types", e.span)
                if ctx.subtyping_enabled and isinstance(expected, s.TyTop):
                    raise fail(Tag.AMBIGUOUS_SUM_TYPE, f"cannot infer the sum type of {_short(e)}", e.span)
                raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                           f"expected type {self.show(expected)} but got an injection into a sum type",
                           e.span)
            case s.VariantInj(label, x), s.TyVariant():
                self.require(ctx, ("#variants",), "variants", e.span)
                ft = expected.get(label)
                if ft is None:
                    raise fail(Tag.UNEXPECTED_VARIANT_LABEL,
                               f"label {label} does not occur in {self.show(expected)}", e.span)
                self.check(ctx, x, ft)
            case s.VariantInj(), _ if not ctx.subtyping_enabled:
                self.require(ctx, ("#variants",), "variants", e.span)
                if self.is_meta(expected):
                    raise fail(Tag.AMBIGUOUS_VARIANT_TYPE, f"cannot infer the variant type of {_short(e)}", e.span)
                raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                           f"expected type {self.show(expected)} but got a variant", e.span)
            case s.ListLiteral(exprs), s.TyList(elem):
                self.require(ctx, ("#lists",), "lists", e.span)
                for x in exprs:
                    self.check(ctx, x, elem)
            case s.ListLiteral(()), _:
                self.require(ctx, ("#lists",), "lists", e.span)
                if ctx.subtyping_enabled and isinstance(expected, s.TyTop):
                    raise fail(Tag.AMBIGUOUS_LIST_TYPE, "cannot infer the type of an empty list", e.span)
                raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                           f"expected type {self.show(expected)} but got a list", e.span)
            case s.ConsList(head, tail), s.TyList(elem):
                self.require(ctx, ("#lists",), "lists", e.span)
                self.check(ctx, head, elem)
                self.check(ctx, tail, expected)
            case s.If(cond, then, orelse), _:
                self.check(ctx, cond, s.BOOL)
                self.check(ctx, then, expected)
                self.check(ctx, orelse, expected)
            case s.Match(scrutinee, cases), _:
                matching.check_match(self, ctx, self.infer(ctx, scrutinee), cases, expected, e)
            case s.Let(_, body), _:
                self.check(self._bind_let(ctx, e), body, expected)
            case s.LetRec(_, body), _:
                self.check(self._bind_letrec(ctx, e), body, expected)
            case s.Sequence(first, second), _:
                effects.check_sequence(self, ctx, first, second, expected, e)
            case (s.Panic() | s.Throw() | s.TryWith() | s.TryCatch()), _:
                effects.check_exceptions(self, ctx, e, expected)
            case s.NewRef(), s.TyRef():
                effects.check_ref_ops(self, ctx, e, expected)
            case s.Fix(x), _:
                self.require(ctx, ("#general-recursion",), "fix", e.span)
                self.check(ctx, x, s.TyFn((expected,), expected))
            case _:
                self.expect_type(ctx, self.infer(ctx, e), expected, e)

    def _check_record(self, ctx: Context, e: s.Record, fields, expected: s.TyRecord) -> None:
        self.require(ctx, ("#records",), "records", e.span)
        self._no_duplicates([k for k, _ in fields], Tag.DUPLICATE_RECORD_FIELDS, "record field", e.span)
        given = [k for k, _ in fields]
        wanted = expected.labels()
        missing = [k for k in wanted if k not in given]
        if missing:
            raise fail(Tag.MISSING_RECORD_FIELDS,
                       f"missing field(s) {', '.join(missing)} for type {self.show(expected)}", e.span)
        extra = [k for k in given if k not in wanted]
        if extra and not ctx.subtyping_enabled:
            raise fail(Tag.UNEXPECTED_RECORD_FIELDS,
                       f"unexpected field(s) {', '.join(extra)} for type {self.show(expected)}", e.span)
        if not ctx.subtyping_enabled and given != wanted:
            raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                       f"record fields given in a different order than {self.show(expected)}", e.span)
        for k, v in fields:
            ft = expected.get(k)
            if ft is None:
                self.infer(ctx, v)
            else:
                self.check(ctx, v, ft)

    # -- declarations and programs -----------------------------------------------

    def signature(self, ctx: Context, decl: s.FunctionDecl) -> s.Type:
        inner = self._generic_scope(ctx, decl)
        params = tuple(self.resolve(inner, t, decl.span) for _, t in decl.params)
        fn = s.TyFn(params, self.resolve(inner, decl.return_type, decl.span))
        return s.TyForall(decl.generic_binders, fn) if decl.generic else fn

    def _generic_scope(self, ctx: Context, decl: s.FunctionDecl) -> Context:
        if decl.generic:
            self.require(ctx, ("#universal-types",), "generic functions", decl.span)
            return ctx.bind_type_vars(decl.generic_binders)
        return ctx

    def check_function(self, ctx: Context, decl: s.FunctionDecl) -> None:
        inner = self._generic_scope(ctx, decl)
        inner, _ = self._bind_params(inner, decl.params, decl.span)
        ret = self.resolve(inner, decl.return_type, decl.span)
        if decl.nested_decls:
            self.require(ctx, ("#nested-function-declarations",), "nested functions", decl.span)
            inner = self.check_functions(inner, decl.nested_decls)
        self.check(inner, decl.body, ret)

    def check_functions(self, ctx: Context, decls: Iterable[s.Decl]) -> Context:
        """Bind a group of mutually visible functions, then check each body."""
        fns = [d for d in decls if isinstance(d, s.FunctionDecl)]
        seen: set[str] = set()
        for d in fns:
            if d.name in seen:
                raise fail(Tag.DUPLICATE_FUNCTION, f"function {d.name} is declared more than once", d.span)
            seen.add(d.name)
        ctx = ctx.bind((d.name, self.signature(ctx, d)) for d in fns)
        for d in fns:
            self.check_function(ctx, d)
        return ctx

    def program_context(self, program: s.Program) -> Context:
        exts = frozenset(program.extensions)
        for name in program.extensions:
            if not s.is_known_extension(name) and not self.permissive:
                raise fail(Tag.UNKNOWN_EXTENSION, f"unknown extension {name}")
        for a, b in (("#exception-type-declaration", "#open-variant-exceptions"),
                     ("#type-reconstruction", "#structural-subtyping")):
            if a in exts and b in exts:
                raise fail(Tag.CONFLICTING_EXTENSIONS, f"{a} cannot be combined with {b}")
        ctx = Context(extensions=exts, subtyping_enabled="#structural-subtyping" in exts)
        ctx = dataclasses.replace(ctx, aliases=self._aliases(ctx, program))
        return dataclasses.replace(ctx, exceptions=effects.exception_env(self, ctx, program))

    def _aliases(self, ctx: Context, program: s.Program) -> dict[str, s.Type]:
        decls = [d for d in program.decls if isinstance(d, s.TypeAliasDecl)]
        raw: dict[str, s.Type] = {}
        for d in decls:
            self.require(ctx, ("#type-aliases",), "type aliases", d.span)
            if d.name in raw:
                raise fail(Tag.DUPLICATE_TYPE_ALIAS, f"type alias {d.name} is declared more than once", d.span)
            raw[d.name] = _names_to_aliases(d.type, {d2.name: d2.type for d2 in decls})
        resolved: dict[str, s.Type] = {}
        for d in decls:
            try:
                expanded = s.resolve_alias(s.TyAlias(d.name), raw)
            except StellaTypeError as err:
                raise fail(err.tag, err.diagnostic.message, d.span) from None
            resolved[d.name] = self.resolve(ctx, expanded, d.span)
        return resolved

    def check_program(self, program: s.Program) -> Context:
        ctx = self.program_context(program)
        if "#type-reconstruction" in ctx.extensions:
            self.recon = reconstruct.ConstraintCollector(_max_meta(program) + 1)
        main = program.function("main")
        if main is None:
            raise fail(Tag.MISSING_MAIN, "no main function is declared", Span(1, 1, 1, 1))
        if main.generic or len(main.params) != 1:
            raise fail(Tag.INCORRECT_ARITY_OF_MAIN, "main must be a non-generic function of one parameter",
                       main.span)
        ctx = self.check_functions(ctx, program.decls)
        if self.recon is not None:
            self.solution = self.recon.solution()
            for t, pats, span in self.deferred:
                matching.require_exhaustive(self, ctx, self.solution.apply(t), pats, span)
        return ctx


def typecheck_program(program: s.Program, permissive: bool = False, trace: Optional[TextIO] = None) -> None:
    """Raise :class:`StellaTypeError` with the first diagnostic if ``program`` is ill-typed."""
    Checker(permissive=permissive, trace=trace).check_program(program)


def check_program(program: s.Program, permissive: bool = False) -> Optional[Diagnostic]:
    try:
        typecheck_program(program, permissive)
    except StellaTypeError as err:
        return err.diagnostic
    return None


def context(extensions: Iterable[str] = (), vars: Mapping[str, s.Type] | None = None, **kw) -> Context:
    exts = frozenset(extensions)
    return Context(vars=dict(vars or {}), extensions=exts,
                   subtyping_enabled="#structural-subtyping" in exts, **kw)


def infer(ctx: Context, e: s.Expr, permissive: bool = False) -> s.Type:
    return Checker(permissive=permissive).infer(ctx, e)


def check(ctx: Context, e: s.Expr, expected: s.Type, permissive: bool = False) -> None:
    Checker(permissive=permissive).check(ctx, e, expected)


