"""Abstract syntax of Stella programs, the extension registry and alias resolution.

All nodes are frozen dataclasses.  Expressions and patterns carry a source
span which is excluded from equality, so two ASTs compare equal modulo
positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .errors import NO_SPAN, Span, Tag, fail

# --------------------------------------------------------------------------
# Extensions

EXTENSIONS: tuple[str, ...] = (
    "#unit-type",
    "#pairs",
    "#tuples",
    "#records",
    "#sum-types",
    "#variants",
    "#lists",
    "#let-bindings",
    "#letrec-bindings",
    "#nested-function-declarations",
    "#multiparameter-functions",
    "#currying",
    "#type-ascriptions",
    "#sequencing",
    "#structural-patterns",
    "#general-recursion",
    "#type-aliases",
    "#natural-literals",
    "#references",
    "#panic",
    "#exceptions",
    "#exception-type-declaration",
    "#open-variant-exceptions",
    "#structural-subtyping",
    "#top-type",
    "#bottom-type",
    "#type-cast",
    "#universal-types",
    "#recursive-types",
    "#type-reconstruction",
)

_REGISTRY = frozenset(EXTENSIONS)


class UnknownExtension(str):
    """Marker returned by :func:`registry_lookup` for names outside the registry."""


def registry_lookup(name: str) -> Union[str, UnknownExtension]:
    if name in _REGISTRY:
        return name
    return UnknownExtension(name)


def is_known_extension(name: str) -> bool:
    return not isinstance(registry_lookup(name), UnknownExtension)


# --------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TyBool(Type):
    pass


@dataclass(frozen=True)
class TyNat(Type):
    pass


@dataclass(frozen=True)
class TyUnit(Type):
    pass


@dataclass(frozen=True)
class TyTop(Type):
    pass


@dataclass(frozen=True)
class TyBot(Type):
    pass


@dataclass(frozen=True)
class TyFn(Type):
    params: tuple[Type, ...]
    result: Type


@dataclass(frozen=True)
class TyTuple(Type):
    items: tuple[Type, ...]


@dataclass(frozen=True)
class TyRecord(Type):
    fields: tuple[tuple[str, Type], ...]

    def labels(self) -> list[str]:
        return [label for label, _ in self.fields]

    def get(self, label: str) -> Optional[Type]:
        for name, ty in self.fields:
            if name == label:
                return ty
        return None


@dataclass(frozen=True)
class TySum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TyVariant(Type):
    fields: tuple[tuple[str, Type], ...]

    def labels(self) -> list[str]:
        return [label for label, _ in self.fields]

    def get(self, label: str) -> Optional[Type]:
        for name, ty in self.fields:
            if name == label:
                return ty
        return None


@dataclass(frozen=True)
class TyList(Type):
    elem: Type


@dataclass(frozen=True)
class TyRef(Type):
    elem: Type


@dataclass(frozen=True)
class TyVar(Type):
    name: str


@dataclass(frozen=True)
class TyForall(Type):
    binders: tuple[str, ...]
    body: Type


@dataclass(frozen=True)
class TyMu(Type):
    binder: str
    body: Type


@dataclass(frozen=True)
class TyMeta(Type):
    id: int


@dataclass(frozen=True)
class TyAlias(Type):
    name: str


BOOL = TyBool()
NAT = TyNat()
UNIT = TyUnit()
TOP = TyTop()
BOT = TyBot()


def children(t: Type) -> list[Type]:
    match t:
        case TyFn(params, result):
            return [*params, result]
        case TyTuple(items):
            return list(items)
        case TyRecord(fs) | TyVariant(fs):
            return [ty for _, ty in fs]
        case TySum(left, right):
            return [left, right]
        case TyList(elem) | TyRef(elem):
            return [elem]
        case TyForall(_, body) | TyMu(_, body):
            return [body]
    return []


def map_children(t: Type, f) -> Type:
    """Rebuild ``t`` with ``f`` applied to each immediate child (binders untouched)."""
    match t:
        case TyFn(params, result):
            return TyFn(tuple(f(p) for p in params), f(result))
        case TyTuple(items):
            return TyTuple(tuple(f(i) for i in items))
        case TyRecord(fs):
            return TyRecord(tuple((label, f(ty)) for label, ty in fs))
        case TyVariant(fs):
            return TyVariant(tuple((label, f(ty)) for label, ty in fs))
        case TySum(left, right):
            return TySum(f(left), f(right))
        case TyList(elem):
            return TyList(f(elem))
        case TyRef(elem):
            return TyRef(f(elem))
        case TyForall(bs, body):
            return TyForall(bs, f(body))
        case TyMu(b, body):
            return TyMu(b, f(body))
    return t


def metavars(t: Type) -> set[int]:
    if isinstance(t, TyMeta):
        return {t.id}
    out: set[int] = set()
    for c in children(t):
        out |= metavars(c)
    return out


def resolve_alias(t: Type, aliases: Mapping[str, Type], _active: tuple[str, ...] = ()) -> Type:
    """Expand every :class:`TyAlias` in ``t`` using ``aliases``."""
    if isinstance(t, TyAlias):
        if t.name in _active:
            cycle = " -> ".join((*_active[_active.index(t.name):], t.name))
            raise fail(Tag.CYCLIC_TYPE_ALIAS, f"cyclic type alias {cycle}")
        if t.name not in aliases:
            raise fail(Tag.UNDEFINED_TYPE_ALIAS, f"undefined type alias {t.name}")
        return resolve_alias(aliases[t.name], aliases, (*_active, t.name))
    return map_children(t, lambda c: resolve_alias(c, aliases, _active))


# --------------------------------------------------------------------------
# Patterns


@dataclass(frozen=True)
class Pattern:
    span: Span = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class PVar(Pattern):
    name: str


@dataclass(frozen=True)
class PWildcard(Pattern):
    pass


@dataclass(frozen=True)
class PTrue(Pattern):
    pass


@dataclass(frozen=True)
class PFalse(Pattern):
    pass


@dataclass(frozen=True)
class PZero(Pattern):
    pass


@dataclass(frozen=True)
class PSucc(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PUnit(Pattern):
    pass


@dataclass(frozen=True)
class PInl(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PInr(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PVariant(Pattern):
    label: str
    pat: Pattern


@dataclass(frozen=True)
class PTuple(Pattern):
    pats: tuple[Pattern, ...]


@dataclass(frozen=True)
class PRecord(Pattern):
    fields: tuple[tuple[str, Pattern], ...]


@dataclass(frozen=True)
class PList(Pattern):
    pats: tuple[Pattern, ...]


@dataclass(frozen=True)
class PCons(Pattern):
    head: Pattern
    tail: Pattern


@dataclass(frozen=True)
class PAscription(Pattern):
    pat: Pattern
    type: Type


@dataclass(frozen=True)
class PInt(Pattern):
    value: int


def sub_patterns(p: Pattern) -> list[Pattern]:
    match p:
        case PSucc(q) | PInl(q) | PInr(q) | PVariant(_, q):
            return [q]
        case PTuple(ps) | PList(ps):
            return list(ps)
        case PRecord(fs):
            return [q for _, q in fs]
        case PCons(h, t):
            return [h, t]
        case PAscription(q, _):
            return [q]
    return []


def _is_binder(p: Pattern) -> bool:
    while isinstance(p, PAscription):
        p = p.pat
    return isinstance(p, (PVar, PWildcard))


def is_simple_pattern(p: Pattern) -> bool:
    """A pattern is simple when every child of its head constructor is a variable or ``_``."""
    if isinstance(p, PAscription):
        return is_simple_pattern(p.pat)
    return all(_is_binder(q) for q in sub_patterns(p))


def pattern_variables(p: Pattern) -> list[str]:
    if isinstance(p, PVar):
        return [p.name]
    out: list[str] = []
    for q in sub_patterns(p):
        out.extend(pattern_variables(q))
    return out


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Expr:
    span: Span = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class ConstTrue(Expr):
    pass


@dataclass(frozen=True)
class ConstFalse(Expr):
    pass


@dataclass(frozen=True)
class ConstUnit(Expr):
    pass


@dataclass(frozen=True)
class Zero(Expr):
    pass


@dataclass(frozen=True)
class NatLiteral(Expr):
    value: int


@dataclass(frozen=True)
class Succ(Expr):
    expr: Expr


@dataclass(frozen=True)
class NatIsZero(Expr):
    expr: Expr


@dataclass(frozen=True)
class NatPred(Expr):
    expr: Expr


@dataclass(frozen=True)
class NatRec(Expr):
    n: Expr
    zero: Expr
    step: Expr


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


Param = tuple[str, Type]


@dataclass(frozen=True)
class Abstraction(Expr):
    params: tuple[Param, ...]
    body: Expr


@dataclass(frozen=True)
class GenericAbstraction(Expr):
    binders: tuple[str, ...]
    params: tuple[Param, ...]
    body: Expr


@dataclass(frozen=True)
class Application(Expr):
    fn: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class TypeApplication(Expr):
    fn: Expr
    type_args: tuple[Type, ...]


@dataclass(frozen=True)
class Tuple(Expr):
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class TupleProj(Expr):
    expr: Expr
    index: int


@dataclass(frozen=True)
class Record(Expr):
    fields: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class RecordProj(Expr):
    expr: Expr
    label: str


@dataclass(frozen=True)
class Inl(Expr):
    expr: Expr


@dataclass(frozen=True)
class Inr(Expr):
    expr: Expr


@dataclass(frozen=True)
class VariantInj(Expr):
    label: str
    expr: Expr


@dataclass(frozen=True)
class ListLiteral(Expr):
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class ConsList(Expr):
    head: Expr
    tail: Expr


@dataclass(frozen=True)
class ListHead(Expr):
    expr: Expr


@dataclass(frozen=True)
class ListTail(Expr):
    expr: Expr


@dataclass(frozen=True)
class ListIsEmpty(Expr):
    expr: Expr


@dataclass(frozen=True)
class Match(Expr):
    scrutinee: Expr
    cases: tuple[tuple[Pattern, Expr], ...]


@dataclass(frozen=True)
class Let(Expr):
    bindings: tuple[tuple[Pattern, Expr], ...]
    body: Expr


@dataclass(frozen=True)
class LetRec(Expr):
    bindings: tuple[tuple[str, Type, Expr], ...]
    body: Expr


@dataclass(frozen=True)
class Ascription(Expr):
    expr: Expr
    type: Type


@dataclass(frozen=True)
class Sequence(Expr):
    first: Expr
    second: Expr


@dataclass(frozen=True)
class NewRef(Expr):
    expr: Expr


@dataclass(frozen=True)
class Deref(Expr):
    expr: Expr


@dataclass(frozen=True)
class Assign(Expr):
    target: Expr
    value: Expr


@dataclass(frozen=True)
class Panic(Expr):
    pass


@dataclass(frozen=True)
class Throw(Expr):
    expr: Expr


@dataclass(frozen=True)
class TryWith(Expr):
    body: Expr
    fallback: Expr


@dataclass(frozen=True)
class TryCatch(Expr):
    body: Expr
    pattern: Pattern
    handler: Expr


@dataclass(frozen=True)
class CastAs(Expr):
    expr: Expr
    type: Type


@dataclass(frozen=True)
class Fix(Expr):
    expr: Expr


@dataclass(frozen=True)
class Fold(Expr):
    type: Type
    expr: Expr


@dataclass(frozen=True)
class Unfold(Expr):
    type: Type
    expr: Expr


# --------------------------------------------------------------------------
# Declarations and programs


@dataclass(frozen=True)
class Decl:
    span: Span = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class FunctionDecl(Decl):
    name: str
    generic_binders: tuple[str, ...]
    params: tuple[Param, ...]
    return_type: Type
    nested_decls: tuple[Decl, ...]
    body: Expr
    generic: bool = False

    def signature(self) -> Type:
        fn = TyFn(tuple(t for _, t in self.params), self.return_type)
        return TyForall(self.generic_binders, fn) if self.generic else fn


@dataclass(frozen=True)
class TypeAliasDecl(Decl):
    name: str
    type: Type


@dataclass(frozen=True)
class ExceptionTypeDecl(Decl):
    type: Type


@dataclass(frozen=True)
class ExceptionVariantDecl(Decl):
    label: str
    type: Type


@dataclass(frozen=True)
class Program:
    language: str
    extensions: tuple[str, ...]
    decls: tuple[Decl, ...]

    @property
    def functions(self) -> list[FunctionDecl]:
        return [d for d in self.decls if isinstance(d, FunctionDecl)]

    @property
    def exception_decls(self) -> list[Decl]:
        return [d for d in self.decls if isinstance(d, (ExceptionTypeDecl, ExceptionVariantDecl))]

    @property
    def aliases(self) -> dict[str, Type]:
        return {d.name: d.type for d in self.decls if isinstance(d, TypeAliasDecl)}

    def function(self, name: str) -> Optional[FunctionDecl]:
        for d in self.functions:
            if d.name == name:
                return d
        return None
