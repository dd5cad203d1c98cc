"""Type reconstruction: metavariables for ``auto`` holes and first-order unification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Optional

from . import syntax as s
from .errors import NO_SPAN, Span, Tag, fail
from .poly import free_type_vars, fresh_name, substitute
from .pretty import pretty_type

if TYPE_CHECKING:
    from .typer import Context


@dataclass(frozen=True)
class Constraint:
    left: s.Type
    right: s.Type
    origin: Span = field(default=NO_SPAN, compare=False)


def apply_substitution(t: s.Type, subst: Mapping[int, s.Type]) -> s.Type:
    """Replace solved metavariables, following chains such as M1 ↦ M2 ↦ Bool."""
    if not subst:
        return t
    if isinstance(t, s.TyMeta):
        seen = set()
        while isinstance(t, s.TyMeta) and t.id in subst and t.id not in seen:
            seen.add(t.id)
            t = subst[t.id]
        if isinstance(t, s.TyMeta):
            return t
    return s.map_children(t, lambda c: apply_substitution(c, subst))


@dataclass(frozen=True)
class Substitution:
    mapping: Mapping[int, s.Type] = field(default_factory=dict)

    def apply(self, t: s.Type) -> s.Type:
        return apply_substitution(t, self.mapping)

    def __getitem__(self, key: int) -> s.Type:
        return self.mapping[key]

    def __contains__(self, key: int) -> bool:
        return key in self.mapping

    def __len__(self) -> int:
        return len(self.mapping)


class Unifier:
    """Incremental union-find unifier; each meta is bound at most once."""

    def __init__(self) -> None:
        self.bindings: dict[int, s.Type] = {}

    def find(self, t: s.Type) -> s.Type:
        if not isinstance(t, s.TyMeta) or t.id not in self.bindings:
            return t
        root = self.find(self.bindings[t.id])
        self.bindings[t.id] = root  # path compression
        return root

    def resolve(self, t: s.Type) -> s.Type:
        t = self.find(t)
        if isinstance(t, s.TyMeta):
            return t
        return s.map_children(t, self.resolve)

    def occurs(self, meta: int, t: s.Type) -> bool:
        t = self.find(t)
        if isinstance(t, s.TyMeta):
            return t.id == meta
        return any(self.occurs(meta, c) for c in s.children(t))

    def unify(self, left: s.Type, right: s.Type, origin: Span = NO_SPAN) -> None:
        work = [(left, right)]
        while work:
            a, b = work.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if isinstance(b, s.TyMeta) and not isinstance(a, s.TyMeta):
                a, b = b, a
            if isinstance(a, s.TyMeta):
                if self.occurs(a.id, b):
                    raise fail(Tag.OCCURS_CHECK_INFINITE_TYPE,
                               f"cannot construct the infinite type {pretty_type(self.resolve(b))} "
                               f"for a metavariable occurring inside it", origin)
                self.bindings[a.id] = b
                continue
            pairs = self._decompose(a, b)
            if pairs is None:
                raise fail(Tag.UNEXPECTED_TYPE_FOR_EXPRESSION,
                           f"cannot unify {pretty_type(self.resolve(left))} with "
                           f"{pretty_type(self.resolve(right))}", origin)
            work.extend(pairs)

    @staticmethod
    def _decompose(a: s.Type, b: s.Type) -> Optional[list[tuple[s.Type, s.Type]]]:
        match a, b:
            case s.TyFn(p1, r1), s.TyFn(p2, r2) if len(p1) == len(p2):
                return [*zip(p1, p2), (r1, r2)]
            case s.TyTuple(i1), s.TyTuple(i2) if len(i1) == len(i2):
                return list(zip(i1, i2))
            case (s.TyRecord(f1), s.TyRecord(f2)) | (s.TyVariant(f1), s.TyVariant(f2)):
                if [k for k, _ in f1] != [k for k, _ in f2]:
                    return None
                return [(x, y) for (_, x), (_, y) in zip(f1, f2)]
            case s.TySum(l1, r1), s.TySum(l2, r2):
                return [(l1, l2), (r1, r2)]
            case (s.TyList(x), s.TyList(y)) | (s.TyRef(x), s.TyRef(y)):
                return [(x, y)]
            case s.TyForall(bs1, body1), s.TyForall(bs2, body2) if len(bs1) == len(bs2):
                avoid = free_type_vars(a) | free_type_vars(b) | set(bs1) | set(bs2)
                names = []
                for _ in bs1:
                    names.append(fresh_name("_U", avoid))
                    avoid.add(names[-1])
                vs = [s.TyVar(n) for n in names]
                return [(substitute(body1, dict(zip(bs1, vs))), substitute(body2, dict(zip(bs2, vs))))]
            case s.TyMu(x1, body1), s.TyMu(x2, body2):
                v = s.TyVar(fresh_name("_U", free_type_vars(a) | free_type_vars(b) | {x1, x2}))
                return [(substitute(body1, {x1: v}), substitute(body2, {x2: v}))]
        if type(a) is type(b) and not s.children(a) and not isinstance(a, (s.TyVar, s.TyMeta, s.TyAlias)):
            return []
        return None

    def solution(self) -> Substitution:
        return Substitution({k: self.resolve(s.TyMeta(k)) for k in self.bindings})


def unify(constraints: Iterable[Constraint]) -> Substitution:
    """Most general unifier of ``constraints``; raises a diagnostic at the failing constraint."""
    u = Unifier()
    for c in constraints:
        u.unify(c.left, c.right, c.origin)
    return u.solution()


class ConstraintCollector(Unifier):
    """Records constraints as the checker emits them and solves them eagerly."""

    def __init__(self, first_id: int = 1) -> None:
        super().__init__()
        self.next_id = first_id
        self.constraints: list[Constraint] = []

    def fresh(self) -> s.TyMeta:
        m = s.TyMeta(self.next_id)
        self.next_id += 1
        return m

    def add(self, left: s.Type, right: s.Type, origin: Span = NO_SPAN) -> None:
        self.constraints.append(Constraint(left, right, origin))
        self.unify(left, right, origin)


def generate_constraints(ctx: Context, e: s.Expr, expected: Optional[s.Type] = None
                         ) -> tuple[s.Type, list[Constraint]]:
    """Run the bidirectional rules in reconstruction mode and return the raw constraints.

    The returned type is not simplified by the solution, so callers see the
    metavariables exactly as generated.
    """
    from .typer import Checker, _max_meta

    checker = Checker()
    start = max(_max_meta(e), _max_meta(expected), _max_meta(tuple(ctx.vars.values()))) + 1
    checker.recon = _Recording(start)
    if expected is not None:
        checker.check(ctx, e, expected)
        result = expected
    else:
        result = checker.infer(ctx, e)
    return result, checker.recon.constraints


class _Recording(ConstraintCollector):
    """Collector that leaves metavariables in synthesized types unsolved."""

    def resolve(self, t: s.Type) -> s.Type:
        return t


def reconstruct_program(program: s.Program) -> tuple[s.Program, Substitution]:
    """Typecheck ``program`` with ``auto`` holes and return it fully annotated."""
    from .typer import Checker

    checker = Checker()
    checker.check_program(program)
    solution = checker.solution or Substitution()
    return fill_holes(program, solution), solution


def fill_holes(node, solution: Substitution, default: s.Type = s.NAT):
    """Replace every metavariable in an AST by its solution (unsolved ones by ``default``)."""
    import dataclasses

    if isinstance(node, s.Type):
        t = solution.apply(node)
        return _default_metas(t, default)
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        changes = {f.name: fill_holes(getattr(node, f.name), solution, default)
                   for f in dataclasses.fields(node) if f.name != "span"}
        return dataclasses.replace(node, **changes)
    if isinstance(node, tuple):
        return tuple(fill_holes(x, solution, default) for x in node)
    return node


def _default_metas(t: s.Type, default: s.Type) -> s.Type:
    if isinstance(t, s.TyMeta):
        return default
    return s.map_children(t, lambda c: _default_metas(c, default))
