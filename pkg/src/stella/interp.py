"""Call-by-value big-step evaluator with a reference store.

Non-local control (``throw``, ``panic!``, runtime errors) is carried by Python
exceptions inside the evaluator and turned into an :class:`Outcome` at the
boundary, so callers never see an exception for a program-level failure.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from . import syntax as s
from .poly import free_type_vars, unroll
from .pretty import pretty_type
from .subtype import subtype

DEFAULT_FUEL = 10_000_000

# -- values ---------------------------------------------------------------------


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class VNat(Value):
    n: int


@dataclass(frozen=True)
class VBool(Value):
    b: bool


@dataclass(frozen=True)
class VUnit(Value):
    pass


@dataclass(eq=False)
class VClosure(Value):
    params: tuple[str, ...]
    param_types: tuple[s.Type, ...]
    body: s.Expr
    env: "Env"


@dataclass(eq=False)
class VTypeClosure(Value):
    binders: tuple[str, ...]
    closure: VClosure


@dataclass(frozen=True)
class VTuple(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class VRecord(Value):
    fields: tuple[tuple[str, Value], ...]

    def get(self, label: str) -> Optional[Value]:
        for k, v in self.fields:
            if k == label:
                return v
        return None


@dataclass(frozen=True)
class VInl(Value):
    value: Value


@dataclass(frozen=True)
class VInr(Value):
    value: Value


@dataclass(frozen=True)
class VVariant(Value):
    label: str
    value: Value


@dataclass(frozen=True)
class VList(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class VLocation(Value):
    index: int


@dataclass(frozen=True)
class VFolded(Value):
    type: s.Type
    value: Value


@dataclass(eq=False)
class _FixThunk:
    """Stands for ``fix f`` in an environment; unrolled each time the variable is read."""

    fn: Value


Env = dict  # name -> Value | _FixThunk; closures share their defining dict

# -- outcomes ---------------------------------------------------------------------


@dataclass(frozen=True)
class Normal:
    value: Value


@dataclass(frozen=True)
class Thrown:
    value: Value


@dataclass(frozen=True)
class Panicked:
    pass


@dataclass(frozen=True)
class RuntimeFailure:
    kind: str  # cast-failure, head-of-empty-list, tail-of-empty-list, nonexhaustive-match,
    #            fuel-exhausted, stack-overflow


Outcome = Union[Normal, Thrown, Panicked, RuntimeFailure]


class _Throw(Exception):
    def __init__(self, value: Value):
        self.value = value


class _Panic(Exception):
    pass


class _Stuck(Exception):
    def __init__(self, kind: str):
        self.kind = kind


@dataclass
class Store:
    slots: list[Value] = field(default_factory=list)

    def alloc(self, v: Value) -> VLocation:
        self.slots.append(v)
        return VLocation(len(self.slots) - 1)


# -- evaluator ----------------------------------------------------------------------


class Interpreter:
    def __init__(self, aliases: Mapping[str, s.Type] | None = None, fuel: int = DEFAULT_FUEL,
                 store: Optional[Store] = None):
        self.aliases = dict(aliases or {})
        self.fuel = fuel
        self.store = store if store is not None else Store()

    # runtime type tests (casts and re-checking results)

    def expand(self, t: s.Type) -> s.Type:
        match t:
            case s.TyVar(name) | s.TyAlias(name) if name in self.aliases:
                return self.aliases[name]
        return s.map_children(t, self.expand)

    def conforms(self, v: Value, t: s.Type) -> bool:
        t = self.expand(t)
        match v, t:
            case _, s.TyTop() | s.TyVar() | s.TyMeta():
                return True
            case VNat(), s.TyNat():
                return True
            case VBool(), s.TyBool():
                return True
            case VUnit(), s.TyUnit():
                return True
            case VClosure(), s.TyFn(params):
                if len(v.params) != len(params):
                    return False
                return all(free_type_vars(d) or s.metavars(d) or subtype(p, d)
                           for p, d in zip(params, v.param_types))
            case VTypeClosure(), s.TyForall(binders):
                return len(binders) == len(v.binders)
            case VTuple(items), s.TyTuple(types):
                return len(items) == len(types) and all(map(self.conforms, items, types))
            case VRecord(), s.TyRecord(fields):
                return all(v.get(k) is not None and self.conforms(v.get(k), ft) for k, ft in fields)
            case VInl(x), s.TySum(left, _):
                return self.conforms(x, left)
            case VInr(x), s.TySum(_, right):
                return self.conforms(x, right)
            case VVariant(label, x), s.TyVariant():
                ft = t.get(label)
                return ft is not None and self.conforms(x, ft)
            case VList(items), s.TyList(elem):
                return all(self.conforms(x, elem) for x in items)
            case VLocation(i), s.TyRef(elem):
                return 0 <= i < len(self.store.slots) and self.conforms(self.store.slots[i], elem)
            case VFolded(_, x), s.TyMu():
                return self.conforms(x, unroll(t))
        return False

    # evaluation

    def lookup(self, env: Env, name: str) -> Value:
        v = env[name]
        if isinstance(v, _FixThunk):
            return self.apply(v.fn, [v])
        return v

    def apply(self, fn: Value, args: list) -> Value:
        while True:
            if not isinstance(fn, VClosure):
                raise TypeError(f"cannot apply {fn!r}")
            n = len(fn.params)
            frame = dict(fn.env)
            frame.update(zip(fn.params, args[:n]))
            result = self.eval(frame, fn.body)
            args = args[n:]
            if not args:
                return result
            fn = result

    def closure(self, env: Env, params, body: s.Expr) -> VClosure:
        return VClosure(tuple(n for n, _ in params), tuple(t for _, t in params), body, env)

    def define_functions(self, env: Env, decls) -> Env:
        """Bind mutually visible function declarations in a fresh scope."""
        scope = dict(env)
        for d in decls:
            if not isinstance(d, s.FunctionDecl):
                continue
            body = d.body
            if d.nested_decls:
                body = _WithNested(d.nested_decls, d.body)
            c = self.closure(scope, d.params, body)
            scope[d.name] = VTypeClosure(d.generic_binders, c) if d.generic else c
        return scope

    def eval(self, env: Env, e: s.Expr) -> Value:
        self.fuel -= 1
        if self.fuel < 0:
            raise _Stuck("fuel-exhausted")
        match e:
            case s.Var(name):
                return self.lookup(env, name)
            case s.ConstTrue():
                return VBool(True)
            case s.ConstFalse():
                return VBool(False)
            case s.ConstUnit():
                return VUnit()
            case s.Zero():
                return VNat(0)
            case s.NatLiteral(n):
                return VNat(n)
            case s.Succ(x):
                return VNat(self.nat(env, x) + 1)
            case s.NatPred(x):
                return VNat(max(self.nat(env, x) - 1, 0))
            case s.NatIsZero(x):
                return VBool(self.nat(env, x) == 0)
            case s.NatRec(n, z, step):
                count = self.nat(env, n)
                acc = self.eval(env, z)
                f = self.eval(env, step)
                for i in range(count):
                    acc = self.apply(self.apply(f, [VNat(i)]), [acc])
                return acc
            case s.If(c, t, f):
                return self.eval(env, t if self.eval(env, c).b else f)
            case s.Abstraction(params, body):
                return self.closure(env, params, body)
            case s.GenericAbstraction(binders, params, body):
                return VTypeClosure(binders, self.closure(env, params, body))
            case s.Application(fn, args):
                f = self.eval(env, fn)
                return self.apply(f, [self.eval(env, a) for a in args])
            case s.TypeApplication(fn, _):
                return self.eval(env, fn).closure
            case s.Tuple(exprs):
                return VTuple(tuple(self.eval(env, x) for x in exprs))
            case s.TupleProj(x, i):
                return self.eval(env, x).items[i - 1]
            case s.Record(fields):
                return VRecord(tuple((k, self.eval(env, v)) for k, v in fields))
            case s.RecordProj(x, label):
                return self.eval(env, x).get(label)
            case s.Inl(x):
                return VInl(self.eval(env, x))
            case s.Inr(x):
                return VInr(self.eval(env, x))
            case s.VariantInj(label, x):
                return VVariant(label, self.eval(env, x))
            case s.ListLiteral(exprs):
                return VList(tuple(self.eval(env, x) for x in exprs))
            case s.ConsList(h, t):
                head = self.eval(env, h)
                return VList((head, *self.eval(env, t).items))
            case s.ListHead(x):
                items = self.eval(env, x).items
                if not items:
                    raise _Stuck("head-of-empty-list")
                return items[0]
            case s.ListTail(x):
                items = self.eval(env, x).items
                if not items:
                    raise _Stuck("tail-of-empty-list")
                return VList(items[1:])
            case s.ListIsEmpty(x):
                return VBool(not self.eval(env, x).items)
            case s.Match(scrutinee, cases):
                v = self.eval(env, scrutinee)
                for pat, body in cases:
                    binds = match_pattern(pat, v)
                    if binds is not None:
                        return self.eval({**env, **binds}, body)
                raise _Stuck("nonexhaustive-match")
            case s.Let(bindings, body):
                inner = dict(env)
                for pat, value in bindings:
                    binds = match_pattern(pat, self.eval(inner, value))
                    if binds is None:
                        raise _Stuck("nonexhaustive-match")
                    inner.update(binds)
                return self.eval(inner, body)
            case s.LetRec(bindings, body):
                inner = dict(env)
                for name, _, value in bindings:
                    inner[name] = self.eval(inner, value)
                return self.eval(inner, body)
            case s.Ascription(x, _):
                return self.eval(env, x)
            case s.CastAs(x, ty):
                v = self.eval(env, x)
                if not self.conforms(v, ty):
                    raise _Stuck("cast-failure")
                return v
            case s.Sequence(a, b):
                self.eval(env, a)
                return self.eval(env, b)
            case s.NewRef(x):
                return self.store.alloc(self.eval(env, x))
            case s.Deref(x):
                return self.store.slots[self.eval(env, x).index]
            case s.Assign(target, value):
                loc = self.eval(env, target)
                self.store.slots[loc.index] = self.eval(env, value)
                return VUnit()
            case s.Panic():
                raise _Panic()
            case s.Throw(x):
                raise _Throw(self.eval(env, x))
            case s.TryWith(body, fallback):
                try:
                    return self.eval(env, body)
                except _Throw:
                    return self.eval(env, fallback)
            case s.TryCatch(body, pat, handler):
                try:
                    return self.eval(env, body)
                except _Throw as exc:
                    binds = match_pattern(pat, exc.value)
                    if binds is None:
                        raise
                    return self.eval({**env, **binds}, handler)
            case s.Fix(x):
                f = self.eval(env, x)
                return self.apply(f, [_FixThunk(f)])
            case s.Fold(ty, x):
                return VFolded(ty, self.eval(env, x))
            case s.Unfold(_, x):
                return self.eval(env, x).value
            case _WithNested(decls, body):
                return self.eval(self.define_functions(env, decls), body)
        raise TypeError(f"cannot evaluate {e!r}")

    def nat(self, env: Env, e: s.Expr) -> int:
        return self.eval(env, e).n


@dataclass(frozen=True)
class _WithNested(s.Expr):
    """Function body preceded by nested declarations (evaluator-internal)."""

    decls: tuple
    body: s.Expr


def match_pattern(p: s.Pattern, v: Value) -> Optional[dict[str, Value]]:
    out: dict[str, Value] = {}
    return out if _match(p, v, out) else None


def _match(p: s.Pattern, v: Value, out: dict[str, Value]) -> bool:
    match p, v:
        case s.PVar(name), _:
            out[name] = v
            return True
        case s.PWildcard(), _:
            return True
        case s.PAscription(q, _), _:
            return _match(q, v, out)
        case s.PTrue(), VBool(b):
            return b
        case s.PFalse(), VBool(b):
            return not b
        case s.PUnit(), VUnit():
            return True
        case s.PZero(), VNat(n):
            return n == 0
        case s.PInt(k), VNat(n):
            return n == k
        case s.PSucc(q), VNat(n):
            return n > 0 and _match(q, VNat(n - 1), out)
        case s.PInl(q), VInl(x):
            return _match(q, x, out)
        case s.PInr(q), VInr(x):
            return _match(q, x, out)
        case s.PVariant(label, q), VVariant(vl, x):
            return label == vl and _match(q, x, out)
        case s.PTuple(ps), VTuple(items):
            return len(ps) == len(items) and all(_match(q, x, out) for q, x in zip(ps, items))
        case s.PRecord(fields), VRecord():
            return all(v.get(k) is not None and _match(q, v.get(k), out) for k, q in fields)
        case s.PList(ps), VList(items):
            return len(ps) == len(items) and all(_match(q, x, out) for q, x in zip(ps, items))
        case s.PCons(h, t), VList(items):
            return bool(items) and _match(h, items[0], out) and _match(t, VList(items[1:]), out)
    return False


# -- entry points -------------------------------------------------------------------

_STACK_BYTES = 1024 * 1024 * 1024


def _in_big_stack(fn):
    """Run ``fn`` in a thread with a large stack so deep recursion does not crash."""
    result: list = []
    error: list = []

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 1_000_000))
        try:
            result.append(fn())
        except BaseException as exc:  # re-raised in the caller's thread
            error.append(exc)

    previous = threading.stack_size()
    threading.stack_size(_STACK_BYTES)
    try:
        worker = threading.Thread(target=target)
        worker.start()
    finally:
        threading.stack_size(previous)
    worker.join()
    if error:
        raise error[0]
    return result[0]


def _guarded(interp: Interpreter, thunk) -> Outcome:
    try:
        return Normal(thunk())
    except _Throw as exc:
        return Thrown(exc.value)
    except _Panic:
        return Panicked()
    except _Stuck as exc:
        return RuntimeFailure(exc.kind)
    except RecursionError:
        return RuntimeFailure("stack-overflow")


def program_aliases(program: s.Program) -> dict[str, s.Type]:
    from .typer import Checker

    return dict(Checker(permissive=True).program_context(program).aliases)


def eval_program(program: s.Program, input: Value, fuel: int = DEFAULT_FUEL) -> Outcome:
    """Apply ``main`` to ``input`` under a fresh store."""
    interp = Interpreter(program_aliases(program), fuel)

    def run() -> Value:
        env = interp.define_functions({}, program.decls)
        return interp.apply(env["main"], [input])

    return _in_big_stack(lambda: _guarded(interp, run))


def eval_expr(e: s.Expr, env: Optional[Env] = None, store: Optional[Store] = None,
              fuel: int = DEFAULT_FUEL) -> Outcome:
    interp = Interpreter(fuel=fuel, store=store)
    return _in_big_stack(lambda: _guarded(interp, lambda: interp.eval(dict(env or {}), e)))


def conforms(v: Value, t: s.Type, aliases: Mapping[str, s.Type] | None = None,
             store: Optional[Store] = None) -> bool:
    """Does runtime value ``v`` have the shape of type ``t``?"""
    return Interpreter(aliases, store=store).conforms(v, t)


def show_value(v: Value) -> str:
    match v:
        case VNat(n):
            return str(n)
        case VBool(b):
            return "true" if b else "false"
        case VUnit():
            return "unit"
        case VClosure():
            return "<fun>"
        case VTypeClosure():
            return "<generic fun>"
        case VTuple(items):
            return "{" + ", ".join(map(show_value, items)) + "}"
        case VRecord(fields):
            return "{" + ", ".join(f"{k} = {show_value(x)}" for k, x in fields) + "}"
        case VInl(x):
            return f"inl({show_value(x)})"
        case VInr(x):
            return f"inr({show_value(x)})"
        case VVariant(label, x):
            return f"<| {label} = {show_value(x)} |>"
        case VList(items):
            return "[" + ", ".join(map(show_value, items)) + "]"
        case VLocation(i):
            return f"<location {i}>"
        case VFolded(ty, x):
            return f"fold[{pretty_type(ty)}] {show_value(x)}"
    raise TypeError(f"not a value: {v!r}")


def show_outcome(o: Outcome) -> str:
    match o:
        case Normal(v):
            return show_value(v)
        case Thrown(v):
            return f"uncaught exception: {show_value(v)}"
        case Panicked():
            return "panic!"
        case RuntimeFailure("fuel-exhausted"):
            return "fuel exhausted"
        case RuntimeFailure(kind):
            return f"runtime error: {kind}"
    raise TypeError(f"not an outcome: {o!r}")
