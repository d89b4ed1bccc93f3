"""Assertion language: expressions, pure and spatial formulas, symbolic heaps.

Every assertion is kept in the normal form ``exists xs. (sigma & pi)`` where
``sigma`` is a tuple of spatial atoms read as a separating conjunction and
``pi`` is a tuple of pure conjuncts.  All objects are immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Union

ADDR = "addr"
INT = "int"

_ids = itertools.count(1)


class SortError(TypeError):
    """An integer expression was used where an address is required, or vice versa."""


class DefinitionError(LookupError):
    """Reference to an unknown predicate or sort, or an arity mismatch."""


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True, eq=False)
class Var:
    name: str
    id: int
    kind: str = ADDR

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and other.id == self.id

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return f"{self.name}#{self.id}"

    def __str__(self) -> str:
        return self.name


def restart_ids(start: int = 1) -> None:
    """Restart variable numbering.  Only safe once no earlier variable is used
    again, e.g. before parsing a program afresh for one query."""
    global _ids
    _ids = itertools.count(start)


def new_var(name: str, kind: str = ADDR) -> Var:
    return Var(name, next(_ids), kind)


def fresh(v: Var, name: str | None = None) -> Var:
    """A new variable of the same kind as ``v``."""
    return Var(name or v.name, next(_ids), v.kind)


class _Nil:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "nil"

    def __reduce__(self):
        return (_Nil, ())


NIL = _Nil()


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


Expr = Union[Var, _Nil, IntConst, Neg, Add, Sub]


def expr_kind(e: Expr) -> str:
    if isinstance(e, Var):
        return e.kind
    if e is NIL:
        return ADDR
    return INT


def expr_vars(e: Expr) -> Iterator[Var]:
    if isinstance(e, Var):
        yield e
    elif isinstance(e, Neg):
        yield from expr_vars(e.arg)
    elif isinstance(e, (Add, Sub)):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


def subst_expr(e: Expr, sub: Mapping[Var, Expr]) -> Expr:
    if isinstance(e, Var):
        return sub.get(e, e)
    if isinstance(e, Neg):
        return Neg(subst_expr(e.arg, sub))
    if isinstance(e, Add):
        return Add(subst_expr(e.left, sub), subst_expr(e.right, sub))
    if isinstance(e, Sub):
        return Sub(subst_expr(e.left, sub), subst_expr(e.right, sub))
    return e


# --------------------------------------------------------------------------
# pure formulas


@dataclass(frozen=True)
class BoolConst:
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Eq:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ne:
    left: Expr
    right: Expr


CMP_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    arg: "Pure"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Implies:
    left: "Pure"
    right: "Pure"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Pure"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Pure"


Pure = Union[BoolConst, Eq, Ne, Cmp, Not, And, Or, Implies, Forall, Exists]


def conj(parts: Iterable[Pure]) -> Pure:
    flat = list(conjuncts_of(parts))
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def conjuncts_of(parts: Iterable[Pure]) -> Iterator[Pure]:
    """Flatten nested conjunctions, dropping ``true``."""
    for p in parts:
        if isinstance(p, And):
            yield from conjuncts_of(p.args)
        elif p == TRUE:
            continue
        else:
            yield p


def pure_free_vars(p: Pure) -> set[Var]:
    out: set[Var] = set()
    _pure_fv(p, frozenset(), out)
    return out


def _pure_fv(p: Pure, bound: frozenset, out: set) -> None:
    if isinstance(p, (Eq, Ne, Cmp)):
        for v in itertools.chain(expr_vars(p.left), expr_vars(p.right)):
            if v not in bound:
                out.add(v)
    elif isinstance(p, Not):
        _pure_fv(p.arg, bound, out)
    elif isinstance(p, (And, Or)):
        for a in p.args:
            _pure_fv(a, bound, out)
    elif isinstance(p, Implies):
        _pure_fv(p.left, bound, out)
        _pure_fv(p.right, bound, out)
    elif isinstance(p, (Forall, Exists)):
        _pure_fv(p.body, bound | {p.var}, out)


def _pure_bound_vars(p: Pure) -> Iterator[Var]:
    if isinstance(p, (Forall, Exists)):
        yield p.var
        yield from _pure_bound_vars(p.body)
    elif isinstance(p, Not):
        yield from _pure_bound_vars(p.arg)
    elif isinstance(p, (And, Or)):
        for a in p.args:
            yield from _pure_bound_vars(a)
    elif isinstance(p, Implies):
        yield from _pure_bound_vars(p.left)
        yield from _pure_bound_vars(p.right)


def _check_sub(sub: Mapping[Var, Expr]) -> None:
    for v, e in sub.items():
        if expr_kind(e) != v.kind:
            raise SortError(f"cannot substitute {_show(e)} ({expr_kind(e)}) for {v.name} ({v.kind})")


def subst_pure(p: Pure, sub: Mapping[Var, Expr]) -> Pure:
    if not sub:
        return p
    if isinstance(p, Eq):
        return Eq(subst_expr(p.left, sub), subst_expr(p.right, sub))
    if isinstance(p, Ne):
        return Ne(subst_expr(p.left, sub), subst_expr(p.right, sub))
    if isinstance(p, Cmp):
        return Cmp(p.op, subst_expr(p.left, sub), subst_expr(p.right, sub))
    if isinstance(p, Not):
        return Not(subst_pure(p.arg, sub))
    if isinstance(p, And):
        return And(tuple(subst_pure(a, sub) for a in p.args))
    if isinstance(p, Or):
        return Or(tuple(subst_pure(a, sub) for a in p.args))
    if isinstance(p, Implies):
        return Implies(subst_pure(p.left, sub), subst_pure(p.right, sub))
    if isinstance(p, (Forall, Exists)):
        inner = {k: e for k, e in sub.items() if k != p.var}
        var = p.var
        rng = set().union(*(set(expr_vars(e)) for e in inner.values())) if inner else set()
        if var in rng:
            nv = fresh(var)
            inner[var] = nv
            var = nv
        return type(p)(var, subst_pure(p.body, inner))
    return p


# --------------------------------------------------------------------------
# spatial atoms


class _Emp:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "emp"

    def __reduce__(self):
        return (_Emp, ())


EMP = _Emp()


@dataclass(frozen=True)
class PointsTo:
    root: Expr
    sort: str
    args: tuple


@dataclass(frozen=True)
class PredApp:
    pred: str
    args: tuple


SpatialAtom = Union[_Emp, PointsTo, PredApp]


def atom_vars(a: SpatialAtom) -> Iterator[Var]:
    if isinstance(a, PointsTo):
        yield from expr_vars(a.root)
        for e in a.args:
            yield from expr_vars(e)
    elif isinstance(a, PredApp):
        for e in a.args:
            yield from expr_vars(e)


def subst_atom(a: SpatialAtom, sub: Mapping[Var, Expr]) -> SpatialAtom:
    if isinstance(a, PointsTo):
        return PointsTo(subst_expr(a.root, sub), a.sort, tuple(subst_expr(e, sub) for e in a.args))
    if isinstance(a, PredApp):
        return PredApp(a.pred, tuple(subst_expr(e, sub) for e in a.args))
    return a


@dataclass(frozen=True)
class Sort:
    """A record type: ``fields`` is a tuple of ``(kind, field_name)`` pairs."""

    name: str
    fields: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.fields)

    @property
    def kinds(self) -> tuple:
        return tuple(k for k, _ in self.fields)


# --------------------------------------------------------------------------
# symbolic heaps


@dataclass(frozen=True)
class SymbolicHeap:
    exists: tuple = ()
    spatial: tuple = (EMP,)
    pure: tuple = ()

    def __post_init__(self):
        ex = tuple(self.exists)
        if len(set(ex)) != len(ex):
            raise ValueError("existential variables must be pairwise distinct")
        sp = tuple(self.spatial)
        if not sp:
            sp = (EMP,)
        object.__setattr__(self, "exists", ex)
        object.__setattr__(self, "spatial", sp)
        object.__setattr__(self, "pure", tuple(conjuncts_of(self.pure)))

    @property
    def atoms(self) -> tuple:
        """Spatial atoms other than ``emp``."""
        return tuple(a for a in self.spatial if a is not EMP)

    def is_spatially_empty(self) -> bool:
        return not self.atoms

    def pure_formula(self) -> Pure:
        return conj(self.pure)

    def with_(self, exists=None, spatial=None, pure=None) -> "SymbolicHeap":
        return SymbolicHeap(
            self.exists if exists is None else exists,
            self.spatial if spatial is None else spatial,
            self.pure if pure is None else pure,
        )

    def star(self, atoms: Iterable[SpatialAtom]) -> "SymbolicHeap":
        return self.with_(spatial=self.atoms + tuple(atoms))

    def and_(self, pure: Iterable[Pure]) -> "SymbolicHeap":
        return self.with_(pure=self.pure + tuple(pure))

    def __str__(self) -> str:
        return show_heap(self)


@dataclass(frozen=True)
class Entailment:
    ante: SymbolicHeap
    cons: SymbolicHeap

    def __str__(self) -> str:
        return show_entailment(self)


def free_vars(f: SymbolicHeap) -> set[Var]:
    """Variables of ``f`` occurring outside every binder."""
    out: set[Var] = set()
    for a in f.spatial:
        out.update(atom_vars(a))
    for p in f.pure:
        out |= pure_free_vars(p)
    return out - set(f.exists)


def entailment_free_vars(e: Entailment) -> set[Var]:
    return free_vars(e.ante) | free_vars(e.cons)


def all_vars(f: SymbolicHeap) -> set[Var]:
    out = set(f.exists)
    for a in f.spatial:
        out.update(atom_vars(a))
    for p in f.pure:
        out |= pure_free_vars(p)
        out.update(_pure_bound_vars(p))
    return out


def subst_apply(f: SymbolicHeap, sub: Mapping[Var, Expr]) -> SymbolicHeap:
    """Simultaneous capture-avoiding substitution of free variables."""
    _check_sub(sub)
    sub = {k: e for k, e in sub.items() if k not in f.exists and k != e}
    if not sub:
        return f
    rng: set[Var] = set()
    for e in sub.values():
        rng.update(expr_vars(e))
    exists = list(f.exists)
    inner = dict(sub)
    for i, v in enumerate(exists):
        if v in rng:
            nv = fresh(v)
            exists[i] = nv
            inner[v] = nv
    return SymbolicHeap(
        tuple(exists),
        tuple(subst_atom(a, inner) for a in f.spatial),
        tuple(subst_pure(p, inner) for p in f.pure),
    )


def open_exists(f: SymbolicHeap) -> tuple[SymbolicHeap, dict]:
    """Replace the existential prefix by fresh free variables."""
    ren = {v: fresh(v) for v in f.exists}
    body = SymbolicHeap((), f.spatial, f.pure)
    return subst_apply(body, ren), ren


def freshen_exists(f: SymbolicHeap) -> SymbolicHeap:
    if not f.exists:
        return f
    ren = {v: fresh(v) for v in f.exists}
    body = subst_apply(SymbolicHeap((), f.spatial, f.pure), ren)
    return SymbolicHeap(tuple(ren.values()), body.spatial, body.pure)


# --------------------------------------------------------------------------
# syntactic equivalence and canonical keys


def atom_key(a: SpatialAtom, name=None):
    name = name or _var_id
    if a is EMP:
        return (0,)
    if isinstance(a, PointsTo):
        return (1, a.sort, _expr_key(a.root, name), tuple(_expr_key(e, name) for e in a.args))
    return (2, a.pred, tuple(_expr_key(e, name) for e in a.args))


def _var_id(v: Var):
    return ("v", v.id)


def _expr_key(e: Expr, name):
    if isinstance(e, Var):
        return name(e)
    if e is NIL:
        return ("nil",)
    if isinstance(e, IntConst):
        return ("c", e.value)
    if isinstance(e, Neg):
        return ("neg", _expr_key(e.arg, name))
    if isinstance(e, Add):
        return ("+", _expr_key(e.left, name), _expr_key(e.right, name))
    return ("-", _expr_key(e.left, name), _expr_key(e.right, name))


def _pure_key(p: Pure, name, bound: tuple = ()):
    def ek(e):
        return _expr_key(e, lambda v: ("q", bound.index(v)) if v in bound else name(v))

    if isinstance(p, BoolConst):
        return ("b", p.value)
    if isinstance(p, (Eq, Ne)):
        a, b = sorted([ek(p.left), ek(p.right)])
        return (type(p).__name__, a, b)
    if isinstance(p, Cmp):
        op, l, r = p.op, p.left, p.right
        if op in (">", ">="):
            op, l, r = {">": "<", ">=": "<="}[op], r, l
        return ("cmp", op, ek(l), ek(r))
    if isinstance(p, Not):
        return ("not", _pure_key(p.arg, name, bound))
    if isinstance(p, (And, Or)):
        return (type(p).__name__, tuple(sorted(_pure_key(a, name, bound) for a in p.args)))
    if isinstance(p, Implies):
        return ("=>", _pure_key(p.left, name, bound), _pure_key(p.right, name, bound))
    return (type(p).__name__, _pure_key(p.body, name, bound + (p.var,)))


def syn_equiv(s1: Iterable[SpatialAtom], s2: Iterable[SpatialAtom]) -> bool:
    """Equality of spatial multisets modulo associativity and commutativity of ``*``.

    ``emp`` atoms are units of ``*`` and are ignored unless both sides are empty.
    """
    k1 = sorted(atom_key(a) for a in s1 if a is not EMP)
    k2 = sorted(atom_key(a) for a in s2 if a is not EMP)
    return k1 == k2


def canonical_key(f: SymbolicHeap):
    """Hashable key invariant under ``*`` reordering, conjunct order and renaming of
    existential variables."""
    bound = f.exists
    if not bound:
        return _closed_key(f, {})
    best = None
    cand_orders: Iterable = permutations(bound) if len(bound) <= 5 else [_first_use_order(f)]
    for order in cand_orders:
        k = _closed_key(f, {v: i for i, v in enumerate(order)})
        if best is None or k < best:
            best = k
    return best


def _first_use_order(f: SymbolicHeap) -> tuple:
    placeholder = lambda v: ("b",) if v in f.exists else _var_id(v)  # noqa: E731
    atoms = sorted(f.atoms, key=lambda a: atom_key(a, placeholder))
    seen: list = []
    for a in atoms:
        for v in atom_vars(a):
            if v in f.exists and v not in seen:
                seen.append(v)
    for p in f.pure:
        for v in sorted(pure_free_vars(p), key=lambda v: v.id):
            if v in f.exists and v not in seen:
                seen.append(v)
    seen.extend(v for v in f.exists if v not in seen)
    return tuple(seen)


def _closed_key(f: SymbolicHeap, index: dict):
    def name(v: Var):
        i = index.get(v)
        return ("e", i) if i is not None else _var_id(v)

    used = set()
    for a in f.atoms:
        used.update(atom_vars(a))
    for p in f.pure:
        used |= pure_free_vars(p)
    # unused binders are irrelevant to the meaning
    nbound = sum(1 for v in index if v in used)
    return (
        nbound,
        tuple(sorted(atom_key(a, name) for a in f.atoms)),
        tuple(sorted(set(_pure_key(p, name) for p in f.pure))),
    )


def entailment_key(e: Entailment):
    return (canonical_key(e.ante), canonical_key(e.cons))


# --------------------------------------------------------------------------
# inductive predicate definitions


@dataclass(frozen=True)
class PredDef:
    name: str
    params: tuple
    cases: tuple
    base_cases: frozenset = field(default=frozenset())

    @property
    def arity(self) -> int:
        return len(self.params)

    def is_base(self, index: int) -> bool:
        return index in self.base_cases


class PredEnv(Mapping):
    """Inductive predicate definitions together with the declared record sorts."""

    def __init__(self, preds: Iterable[PredDef] = (), sorts: Iterable[Sort] = ()):
        self.sorts: dict[str, Sort] = {}
        for s in sorts:
            self.sorts[s.name] = s
        raw = {}
        for p in preds:
            if p.name in raw:
                raise DefinitionError(f"duplicate predicate {p.name}")
            raw[p.name] = p
        self._check(raw)
        reach = _reachability({n: _called(p) for n, p in raw.items()})
        self._preds: dict[str, PredDef] = {}
        for n, p in raw.items():
            base = frozenset(
                i for i, case in enumerate(p.cases)
                if not any(n in reach.get(q, ()) and q in reach[n] or q == n for q in _case_preds(case))
            )
            self._preds[n] = PredDef(p.name, p.params, p.cases, base)

    def _check(self, raw):
        for p in raw.values():
            for case in p.cases:
                for a in case.atoms:
                    if isinstance(a, PredApp):
                        if a.pred not in raw:
                            raise DefinitionError(f"unknown predicate {a.pred} in definition of {p.name}")
                        if len(a.args) != raw[a.pred].arity:
                            raise DefinitionError(f"arity mismatch for {a.pred} in definition of {p.name}")
                    elif isinstance(a, PointsTo):
                        self.check_points_to(a)

    def check_points_to(self, a: PointsTo) -> None:
        s = self.sorts.get(a.sort)
        if s is None:
            raise DefinitionError(f"unknown sort {a.sort}")
        if len(a.args) != s.arity:
            raise DefinitionError(f"sort {a.sort} has {s.arity} fields, got {len(a.args)}")

    def __getitem__(self, name: str) -> PredDef:
        try:
            return self._preds[name]
        except KeyError:
            raise DefinitionError(f"unknown predicate {name}") from None

    def __iter__(self):
        return iter(self._preds)

    def __len__(self) -> int:
        return len(self._preds)

    def with_case(self, name: str, case: SymbolicHeap) -> "PredEnv":
        p = self[name]
        preds = [q if q.name != name else PredDef(p.name, p.params, p.cases + (case,)) for q in self._preds.values()]
        return PredEnv(preds, self.sorts.values())


def _case_preds(case: SymbolicHeap) -> list[str]:
    return [a.pred for a in case.atoms if isinstance(a, PredApp)]


def _called(p: PredDef) -> set[str]:
    return {q for case in p.cases for q in _case_preds(case)}


def _reachability(graph: dict[str, set[str]]) -> dict[str, set[str]]:
    reach = {}
    for start in graph:
        seen: set[str] = set()
        stack = list(graph[start])
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(graph.get(n, ()))
        reach[start] = seen
    return reach


def unfold_cases(p: PredApp, env: PredEnv) -> list[SymbolicHeap]:
    """Definition cases of ``p`` instantiated with its actual arguments.

    Every case gets fresh existential variables, so two unfoldings never share
    bound names.
    """
    d = env[p.pred]
    if len(p.args) != d.arity:
        raise DefinitionError(f"{p.pred} expects {d.arity} arguments, got {len(p.args)}")
    sub = dict(zip(d.params, p.args))
    return [subst_apply(freshen_exists(case), sub) for case in d.cases]


# --------------------------------------------------------------------------
# printing (surface syntax of the input language)

def _show(e: Expr, names=None) -> str:
    names = names or {}
    if isinstance(e, Var):
        return names.get(e, e.name)
    if e is NIL:
        return "nil"
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, Neg):
        return f"-{_show_arith(e.arg, names, 3)}"
    if isinstance(e, Add):
        return f"{_show_arith(e.left, names, 1)} + {_show_arith(e.right, names, 2)}"
    return f"{_show_arith(e.left, names, 1)} - {_show_arith(e.right, names, 2)}"


def _show_arith(e: Expr, names, level: int) -> str:
    s = _show(e, names)
    mine = 1 if isinstance(e, (Add, Sub)) else 3
    return f"({s})" if mine < level else s


def show_pure(p: Pure, names=None, ctx: int = 0) -> str:
    names = names or {}
    if isinstance(p, BoolConst):
        return "true" if p.value else "false"
    if isinstance(p, Eq):
        return f"{_show(p.left, names)} = {_show(p.right, names)}"
    if isinstance(p, Ne):
        return f"{_show(p.left, names)} != {_show(p.right, names)}"
    if isinstance(p, Cmp):
        return f"{_show(p.left, names)} {p.op} {_show(p.right, names)}"
    if isinstance(p, Not):
        if isinstance(p.arg, (BoolConst, Not)):
            return f"!{show_pure(p.arg, names, 3)}"
        return f"!({show_pure(p.arg, names)})"
    if isinstance(p, And):
        s = " & ".join(show_pure(a, names, 3) for a in p.args)
        return f"({s})" if ctx > 2 else s
    if isinstance(p, Or):
        s = " | ".join(show_pure(a, names, 2) for a in p.args)
        return f"({s})" if ctx > 1 else s
    if isinstance(p, Implies):
        s = f"{show_pure(p.left, names, 1)} => {show_pure(p.right, names, 0)}"
        return f"({s})" if ctx > 0 else s
    kw = "forall" if isinstance(p, Forall) else "exists"
    s = f"{kw} {names.get(p.var, p.var.name)}. {show_pure(p.body, names, 0)}"
    return f"({s})" if ctx > 0 else s


def show_atom(a: SpatialAtom, names=None) -> str:
    names = names or {}
    if a is EMP:
        return "emp"
    if isinstance(a, PointsTo):
        return f"{_show(a.root, names)}->{a.sort}{{{', '.join(_show(e, names) for e in a.args)}}}"
    return f"{a.pred}({', '.join(_show(e, names) for e in a.args)})"


def display_names(vars_: Iterable[Var]) -> dict:
    """Plain names where unambiguous, ``name#id`` otherwise."""
    by_name: dict[str, set] = {}
    for v in vars_:
        by_name.setdefault(v.name, set()).add(v)
    out = {}
    for n, vs in by_name.items():
        for v in vs:
            out[v] = n if len(vs) == 1 else f"{n}#{v.id}"
    return out


def show_heap(f: SymbolicHeap, names=None) -> str:
    names = names if names is not None else display_names(all_vars(f))
    spatial = " * ".join(show_atom(a, names) for a in (f.atoms or (EMP,)))
    body = spatial
    if f.pure:
        body = f"{spatial} & " + " & ".join(show_pure(p, names, 3) for p in f.pure)
    if f.exists:
        return f"exists {' '.join(names.get(v, v.name) for v in f.exists)}. {body}"
    return body


def show_entailment(e: Entailment) -> str:
    names = display_names(all_vars(e.ante) | all_vars(e.cons))
    return f"{show_heap(e.ante, names)} |- {show_heap(e.cons, names)}"


def map_vars_expr(e: Expr, fn) -> Expr:
    if isinstance(e, Var):
        return fn(e)
    if isinstance(e, Neg):
        return Neg(map_vars_expr(e.arg, fn))
    if isinstance(e, (Add, Sub)):
        return type(e)(map_vars_expr(e.left, fn), map_vars_expr(e.right, fn))
    return e


def map_vars_pure(p: Pure, fn) -> Pure:
    """Rename every variable occurrence, bound ones included."""
    if isinstance(p, (Eq, Ne)):
        return type(p)(map_vars_expr(p.left, fn), map_vars_expr(p.right, fn))
    if isinstance(p, Cmp):
        return Cmp(p.op, map_vars_expr(p.left, fn), map_vars_expr(p.right, fn))
    if isinstance(p, Not):
        return Not(map_vars_pure(p.arg, fn))
    if isinstance(p, (And, Or)):
        return type(p)(tuple(map_vars_pure(a, fn) for a in p.args))
    if isinstance(p, Implies):
        return Implies(map_vars_pure(p.left, fn), map_vars_pure(p.right, fn))
    if isinstance(p, (Forall, Exists)):
        return type(p)(fn(p.var), map_vars_pure(p.body, fn))
    return p


def map_vars_atom(a: SpatialAtom, fn) -> SpatialAtom:
    if isinstance(a, PointsTo):
        return PointsTo(map_vars_expr(a.root, fn), a.sort, tuple(map_vars_expr(e, fn) for e in a.args))
    if isinstance(a, PredApp):
        return PredApp(a.pred, tuple(map_vars_expr(e, fn) for e in a.args))
    return a


def map_vars_heap(f: SymbolicHeap, fn) -> SymbolicHeap:
    return SymbolicHeap(
        tuple(fn(v) for v in f.exists),
        tuple(map_vars_atom(a, fn) for a in f.spatial),
        tuple(map_vars_pure(p, fn) for p in f.pure),
    )
