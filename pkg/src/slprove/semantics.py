"""Bounded semantics: exact model checking over a finite universe.

A model is a stack (variables to values) and a finite heap (locations to
sorted records).  Inductive predicates are interpreted as the least fixed
point of their definitions, computed bottom-up over every heap of the bounded
universe, so cases that consume no heap cell are handled exactly.

Quantified variables (existentials of assertions and definition cases, and
quantifiers inside pure formulas) range over addresses plus a *witness* integer
range that widens ``int_range`` by ``witness_slack`` on both sides; stack and
heap values of models are drawn from ``int_range`` itself.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from . import syntax as S
from .syntax import (
    ADDR, INT, NIL, Add, And, BoolConst, Cmp, Entailment, Eq, Exists, Forall, Implies,
    IntConst, Ne, Neg, Not, Or, PointsTo, PredEnv, Sub, SymbolicHeap, Var,
)


class EvaluationError(LookupError):
    """A formula mentions a variable the stack does not define."""


@dataclass(frozen=True, order=True)
class Loc:
    k: int

    def __repr__(self) -> str:
        return f"Loc{self.k}"


def show_value(v) -> str:
    if v is NIL:
        return "nil"
    return repr(v)


@dataclass(frozen=True)
class Bounds:
    max_heap_size: int = 3
    loc_count: int = 3
    int_range: tuple | None = (0, 0)
    witness_slack: int | None = None

    def __post_init__(self):
        if self.max_heap_size < 0 or self.loc_count < 1:
            raise ValueError("need max_heap_size >= 0 and loc_count >= 1")
        if self.int_range is not None:
            object.__setattr__(self, "int_range", tuple(self.int_range))

    @property
    def ints(self) -> list[int]:
        if self.int_range is None:
            return []
        lo, hi = self.int_range
        return list(range(lo, hi + 1))

    @property
    def witness_ints(self) -> list[int]:
        if self.int_range is None or self.int_range[0] > self.int_range[1]:
            return []
        slack = self.max_heap_size if self.witness_slack is None else self.witness_slack
        lo, hi = self.int_range
        return list(range(lo - slack, hi + slack + 1))

    @property
    def locs(self) -> list[Loc]:
        return [Loc(k) for k in range(1, self.loc_count + 1)]

    def describe(self) -> str:
        r = "[]" if not self.ints else f"[{self.int_range[0]},{self.int_range[1]}]"
        return f"Bounds(heap<={self.max_heap_size}, locs={self.loc_count}, ints={r})"


@dataclass(frozen=True)
class Model:
    stack: Mapping = field(default_factory=dict)  # Var -> value
    heap: Mapping = field(default_factory=dict)  # Loc -> (sort name, values)

    @property
    def size(self) -> int:
        return len(self.heap)

    def render(self) -> str:
        st = ", ".join(f"{v.name}={show_value(x)}" for v, x in sorted(self.stack.items(), key=_var_order))
        hp = ", ".join(
            f"{show_value(l)} -> {srt}({', '.join(show_value(x) for x in vals)})"
            for l, (srt, vals) in sorted(self.heap.items())) or "emp"
        return f"stack: {st}; heap: {hp}"

    def to_json(self) -> dict:
        def jv(x):
            return x if isinstance(x, int) else show_value(x)

        return {
            "stack": {v.name if _unique_names(self.stack) else f"{v.name}#{v.id}": jv(x)
                      for v, x in sorted(self.stack.items(), key=_var_order)},
            "heap": {show_value(l): {"sort": srt, "values": [jv(x) for x in vals]}
                     for l, (srt, vals) in sorted(self.heap.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


def _var_order(item):
    v = item[0]
    return (v.name, v.id)


def _unique_names(stack) -> bool:
    names = [v.name for v in stack]
    return len(names) == len(set(names))


def model_lt(m1: Model, m2: Model) -> bool:
    """Strict model order: fewer allocated cells."""
    return len(m1.heap) < len(m2.heap)


# --------------------------------------------------------------------------
# expression and pure evaluation


def eval_expr(e, asg: Mapping):
    if isinstance(e, Var):
        try:
            return asg[e]
        except KeyError:
            raise EvaluationError(f"unbound variable {e.name}") from None
    if e is NIL:
        return NIL
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, Neg):
        return -eval_expr(e.arg, asg)
    if isinstance(e, Add):
        return eval_expr(e.left, asg) + eval_expr(e.right, asg)
    if isinstance(e, Sub):
        return eval_expr(e.left, asg) - eval_expr(e.right, asg)
    raise TypeError(f"not an expression: {e!r}")


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _eval_pure(p, asg: Mapping, doms) -> bool:
    if isinstance(p, Eq):
        return eval_expr(p.left, asg) == eval_expr(p.right, asg)
    if isinstance(p, Ne):
        return eval_expr(p.left, asg) != eval_expr(p.right, asg)
    if isinstance(p, Cmp):
        return _CMP[p.op](eval_expr(p.left, asg), eval_expr(p.right, asg))
    if isinstance(p, BoolConst):
        return p.value
    if isinstance(p, Not):
        return not _eval_pure(p.arg, asg, doms)
    if isinstance(p, And):
        return all(_eval_pure(a, asg, doms) for a in p.args)
    if isinstance(p, Or):
        return any(_eval_pure(a, asg, doms) for a in p.args)
    if isinstance(p, Implies):
        return (not _eval_pure(p.left, asg, doms)) or _eval_pure(p.right, asg, doms)
    if isinstance(p, (Forall, Exists)):
        test = all if isinstance(p, Forall) else any
        inner = dict(asg)

        def body(val):
            inner[p.var] = val
            return _eval_pure(p.body, inner, doms)

        return test(body(val) for val in doms[p.var.kind])
    raise TypeError(f"not a pure formula: {p!r}")


def eval_pure(p, stack: Mapping, bounds: Bounds | None = None) -> bool:
    """Truth value of a pure formula; quantifiers range over the bounded universe."""
    b = bounds or Bounds()
    doms = {ADDR: [NIL] + b.locs, INT: b.witness_ints}
    return _eval_pure(p, stack, doms)


# --------------------------------------------------------------------------
# the oracle


class _Unbound(Exception):
    pass


def _value(e, asg):
    """Value of ``e`` or raise ``_Unbound``."""
    if isinstance(e, Var):
        v = asg.get(e, _MISSING)
        if v is _MISSING:
            raise _Unbound
        return v
    if e is NIL:
        return NIL
    if isinstance(e, IntConst):
        return e.value
    try:
        return eval_expr(e, asg)
    except EvaluationError:
        raise _Unbound from None


_MISSING = object()


class Oracle:
    """Bounded model checker for one predicate environment and one set of bounds."""

    def __init__(self, env: PredEnv, bounds: Bounds):
        self.env = env
        self.bounds = bounds
        self.locs = bounds.locs
        self.addr_dom = [NIL] + self.locs
        self.int_dom = bounds.ints
        self.wit_doms = {ADDR: self.addr_dom, INT: bounds.witness_ints}
        self.model_doms = {ADDR: self.addr_dom, INT: self.int_dom}
        self._int_set = set(self.int_dom)
        self._tables: dict | None = None
        self._index: dict | None = None
        self.sort_order = list(env.sorts)

    # -- value ordering used by the model enumeration
    def value_rank(self, v) -> tuple:
        if v is NIL:
            return (0, 0)
        if isinstance(v, Loc):
            return (1, v.k)
        return (2, v)

    # -- least fixed point tables
    @property
    def tables(self) -> dict:
        if self._tables is None:
            self._compute_tables()
        return self._tables

    def _compute_tables(self):
        env = self.env
        cur: dict[str, set] = {name: set() for name in env}
        self._tables = {name: [] for name in env}
        self._index = {name: {} for name in env}
        while True:
            new: dict[str, set] = {name: set(cur[name]) for name in env}
            for name, d in env.items():
                for case in d.cases:
                    doms = {v: self.wit_doms[v.kind] for v in S.all_vars(case) | set(d.params)}
                    for asg, mask, cells in self._solve(
                        case.atoms, list(case.pure), {}, 0, frozenset(), None, doms, d.params
                    ):
                        new[name].add((tuple(asg[p] for p in d.params), mask, cells))
            if new == cur:
                break
            cur = new
            self._set_tables(cur)
        self._set_tables(cur)

    def _set_tables(self, cur):
        self._tables = {n: sorted(es, key=self._entry_rank) for n, es in cur.items()}
        self._index = {}
        for n, es in self._tables.items():
            idx: dict = {}
            for e in es:
                idx.setdefault(e[0][0] if e[0] else None, []).append(e)
            self._index[n] = idx

    def _entry_rank(self, e):
        args, mask, cells = e
        return (bin(mask).count("1"), [self.value_rank(a) for a in args], sorted(
            (c[0].k, c[1], [self.value_rank(x) for x in c[2]]) for c in cells))

    def predicate_models(self, name: str) -> list:
        """Every ``(args, heap)`` satisfying predicate ``name`` within the bounds."""
        return [(args, {c[0]: (c[1], c[2]) for c in cells}) for args, _, cells in self.tables[name]]

    # -- the join solver
    def _solve(self, atoms, pures, asg, mask, cells, target, doms, require=()):
        """Yield ``(assignment, mask, cells)`` extending ``asg`` so that ``atoms``
        hold on disjoint heap parts and every pure conjunct is true.

        With ``target`` (a dict ``loc -> cell``) the atoms must use exactly the
        target cells; without it, heaps are generated up to the size bound.
        """
        # evaluate or propagate pure conjuncts
        pending = []
        asg = dict(asg)
        changed = True
        while changed:
            changed = False
            pending = []
            for p in pures:
                try:
                    if not _eval_pure(p, asg, self.wit_doms):
                        return
                except EvaluationError:
                    if isinstance(p, Eq):
                        bound = self._propagate(p, asg, doms)
                        if bound is False:
                            return
                        if bound:
                            changed = True
                            continue
                    pending.append(p)
            pures = pending
        if atoms:
            yield from self._solve_atom(atoms, pures, asg, mask, cells, target, doms, require)
            return
        if target is not None and mask != target["mask"]:
            return
        # remaining unbound variables mentioned by pure conjuncts or required
        todo = []
        for p in pures:
            for v in S.pure_free_vars(p):
                if v not in asg and v not in todo:
                    todo.append(v)
        for v in require:
            if v not in asg and v not in todo:
                todo.append(v)
        if not todo:
            yield asg, mask, cells
            return
        v = todo[0]
        for val in doms.get(v, self.wit_doms[v.kind]):
            asg[v] = val
            yield from self._solve((), pures, asg, mask, cells, target, doms, require)
        del asg[v]

    def _propagate(self, p: Eq, asg, doms):
        for a, b in ((p.left, p.right), (p.right, p.left)):
            if isinstance(a, Var) and a not in asg:
                try:
                    val = _value(b, asg)
                except _Unbound:
                    continue
                dom = doms.get(a)
                if dom is not None and val not in dom:
                    return False
                asg[a] = val
                return True
        return None

    def _pick(self, atoms, asg):
        best, best_score = 0, None
        for i, a in enumerate(atoms):
            if isinstance(a, PointsTo):
                score = (2, 0) if _is_bound(a.root, asg) else (0, sum(_is_bound(x, asg) for x in a.args))
            else:
                nb = sum(_is_bound(x, asg) for x in a.args)
                score = (1 if nb else 0, nb + 1)
            if best_score is None or score > best_score:
                best, best_score = i, score
        return best

    def _solve_atom(self, atoms, pures, asg, mask, cells, target, doms, require):
        i = self._pick(atoms, asg)
        a = atoms[i]
        rest = atoms[:i] + atoms[i + 1:]
        # complex argument expressions with unbound variables: bind their variables first
        for e in ((a.root,) + a.args if isinstance(a, PointsTo) else a.args):
            if not isinstance(e, Var) and e is not NIL and not isinstance(e, IntConst):
                for v in S.expr_vars(e):
                    if v not in asg:
                        for val in doms.get(v, self.wit_doms[v.kind]):
                            asg2 = dict(asg)
                            asg2[v] = val
                            yield from self._solve(atoms, pures, asg2, mask, cells, target, doms, require)
                        return
        if isinstance(a, PointsTo):
            yield from self._solve_points_to(a, rest, pures, asg, mask, cells, target, doms, require)
        else:
            yield from self._solve_pred(a, rest, pures, asg, mask, cells, target, doms, require)

    def _solve_points_to(self, a, rest, pures, asg, mask, cells, target, doms, require):
        sort = self.env.sorts[a.sort]
        try:
            roots = [_value(a.root, asg)]
        except _Unbound:
            if target is not None:
                roots = [l for l in target["locs"] if not mask & (1 << l.k) and target[l][0] == a.sort]
            else:
                roots = [l for l in self.locs if not mask & (1 << l.k)]
            dom = doms.get(a.root)
            if dom is not None:
                roots = [l for l in roots if l in dom]
        for r in roots:
            if not isinstance(r, Loc) or mask & (1 << r.k):
                continue
            asg1 = dict(asg)
            if isinstance(a.root, Var):
                asg1[a.root] = r
            if target is not None:
                cell = target.get(r)
                if cell is None or cell[0] != a.sort:
                    continue
                for asg2 in self._unify_args(a.args, cell[1], asg1, doms):
                    yield from self._solve(rest, pures, asg2, mask | (1 << r.k),
                                           cells | {(r, a.sort, cell[1])}, target, doms, require)
            else:
                if bin(mask).count("1") >= self.bounds.max_heap_size:
                    continue
                for asg2, vals in self._gen_fields(a.args, sort.kinds, asg1, doms):
                    yield from self._solve(rest, pures, asg2, mask | (1 << r.k),
                                           cells | {(r, a.sort, vals)}, target, doms, require)

    def _unify_args(self, args, vals, asg, doms):
        asg = dict(asg)
        for e, val in zip(args, vals):
            if isinstance(e, Var) and e not in asg:
                dom = doms.get(e)
                if dom is not None and val not in dom:
                    return
                asg[e] = val
            else:
                try:
                    if _value(e, asg) != val:
                        return
                except _Unbound:  # pragma: no cover - complex args are bound beforehand
                    return
        yield asg

    def _gen_fields(self, args, kinds, asg, doms):
        choices = []
        for e, kind in zip(args, kinds):
            try:
                val = _value(e, asg)
                if kind == INT and val not in self._int_set:
                    return
                choices.append([val])
            except _Unbound:
                dom = self.model_doms[kind]
                vd = doms.get(e)
                if vd is not None:
                    dom = [x for x in dom if x in vd]
                choices.append(dom)
        for vals in itertools.product(*choices):
            asg2 = dict(asg)
            for e, val in zip(args, vals):
                if isinstance(e, Var):
                    if e in asg2 and asg2[e] != val:
                        break
                    asg2[e] = val
            else:
                yield asg2, tuple(vals)

    def _solve_pred(self, a, rest, pures, asg, mask, cells, target, doms, require):
        if self._tables is None:
            self._compute_tables()
        try:
            first = _value(a.args[0], asg) if a.args else None
            entries = self._index[a.pred].get(first, ())
        except _Unbound:
            entries = self.tables[a.pred]
        cap = self.bounds.max_heap_size - bin(mask).count("1")
        for args, emask, ecells in entries:
            if emask & mask:
                continue
            if target is not None:
                if not all(target.get(c[0]) == (c[1], c[2]) for c in ecells):
                    continue
            elif bin(emask).count("1") > cap:
                continue
            for asg2 in self._unify_args(a.args, args, asg, doms):
                yield from self._solve(rest, pures, asg2, mask | emask, cells | ecells, target, doms, require)

    # -- public checks
    def sat(self, m: Model, f: SymbolicHeap) -> bool:
        missing = S.free_vars(f) - set(m.stack)
        if missing:
            raise EvaluationError(f"unbound variables {sorted(v.name for v in missing)}")
        target = _target(m.heap)
        doms = {v: self.wit_doms[v.kind] for v in f.exists}
        asg = {v: x for v, x in m.stack.items() if v not in doms}
        for _ in self._solve(f.atoms, list(f.pure), asg, 0, frozenset(), target, doms):
            return True
        return False

    def models_of(self, f: SymbolicHeap, vars_: Sequence[Var]) -> list[Model]:
        """All models of ``f`` over stack variables ``vars_`` (which must cover the
        free variables of ``f``), in enumeration order."""
        vars_ = list(vars_)
        missing = S.free_vars(f) - set(vars_)
        if missing:
            raise EvaluationError(f"unbound variables {sorted(v.name for v in missing)}")
        doms = {v: self.wit_doms[v.kind] for v in f.exists}
        for v in vars_:
            doms[v] = self.model_doms[v.kind]
        seen = set()
        out = []
        for asg, _, cells in self._solve(f.atoms, list(f.pure), {}, 0, frozenset(), None, doms, vars_):
            key = (tuple(asg[v] for v in vars_), cells)
            if key in seen:
                continue
            seen.add(key)
            out.append(Model({v: asg[v] for v in vars_}, {c[0]: (c[1], c[2]) for c in cells}))
        out.sort(key=lambda m: self.model_key(m, vars_))
        return out

    def model_key(self, m: Model, vars_: Sequence[Var]) -> tuple:
        locs = sorted(m.heap)
        return (
            len(locs),
            tuple(l.k for l in locs),
            tuple(self._cell_rank(m.heap[l]) for l in locs),
            tuple(self.value_rank(m.stack[v]) for v in vars_),
        )

    def _cell_rank(self, cell):
        srt, vals = cell
        return (self.sort_order.index(srt), tuple(self.value_rank(x) for x in vals))

    def find_counter_model(self, e: Entailment) -> Model | None:
        vars_ = sorted(S.entailment_free_vars(e), key=lambda v: (v.name, v.id))
        for m in self.models_of(e.ante, vars_):
            if not self.sat(m, e.cons):
                return m
        return None

    def is_valid(self, e: Entailment) -> bool:
        return self.find_counter_model(e) is None

    def enumerate_models(self, vars_: Sequence[Var]) -> Iterator[Model]:
        """Every model over ``vars_``: heaps by increasing size, then lexicographic."""
        sorts = [self.env.sorts[n] for n in self.sort_order]
        cell_opts = []
        for s in sorts:
            for vals in itertools.product(*(self.model_doms[k] for k in s.kinds)):
                cell_opts.append((s.name, tuple(vals)))
        cell_opts.sort(key=self._cell_rank)
        stack_doms = [self.model_doms[v.kind] for v in vars_]
        for n in range(0, min(self.bounds.max_heap_size, len(self.locs)) + 1):
            for locs in itertools.combinations(self.locs, n):
                for cs in itertools.product(cell_opts, repeat=n):
                    heap = dict(zip(locs, cs))
                    for vals in itertools.product(*stack_doms):
                        yield Model(dict(zip(vars_, vals)), heap)


def _is_bound(e, asg) -> bool:
    if isinstance(e, Var):
        return e in asg
    return all(v in asg for v in S.expr_vars(e))


def _target(heap: Mapping) -> dict:
    t = dict(heap)
    mask = 0
    for l in heap:
        mask |= 1 << l.k
    t["mask"] = mask
    t["locs"] = sorted(heap)
    return t


# --------------------------------------------------------------------------
# functional interface

_CACHE: dict = {}


def oracle_for(env: PredEnv, b: Bounds) -> Oracle:
    key = (id(env), b)
    hit = _CACHE.get(key)
    if hit is not None and hit.env is env:
        return hit
    if len(_CACHE) > 64:
        _CACHE.clear()
    o = _CACHE[key] = Oracle(env, b)
    return o


def sat(m: Model, f: SymbolicHeap, env: PredEnv, b: Bounds) -> bool:
    return oracle_for(env, b).sat(m, f)


def enumerate_models(vars_: Sequence[Var], b: Bounds, env: PredEnv | None = None) -> Iterator[Model]:
    env = env if env is not None else PredEnv()
    return oracle_for(env, b).enumerate_models(vars_)


def find_counter_model(e: Entailment, env: PredEnv, b: Bounds) -> Model | None:
    """The least counter-model of ``e`` in enumeration order, or ``None``."""
    return oracle_for(env, b).find_counter_model(e)


def heap_splits(heap: Mapping) -> Iterator[tuple[dict, dict]]:
    """All ordered splits ``h = h1 + h2`` into disjoint parts."""
    locs = sorted(heap)
    for bits in itertools.product((0, 1), repeat=len(locs)):
        h1 = {l: heap[l] for l, b in zip(locs, bits) if not b}
        h2 = {l: heap[l] for l, b in zip(locs, bits) if b}
        yield h1, h2
