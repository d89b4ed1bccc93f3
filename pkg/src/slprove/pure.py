"""Validity of pure implications over addresses and linear integer arithmetic.

The internal backend refutes ``hyp and not goal`` disjunct by disjunct.
Address literals go through union-find with disequalities; integer literals
are decided by Fourier-Motzkin elimination over the rationals, with strict
inequalities and constraint constants tightened for integer variables.  Both
steps only ever conclude *unsatisfiable* when that is true over the integers,
so ``VALID`` is sound; everything the procedure cannot settle is ``UNKNOWN``.
"""

from __future__ import annotations

import enum
import itertools
import math
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import syntax as S
from .syntax import (
    ADDR, INT, NIL, Add, And, BoolConst, Cmp, Eq, Exists, Forall, Implies, IntConst,
    Ne, Neg, Not, Or, Sub, Var,
)


class PureVerdict(enum.Enum):
    VALID = "Valid"
    UNKNOWN = "Unknown"

    def __bool__(self) -> bool:
        return self is PureVerdict.VALID


class SolverConfigError(ValueError):
    """Bad backend configuration or an unreadable answer from an external solver."""


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "internal"  # "internal" or "cmd:<command template>"
    timeout_s: float = 5.0
    dnf_limit: int = 512
    fm_limit: int = 4000
    split_limit: int = 6

    @classmethod
    def parse(cls, spec: str, **kw) -> "SolverConfig":
        if spec != "internal" and not spec.startswith("cmd:"):
            raise SolverConfigError(f"unknown pure solver {spec!r}")
        if spec.startswith("cmd:") and not spec[4:].strip():
            raise SolverConfigError("empty solver command")
        return cls(backend=spec, **kw)


DEFAULT = SolverConfig()


class _GiveUp(Exception):
    pass


# --------------------------------------------------------------------------
# public entry points


def prove_pure(hyp, goal_exists: Sequence[Var], goal, cfg: SolverConfig = DEFAULT) -> PureVerdict:
    """Decide ``hyp => exists goal_exists. goal``; ``VALID`` only when it holds."""
    if cfg.backend != "internal":
        return ExternalSolver(cfg).prove(hyp, goal_exists, goal)
    key = (hyp, tuple(goal_exists), goal, cfg)
    hit = _memo.get(key)
    if hit is None:
        try:
            hit = _prove_internal(hyp, list(goal_exists), goal, cfg)
        except _GiveUp:
            hit = PureVerdict.UNKNOWN
        if len(_memo) > 50000:
            _memo.clear()
        _memo[key] = hit
    return hit


def check_implication(hyp, concl, cfg: SolverConfig = DEFAULT) -> PureVerdict:
    return prove_pure(hyp, (), concl, cfg)


def is_unsat(p, cfg: SolverConfig = DEFAULT) -> bool:
    return bool(check_implication(p, S.FALSE, cfg))


_memo: dict = {}


def clear_cache() -> None:
    _memo.clear()


# --------------------------------------------------------------------------
# internal backend


def _prove_internal(hyp, exists: list, goal, cfg) -> PureVerdict:
    # lift existentials that head goal conjuncts into the prefix
    parts = []
    for c in S.conjuncts_of([goal]):
        while isinstance(c, Exists):
            v = S.fresh(c.var)
            c = S.subst_pure(c.body, {c.var: v})
            exists.append(v)
        parts.extend(S.conjuncts_of([c]))
    parts = _eliminate_witnesses(parts, exists)
    left = set(exists)
    hyp_nnf = _skolem(_nnf(hyp, True))
    for c in parts:
        if S.pure_free_vars(c) & left:
            return PureVerdict.UNKNOWN
        if c == S.TRUE:
            continue
        f = And((hyp_nnf, _skolem(_nnf(c, False))))
        for lits in _dnf(f, cfg.dnf_limit):
            if not _lits_unsat(lits, cfg):
                return PureVerdict.UNKNOWN
    return PureVerdict.VALID


def _eliminate_witnesses(parts: list, exists: list) -> list:
    """Substitute existentials fixed by an equality conjunct ``x = e``."""
    pending = set(exists)
    progress = True
    while progress and pending:
        progress = False
        for c in parts:
            if not isinstance(c, Eq):
                continue
            for x, e in _solved_forms(c, pending):
                if isinstance(x, Var) and x in pending and x not in set(S.expr_vars(e)) \
                        and S.expr_kind(e) == x.kind:
                    sub = {x: e}
                    parts = [S.subst_pure(p, sub) for p in parts]
                    pending.discard(x)
                    progress = True
                    break
            if progress:
                break
    return [p for p in parts if not _trivial(p)]


def _solved_forms(c: Eq, pending: set):
    """Ways to read ``c`` as ``x = e``: as written, or for an integer witness
    with coefficient +-1, by moving everything else to the other side."""
    yield c.left, c.right
    yield c.right, c.left
    if S.expr_kind(c.left) != INT:
        return
    try:
        coeffs, k = _lsub(_linear(c.left), _linear(c.right))
    except TypeError:
        return
    for x, a in coeffs.items():
        if x in pending and abs(a) == 1:
            # a*x + rest + k = 0  gives  x = -(rest + k) / a
            rest = [(v, -b / a) for v, b in coeffs.items() if v != x]
            yield x, _expr_of(rest, -k / a)


def _expr_of(terms, k):
    e = None
    for v, b in sorted(terms, key=lambda t: t[0].id):
        t = v if b == 1 else Neg(v) if b == -1 else _scaled(v, int(b))
        e = t if e is None else Add(e, t)
    if e is None:
        return IntConst(int(k))
    return Add(e, IntConst(int(k))) if k else e


def _scaled(v, n: int):
    t = v
    for _ in range(abs(n) - 1):
        t = Add(t, v)
    return Neg(t) if n < 0 else t


def _trivial(p) -> bool:
    return p == S.TRUE or (isinstance(p, Eq) and p.left == p.right)


def _nnf(p, pos: bool):
    """Negation normal form; ``pos=False`` negates."""
    if isinstance(p, BoolConst):
        return BoolConst(p.value == pos)
    if isinstance(p, Eq):
        return p if pos else Ne(p.left, p.right)
    if isinstance(p, Ne):
        return p if pos else Eq(p.left, p.right)
    if isinstance(p, Cmp):
        if pos:
            return p
        return Cmp({"<": ">=", "<=": ">", ">": "<=", ">=": "<"}[p.op], p.left, p.right)
    if isinstance(p, Not):
        return _nnf(p.arg, not pos)
    if isinstance(p, And):
        args = tuple(_nnf(a, pos) for a in p.args)
        return And(args) if pos else Or(args)
    if isinstance(p, Or):
        args = tuple(_nnf(a, pos) for a in p.args)
        return Or(args) if pos else And(args)
    if isinstance(p, Implies):
        if pos:
            return Or((_nnf(p.left, False), _nnf(p.right, True)))
        return And((_nnf(p.left, True), _nnf(p.right, False)))
    if isinstance(p, (Forall, Exists)):
        universal = isinstance(p, Forall) == pos
        body = _nnf(p.body, pos)
        return Forall(p.var, body) if universal else Exists(p.var, body)
    raise TypeError(f"not a pure formula: {p!r}")


def _skolem(p):
    """Replace existentials of an NNF formula (checked for satisfiability) by
    fresh free variables; universals are beyond this procedure."""
    if isinstance(p, Exists):
        v = S.fresh(p.var)
        return _skolem(S.subst_pure(p.body, {p.var: v}))
    if isinstance(p, Forall):
        raise _GiveUp
    if isinstance(p, And):
        return And(tuple(_skolem(a) for a in p.args))
    if isinstance(p, Or):
        return Or(tuple(_skolem(a) for a in p.args))
    return p


def _dnf(p, limit: int) -> list[list]:
    if isinstance(p, And):
        acc = [[]]
        for a in p.args:
            ds = _dnf(a, limit)
            acc = [x + y for x in acc for y in ds]
            if len(acc) > limit:
                raise _GiveUp
        return acc
    if isinstance(p, Or):
        out = []
        for a in p.args:
            out.extend(_dnf(a, limit))
            if len(out) > limit:
                raise _GiveUp
        return out
    return [[p]]


def _lits_unsat(lits: list, cfg) -> bool:
    addr_eq, addr_ne, ineqs, int_ne = [], [], [], []
    for l in lits:
        if isinstance(l, BoolConst):
            if not l.value:
                return True
            continue
        kind = S.expr_kind(l.left) if isinstance(l, (Eq, Ne)) else INT
        if kind == ADDR:
            (addr_eq if isinstance(l, Eq) else addr_ne).append((l.left, l.right))
            continue
        a, b = _linear(l.left), _linear(l.right)
        d = _lsub(a, b)  # a - b
        if isinstance(l, Eq):
            ineqs.append(d)
            ineqs.append(_lneg(d))
        elif isinstance(l, Ne):
            int_ne.append(d)
        elif l.op == "<=":
            ineqs.append(d)
        elif l.op == "<":
            ineqs.append(_ladd_const(d, 1))
        elif l.op == ">=":
            ineqs.append(_lneg(d))
        else:
            ineqs.append(_ladd_const(_lneg(d), 1))
    if _addr_unsat(addr_eq, addr_ne):
        return True
    # a disequality d != 0 splits into d <= -1 or d >= 1; dropping surplus
    # disequalities only weakens the constraint set, which is sound
    int_ne = int_ne[: cfg.split_limit]
    for signs in itertools.product((0, 1), repeat=len(int_ne)):
        extra = [_ladd_const(d, 1) if s == 0 else _ladd_const(_lneg(d), 1)
                 for d, s in zip(int_ne, signs)]
        if not _fm_unsat(ineqs + extra, cfg.fm_limit):
            return False
    return True


def _addr_unsat(eqs, nes) -> bool:
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in eqs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return any(find(a) == find(b) for a, b in nes)


# linear forms: (dict var -> Fraction, constant); the constraint ``form <= 0``


def _linear(e):
    if isinstance(e, Var):
        return ({e: Fraction(1)}, Fraction(0))
    if isinstance(e, IntConst):
        return ({}, Fraction(e.value))
    if isinstance(e, Neg):
        return _lneg(_linear(e.arg))
    if isinstance(e, Add):
        return _ladd(_linear(e.left), _linear(e.right))
    if isinstance(e, Sub):
        return _lsub(_linear(e.left), _linear(e.right))
    raise TypeError(f"not an integer expression: {e!r}")


def _ladd(a, b):
    c = dict(a[0])
    for v, k in b[0].items():
        c[v] = c.get(v, 0) + k
    return ({v: k for v, k in c.items() if k != 0}, a[1] + b[1])


def _lneg(a):
    return ({v: -k for v, k in a[0].items()}, -a[1])


def _lsub(a, b):
    return _ladd(a, _lneg(b))


def _ladd_const(a, k):
    return (a[0], a[1] + k)


def _tighten(c):
    """Normalize ``sum + k <= 0`` over integers: divide by the coefficient gcd
    and round the constant, which preserves the integer solutions."""
    coeffs, k = c
    if not coeffs:
        return c
    den = math.lcm(*(x.denominator for x in coeffs.values()), k.denominator)
    ints = {v: int(x * den) for v, x in coeffs.items()}
    g = math.gcd(*ints.values())
    kk = k * den / g
    return ({v: Fraction(x // g) for v, x in ints.items()}, Fraction(math.ceil(kk)))


def _fm_unsat(cons: list, limit: int) -> bool:
    cons = [_tighten(c) for c in cons]
    while True:
        live = []
        seen = set()
        for coeffs, k in cons:
            if not coeffs:
                if k > 0:
                    return True
                continue
            key = (tuple(sorted((v.id, x) for v, x in coeffs.items())), k)
            if key not in seen:
                seen.add(key)
                live.append((coeffs, k))
        if not live:
            return False
        vars_ = {v for c, _ in live for v in c}
        # eliminate the variable producing the fewest new constraints
        best = min(vars_, key=lambda v: (
            sum(1 for c, _ in live if c.get(v, 0) > 0) * sum(1 for c, _ in live if c.get(v, 0) < 0), v.id))
        pos = [c for c in live if c[0].get(best, 0) > 0]
        neg = [c for c in live if c[0].get(best, 0) < 0]
        rest = [c for c in live if best not in c[0]]
        if len(rest) + len(pos) * len(neg) > limit:
            raise _GiveUp
        for (pc, pk), (nc, nk) in itertools.product(pos, neg):
            a, b = pc[best], -nc[best]
            comb = _ladd(({v: x * b for v, x in pc.items()}, pk * b), ({v: x * a for v, x in nc.items()}, nk * a))
            rest.append(_tighten(comb))
        cons = rest


# --------------------------------------------------------------------------
# SMT-LIB 2 export and the external backend


def _smt_expr(e, names) -> str:
    if isinstance(e, Var):
        return names[e]
    if e is NIL:
        return "nil"
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, Neg):
        return f"(- {_smt_expr(e.arg, names)})"
    if isinstance(e, Add):
        return f"(+ {_smt_expr(e.left, names)} {_smt_expr(e.right, names)})"
    if isinstance(e, Sub):
        return f"(- {_smt_expr(e.left, names)} {_smt_expr(e.right, names)})"
    raise TypeError(f"not an expression: {e!r}")


def _smt_sort(kind: str) -> str:
    return "Addr" if kind == ADDR else "Int"


def _smt_pure(p, names) -> str:
    if isinstance(p, BoolConst):
        return "true" if p.value else "false"
    if isinstance(p, Eq):
        return f"(= {_smt_expr(p.left, names)} {_smt_expr(p.right, names)})"
    if isinstance(p, Ne):
        return f"(not (= {_smt_expr(p.left, names)} {_smt_expr(p.right, names)}))"
    if isinstance(p, Cmp):
        return f"({p.op} {_smt_expr(p.left, names)} {_smt_expr(p.right, names)})"
    if isinstance(p, Not):
        return f"(not {_smt_pure(p.arg, names)})"
    if isinstance(p, (And, Or)):
        op = "and" if isinstance(p, And) else "or"
        if not p.args:
            return "true" if op == "and" else "false"
        return f"({op} {' '.join(_smt_pure(a, names) for a in p.args)})"
    if isinstance(p, Implies):
        return f"(=> {_smt_pure(p.left, names)} {_smt_pure(p.right, names)})"
    if isinstance(p, (Forall, Exists)):
        q = "forall" if isinstance(p, Forall) else "exists"
        names = dict(names)
        names[p.var] = _smt_name(p.var)
        return f"({q} (({names[p.var]} {_smt_sort(p.var.kind)})) {_smt_pure(p.body, names)})"
    raise TypeError(f"not a pure formula: {p!r}")


def _smt_name(v: Var) -> str:
    return f"{v.name}_{v.id}"


def to_smtlib(hyp, goal_exists: Sequence[Var], goal) -> str:
    """A script that is ``unsat`` exactly when the implication is valid."""
    free = sorted(S.pure_free_vars(hyp) | (S.pure_free_vars(goal) - set(goal_exists)), key=lambda v: v.id)
    names = {v: _smt_name(v) for v in free}
    lines = ["(set-logic ALL)", "(declare-sort Addr 0)", "(declare-const nil Addr)"]
    lines += [f"(declare-const {names[v]} {_smt_sort(v.kind)})" for v in free]
    concl = goal
    for v in reversed(list(goal_exists)):
        concl = Exists(v, concl)
    lines.append(f"(assert (not (=> {_smt_pure(hyp, names)} {_smt_pure(concl, names)})))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


class ExternalSolver:
    """Runs a command on an SMT-LIB script.  A ``{file}`` placeholder in the
    template is replaced by a script path; otherwise the script goes to stdin."""

    def __init__(self, cfg: SolverConfig):
        if not cfg.backend.startswith("cmd:"):
            raise SolverConfigError("not an external backend")
        self.template = cfg.backend[4:].strip()
        self.timeout = cfg.timeout_s

    def prove(self, hyp, goal_exists, goal) -> PureVerdict:
        script = to_smtlib(hyp, goal_exists, goal)
        try:
            if "{file}" in self.template:
                with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=True) as fh:
                    fh.write(script)
                    fh.flush()
                    out = self._run(shlex.split(self.template.replace("{file}", fh.name)), None)
            else:
                out = self._run(shlex.split(self.template), script)
        except (OSError, subprocess.TimeoutExpired):
            return PureVerdict.UNKNOWN
        if out is None:
            return PureVerdict.UNKNOWN
        answer = out.strip().splitlines()[0].strip() if out.strip() else ""
        if answer == "unsat":
            return PureVerdict.VALID
        if answer in ("sat", "unknown"):
            return PureVerdict.UNKNOWN
        raise SolverConfigError(f"unexpected solver answer {answer!r}")

    def _run(self, argv, stdin):
        proc = subprocess.run(argv, input=stdin, capture_output=True, text=True, timeout=self.timeout)
        if proc.returncode != 0 and not proc.stdout.strip():
            return None
        return proc.stdout
