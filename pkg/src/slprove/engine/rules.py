"""Logical and induction rules: each ``try_*`` returns the applicable instances
of a rule group for a goal, with the premises already built."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .. import syntax as S
from ..pure import DEFAULT, SolverConfig, check_implication, is_unsat, prove_pure
from ..syntax import (
    EMP, NIL, Entailment, Eq, IntConst, Ne, PointsTo, PredApp, PredEnv, SymbolicHeap, Var,
)
from .tree import NORMALIZATION, RuleInstance, RuleName, Status


@dataclass(frozen=True)
class RuleConfig:
    solver: SolverConfig = field(default_factory=lambda: DEFAULT)
    strict_rules: bool = False


def _heap(exists, atoms, pure) -> SymbolicHeap:
    return SymbolicHeap(tuple(exists), tuple(atoms), tuple(pure))


class _Namer:
    """Readable, unambiguous names for the variables of one goal."""

    def __init__(self, goal: Entailment, extra: Iterable[Var] = ()):
        self.names = S.display_names(S.all_vars(goal.ante) | S.all_vars(goal.cons) | set(extra))

    def expr(self, e) -> str:
        return S._show(e, self.names)

    def atom(self, a) -> str:
        return S.show_atom(a, self.names)

    def pure(self, p) -> str:
        return S.show_pure(p, self.names)

    def var(self, v: Var) -> str:
        return self.names.get(v, v.name)


# --------------------------------------------------------------------------
# axioms


def try_axiom(goal: Entailment, cfg: RuleConfig = RuleConfig()) -> RuleInstance | None:
    ante, cons = goal.ante, goal.cons
    if not ante.atoms and not cons.atoms:
        if prove_pure(ante.pure_formula(), cons.exists, cons.pure_formula(), cfg.solver):
            return RuleInstance(RuleName.PureEntail, evidence={"solver": cfg.solver.backend})
    for p in ante.pure:
        if isinstance(p, Ne) and p.left == p.right:
            return RuleInstance(RuleName.FalseLeft1, evidence={"contradiction": S.show_pure(p)})
    pts = [a for a in ante.atoms if isinstance(a, PointsTo)]
    roots = Counter(a.root for a in pts)
    for r, n in roots.items():
        if n > 1:
            return RuleInstance(RuleName.FalseLeft2, evidence={"root": S._show(r, _Namer(goal).names)})
    if not cfg.strict_rules and (ante.pure or pts):
        facts = list(ante.pure) + [Ne(a.root, NIL) for a in pts]
        facts += [Ne(a.root, b.root) for i, a in enumerate(pts) for b in pts[i + 1:]]
        if is_unsat(S.conj(facts), cfg.solver):
            return RuleInstance(RuleName.FalseLeft1, evidence={"generalized": True})
    return None


# --------------------------------------------------------------------------
# normalization


def try_normalize(goal: Entailment) -> RuleInstance | None:
    """The first applicable normalization step; these rules are invertible."""
    ante, cons = goal.ante, goal.cons
    nm = _Namer(goal)
    if ante.exists:
        v = ante.exists[0]
        u = S.fresh(v)
        body = S.subst_apply(ante.with_(exists=ante.exists[1:]), {v: u})
        return RuleInstance(RuleName.ExistsLeft, (Entailment(body, cons),), bindings={"var": nm.var(v)})
    for i, p in enumerate(ante.pure):
        if not isinstance(p, Eq):
            continue
        rest = ante.pure[:i] + ante.pure[i + 1:]
        if p.left == p.right:
            return RuleInstance(RuleName.EqualLeft, (Entailment(ante.with_(pure=rest), cons),),
                                bindings={"eq": nm.pure(p)})
        sub = _orient(p)
        if sub is None:
            continue
        new_ante = S.subst_apply(ante.with_(pure=rest), sub)
        new_cons = S.subst_apply(cons, sub)
        (v, e), = sub.items()
        return RuleInstance(RuleName.EqualLeft, (Entailment(new_ante, new_cons),),
                            bindings={"eq": nm.pure(p), "replace": nm.var(v), "by": nm.expr(e)})
    for i, p in enumerate(cons.pure):
        if isinstance(p, Eq) and p.left == p.right:
            rest = cons.pure[:i] + cons.pure[i + 1:]
            return RuleInstance(RuleName.EqualRight, (Entailment(ante, cons.with_(pure=rest)),),
                                bindings={"eq": nm.pure(p)})
    if EMP in ante.spatial and len(ante.spatial) > 1:
        return RuleInstance(RuleName.EmpLeft, (Entailment(ante.with_(spatial=ante.atoms), cons),))
    if EMP in cons.spatial and len(cons.spatial) > 1:
        return RuleInstance(RuleName.EmpRight, (Entailment(ante, cons.with_(spatial=cons.atoms)),))
    if cons.exists:
        used = set()
        for a in cons.atoms:
            used.update(S.atom_vars(a))
        for p in cons.pure:
            used |= S.pure_free_vars(p)
        for x in cons.exists:
            if x not in used:
                witness = NIL if x.kind == S.ADDR else IntConst(0)
                return _exists_right(goal, x, witness, nm, "unused")
        for p in cons.pure:
            if not isinstance(p, Eq):
                continue
            for x, e in ((p.left, p.right), (p.right, p.left)):
                if isinstance(x, Var) and x in cons.exists and x not in set(S.expr_vars(e)):
                    return _exists_right(goal, x, e, nm, "equality")
    return None


def _orient(p: Eq) -> dict | None:
    """The substitution an antecedent equality induces: the newer variable is
    replaced by the older one, or a variable by a term not containing it."""
    l, r = p.left, p.right
    if isinstance(l, Var) and isinstance(r, Var):
        return {r: l} if r.id > l.id else {l: r}
    for v, e in ((l, r), (r, l)):
        if isinstance(v, Var) and v not in set(S.expr_vars(e)):
            return {v: e}
    return None


def _exists_right(goal, x, e, nm, why) -> RuleInstance:
    cons = goal.cons
    body = cons.with_(exists=tuple(v for v in cons.exists if v != x))
    new_cons = S.subst_apply(body, {x: e})
    return RuleInstance(RuleName.ExistsRight, (Entailment(goal.ante, new_cons),),
                        bindings={"var": nm.var(x), "witness": nm.expr(e)}, evidence={"witness_from": why})


# --------------------------------------------------------------------------
# frame rules


def try_frame(goal: Entailment, cfg: RuleConfig = RuleConfig()) -> list[RuleInstance]:
    """StarData instances, then StarPred instances, most plausible pairs first.

    A pair is only matched when each argument position is identical, has an
    existential on the consequent side, or is an equality the antecedent's
    pure part already implies.  Other pairings could only be closed after the
    antecedent has been split, which induction does first anyway.
    """
    ante, cons = goal.ante, goal.cons
    hyp = ante.pure_formula()
    nm = _Namer(goal)
    bound = set(cons.exists)
    data, preds = [], []
    for i, a in enumerate(ante.atoms):
        if any(v in bound for v in S.atom_vars(a)):
            continue
        for j, b in enumerate(cons.atoms):
            if isinstance(a, PointsTo) and isinstance(b, PointsTo) and a.sort == b.sort:
                lhs, rhs = (a.root,) + a.args, (b.root,) + b.args
                rule, bucket = RuleName.StarData, data
            elif isinstance(a, PredApp) and isinstance(b, PredApp) and a.pred == b.pred:
                lhs, rhs = a.args, b.args
                rule, bucket = RuleName.StarPred, preds
            else:
                continue
            eqs = [Eq(x, y) for x, y in zip(lhs, rhs) if x != y]
            clashes = [(x, y) for x, y in zip(lhs, rhs) if x != y and not (set(S.expr_vars(y)) & bound)]
            if clashes and not (ante.pure and check_implication(
                    hyp, S.conj(Eq(x, y) for x, y in clashes), cfg.solver)):
                continue
            clash = sum(1 for x, y in zip(lhs, rhs) if x != y and not (isinstance(y, Var) and y in bound))
            root_clash = int(lhs[0] != rhs[0] and not (isinstance(rhs[0], Var) and rhs[0] in bound))
            new_ante = ante.with_(spatial=ante.atoms[:i] + ante.atoms[i + 1:])
            new_cons = cons.with_(spatial=cons.atoms[:j] + cons.atoms[j + 1:], pure=cons.pure + tuple(eqs))
            inst = RuleInstance(rule, (Entailment(new_ante, new_cons),),
                                bindings={"left": nm.atom(a), "right": nm.atom(b)})
            bucket.append(((root_clash, clash, i, j), inst))
    return [inst for _, inst in sorted(data, key=lambda t: t[0])] + \
           [inst for _, inst in sorted(preds, key=lambda t: t[0])]


# --------------------------------------------------------------------------
# unfolding


def try_unfold_right(goal: Entailment, env: PredEnv, cfg: RuleConfig = RuleConfig()) -> list[RuleInstance]:
    """Unfoldings of consequent predicates.  A case that allocates cells is
    only used when one of its roots that is not local to the case can be framed
    against an antecedent cell: the root is an antecedent root, provably equal
    to one, or existential in the consequent while some antecedent cell is not
    already claimed by a consequent cell."""
    ante, cons = goal.ante, goal.cons
    nm = _Namer(goal)
    roots = [a.root for a in ante.atoms if isinstance(a, PointsTo)]
    hyp = ante.pure_formula()
    # antecedent cells not already claimed by a consequent cell with a free root
    claimed = {a.root for a in cons.atoms if isinstance(a, PointsTo)
               and not set(S.expr_vars(a.root)) & set(cons.exists)}
    free_roots = [r for r in roots if r not in claimed]

    def anchored(case) -> bool:
        pts = [a for a in case.atoms if isinstance(a, PointsTo)]
        if not pts:
            return True
        bound = set(cons.exists)
        local = set(case.exists)
        if all(set(S.expr_vars(a.root)) & local for a in pts):
            # cells reached only through the recursion: match on contents instead
            return any(
                b.sort == a.sort and b.root in free_roots
                and all(set(S.expr_vars(x)) & (local | bound) or x == y for x, y in zip(a.args, b.args))
                for a in pts for b in ante.atoms if isinstance(b, PointsTo))
        for a in pts:
            if set(S.expr_vars(a.root)) & local:
                continue
            if a.root in roots:
                return True
            if set(S.expr_vars(a.root)) & bound and free_roots:
                return True
            if ante.pure and any(check_implication(hyp, Eq(a.root, r), cfg.solver) for r in roots):
                return True
        return False

    out = []
    for j, b in enumerate(cons.atoms):
        if not isinstance(b, PredApp):
            continue
        d = env[b.pred]
        cases = list(enumerate(S.unfold_cases(b, env)))
        if ante.atoms:  # a nonempty heap is more likely covered by a recursive case
            cases.sort(key=lambda ic: d.is_base(ic[0]))
        for idx, case in cases:
            if not anchored(case):
                continue
            rest = cons.atoms[:j] + cons.atoms[j + 1:]
            new_cons = _heap(cons.exists + case.exists, rest + case.atoms, cons.pure + case.pure)
            out.append(RuleInstance(
                RuleName.PredIntroRight, (Entailment(ante, new_cons),),
                bindings={"pred": nm.atom(b), "case": idx},
                evidence={"case_kind": "base" if d.is_base(idx) else "inductive"}))
    return out


def try_induction(goal: Entailment, env: PredEnv) -> list[RuleInstance]:
    """One instance per antecedent predicate occurrence; the goal is recorded
    as a hypothesis and the occurrence is replaced by each definition case."""
    ante, cons = goal.ante, goal.cons
    nm = _Namer(goal)
    cons_vars = S.free_vars(cons)
    occs = []
    for i, a in enumerate(ante.atoms):
        if isinstance(a, PredApp):
            shared = sum(1 for e in a.args if isinstance(e, Var) and e in cons_vars)
            first = int(bool(a.args) and a.args[0] in cons_vars)
            occs.append(((-shared, -first, i), i, a))
    out = []
    for _, i, a in sorted(occs, key=lambda t: t[0]):
        rest = ante.atoms[:i] + ante.atoms[i + 1:]
        premises = []
        for case in S.unfold_cases(a, env):
            body, _ = S.open_exists(case)
            premises.append(Entailment(_heap(ante.exists, rest + body.atoms, ante.pure + body.pure), cons))
        out.append(RuleInstance(RuleName.Induction, tuple(premises), bindings={"pred": nm.atom(a)},
                                evidence={"cases": len(premises)}, recorded=goal))
    return out


# --------------------------------------------------------------------------
# applying hypotheses


def unify_antecedent(goal_ante: SymbolicHeap, hyp_ante: SymbolicHeap, hyp_vars: set,
                     cfg: RuleConfig = RuleConfig()) -> list[tuple[dict, tuple]]:
    """Pairs ``(theta, leftover)`` with ``goal_ante.atoms == hyp_ante.atoms theta * leftover``
    up to AC and ``goal pure => hyp pure theta``; theta binds only ``hyp_vars``."""
    pats = sorted(hyp_ante.atoms, key=lambda a: 0 if isinstance(a, PointsTo) else 1)
    targets = goal_ante.atoms
    results, seen = [], set()

    def match_terms(ps, gs, theta, deferred):
        theta = dict(theta)
        deferred = list(deferred)
        for p, g in zip(ps, gs):
            if isinstance(p, Var) and p in hyp_vars:
                if p in theta:
                    if theta[p] != g:
                        return None
                elif p.kind != S.expr_kind(g):
                    return None
                else:
                    theta[p] = g
            elif isinstance(p, Var) or p is NIL or isinstance(p, IntConst):
                if p != g:
                    return None
            else:
                deferred.append((p, g))
        return theta, deferred

    def go(k, used, theta, deferred):
        if k == len(pats):
            finish(used, theta, deferred)
            return
        p = pats[k]
        for j, g in enumerate(targets):
            if j in used or type(g) is not type(p):
                continue
            if isinstance(p, PointsTo):
                if p.sort != g.sort:
                    continue
                m = match_terms((p.root,) + p.args, (g.root,) + g.args, theta, deferred)
            else:
                if p.pred != g.pred:
                    continue
                m = match_terms(p.args, g.args, theta, deferred)
            if m is not None:
                go(k + 1, used | {j}, m[0], m[1])

    def finish(used, theta, deferred):
        theta = dict(theta)
        # pure-only hypothesis variables are determined by equalities or not at all
        pending = [v for p in hyp_ante.pure for v in S.pure_free_vars(p) if v in hyp_vars and v not in theta]
        changed = True
        while pending and changed:
            changed = False
            for p in hyp_ante.pure:
                if not isinstance(p, Eq):
                    continue
                for x, e in ((p.left, p.right), (p.right, p.left)):
                    if isinstance(x, Var) and x in hyp_vars and x not in theta and all(
                            (v in theta or v not in hyp_vars) for v in S.expr_vars(e)) and x not in set(S.expr_vars(e)):
                        theta[x] = S.subst_expr(e, theta)
                        changed = True
            pending = [v for v in pending if v not in theta]
        if pending:
            return
        for p, g in deferred:
            if S.subst_expr(p, theta) != g:
                return
        leftover = tuple(a for j, a in enumerate(targets) if j not in used)
        key = (tuple(sorted((v.id, S._expr_key(e, S._var_id)) for v, e in theta.items())),
               tuple(sorted(S.atom_key(a) for a in leftover)))
        if key in seen:
            return
        seen.add(key)
        if hyp_ante.pure:
            concl = S.subst_pure(hyp_ante.pure_formula(), theta)
            if not check_implication(goal_ante.pure_formula(), concl, cfg.solver):
                return
        results.append((theta, leftover))

    go(0, frozenset(), {}, [])
    return results


def check_hypo_side_condition(status: Status, leftover: Iterable, trace: tuple) -> dict | None:
    """Which disjunct of the decreasing condition holds, or ``None``."""
    if status is Status.VALID:
        return {"disjunct": "a"}
    for a in leftover:
        if isinstance(a, PointsTo):
            return {"disjunct": "b", "points_to": S.show_atom(a)}
    for i, r in enumerate(trace):
        if r == RuleName.Induction:
            return None
        if r == RuleName.StarData:
            rest = trace[i + 1:]
            if RuleName.Induction in rest:
                return {"disjunct": "c", "star_data_at": i, "induction_at": i + 1 + list(rest).index(RuleName.Induction)}
            return None
    return None


def _kinds(atoms) -> Counter:
    return Counter(("pt", a.sort) if isinstance(a, PointsTo) else ("p", a.pred) for a in atoms)


def _cons_matches(hyp_cons: SymbolicHeap, theta: dict, cons: SymbolicHeap) -> bool:
    """Whether the instantiated hypothesis consequent has the goal consequent's
    spatial part, treating variables left unbound by theta as existential."""
    open_vars = tuple(v for v in S.free_vars(hyp_cons) if v not in theta)
    inst = S.subst_apply(hyp_cons, theta)
    mine = SymbolicHeap(inst.exists + open_vars, inst.atoms, ())
    theirs = SymbolicHeap(cons.exists, cons.atoms, ())
    return S.canonical_key(mine) == S.canonical_key(theirs)


def try_hypothesis(vault, trace: tuple, goal: Entailment, cfg: RuleConfig = RuleConfig(),
                   proved_only: bool = False) -> list[RuleInstance]:
    ante = goal.ante
    have = _kinds(ante.atoms)
    # chaining unproved hypotheses without any progress in between rarely helps
    last = next((r for r in trace if r not in NORMALIZATION), None)
    chained = last == RuleName.Hypo
    proved_only = proved_only or chained
    cands = []
    for order, h in enumerate(vault):
        if proved_only and h.status is not Status.VALID:
            continue
        hyp_ante, _ = S.open_exists(h.ent.ante)
        if not hyp_ante.atoms:
            continue
        if chained and len(h.ent.cons.atoms) > len(hyp_ante.atoms):
            continue
        if S.canonical_key(SymbolicHeap(h.ent.cons.exists, h.ent.cons.atoms, ())) == \
                S.canonical_key(SymbolicHeap((), hyp_ante.atoms, ())):
            continue  # only renames: the frame rules do the same
        need = _kinds(hyp_ante.atoms)
        if any(have[k] < n for k, n in need.items()):
            continue
        hyp_vars = S.free_vars(hyp_ante) | S.free_vars(h.ent.cons)
        for theta, leftover in unify_antecedent(ante, hyp_ante, hyp_vars, cfg):
            ev = check_hypo_side_condition(h.status, leftover, trace)
            if ev is None:
                continue
            same = _cons_matches(h.ent.cons, theta, goal.cons)
            grows = len(h.ent.cons.atoms) > len(hyp_ante.atoms)
            if grows and not same:
                continue  # a weakening step away from the consequent's shape
            if h.status is Status.VALID and leftover and len(h.ent.cons.atoms) >= len(hyp_ante.atoms):
                continue  # a proved lemma is used to fold cells, not to weaken them
            rank = (not same, grows, h.status is Status.VALID, len(leftover), len(h.ent.cons.atoms), order)
            cands.append((rank, h, hyp_ante, theta, leftover, ev))
    cands.sort(key=lambda c: c[0])
    out = []
    for _, h, hyp_ante, theta, leftover, ev in cands:
        full = dict(theta)
        for v in S.free_vars(h.ent.cons):
            if v not in full:
                full[v] = S.fresh(v)
        f4, _ = S.open_exists(S.subst_apply(h.ent.cons, full))
        premise = Entailment(_heap((), f4.atoms + leftover, ante.pure + f4.pure), goal.cons)
        nm = _Namer(goal, [v for e in full.values() for v in S.expr_vars(e)])
        hyp_names = S.display_names(S.all_vars(hyp_ante) | S.all_vars(h.ent.cons))
        evidence = dict(ev)
        evidence["hypothesis"] = S.show_entailment(h.ent)
        evidence["status"] = h.status.value
        evidence["leftover"] = [nm.atom(a) for a in leftover] or ["emp"]
        if hyp_ante.pure:
            evidence["dropped_pure"] = nm.pure(S.subst_pure(hyp_ante.pure_formula(), theta))
        out.append(RuleInstance(
            RuleName.Hypo, (premise,),
            bindings={"theta": {hyp_names.get(v, v.name): nm.expr(e) for v, e in full.items()}},
            evidence=evidence, hypothesis=h, theta=full, leftover=leftover, pattern=hyp_ante))
    return out
