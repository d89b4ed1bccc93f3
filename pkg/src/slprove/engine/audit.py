"""Independent re-checking of finished proof trees.

Nothing here calls back into the search or the rule generators.  A tree is
checked node by node from what the node stores: its goal, rule instance,
children and trace.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .. import syntax as S
from ..pure import DEFAULT, SolverConfig, check_implication
from ..syntax import PointsTo, SymbolicHeap
from .tree import AXIOMS, ProofTree, RuleName, Status


@dataclass
class AuditReport:
    hypo_nodes: int = 0
    nodes: int = 0
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        head = f"{self.nodes} nodes, {self.hypo_nodes} Hypo nodes"
        if self.ok:
            return head + ", no problems"
        return head + "\n" + "\n".join("  " + p for p in self.problems)


def decreasing_disjunct(status: Status, leftover, trace) -> str | None:
    """Which disjunct of the Hypo side condition holds, recomputed from scratch."""
    if status is Status.VALID:
        return "a"
    if any(isinstance(a, PointsTo) for a in leftover):
        return "b"
    names = [str(r) for r in trace]
    first_ind = names.index("Induction") if "Induction" in names else None
    if first_ind is not None and "StarData" in names[:first_ind]:
        return "c"
    return None


def _multiset(atoms) -> Counter:
    return Counter(S.atom_key(a) for a in atoms if a is not S.EMP)


def _spatial_key(exists, atoms):
    return S.canonical_key(SymbolicHeap(tuple(exists), tuple(atoms), ()))


def audit_hypo(node: ProofTree, goals: set, solver: SolverConfig = DEFAULT) -> list[str]:
    """Problems with one Hypo node; ``goals`` holds the keys of every goal in the
    surrounding proof, where the hypothesis must have come from."""
    r = node.rule
    out = []
    h, theta, pattern = r.hypothesis, r.theta or {}, r.pattern
    where = S.show_entailment(node.goal)
    if h is None or pattern is None:
        return [f"Hypo node without hypothesis data: {where}"]
    # the stored pattern is the hypothesis antecedent up to renaming of its binders
    if _spatial_key(h.ent.ante.exists, h.ent.ante.atoms) != _spatial_key(
            [v for v in S.free_vars(pattern) if v not in S.free_vars(h.ent.ante)], pattern.atoms):
        out.append(f"pattern is not the hypothesis antecedent: {where}")
    # Sigma1 == Sigma3 theta * Sigma'
    inst = [S.subst_atom(a, theta) for a in pattern.atoms]
    if _multiset(node.goal.ante.atoms) != _multiset(inst) + _multiset(r.leftover):
        out.append(f"antecedent is not Sigma3.theta * Sigma': {where}")
    # Pi1 => Pi3 theta
    if pattern.pure:
        need = S.subst_pure(pattern.pure_formula(), theta)
        if not check_implication(node.goal.ante.pure_formula(), need, solver):
            out.append(f"Pi1 does not imply Pi3.theta: {where}")
    # the recorded disjunct
    claimed = r.evidence.get("disjunct")
    recomputed = decreasing_disjunct(h.status, r.leftover, node.trace)
    if recomputed is None:
        out.append(f"no decreasing disjunct holds: {where}")
    elif claimed != recomputed:
        ok_anyway = claimed in ("b", "c") and decreasing_disjunct(Status.UNKNOWN, r.leftover, node.trace) == claimed
        if not ok_anyway:
            out.append(f"claimed disjunct {claimed} but {recomputed} holds: {where}")
    if h.status.value != r.evidence.get("status"):
        out.append(f"evidence status differs from hypothesis status: {where}")
    # the hypothesis was derived (or recorded) inside this proof
    if h.key not in goals:
        out.append(f"hypothesis {S.show_entailment(h.ent)} is not a goal of the proof: {where}")
    # premise: F4 theta (binders opened) * Sigma' & Pi1 |- F2
    if len(node.children) != 1:
        out.append(f"Hypo node must have one premise: {where}")
        return out
    prem = node.children[0].goal
    if S.canonical_key(prem.cons) != S.canonical_key(node.goal.cons):
        out.append(f"premise consequent differs from the goal's: {where}")
    if _multiset(r.leftover) - _multiset(prem.ante.atoms):
        out.append(f"premise lacks the leftover atoms: {where}")
    left_keys = _multiset(r.leftover)
    produced, seen = [], Counter()
    for a in prem.ante.atoms:
        k = S.atom_key(a)
        if a is S.EMP:
            continue
        if seen[k] < left_keys[k]:
            seen[k] += 1
            continue
        produced.append(a)
    cons_inst = S.subst_apply(h.ent.cons, theta)
    known = set(S.free_vars(node.goal.ante)) | set(S.free_vars(node.goal.cons))
    for e in theta.values():
        known.update(S.expr_vars(e))
    opened = {v for a in produced for v in S.atom_vars(a)} - known
    if _spatial_key(opened, produced) != _spatial_key(cons_inst.exists, cons_inst.atoms):
        out.append(f"premise does not contain F4.theta: {where}")
    goal_pure = {S._pure_key(p, S._var_id) for p in node.goal.ante.pure}
    if not goal_pure <= {S._pure_key(p, S._var_id) for p in prem.ante.pure}:
        out.append(f"premise dropped antecedent pure facts: {where}")
    return out


def audit_tree(tree: ProofTree, solver: SolverConfig = DEFAULT) -> AuditReport:
    """Check trace discipline, axiom leaves, premise counts and every Hypo node."""
    rep = AuditReport()
    goals = {S.entailment_key(n.goal) for n in tree.nodes()}
    stack = [tree]
    while stack:
        n = stack.pop()
        rep.nodes += 1
        where = S.show_entailment(n.goal)
        if not n.children and n.rule.name not in AXIOMS:
            rep.problems.append(f"leaf is not an axiom ({n.rule.name}): {where}")
        if n.rule.name in AXIOMS and n.children:
            rep.problems.append(f"axiom with premises: {where}")
        if len(n.children) != len(n.rule.premises):
            rep.problems.append(f"{len(n.children)} children for {len(n.rule.premises)} premises: {where}")
        for c, p in zip(n.children, n.rule.premises):
            if tuple(c.trace) != (n.rule.name,) + tuple(n.trace):
                rep.problems.append(f"trace of a child is not the parent's extended by {n.rule.name}: {where}")
            if S.entailment_key(c.goal) != S.entailment_key(p):
                rep.problems.append(f"child goal is not the stated premise: {where}")
        if n.rule.name is RuleName.Hypo:
            rep.hypo_nodes += 1
            rep.problems.extend(audit_hypo(n, goals, solver))
        stack.extend(n.children)
    return rep
