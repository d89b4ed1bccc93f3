"""Recursive proof search with hypothesis vaults, traces and status promotion."""

from __future__ import annotations

import enum
import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass, field, replace

from .. import syntax as S
from ..syntax import Entailment, PointsTo, PredApp, PredEnv
from .rules import (
    RuleConfig, try_axiom, try_frame, try_hypothesis, try_induction, try_normalize, try_unfold_right,
)
from .tree import NORMALIZATION, HypoVault, ProofTree, RuleInstance, RuleName, Status


class Verdict(str, enum.Enum):
    VALID = "Valid"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SearchBudget:
    timeout_ms: int = 30000
    max_induction_apps: int = 3
    max_right_unfolds: int = 8
    mutual_mode: bool = True
    max_hypo_apps: int = 6
    max_depth: int = 400

    def __post_init__(self):
        for f in ("timeout_ms", "max_induction_apps", "max_right_unfolds", "max_hypo_apps", "max_depth"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    attempts: Counter = field(default_factory=Counter)
    hypotheses_recorded: int = 0

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes,
            "attempts": dict(sorted((str(k), v) for k, v in self.attempts.items())),
            "hypotheses_recorded": self.hypotheses_recorded,
        }


@dataclass
class ProveResult:
    verdict: Verdict
    derived: HypoVault
    used: dict  # entailment key -> Entailment
    tree: ProofTree | None = None
    timed_out: bool = False
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def valid(self) -> bool:
        return self.verdict is Verdict.VALID


class _Timeout(Exception):
    pass


@dataclass(frozen=True)
class _Path:
    ind: int = 0
    unf: int = 0
    hyp: int = 0
    depth: int = 0
    seen: frozenset = frozenset()
    open_hypo: bool = False  # an unproved hypothesis was used since the last Induction


@dataclass
class _Ok:
    derived: HypoVault
    used: dict
    tree: ProofTree


def alpha_key(e: Entailment, limit: int = 120):
    """A key shared by goals that differ only in variable names.

    Atoms that look alike before naming are tried in every order (small groups
    only, up to ``limit`` combinations) and the least key is kept."""
    placeholder = lambda v: ("v",)  # noqa: E731
    sides = []
    for f in (e.ante, e.cons):
        groups: dict = {}
        for a in f.atoms:
            groups.setdefault(S.atom_key(a, placeholder), []).append(a)
        sides.append([groups[k] for k in sorted(groups)])
    choices = [list(itertools.permutations(g)) if len(g) <= 4 else [tuple(g)] for side in sides for g in side]
    best = None
    for n, combo in enumerate(itertools.product(*choices)):
        if n >= limit:
            break
        it = iter(combo)
        ordered = [[a for g in side for a in next(it)] for side in sides]
        k = _named_key(e, ordered)
        if best is None or k < best:
            best = k
    return best


def _named_key(e: Entailment, ordered):
    order: dict = {}
    parts = []
    for f, atoms in zip((e.ante, e.cons), ordered):
        bound = set(f.exists)

        def name(v):
            if v not in order:
                order[v] = len(order)
            return ("b" if v in bound else "f", order[v])

        ak = tuple(S.atom_key(a, name) for a in atoms)
        pk = tuple(sorted(S._pure_key(p, name) for p in f.pure))
        parts.append((len(f.exists), ak, pk))
    return tuple(parts)


class SizeInfo:
    """Least heap size of each predicate and the record sorts it can allocate."""

    def __init__(self, env: PredEnv):
        self.min = {n: math.inf for n in env}
        changed = True
        while changed:
            changed = False
            for n, d in env.items():
                best = min((self._case_min(c) for c in d.cases), default=math.inf)
                if best < self.min[n]:
                    self.min[n] = best
                    changed = True
        self.sorts = {n: set() for n in env}
        changed = True
        while changed:
            changed = False
            for n, d in env.items():
                for c in d.cases:
                    for a in c.atoms:
                        new = {a.sort} if isinstance(a, PointsTo) else self.sorts[a.pred]
                        if not new <= self.sorts[n]:
                            self.sorts[n] |= new
                            changed = True

    def _case_min(self, c) -> float:
        return sum(1 if isinstance(a, PointsTo) else self.min[a.pred] for a in c.atoms)

    def heap_min(self, f) -> float:
        return self._case_min(f)

    def hopeless(self, goal: Entailment) -> bool:
        """True when no model of the antecedent can have the consequent's heap
        size or sorts (assuming the antecedent is satisfiable)."""
        ante, cons = goal.ante, goal.cons
        a_preds = [a for a in ante.atoms if isinstance(a, PredApp)]
        c_preds = [a for a in cons.atoms if isinstance(a, PredApp)]
        a_pts = sum(1 for a in ante.atoms if isinstance(a, PointsTo))
        c_pts = sum(1 for a in cons.atoms if isinstance(a, PointsTo))
        if not a_preds and self.heap_min(cons) > a_pts:
            return True
        if not c_preds and self.heap_min(ante) > c_pts:
            return True
        avail = {a.sort for a in ante.atoms if isinstance(a, PointsTo)}
        for a in a_preds:
            avail |= self.sorts[a.pred]
        need = {a.sort for a in cons.atoms if isinstance(a, PointsTo)}
        return not need <= avail


class Prover:
    """One proof search over a fixed predicate environment and budget."""

    def __init__(self, env: PredEnv, budget: SearchBudget = SearchBudget(), cfg: RuleConfig = RuleConfig()):
        self.env = env
        self.budget = budget
        self.cfg = cfg
        self.sizes = SizeInfo(env)
        self.stats = SearchStats()
        self._deadline = math.inf

    def prove(self, vault: HypoVault, trace: tuple, goal: Entailment) -> ProveResult:
        self.stats = SearchStats()
        self._deadline = time.monotonic() + self.budget.timeout_ms / 1000.0
        try:
            ok = self._prove(vault, tuple(trace), goal, _Path())
        except _Timeout:
            return ProveResult(Verdict.UNKNOWN, HypoVault(), {}, None, True, self.stats)
        except RecursionError:
            return ProveResult(Verdict.UNKNOWN, HypoVault(), {}, None, False, self.stats)
        if ok is None:
            return ProveResult(Verdict.UNKNOWN, HypoVault(), {}, None, False, self.stats)
        return ProveResult(Verdict.VALID, ok.derived, ok.used, ok.tree, False, self.stats)

    # ------------------------------------------------------------------
    def _instances(self, vault, trace, goal, path):
        norm = try_normalize(goal)
        if norm is not None:
            yield norm
            return
        if self.sizes.hopeless(goal):
            return
        yield from try_frame(goal, self.cfg)
        if path.hyp < self.budget.max_hypo_apps:
            yield from try_hypothesis(vault, trace, goal, self.cfg, proved_only=path.open_hypo)
        if path.unf < self.budget.max_right_unfolds:
            yield from try_unfold_right(goal, self.env, self.cfg)
        if path.ind < self.budget.max_induction_apps:
            yield from try_induction(goal, self.env)

    def _prove(self, vault: HypoVault, trace: tuple, goal: Entailment, path: _Path) -> _Ok | None:
        if time.monotonic() > self._deadline:
            raise _Timeout
        self.stats.nodes += 1
        ax = try_axiom(goal, self.cfg)
        if ax is not None:
            self.stats.attempts[ax.name] += 1
            return _Ok(HypoVault(), {}, ProofTree(goal, ax, [], trace))
        if path.depth >= self.budget.max_depth:
            return None
        key = alpha_key(goal)
        if key in path.seen:
            return None
        path = replace(path, depth=path.depth + 1, seen=path.seen | {key})
        for inst in self._instances(vault, trace, goal, path):
            self.stats.attempts[inst.name] += 1
            ok = self._apply(vault, trace, goal, path, inst)
            if ok is not None:
                return ok
        return None

    def _apply(self, vault, trace, goal, path, inst: RuleInstance) -> _Ok | None:
        name = inst.name
        sub_trace = (name,) + trace
        base_vault = vault
        used: dict = {}
        if name is RuleName.Induction:
            base_vault = vault.add(goal, Status.UNKNOWN)
            path = replace(path, ind=path.ind + 1, open_hypo=False)
            self.stats.hypotheses_recorded += 1
        elif name is RuleName.PredIntroRight:
            path = replace(path, unf=path.unf + 1)
        elif name is RuleName.Hypo:
            path = replace(path, hyp=path.hyp + 1,
                           open_hypo=path.open_hypo or inst.hypothesis.status is not Status.VALID)
            used[inst.hypothesis.key] = inst.hypothesis.ent
        derived = HypoVault()
        children = []
        for prem in inst.premises:
            pv = base_vault.plus(derived) if self.budget.mutual_mode else base_vault
            ok = self._prove(pv, sub_trace, prem, path)
            if ok is None:
                return None
            derived = derived.plus(ok.derived)
            used.update(ok.used)
            children.append(ok.tree)
        status = Status.VALID if set(used) <= derived.keys() | {S.entailment_key(goal)} else Status.UNKNOWN
        if name not in NORMALIZATION:  # a normalized goal is recorded through its child
            derived = derived.add(goal, status)
        node = ProofTree(goal, inst, children, trace,
                         [inst.hypothesis.ent] if inst.hypothesis is not None else [])
        return _Ok(derived, used, node)


def prove(vault: HypoVault | None, trace, goal: Entailment, env: PredEnv,
          budget: SearchBudget = SearchBudget(), cfg: RuleConfig = RuleConfig()) -> ProveResult:
    return Prover(env, budget, cfg).prove(vault if vault is not None else HypoVault(), tuple(trace or ()), goal)
