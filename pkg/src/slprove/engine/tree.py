"""Proof-search data: rule names, hypothesis vaults, rule instances and proof trees."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .. import syntax as S
from ..syntax import Entailment


class RuleName(str, enum.Enum):
    PureEntail = "PureEntail"
    FalseLeft1 = "FalseLeft1"
    FalseLeft2 = "FalseLeft2"
    EqualLeft = "EqualLeft"
    EqualRight = "EqualRight"
    ExistsLeft = "ExistsLeft"
    ExistsRight = "ExistsRight"
    EmpLeft = "EmpLeft"
    EmpRight = "EmpRight"
    StarData = "StarData"
    StarPred = "StarPred"
    PredIntroRight = "PredIntroRight"
    Induction = "Induction"
    Hypo = "Hypo"

    def __str__(self) -> str:
        return self.value


AXIOMS = frozenset({RuleName.PureEntail, RuleName.FalseLeft1, RuleName.FalseLeft2})
NORMALIZATION = (
    RuleName.ExistsLeft, RuleName.EqualLeft, RuleName.EqualRight,
    RuleName.EmpLeft, RuleName.EmpRight, RuleName.ExistsRight,
)


class Status(enum.Enum):
    VALID = "valid"
    UNKNOWN = "unknown"

    @property
    def symbol(self) -> str:
        return "T" if self is Status.VALID else "?"


@dataclass(frozen=True)
class Hypothesis:
    ent: Entailment
    status: Status

    @property
    def key(self):
        return S.entailment_key(self.ent)


class HypoVault:
    """Insertion-ordered hypotheses, at most one per canonical entailment key.

    Vaults are persistent: :meth:`plus` returns a new vault.
    """

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Hypothesis] = ()):
        self._items: dict = {}
        for h in items:
            self._insert(h)

    def _insert(self, h: Hypothesis) -> None:
        k = h.key
        old = self._items.get(k)
        if old is not None and old.status is Status.VALID:
            return  # a proved entailment stays proved
        if old is not None:
            self._items[k] = Hypothesis(old.ent, h.status)
        else:
            self._items[k] = h

    def plus(self, other: "HypoVault | Iterable[Hypothesis]") -> "HypoVault":
        """The union-and-update operator."""
        new = HypoVault()
        new._items = dict(self._items)
        for h in other:
            new._insert(h)
        return new

    def add(self, ent: Entailment, status: Status) -> "HypoVault":
        return self.plus([Hypothesis(ent, status)])

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self._items.values())

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, ent: Entailment) -> bool:
        return S.entailment_key(ent) in self._items

    def status_of(self, ent: Entailment) -> Status | None:
        h = self._items.get(S.entailment_key(ent))
        return None if h is None else h.status

    def keys(self) -> set:
        return set(self._items)


@dataclass(frozen=True)
class RuleInstance:
    name: RuleName
    premises: tuple = ()  # entailments
    bindings: dict = field(default_factory=dict, compare=False)
    evidence: dict = field(default_factory=dict, compare=False)
    hypothesis: Hypothesis | None = None
    theta: dict | None = field(default=None, compare=False)  # Var -> Expr
    leftover: tuple = ()  # the unmatched antecedent atoms of a Hypo step
    recorded: Entailment | None = None  # the hypothesis an Induction step records
    pattern: object = None  # the opened hypothesis antecedent a Hypo step matched

    @property
    def is_axiom(self) -> bool:
        return self.name in AXIOMS


@dataclass
class ProofTree:
    goal: Entailment
    rule: RuleInstance
    children: list
    trace: tuple  # rule names on the path to this node, newest first
    used_hypotheses: list = field(default_factory=list)

    def nodes(self) -> Iterator["ProofTree"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def rule_sequence(self) -> list[str]:
        """Rule names in pre-order."""
        return [n.rule.name.value for n in self.nodes()]

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def leaves(self) -> Iterator["ProofTree"]:
        return (n for n in self.nodes() if not n.children)

    def rule_counts(self) -> dict:
        out: dict = {}
        for n in self.nodes():
            out[n.rule.name.value] = out.get(n.rule.name.value, 0) + 1
        return dict(sorted(out.items()))


def render_tree(t: ProofTree, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(tree_to_json(t), indent=2)
    if fmt != "text":
        raise ValueError(f"unknown tree format {fmt!r}")
    lines: list[str] = []
    _render_text(t, 0, lines)
    return "\n".join(lines)


def _render_text(t: ProofTree, depth: int, lines: list) -> None:
    pad = "  " * depth
    note = _evidence_text(t.rule)
    lines.append(f"{pad}{S.show_entailment(t.goal)}    [{t.rule.name.value}{note}]")
    for c in t.children:
        _render_text(c, depth + 1, lines)


def _evidence_text(r: RuleInstance) -> str:
    items = dict(r.bindings)
    items.update(r.evidence)
    if not items:
        return ""
    return ": " + ", ".join(f"{k}={_flat(v)}" for k, v in items.items())


def _flat(v) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_flat(x)}" for k, x in v.items()) + "}"
    return str(v)


def tree_to_json(t: ProofTree) -> dict:
    return {
        "goal": S.show_entailment(t.goal),
        "rule": t.rule.name.value,
        "bindings": dict(t.rule.bindings),
        "evidence": dict(t.rule.evidence),
        "trace": [str(r) for r in t.trace],
        "children": [tree_to_json(c) for c in t.children],
    }
