"""Sequent-calculus proof search with mutual explicit induction."""

from .audit import AuditReport, audit_tree, decreasing_disjunct
from .rules import (
    RuleConfig, check_hypo_side_condition, try_axiom, try_frame, try_hypothesis, try_induction,
    try_normalize, try_unfold_right, unify_antecedent,
)
from .search import ProveResult, Prover, SearchBudget, Verdict, prove
from .tree import (
    AXIOMS, Hypothesis, HypoVault, ProofTree, RuleInstance, RuleName, Status, render_tree, tree_to_json,
)

__all__ = [
    "AXIOMS", "AuditReport", "Hypothesis", "HypoVault", "ProofTree", "ProveResult", "Prover", "RuleConfig",
    "RuleInstance", "RuleName", "SearchBudget", "Status", "Verdict", "audit_tree", "check_hypo_side_condition",
    "decreasing_disjunct",
    "prove", "render_tree", "tree_to_json", "try_axiom", "try_frame", "try_hypothesis",
    "try_induction", "try_normalize", "try_unfold_right", "unify_antecedent",
]
