import dataclasses

import pytest

from slprove import syntax as S
from slprove.engine import RuleName, SearchBudget, Status, audit_tree, decreasing_disjunct, prove
from slprove.parser import parse_entailment


@pytest.fixture
def e_tree(lists):
    g = parse_entailment("tmp(x) |- exists y. ls(x,y)", lists)
    return prove(None, (), g, lists.preds, SearchBudget()).tree


def hypo_nodes(t):
    return [n for n in t.nodes() if n.rule.name is RuleName.Hypo]


def test_clean_tree(e_tree):
    rep = audit_tree(e_tree)
    assert rep.ok, str(rep)
    assert rep.hypo_nodes >= 2 and rep.nodes == e_tree.size()


def test_disjunct_recomputation():
    pt = S.PointsTo(S.new_var("x"), "node", (S.NIL,))
    assert decreasing_disjunct(Status.VALID, (), ()) == "a"
    assert decreasing_disjunct(Status.UNKNOWN, (pt,), ()) == "b"
    assert decreasing_disjunct(Status.UNKNOWN, (), (RuleName.StarData, RuleName.Induction)) == "c"
    assert decreasing_disjunct(Status.UNKNOWN, (), (RuleName.Induction, RuleName.StarData)) is None


def _mutate(node, **kw):
    node.rule = dataclasses.replace(node.rule, **kw)


def test_detects_wrong_disjunct(e_tree):
    n = next(n for n in hypo_nodes(e_tree) if n.rule.evidence.get("disjunct") == "b")
    _mutate(n, evidence={**n.rule.evidence, "disjunct": "a"})
    assert any("disjunct" in p for p in audit_tree(e_tree).problems)


def test_detects_missing_decrease(e_tree):
    n = next(n for n in hypo_nodes(e_tree) if n.rule.hypothesis.status is not Status.VALID)
    _mutate(n, leftover=())
    probs = audit_tree(e_tree).problems
    assert any("no decreasing disjunct" in p or "Sigma3" in p for p in probs)


def test_detects_bad_theta(e_tree):
    n = hypo_nodes(e_tree)[0]
    theta = dict(n.rule.theta)
    v = next(iter(theta))
    theta[v] = S.new_var("stranger")
    _mutate(n, theta=theta)
    assert not audit_tree(e_tree).ok


def test_detects_foreign_hypothesis(e_tree, lists):
    n = hypo_nodes(e_tree)[0]
    other = parse_entailment("ls(a,b) |- ls(a,b)", lists)
    _mutate(n, hypothesis=dataclasses.replace(n.rule.hypothesis, ent=other))
    assert not audit_tree(e_tree).ok


def test_detects_non_axiom_leaf(e_tree):
    leaf = next(e_tree.leaves())
    _mutate(leaf, name=RuleName.StarData)
    assert any("not an axiom" in p for p in audit_tree(e_tree).problems)


def test_detects_broken_trace(e_tree):
    e_tree.children[0].trace = (RuleName.Hypo,)
    assert any("trace" in p for p in audit_tree(e_tree).problems)
