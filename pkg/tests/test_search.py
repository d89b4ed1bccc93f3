import pytest

from slprove import syntax as S
from slprove.engine import HypoVault, RuleName, SearchBudget, Status, Verdict, prove, render_tree, tree_to_json
from slprove.parser import parse_entailment


def run(text, prog, **kw):
    return prove(None, (), parse_entailment(text, prog), prog.preds, SearchBudget(**kw))


def test_motivating_valid(lists):
    r = run("tmp(x) |- exists y. ls(x,y)", lists)
    assert r.valid and not r.timed_out
    assert r.tree.rule.name is RuleName.Induction
    assert all(leaf.rule.is_axiom for leaf in r.tree.leaves())


def test_invalid_is_unknown(lists):
    r = run("ls(x,y) |- ls(y,x)", lists)
    assert r.verdict is Verdict.UNKNOWN and r.tree is None


def test_timeout_reported(lists):
    r = run("lseven(x,y) * y->node{z} * lseven(z,t) |- exists u. lseven(x,u) * u->node{t}", lists,
            timeout_ms=1)
    assert r.timed_out or r.valid


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(timeout_ms=0)


def test_trace_is_newest_first(lists):
    r = run("tmp(x) |- exists y. ls(x,y)", lists)
    for n in r.tree.nodes():
        for c in n.children:
            assert c.trace[0] is n.rule.name and c.trace[1:] == n.trace


def test_derived_contains_root(lists):
    g = parse_entailment("tmp(x) |- exists y. ls(x,y)", lists)
    r = prove(None, (), g, lists.preds)
    assert r.derived.status_of(g) is Status.VALID


def test_given_vault_is_used(lists):
    lemma = parse_entailment("ls(a,b) * ls(b,c) |- ls(a,c)", lists)
    goal = parse_entailment("ls(x,y) * ls(y,z) * ls(z,w) |- ls(x,w)", lists)
    r = prove(HypoVault().add(lemma, Status.VALID), (), goal, lists.preds)
    assert r.valid


def test_single_path_also_proves_e(lists):
    assert run("tmp(x) |- exists y. ls(x,y)", lists, mutual_mode=False).valid


def test_deterministic_trees(lists):
    outs = []
    for _ in range(2):
        S.restart_ids()
        from slprove.parser import parse_program

        from conftest import MOTIVATING

        p = parse_program(MOTIVATING)
        outs.append(render_tree(run("tmp(x) |- exists y. ls(x,y)", p).tree))
    assert outs[0] == outs[1]


def test_tree_json(lists):
    t = run("tmp(x) |- exists y. ls(x,y)", lists).tree
    j = tree_to_json(t)
    assert j["rule"] == "Induction" and j["trace"] == [] and len(j["children"]) == 3
