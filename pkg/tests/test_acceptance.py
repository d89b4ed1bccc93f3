"""Acceptance criteria 1-9, one test each.  Every test prints a single line
``criterion N: PASS|FAIL  <detail>`` to the terminal, even when output is
captured."""

import random
import sys
import time
from pathlib import Path

import pytest

from slprove import pure
from slprove import syntax as S
from slprove.engine import RuleName, SearchBudget, audit_tree, prove
from slprove.parser import parse_entailment, parse_program
from slprove.semantics import Bounds, find_counter_model, oracle_for

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CORPUS, MOTIVATING, corpus_queries  # noqa: E402
from localsound import ALL_RULES, check_rules  # noqa: E402
from randpure import PureGen, refute  # noqa: E402
from refenum import RefEnum  # noqa: E402
from test_oracle_selftest import FROZEN, by_size  # noqa: E402

E = "tmp(x) |- exists y. ls(x,y)"
EV1 = "lseven(x,y) * y->node{z} * lseven(z,t) |- exists u. lseven(x,u) * u->node{t}"
EV2 = "lseven(x,y) * lseven(y,z) |- lseven(x,z)"
E2_RULES = ["Hypo", "PredIntroRight", "StarData", "StarPred", "PureEntail"]

TREES = []  # (label, tree) from criteria 1-4, audited by criterion 6


@pytest.fixture
def say(capsys):
    def out(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

    return out


def fresh(text=MOTIVATING):
    S.restart_ids()
    pure.clear_cache()
    return parse_program(text)


def timed_prove(goal_text, mutual=True, timeout_ms=30000):
    prog = fresh()
    g = parse_entailment(goal_text, prog)
    t0 = time.monotonic()
    r = prove(None, (), g, prog.preds, SearchBudget(timeout_ms=timeout_ms, mutual_mode=mutual))
    return r, time.monotonic() - t0


def is_subsequence(want, seq) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in want)


def case_branch(tree, k):
    """The subtree for definition case ``k`` of the root Induction step, past
    the normalization steps that open its existentials."""
    assert tree.rule.name is RuleName.Induction
    n = tree.children[k]
    while n.rule.name is RuleName.ExistsLeft:
        (n,) = n.children
    return n


@pytest.fixture(scope="module")
def e_mutual():
    return timed_prove(E, True)


@pytest.fixture(scope="module")
def e_single():
    return timed_prove(E, False)


def test_criterion_1_motivating(say, e_mutual):
    r, secs = e_mutual
    ok = r.valid and secs <= 5.0
    seq = case_branch(r.tree, 1).rule_sequence() if r.valid else []
    ok = ok and is_subsequence(E2_RULES, seq)
    if r.valid:
        TREES.append(("E mutual", r.tree))
    say(1, ok, f"E {r.verdict} in {secs:.2f}s; E2 branch rules {seq}")
    assert ok


def test_criterion_2_mutual_shortcut(say, e_mutual, e_single):
    (rm, _), (rs, _) = e_mutual, e_single
    assert rm.valid and rs.valid
    e3_m = case_branch(rm.tree, 2)
    e3_s = case_branch(rs.tree, 2)
    m_rules = e3_m.rule_sequence()
    hyps = [n.rule.hypothesis.ent for n in e3_m.nodes() if n.rule.name is RuleName.Hypo]
    shapes = sorted(S.show_entailment(h) for h in hyps)
    ok = len(m_rules) <= 4 and sorted(m_rules) == sorted(["Hypo", "Hypo", "StarPred", "PureEntail"])
    # the hypotheses are E2 and E4 (up to naming): one starts from tmp, one from ls
    ok = ok and sorted(a.pred for h in hyps for a in h.ante.atoms if isinstance(a, S.PredApp)) == ["ls", "tmp"]
    single_ok = all(leaf.rule.is_axiom for leaf in e3_s.leaves())
    TREES.append(("E single-path", rs.tree))
    say(2, ok and single_ok,
        f"mutual E3 subtree {m_rules} using {shapes}; single-path E3 subtree has {e3_s.size()} nodes")
    assert ok and single_ok


def test_criterion_3_even_lists(say):
    details, ok = [], True
    for name, text in (("ev1", EV1), ("ev2", EV2)):
        r, secs = timed_prove(text, True, 30000)
        ok = ok and r.valid and secs <= 30.0
        details.append(f"{name} {r.verdict} in {secs:.2f}s")
        if r.valid:
            TREES.append((name, r.tree))
    say(3, ok, "; ".join(details))
    assert ok


@pytest.fixture(scope="module")
def corpus_runs():
    """Every corpus query proved in both modes with a 30 s budget each."""
    rows = []
    t0 = time.monotonic()
    for stem, name, _, _, expect in corpus_queries():
        res = {}
        for mutual in (True, False):
            prog = fresh((CORPUS / f"{stem}.sl").read_text())
            ent = dict(prog.queries)[name]
            res[mutual] = prove(None, (), ent, prog.preds, SearchBudget(timeout_ms=30000, mutual_mode=mutual))
        rows.append((stem, name, prog, ent, expect, res[True], res[False]))
    return rows, time.monotonic() - t0


def test_criterion_4_corpus_soundness(say, corpus_runs):
    rows, prove_secs = corpus_runs
    t0 = time.monotonic()
    b = Bounds(4, 4, (-2, 2))
    bad, checked = [], 0
    for stem, name, prog, ent, _, rm, rs in rows:
        if rm.valid or rs.valid:
            checked += 1
            if find_counter_model(ent, prog.preds, b) is not None:
                bad.append(f"{stem}:{name}")
        for label, r in (("mutual", rm), ("single-path", rs)):
            if r.valid:
                TREES.append((f"{stem}:{name} {label}", r.tree))
    total = prove_secs + time.monotonic() - t0
    n_valid_expected = sum(1 for row in rows if row[4])
    proved = sum(1 for row in rows if row[5].valid)
    ok = len(rows) >= 40 and not bad and total <= 600
    say(4, ok, f"{len(rows)} entailments ({n_valid_expected} labeled valid), {proved} proved, "
               f"{checked} Valid verdicts checked at {b.describe()}, counter-models: {bad or 'none'}, "
               f"{total:.1f}s")
    assert ok


def test_criterion_5_local_soundness(say):
    t0 = time.monotonic()
    stats = check_rules(seed=2024, per_rule=100)
    short = [r.value for r in ALL_RULES if stats[r]["instances"] < 100]
    viol = {r.value: stats[r]["violations"] for r in ALL_RULES if stats[r]["violations"]}
    ok = not short and not viol and len(stats) == 14
    detail = ", ".join(f"{r.value} {stats[r]['instances']}/{stats[r]['nonvacuous']}" for r in ALL_RULES)
    say(5, ok, f"instances/non-vacuous per rule: {detail}; violations: {viol or 'none'}; "
               f"{time.monotonic() - t0:.1f}s")
    assert ok


def test_criterion_6_hypo_audit(say):
    if not TREES:
        pytest.skip("criteria 1-4 produced no trees")
    problems, hypo_nodes = [], 0
    for label, tree in TREES:
        rep = audit_tree(tree)
        hypo_nodes += rep.hypo_nodes
        problems += [f"{label}: {p}" for p in rep.problems]
    ok = not problems and hypo_nodes > 0
    say(6, ok, f"{len(TREES)} trees, {hypo_nodes} Hypo nodes audited, problems: {problems[:3] or 'none'}")
    assert ok


def test_criterion_7_mode_monotonicity(say, corpus_runs):
    rows, _ = corpus_runs
    broken = [f"{stem}:{name}" for stem, name, _, _, _, rm, rs in rows if rs.valid and not rm.valid]
    n_single = sum(1 for row in rows if row[6].valid)
    n_mutual = sum(1 for row in rows if row[5].valid)
    ok = not broken
    say(7, ok, f"single-path proves {n_single}, mutual proves {n_mutual}; single-only: {broken or 'none'}")
    assert ok


def test_criterion_8_pure_solver(say):
    S.restart_ids()
    rng = random.Random(8)
    valid, bad = 0, []
    for _ in range(1000):
        gen = PureGen(rng, n_int=rng.randint(1, 3), n_addr=rng.randint(0, 1))
        h, g = gen.implication()
        assert len(S.pure_free_vars(h) | S.pure_free_vars(g)) <= 4
        if pure.check_implication(h, g):
            valid += 1
            if refute(h, g, -3, 3) is not None:
                bad.append(f"{S.show_pure(h)} => {S.show_pure(g)}")
    ok = not bad and valid > 0
    say(8, ok, f"1000 implications, {valid} internal Valid, refuted over [-3,3]: {bad[:2] or 'none'}")
    assert ok


def test_criterion_9_oracle_self_test(say):
    prog = fresh()
    mism = []
    for pred, per_bound in FROZEN.items():
        for (k, locs), frozen in per_bound.items():
            ref = by_size(RefEnum(prog.preds, k, locs).pred_models(pred))
            ora = by_size(oracle_for(prog.preds, Bounds(k, locs, None)).predicate_models(pred))
            if not (ref == ora == frozen):
                mism.append(f"{pred}@{k}: ref {ref} oracle {ora} frozen {frozen}")
    ok = not mism
    counts = {p: sum(v[(3, 3)].values()) for p, v in FROZEN.items()}
    say(9, ok, f"counts at Bounds(3,3) {counts} agree with the reference enumerator; mismatches: {mism or 'none'}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
