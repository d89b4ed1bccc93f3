from slprove import syntax as S
from slprove.engine import (
    HypoVault, RuleConfig, RuleName, Status, check_hypo_side_condition, try_axiom, try_frame, try_hypothesis,
    try_induction, try_normalize, try_unfold_right, unify_antecedent,
)
from slprove.parser import parse_entailment


def ent(text, prog):
    return parse_entailment(text, prog)


def names(insts):
    return [i.name for i in insts]


def test_pure_entail(lists):
    r = try_axiom(ent("emp & x = y |- emp & y = x", lists))
    assert r.name is RuleName.PureEntail and r.premises == ()


def test_false_left1_syntactic(lists):
    r = try_axiom(ent("ls(x,y) & x != x |- emp", lists), RuleConfig(strict_rules=True))
    assert r.name is RuleName.FalseLeft1 and "contradiction" in r.evidence


def test_false_left1_generalized(lists):
    g = ent("x->node{y} & x = nil |- emp", lists)
    assert try_axiom(g).evidence == {"generalized": True}
    assert try_axiom(g, RuleConfig(strict_rules=True)) is None


def test_false_left2(lists):
    r = try_axiom(ent("x->node{y} * x->node{z} |- emp", lists))
    assert r.name is RuleName.FalseLeft2


def test_no_axiom_for_spatial_goal(lists):
    assert try_axiom(ent("ls(x,y) |- ls(x,y)", lists)) is None


def test_exists_left(lists):
    r = try_normalize(ent("exists u. x->node{u} |- exists v. x->node{v}", lists))
    assert r.name is RuleName.ExistsLeft
    assert r.premises[0].ante.exists == ()


def test_equal_left_substitutes(lists):
    r = try_normalize(ent("ls(x,y) & x = y |- ls(y,x)", lists))
    assert r.name is RuleName.EqualLeft
    p = r.premises[0]
    assert p.ante.pure == () and S.free_vars(p.ante) == S.free_vars(p.cons)


def test_equal_right_and_emp(lists):
    assert try_normalize(ent("ls(x,y) |- ls(x,y) & y = y", lists)).name is RuleName.EqualRight
    g = parse_entailment("ls(x,y) |- ls(x,y)", lists)
    assert try_normalize(S.Entailment(g.ante.with_(spatial=(S.EMP,) + g.ante.atoms), g.cons)).name \
        is RuleName.EmpLeft
    assert try_normalize(S.Entailment(g.ante, g.cons.with_(spatial=(S.EMP,) + g.cons.atoms))).name \
        is RuleName.EmpRight


def test_exists_right_equality_witness(lists):
    r = try_normalize(ent("x->node{y} |- exists u. x->node{u} & u = y", lists))
    assert r.name is RuleName.ExistsRight and r.evidence["witness_from"] == "equality"
    assert r.premises[0].cons.exists == ()


def test_normalization_is_one_step(lists):
    r = try_normalize(ent("exists u,v. x->node{u} * u->node{v} |- emp", lists))
    assert len(r.premises[0].ante.exists) == 1


def test_star_data_adds_equalities(lists):
    insts = try_frame(ent("x->node{y} |- exists u. x->node{u}", lists))
    assert names(insts) == [RuleName.StarData]
    p = insts[0].premises[0]
    assert p.ante.atoms == () and p.cons.atoms == () and len(p.cons.pure) == 1


def test_star_pred(lists):
    insts = try_frame(ent("ls(x,y) * ls(y,z) |- ls(y,z)", lists))
    assert RuleName.StarPred in names(insts)


def test_frame_skips_clashing_pairs(lists):
    # y = z is neither syntactic nor implied, so nothing is framed
    assert try_frame(ent("x->node{y} |- x->node{z}", lists)) == []
    assert try_frame(ent("x->node{y} & y = z |- x->node{z}", lists)) != []


def test_unfold_right_anchored(lists):
    insts = try_unfold_right(ent("x->node{y} |- ls(x,y)", lists), lists.preds)
    kinds = [i.evidence["case_kind"] for i in insts]
    assert kinds[0] == "inductive" and "base" in kinds


def test_unfold_right_unanchored_skipped(lists):
    # no antecedent cell can match a cell rooted at z
    insts = try_unfold_right(ent("x->node{y} |- ls(z,y)", lists), lists.preds)
    assert [i.evidence["case_kind"] for i in insts] == ["base"]


def test_induction_one_premise_per_case(lists):
    g = ent("tmp(x) |- exists y. ls(x,y)", lists)
    (r,) = try_induction(g, lists.preds)
    assert r.name is RuleName.Induction and len(r.premises) == 3 and r.recorded == g


def test_unify_antecedent(lists):
    g = ent("x->node{u} * ls(u,t) * t->node{nil} |- emp", lists)
    h = ent("a->node{b} * ls(b,c) |- ls(a,c)", lists)
    hv = S.free_vars(h.ante) | S.free_vars(h.cons)
    res = unify_antecedent(g.ante, h.ante, hv)
    assert len(res) == 1
    theta, leftover = res[0]
    assert len(leftover) == 1 and isinstance(leftover[0], S.PointsTo)


def test_side_condition():
    pt = S.PointsTo(S.new_var("x"), "node", (S.NIL,))
    assert check_hypo_side_condition(Status.VALID, (), ())["disjunct"] == "a"
    assert check_hypo_side_condition(Status.UNKNOWN, (pt,), ())["disjunct"] == "b"
    tr = (RuleName.PredIntroRight, RuleName.StarData, RuleName.Induction)
    assert check_hypo_side_condition(Status.UNKNOWN, (), tr)["disjunct"] == "c"
    assert check_hypo_side_condition(Status.UNKNOWN, (), (RuleName.Induction, RuleName.StarData)) is None
    assert check_hypo_side_condition(Status.UNKNOWN, (), ()) is None


def test_hypo_needs_decrease(lists):
    h = ent("tmp(x) |- exists y. ls(x,y)", lists)
    g = ent("tmp(x) |- exists y. ls(x,y)", lists)
    vault = HypoVault().add(h, Status.UNKNOWN)
    assert try_hypothesis(vault, (RuleName.Induction,), g) == []


def test_hypo_with_leftover_cell(lists):
    h = ent("tmp(u) |- exists y. ls(u,y)", lists)
    g = ent("x->node{u} * tmp(u) |- exists y. ls(x,y)", lists)
    vault = HypoVault().add(h, Status.UNKNOWN)
    insts = try_hypothesis(vault, (RuleName.Induction,), g)
    assert insts and insts[0].evidence["disjunct"] == "b"
    prem = insts[0].premises[0]
    assert [type(a) for a in prem.ante.atoms].count(S.PointsTo) == 1
