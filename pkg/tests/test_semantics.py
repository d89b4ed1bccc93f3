import pytest

from slprove import syntax as S
from slprove.parser import parse_entailment, parse_formula
from slprove.semantics import (
    Bounds, EvaluationError, Loc, Model, eval_pure, find_counter_model, heap_splits, model_lt, oracle_for, sat,
)


def test_rev_counter_model_has_one_cell(lists):
    e = parse_entailment("ls(x,y) |- ls(y,x)", lists)
    m = find_counter_model(e, lists.preds, Bounds(2, 2, None))
    assert m is not None and m.size == 1
    assert "->" in m.render()


def test_counter_model_is_least(lists):
    # the one-cell model comes before every two-cell model in enumeration order
    e = parse_entailment("ls(x,y) |- emp & x = y", lists)
    m = find_counter_model(e, lists.preds, Bounds(3, 3, None))
    assert m.size == 1


def test_valid_has_no_counter_model(lists):
    e = parse_entailment("tmp(x) |- exists y. ls(x,y)", lists)
    assert find_counter_model(e, lists.preds, Bounds(3, 3, None)) is None


def test_sat_points_to(lists):
    f = parse_formula("x->node{y}", lists)
    x, y = sorted(S.free_vars(f), key=lambda v: v.name)
    l1 = Loc(1)
    b = Bounds(1, 1, None)
    assert sat(Model({x: l1, y: S.NIL}, {l1: ("node", (S.NIL,))}), f, lists.preds, b)
    assert not sat(Model({x: l1, y: l1}, {l1: ("node", (S.NIL,))}), f, lists.preds, b)
    assert not sat(Model({x: l1, y: S.NIL}, {}), f, lists.preds, b)


def test_sat_requires_bound_stack(lists):
    f = parse_formula("x->node{y}", lists)
    with pytest.raises(EvaluationError):
        sat(Model({}, {}), f, lists.preds, Bounds(1, 1, None))


def test_emp_model_renders(lists):
    x = S.new_var("x")
    assert Model({x: S.NIL}, {}).render() == "stack: x=nil; heap: emp"


def test_json_shape(lists):
    x = S.new_var("x")
    m = Model({x: Loc(1)}, {Loc(1): ("node", (S.NIL,))})
    assert m.to_json() == {"stack": {"x": "Loc1"}, "heap": {"Loc1": {"sort": "node", "values": ["nil"]}}}


def test_model_order():
    a = Model({}, {})
    b = Model({}, {Loc(1): ("node", (S.NIL,))})
    assert model_lt(a, b) and not model_lt(b, a) and not model_lt(a, a)


def test_heap_splits_count():
    h = {Loc(1): ("node", (S.NIL,)), Loc(2): ("node", (S.NIL,))}
    assert len(list(heap_splits(h))) == 4


def test_eval_pure_quantifier():
    x = S.new_var("x", S.INT)
    w = S.new_var("w", S.INT)
    p = S.Exists(w, S.Eq(w, S.Add(x, S.IntConst(1))))
    assert eval_pure(p, {x: 0}, Bounds(0, 1, (0, 1)))


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(-1, 1)
    assert Bounds(2, 2, (-1, 1)).witness_ints == list(range(-3, 4))


def test_oracle_is_cached(lists):
    b = Bounds(2, 2, None)
    assert oracle_for(lists.preds, b) is oracle_for(lists.preds, b)


def test_int_predicate_witness(lists):
    from slprove.parser import parse_program

    p = parse_program("sort d {int v, addr n};\n"
                      "pred lsn(x,y,n) := emp & x=y & n=0 \\/ exists w,m. x->d{m,w} * lsn(w,y,m) & n=m+1;\n"
                      "checkentail lsn(x,y,n) |- emp & n >= 0;\n"
                      "checkentail lsn(x,y,n) |- emp & n = 0;\n")
    b = Bounds(2, 2, (-1, 1))
    assert find_counter_model(p.queries[0][1], p.preds, b) is not None  # the heap may be nonempty
    m = find_counter_model(p.queries[1][1], p.preds, b)
    assert m is not None and m.size == 1
