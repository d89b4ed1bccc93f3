import random
import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slprove import pure
from slprove import syntax as S
from slprove.pure import PureVerdict, SolverConfig, SolverConfigError, check_implication, is_unsat, prove_pure
from slprove.syntax import Add, And, Cmp, Eq, Forall, IntConst, Ne, Or

from randpure import PureGen, refute

x, y, z = (S.new_var(n, S.INT) for n in "xyz")
a, b, c = (S.new_var(n, S.ADDR) for n in "abc")


def imp(h, g):
    return check_implication(h, g)


def test_transitivity():
    assert imp(And((Cmp("<", x, y), Cmp("<", y, z))), Cmp("<", x, z))


def test_integer_strictness():
    # x < y over the integers means x + 1 <= y
    assert imp(Cmp("<", x, y), Cmp("<=", Add(x, IntConst(1)), y))
    assert not imp(Cmp("<", x, y), Cmp("<", Add(x, IntConst(1)), y))


def test_parity_needs_tightening():
    assert is_unsat(Eq(Add(x, x), IntConst(1)))


def test_address_reasoning():
    assert imp(And((Eq(a, b), Eq(b, c))), Eq(a, c))
    assert imp(And((Eq(a, b), Ne(b, c))), Ne(a, c))
    assert not imp(Ne(a, b), Ne(a, c))
    assert is_unsat(And((Eq(a, S.NIL), Ne(a, S.NIL))))


def test_disjunction():
    assert imp(Or((Cmp("<", x, IntConst(0)), Cmp(">", x, IntConst(0)))), Ne(x, IntConst(0)))
    assert imp(Ne(x, IntConst(0)), Or((Cmp("<", x, IntConst(0)), Cmp(">", x, IntConst(0)))))


def test_existential_goal():
    w = S.new_var("w", S.INT)
    assert prove_pure(S.TRUE, [w], Eq(w, Add(x, IntConst(1))))
    assert prove_pure(Cmp(">=", x, IntConst(0)), [w], And((Eq(x, Add(w, IntConst(1))), Cmp(">=", w, IntConst(-1)))))


def test_forall_goal_is_skolemized():
    w = S.new_var("w", S.INT)
    assert check_implication(S.TRUE, Forall(w, Eq(w, w)))


def test_forall_hypothesis_is_unknown():
    w = S.new_var("w", S.INT)
    assert check_implication(Forall(w, Cmp(">=", w, x)), Cmp("<", x, IntConst(0))) is PureVerdict.UNKNOWN


def test_verdict_truthiness():
    assert PureVerdict.VALID and not PureVerdict.UNKNOWN


def test_bad_backend():
    with pytest.raises(SolverConfigError):
        SolverConfig.parse("z3")
    with pytest.raises(SolverConfigError):
        SolverConfig.parse("cmd:  ")


def test_smtlib_declares_addr():
    text = pure.to_smtlib(Eq(a, b), (), Eq(b, a))
    assert "(declare-sort Addr 0)" in text and text.rstrip().endswith("(check-sat)")


@pytest.mark.skipif(shutil.which("z3") is None, reason="z3 binary not installed")
def test_external_backend_agrees():
    cfg = SolverConfig.parse("cmd:z3 -in")
    rng = random.Random(7)
    gen = PureGen(rng)
    for _ in range(60):
        h, g = gen.implication()
        mine = check_implication(h, g)
        theirs = check_implication(h, g, cfg)
        if mine:
            assert theirs, (S.show_pure(h), S.show_pure(g))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_valid_survives_brute_force(seed):
    gen = PureGen(random.Random(seed))
    h, g = gen.implication()
    if check_implication(h, g):
        assert refute(h, g) is None, (S.show_pure(h), S.show_pure(g))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("<= >= < >".split()), st.integers(-3, 3)), min_size=1, max_size=4))
def test_bounds_entail_each_other(bounds):
    # conjunction of bounds on x implies each bound
    hyp = And(tuple(Cmp(op, x, IntConst(k)) for op, k in bounds))
    for op, k in bounds:
        assert imp(hyp, Cmp(op, x, IntConst(k)))
