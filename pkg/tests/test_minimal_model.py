import pytest

from tclab.corpus import corpus
from tclab.finite_model import CardinalityVector, bound_hint, brute_mm, is_antichain, sat_bounded, vec
from tclab.logic import F, SIGMA1, And, Eq, LogicError, Not, Var, cycle_formula, free_vars, iterate
from tclab.minimal_model import (
    MmCapability,
    OracleError,
    brute_mm_capability,
    decide_from_mm,
    decide_s_membership,
    from_decision_capability,
    mm_from_decision,
    mm_single_sort,
    s_reduction_formula,
)
from tclab.theories import SOracle, TheoryConfig, make_theory

x, y = Var("x", SIGMA1), Var("y", SIGMA1)
T1_7 = make_theory("t1", TheoryConfig(s=SOracle({7})))


def test_mm_from_decision_examples():
    assert mm_from_decision(T1_7, cycle_formula(2, x)) == {vec(2)}
    assert mm_from_decision(make_theory("teq"), Eq(x, y)) == {vec(1)}
    phi = And((cycle_formula(7, x), Eq(iterate(F, 4, y), y)))
    assert mm_from_decision(T1_7, phi) == {vec(11)}
    assert brute_mm(T1_7, phi, 12) == {vec(11)}


def test_mm_from_decision_requires_capabilities():
    with pytest.raises(LogicError):
        mm_from_decision(make_theory("th"), Eq(x, x))


@pytest.mark.parametrize("name", ["t1", "t2", "t3", "t4", "adds-t2"])
def test_mm_from_decision_agrees_with_brute_force(name):
    t = make_theory(name)
    for phi in corpus("sigma-f", 30, seed=21, max_vars=3, max_literals=4, two_sorted=name.startswith("adds")):
        fast = mm_from_decision(t, phi)
        w = t.strong_witness(phi)
        b = tuple(max(1, sum(1 for v in free_vars(w) if v.sort == s)) for s in t.signature.sorts)
        assert fast == brute_mm(t, phi, b)
        assert is_antichain([m.values for m in fast])


def test_decide_from_mm_examples():
    assert decide_from_mm(T1_7, cycle_formula(7, x))
    contradiction = And((Eq(iterate(F, 1, x), x), Not(Eq(iterate(F, 1, x), x))))
    assert not decide_from_mm(T1_7, contradiction)
    assert not decide_from_mm(make_theory("teq"), Not(Eq(x, x)))


@pytest.mark.parametrize("name", ["t1", "t2"])
def test_decide_from_mm_matches_bounded_search(name):
    t = make_theory(name)
    for phi in corpus("sigma-f", 40, seed=8, max_vars=3, max_literals=4):
        assert decide_from_mm(t, phi) == sat_bounded(t, phi, bound_hint(t, phi)).is_sat


def test_decide_from_mm_reports_broken_oracle():
    silent = MmCapability(lambda phi: frozenset(), "broken")
    with pytest.raises(OracleError):
        decide_from_mm(T1_7, Eq(x, x), mm=silent)


def test_mm_single_sort_examples():
    names = ("sigma1", "sigma2")
    assert mm_single_sort({CardinalityVector.of(names, (2, 5)), CardinalityVector.of(names, (3, 1))}) == 2
    assert mm_single_sort({vec(11)}) == 11
    assert mm_single_sort({vec(1)}) == 1
    with pytest.raises(ValueError):
        mm_single_sort(set())


def test_s_reduction_formula_shape():
    assert s_reduction_formula(7) == And((cycle_formula(7, x), Eq(iterate(F, 4, y), y)))


def test_decide_s_membership_examples():
    for i in (1, 2, 3, 4):
        mm = make_theory(f"t{i}").mm
        assert decide_s_membership(i, mm, 7)
    assert decide_s_membership(3, make_theory("t3").mm, 13)
    t1 = make_theory("t1")
    assert not decide_s_membership(1, t1.mm, 17)
    assert mm_single_sort(brute_mm(t1, s_reduction_formula(17), 21)) == 18


def test_non_members_differ_across_theories():
    assert mm_single_sort(make_theory("t2").mm(s_reduction_formula(19))) == 20
    assert mm_single_sort(make_theory("t4").mm(s_reduction_formula(19))) == 21


def test_decide_s_membership_rejects_bad_n():
    with pytest.raises(ValueError):
        decide_s_membership(1, make_theory("t1").mm, 9)
    with pytest.raises(ValueError):
        decide_s_membership(1, make_theory("t1").mm, 5)


@pytest.mark.parametrize("members", [{7, 13}, {11, 17, 19}, set()])
def test_reduction_recovers_configured_oracle(members):
    s = SOracle(members)
    for i in (1, 3):
        t = make_theory(f"t{i}", TheoryConfig(s=s))
        cap = from_decision_capability(t)
        got = {n for n in (7, 11, 13, 17, 19) if decide_s_membership(i, cap, n)}
        assert got == members


def test_brute_capability_provenance():
    cap = brute_mm_capability(make_theory("teq"))
    assert cap.provenance == "brute"
    assert cap(Not(Eq(x, y))) == {vec(2)}
