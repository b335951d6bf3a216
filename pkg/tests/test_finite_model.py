import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tclab.corpus import corpus
from tclab.finite_model import (
    ALEPH0,
    CardinalityVector,
    bound_hint,
    brute_mm,
    canonical_form,
    empty_sig_decide,
    enumerate_structures,
    extremal_elements,
    is_antichain,
    models,
    sat_bounded,
    vec,
)
from tclab.logic import (
    F,
    P,
    SIGMA1,
    SIGMA2,
    SIGMA_1,
    SIGMA_F,
    TRUE,
    And,
    Eq,
    Exists,
    LogicError,
    Not,
    Pred,
    Signature,
    Var,
    conj,
    cycle_formula,
    distinct_formula,
    evaluate,
    iterate,
)
from tclab.theories import SOracle, TheoryConfig, TheoryHandle, make_theory, membership_ti

x, y, z = (Var(n, SIGMA1) for n in "xyz")
w1, w2 = Var("w1", SIGMA1), Var("w2", SIGMA1)


def test_empty_signature_enumeration():
    assert [m.size() for m in enumerate_structures(SIGMA_1, 2)] == [1, 2]


def test_sigma_f_enumeration_count():
    assert len(list(enumerate_structures(SIGMA_F, 2))) == 5
    assert len(list(enumerate_structures(SIGMA_F, 3))) == 1 + 4 + 27


def test_t3_filter_keeps_two_structures():
    s = SOracle()
    kept = list(enumerate_structures(SIGMA_F, 2, filter=lambda m: membership_ti(3, s, m)))
    assert len(kept) == 2
    assert sorted(tuple(sorted(m.unary().items())) for m in kept) == [((0, 0),), ((0, 1), (1, 0))]


def test_canonical_enumeration_removes_isomorphs():
    labeled = list(enumerate_structures(SIGMA_F, 3))
    canon = list(enumerate_structures(SIGMA_F, 3, canonical=True))
    # functional graphs up to isomorphism: 1, 3, 7 on sizes 1..3
    assert len(canon) == 1 + 3 + 7
    assert len({canonical_form(m) for m in labeled}) == len(canon)


def test_enumeration_rejects_aleph0():
    with pytest.raises(Exception):
        list(enumerate_structures(SIGMA_F, ALEPH0))


def test_sat_bounded_teq1_disequality():
    v = sat_bounded(make_theory("teq1"), Not(Eq(x, y)), 4)
    assert v.kind == "unsat-up-to" and v.model is None
    assert v.bound.values == (4,)


def test_sat_bounded_seven_cycle():
    t = make_theory("t1", TheoryConfig(s=SOracle({7})))
    phi = cycle_formula(7, x)
    v = sat_bounded(t, phi, 7)
    assert v.is_sat
    assert evaluate(v.model, phi) and t.membership(v.model)


def test_sat_bounded_teq_trivial():
    v = sat_bounded(make_theory("teq"), Eq(x, x), 1)
    assert v.is_sat and v.model.size() == 1


def test_sat_bounded_rejects_quantifiers():
    with pytest.raises(LogicError):
        sat_bounded(make_theory("teq"), Exists(x, Eq(x, x)), 2)


def test_verdict_json():
    v = sat_bounded(make_theory("teq"), Eq(x, x), 1)
    data = v.to_json()
    assert data["verdict"] == "sat" and data["bound"] == {"sigma1": 1}


def test_brute_mm_teq_two():
    assert brute_mm(make_theory("teq"), Not(Eq(x, y)), 4) == {vec(2)}


def test_brute_mm_t2n_four():
    phi = conj([Not(Eq(w1, w2)), Pred(P, (w1,)), Pred(P, (w2,))])
    assert brute_mm(make_theory("t2n"), phi, 6) == {vec(4)}


def test_brute_mm_seven_cycle_plus_four_cycle():
    t = make_theory("t1", TheoryConfig(s=SOracle({7})))
    phi = And((cycle_formula(7, x), Eq(iterate(F, 4, y), y)))
    assert brute_mm(t, phi, 12) == {vec(11)}


def test_brute_mm_unsat_is_empty():
    assert brute_mm(make_theory("teq1"), Not(Eq(x, y)), 3) == frozenset()


def test_brute_mm_disjunction_keeps_minima_only():
    t = make_theory("teq")
    phi = distinct_formula([x, y, z])
    assert brute_mm(t, phi, 4) == {vec(3)}
    two = Var("u", SIGMA2)
    t2 = make_theory("adds-t1")
    mm = brute_mm(t2, And((Eq(x, x), Not(Eq(two, Var("v", SIGMA2))))), (2, 3))
    assert {m.values for m in mm} == {(1, 2)}


@pytest.mark.parametrize("name", ["t1", "t3", "teq"])
def test_brute_mm_invariants(name):
    t = make_theory(name)
    for phi in corpus("sigma-f", 25, seed=5, max_vars=3, cycles=False) if name != "teq" else \
            corpus("empty", 25, seed=5, sorts=(SIGMA1,)):
        mm = brute_mm(t, phi, 4)
        tuples = [m.values for m in mm]
        assert is_antichain(tuples)
        for m in models(t, phi, 4):
            assert any(all(a <= b for a, b in zip(v, m.sizes())) for v in tuples)


def test_extremal_examples():
    s = {(1, 3), (2, 2), (3, 1), (1, 1)}
    assert extremal_elements(s, "maximal") == {(1, 3), (2, 2), (3, 1)}
    assert extremal_elements(s, "minimal") == {(1, 1)}
    assert extremal_elements({(4, 2)}, "minimal") == {(4, 2)}
    with pytest.raises(ValueError):
        extremal_elements(s, "middle")


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=10))
def test_extremal_properties(s):
    mx, mn = extremal_elements(s, "maximal"), extremal_elements(s, "minimal")
    assert mx | mn <= s
    assert all(not (a != b and all(p <= q for p, q in zip(a, b))) for a in mx for b in s)
    assert all(not (a != b and all(p <= q for p, q in zip(b, a))) for a in mn for b in s)


def test_empty_sig_decide_examples():
    assert empty_sig_decide({vec(2)}, Not(Eq(x, y)))
    assert not empty_sig_decide({vec(2)}, distinct_formula([x, y, z]))
    assert empty_sig_decide({vec(1)}, Eq(x, y))
    assert empty_sig_decide({vec(ALEPH0)}, distinct_formula([x, y, z]))


def test_empty_sig_decide_rejects_functions():
    with pytest.raises(LogicError):
        empty_sig_decide({vec(2)}, Eq(iterate(F, 1, x), x))


def _spectrum_theory(maxima):
    sig = Signature((SIGMA1, SIGMA2))

    def member(m):
        return any(all(c <= t[i] for i, c in enumerate(m.sizes())) for t in maxima)

    return TheoryHandle("spectrum", "spectrum", sig, member, generated_closed=False)


@pytest.mark.parametrize("maxima", [[(1, 1)], [(2, 3), (3, 1)], [(ALEPH0, 2)]])
def test_empty_sig_decide_matches_bounded_search(maxima):
    names = ("sigma1", "sigma2")
    spectrum = [CardinalityVector.of(names, m) for m in maxima]
    t = _spectrum_theory(maxima)
    for phi in corpus("empty", 60, seed=11, max_vars=4):
        expected = sat_bounded(t, phi, (4, 4)).is_sat
        assert empty_sig_decide(spectrum, phi, names) == expected


def test_bound_hint_values():
    assert bound_hint(make_theory("t2n"), And((Pred(P, (x,)), Pred(P, (y,))))).values == (4,)
    assert bound_hint(make_theory("t1"), Eq(iterate(F, 2, x), x)).values == (3,)


def test_models_respect_bound_and_theory():
    t = make_theory("t2")
    found = list(models(t, TRUE, 3))
    assert found and all(t.membership(m) and m.size() <= 3 for m in found)
