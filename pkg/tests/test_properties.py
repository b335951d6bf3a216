import json

import pytest

from tclab.logic import (
    F,
    P,
    SIGMA1,
    SIGMA_P,
    App,
    Eq,
    FiniteInterpretation,
    LogicError,
    Not,
    Pred,
    Var,
    cycle_formula,
    evaluate,
    iterate,
    unary_interpretation,
)
from tclab.properties import (
    CONSTRUCTED,
    HOLDS,
    REFUTED,
    Bounds,
    ConstructionRefused,
    PropertyReport,
    Table,
    check_convexity,
    check_finite_smoothness,
    check_not_smooth_star,
    check_stable_infiniteness,
    check_stable_infiniteness_construction,
    convexity_failure,
    loop_pins_size,
    oracle_swap,
)
from tclab.star import DEFAULT_RHOS, RhoSpec, build_star, node
from tclab.theories import SOracle, TheoryConfig, make_theory, membership_ti, table_oracle

x, y = Var("x"), Var("y")
S = SOracle()
F6 = Eq(iterate(F, 6, x), x)
D2 = Eq(iterate(F, 2, x), x)
D3 = Eq(iterate(F, 3, x), x)


def _cycles(*lengths):
    succ, base = [], 0
    for k in lengths:
        succ += [base + (j + 1) % k for j in range(k)]
        base += k
    return succ


@pytest.mark.parametrize("name", ["t2", "t4", "adds-t2"])
def test_convexity_refuted_by_six_cycle_split(name):
    t = make_theory(name)
    rep = check_convexity(t, candidates=[F6])
    assert rep.refuted
    sides = {frozenset((d.left, d.right)) for d in rep.counterexample["disjuncts"]}
    assert sides == {frozenset((D2.left, D2.right)), frozenset((D3.left, D3.right))}
    sizes = sorted(m.size() for m in rep.evidence["counter_models"])
    assert sizes == [2, 3]
    for m in rep.evidence["counter_models"]:
        assert t.membership(m) and evaluate(m, F6)
        assert not (evaluate(m, D2) and evaluate(m, D3))


def test_counter_models_refute_the_right_disjunct():
    t = make_theory("t2")
    combo, counters = convexity_failure(t, F6)
    for d, m in zip(combo, counters):
        assert not evaluate(m, d)


@pytest.mark.parametrize("name", ["t1", "t3"])
def test_convexity_holds_at_bound(name):
    rep = check_convexity(make_theory(name), samples=10)
    assert rep.verdict == HOLDS and rep.bound["model_bound"] == 8


def test_ray_on_seven_cycle():
    m = unary_interpretation(_cycles(7), {x: 0})
    phi = cycle_formula(7, x)
    out = check_stable_infiniteness_construction(1, m, 3, phi)
    assert out.size() == 10 and membership_ti(1, S, out) and evaluate(out, phi)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7])
def test_ray_never_creates_forbidden_cycles(k):
    for i in (1, 2):
        for base in ([0], _cycles(2), _cycles(7), _cycles(3, 1)):
            m = unary_interpretation(base, {x: 0})
            if not membership_ti(i, S, m):
                continue
            out = check_stable_infiniteness_construction(i, m, k, Eq(x, x))
            assert out.size() == len(base) + k and membership_ti(i, S, out)


def test_ray_refused_for_loops_in_t3():
    with pytest.raises(ConstructionRefused) as info:
        check_stable_infiniteness_construction(3, unary_interpretation([0], {x: 0}), 1)
    assert info.value.evidence["formula"] == Eq(App(F, (x,)), x)


def test_ray_zero_is_identity():
    m = unary_interpretation(_cycles(3), {x: 0})
    assert check_stable_infiniteness_construction(1, m, 0) is m


def test_ray_checks_input():
    with pytest.raises(LogicError):
        check_stable_infiniteness_construction(2, unary_interpretation(_cycles(6)), 1)
    with pytest.raises(ValueError):
        check_stable_infiniteness_construction(1, unary_interpretation([0]), -1)


def test_loop_pins_size_only_where_expected():
    assert loop_pins_size(make_theory("t3"))["pinned"]
    assert not loop_pins_size(make_theory("t1"))["pinned"]


@pytest.mark.parametrize("name,verdict", [("t1", CONSTRUCTED), ("t2", CONSTRUCTED), ("t3", REFUTED),
                                          ("t4", REFUTED), ("adds-t3", REFUTED)])
def test_stable_infiniteness_verdicts(name, verdict):
    rep = check_stable_infiniteness(make_theory(name), Bounds(samples=8))
    assert rep.verdict == verdict


def test_t2n_finite_smoothness():
    m = FiniteInterpretation(SIGMA_P, {SIGMA1: (0, 1, 2)}, {}, {"P": frozenset({(0,)})}, {x: 0})
    rep = check_finite_smoothness(make_theory("t2n"), m, Pred(P, (x,)), 6)
    assert rep.verdict == CONSTRUCTED and rep.evidence["sizes"] == [4, 5, 6]


def test_teq_finite_smoothness():
    m = FiniteInterpretation(make_theory("teq").signature, {SIGMA1: (0, 1)}, {}, {}, {x: 0, y: 1})
    rep = check_finite_smoothness(make_theory("teq"), m, Not(Eq(x, y)), 5)
    assert rep.evidence["sizes"] == [3, 4, 5]


def test_finite_smoothness_rejects_other_theories():
    with pytest.raises(LogicError):
        check_finite_smoothness(make_theory("t1"), unary_interpretation([0], {x: 0}), Eq(x, x))


def test_star_growth_uses_both_cases():
    full = build_star(3, None, DEFAULT_RHOS, {x: 0})
    rep = check_finite_smoothness(make_theory("star"), full, Pred(make_theory("star").signature.predicate("N"), (x,)),
                                  full.size + 6)
    assert rep.verdict == CONSTRUCTED
    assert rep.evidence["cases"][0] == "I"
    assert "II" in rep.evidence["cases"]
    partial = build_star(3, ["00"], DEFAULT_RHOS, {x: node("")})
    rep2 = check_finite_smoothness(make_theory("star"), partial, Eq(x, x), partial.size + 1)
    assert rep2.evidence["cases"] == ["II"]


def test_not_smooth_star_distinguishes():
    rhos = {"rho": RhoSpec("000"), "tau": RhoSpec("100")}
    star = build_star(4, None, rhos)
    assert star.f("rho", 1) == node("0") and star.f("tau", 1) == node("1")
    rep = check_not_smooth_star([star])
    assert rep.verdict == CONSTRUCTED


def test_not_smooth_star_equal_prefixes_need_nothing():
    rhos = {"rho": RhoSpec("00", "0"), "tau": RhoSpec("00", "1")}
    star = build_star(4, None, rhos)
    assert [star.f("rho", m) for m in range(3)] == [star.f("tau", m) for m in range(3)]
    assert check_not_smooth_star([star]).verdict == CONSTRUCTED


def test_not_smooth_star_layer_growth():
    stars = [build_star(n, None, DEFAULT_RHOS) for n in range(2, 6)]
    rep = check_not_smooth_star(stars)
    top = rep.evidence["levels"][-1]["distinct_values"]
    assert top[3] >= 4
    with pytest.raises(ValueError):
        check_not_smooth_star([build_star(3, None, {"rho": RhoSpec()})])


def test_oracle_swap_changes_t1_answers():
    sw = oracle_swap(make_theory("t1"))
    assert sw["decide"][0] != sw["decide"][1]
    assert sw["mm"][0] != sw["mm"][1]
    assert oracle_swap(make_theory("teq")) is None


def test_oracle_swap_changes_th_answer():
    sw = oracle_swap(make_theory("th", TheoryConfig(h=table_oracle([1]))))
    assert sw["decide"] == (True, False)


def test_report_json_round_trips():
    rep = check_convexity(make_theory("t2"), candidates=[F6])
    data = json.loads(json.dumps(rep.to_json()))
    assert data["verdict"] == REFUTED
    assert data["counterexample"]["phi"] == "(= (f (f (f (f (f (f x)))))) x)"
    assert PropertyReport("t", "p", HOLDS).to_json()["counterexample"] is None


def test_table_rendering():
    tab = Table(("a", "b"), (("X", {"a": True, "b": False}, {}),))
    assert tab.grid() == {"X": (True, False)}
    assert tab.to_markdown() == "| Theory | a | b |\n|---|---|---|\n| X | ✓ | ✗ |\n"
    assert tab.to_json()["rows"][0]["cells"] == {"a": True, "b": False}
