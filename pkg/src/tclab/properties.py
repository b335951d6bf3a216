"""Bounded checks of theory properties and the constructions behind them.

Refutations carry explicit counter-models and are exact; confirmations are
claims about the bounds that were searched.
"""
from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .finite_model import sat_bounded
from .logic import (
    F,
    SIGMA1,
    App,
    Eq,
    FiniteInterpretation,
    Formula,
    FreshVars,
    LogicError,
    Not,
    Var,
    conj,
    cycle_formula,
    distinct_formula,
    evaluate,
    free_vars,
    iterate,
    require_qf,
)

HOLDS = "holds-at-bound"
REFUTED = "refuted"
CONSTRUCTED = "construction-verified"


@dataclass(frozen=True)
class PropertyReport:
    theory: str
    prop: str
    verdict: str
    evidence: dict = field(default_factory=dict)
    bound: dict = field(default_factory=dict)
    counterexample: Any = None

    @property
    def refuted(self) -> bool:
        return self.verdict == REFUTED

    def to_json(self) -> dict:
        return {
            "theory": self.theory,
            "property": self.prop,
            "verdict": self.verdict,
            "evidence": _jsonable(self.evidence),
            "bound": dict(self.bound),
            "counterexample": _jsonable(self.counterexample),
        }


def _jsonable(x):
    from .textio import interpretation_to_json, print_formula, print_term

    if isinstance(x, FiniteInterpretation):
        return interpretation_to_json(x)
    if isinstance(x, Formula):
        return print_formula(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, (Var, App)):
        return print_term(x)
    return str(x)


@dataclass(frozen=True)
class Bounds:
    """Search limits shared by the reproduction routines."""

    var_bound: int = 4
    disj_bound: int = 2
    model_bound: int = 8
    samples: int = 40
    ray_max: int = 3
    seed: int = 0


# ---------------------------------------------------------------------------
# Convexity
# ---------------------------------------------------------------------------


def _find(t, phi: Formula, model_bound: int) -> Optional[FiniteInterpretation]:
    """A model of phi: the theory's own exact search when it has one, else
    bounded enumeration."""
    if getattr(t, "arrangement_models", None) is not None:
        return t.find_model(phi)
    return sat_bounded(t, phi, model_bound).model


def _terms(vs: Sequence[Var], depth: int):
    return [iterate(F, d, v) for d in range(depth + 1) for v in vs if v.sort == SIGMA1]


def convexity_candidates(var_bound: int, model_bound: int, samples: int, seed: int) -> list[Formula]:
    """Antecedents to try: f^k(x)=x for k up to the model bound, then seeded
    flat conjunctions over ``var_bound`` variables."""
    from .corpus import random_flat_conjunction

    x = Var("x")
    out: list[Formula] = [Eq(iterate(F, k, x), x) for k in range(1, model_bound + 1)]
    rng = random.Random(seed)
    out += [random_flat_conjunction(rng, n_vars=var_bound) for _ in range(samples)]
    return out


def _counter(t, m: Optional[FiniteInterpretation], phi: Formula) -> bool:
    return m is not None and t.membership(m) and evaluate(m, phi)


def convexity_failure(t, phi: Formula, disj_bound: int = 2, model_bound: int = 8):
    """A non-convexity witness for one antecedent, or None.

    Returns (disjuncts, counter_models) where φ → ⋁disjuncts is valid (no
    model of φ ∧ ⋀¬d) and each counter-model satisfies φ ∧ ¬d for its d.
    """
    require_qf(phi)
    if _find(t, phi, model_bound) is None:
        return None
    vs = sorted(free_vars(phi), key=lambda v: v.name)
    depth = 3 if len(vs) == 1 else 1
    terms = _terms(vs, depth)
    pairs = [Eq(a, b) for i, a in enumerate(terms) for b in terms[i + 1:]]
    open_pairs = []
    seen_models: list[FiniteInterpretation] = []
    witness = {}
    for p in pairs:
        m = _find(t, conj([phi, Not(p)]), model_bound)
        if m is not None:
            open_pairs.append(p)
            witness[p] = m
            seen_models.append(m)
    for k in range(2, disj_bound + 1):
        for combo in itertools.combinations(open_pairs, k):
            if any(all(not evaluate(m, d) for d in combo) for m in seen_models):
                continue
            m = _find(t, conj([phi] + [Not(d) for d in combo]), model_bound)
            if m is not None:
                seen_models.append(m)
                continue
            counters = [witness[d] for d in combo]
            if all(_counter(t, m, conj([phi, Not(d)])) for m, d in zip(counters, combo)):
                return list(combo), counters
    return None


def check_convexity(t, var_bound: int = 4, disj_bound: int = 2, model_bound: int = 8,
                    samples: int = 40, seed: int = 0, candidates: Optional[Iterable[Formula]] = None
                    ) -> PropertyReport:
    bound = {"var_bound": var_bound, "disj_bound": disj_bound, "model_bound": model_bound, "samples": samples}
    cands = list(candidates) if candidates is not None else convexity_candidates(var_bound, model_bound, samples, seed)
    for phi in cands:
        hit = convexity_failure(t, phi, disj_bound, model_bound)
        if hit is not None:
            combo, counters = hit
            return PropertyReport(
                t.name, "convex", REFUTED,
                {"phi": phi, "disjuncts": combo, "counter_models": counters},
                bound, counterexample={"phi": phi, "disjuncts": combo},
            )
    return PropertyReport(t.name, "convex", HOLDS, {"antecedents": len(cands)}, bound)


# ---------------------------------------------------------------------------
# Stable infiniteness: the ray construction
# ---------------------------------------------------------------------------


class ConstructionRefused(LogicError):
    """The construction does not apply; ``evidence`` explains why."""

    def __init__(self, msg: str, evidence: dict):
        super().__init__(msg)
        self.evidence = evidence


def loop_pins_size(t, bound: int = 8) -> dict:
    """Evidence that f(x)=x is satisfiable only in a one-element model."""
    x = Var("x")
    fresh = FreshVars([x])
    y, z = fresh(SIGMA1), fresh(SIGMA1)
    loop = Eq(App(F, (x,)), x)
    small = sat_bounded(t, loop, 1)
    bigger = sat_bounded(t, conj([loop, distinct_formula([y, z])]), bound)
    return {"formula": loop, "size1_model": small.model, "larger_model_up_to": bound,
            "pinned": small.is_sat and not bigger.is_sat}


def check_stable_infiniteness_construction(i: int, interp: FiniteInterpretation, k: int,
                                           phi: Optional[Formula] = None, s=None) -> FiniteInterpretation:
    """Append a path c_1 -> ... -> c_k to a T_i-model.

    The old part keeps its f-table, so every QF formula over its variables
    keeps its truth value.  The last path vertex closes the path into a
    k-cycle when that cycle is allowed next to the existing ones; otherwise
    it points at a vertex on the longest existing cycle, which adds no cycle.
    """
    from .theories import FunctionalGraph, SOracle, cycle_lengths, membership_ti, ti_allowed

    s = s if s is not None else SOracle()
    if not membership_ti(i, s, interp):
        raise LogicError("input is not a model of the theory")
    if phi is not None and not evaluate(interp, phi):
        raise LogicError("input does not satisfy phi")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return interp
    g = FunctionalGraph.from_interp(interp)
    lengths = cycle_lengths(g)
    if i in (3, 4) and 1 in lengths:
        raise ConstructionRefused(
            "a loop forces a one-element model here; no element can be added",
            {"formula": Eq(App(F, (Var("x"),)), Var("x")), "reason": "loop forces size 1"},
        )
    dom = list(interp.domains[SIGMA1])
    table = dict(interp.functions["f"])
    base = max((e for e in dom if isinstance(e, int)), default=-1) + 1
    path = [base + j for j in range(k)]
    for a, b in zip(path, path[1:]):
        table[(a,)] = b
    if ti_allowed(i, s, lengths + (k,), len(dom) + k):
        table[(path[-1],)] = path[0]
    else:
        cyc = max(g.cycles(), key=len)
        table[(path[-1],)] = dom[cyc[0]]
    doms = dict(interp.domains)
    doms[SIGMA1] = tuple(dom + path)
    out = FiniteInterpretation(interp.signature, doms, {**interp.functions, "f": table},
                               dict(interp.predicates), dict(interp.assignment))
    if not membership_ti(i, s, out):
        raise AssertionError("ray construction left the theory")
    if phi is not None and not evaluate(out, phi):
        raise AssertionError("ray construction lost phi")
    return out


def check_stable_infiniteness(t, bounds: Bounds = Bounds(), corpus: Optional[Iterable[Formula]] = None
                              ) -> PropertyReport:
    """Grow models of sample formulas with the ray construction, or report the
    loop formula whose models cannot grow."""
    from .corpus import random_flat_conjunction

    if t.family != "ti":
        raise LogicError("the ray construction is defined for the cycle theories")
    x = Var("x")
    rng = random.Random(bounds.seed)
    forms = list(corpus) if corpus is not None else (
        [Eq(App(F, (x,)), x), cycle_formula(7, x), cycle_formula(3, x)]
        + [random_flat_conjunction(rng, n_vars=3) for _ in range(bounds.samples)]
    )
    grown = 0
    for phi in forms:
        m = t.find_model(phi)
        if m is None:
            continue
        for k in range(1, bounds.ray_max + 1):
            try:
                out = check_stable_infiniteness_construction(t.index, m, k, phi, t.config.s)
            except ConstructionRefused as exc:
                ev = loop_pins_size(t, bounds.model_bound)
                if not ev["pinned"]:
                    raise AssertionError("refusal without a pinned loop formula") from exc
                return PropertyReport(t.name, "stably-infinite", REFUTED, {**ev, "phi": phi},
                                      {"model_bound": bounds.model_bound}, counterexample=ev["formula"])
            if out.size() != m.size() + k or not t.membership(out):
                raise AssertionError("ray construction produced a wrong size")
            grown += 1
    return PropertyReport(t.name, "stably-infinite", CONSTRUCTED,
                          {"formulas": len(forms), "grown_models": grown},
                          {"ray_max": bounds.ray_max})


# ---------------------------------------------------------------------------
# Finite smoothness
# ---------------------------------------------------------------------------


def _grow_plain(interp: FiniteInterpretation, target: int) -> FiniteInterpretation:
    dom = list(interp.domains[SIGMA1])
    nxt = max((e for e in dom if isinstance(e, int)), default=-1) + 1
    while len(dom) < target:
        dom.append(nxt)
        nxt += 1
    doms = dict(interp.domains)
    doms[SIGMA1] = tuple(dom)
    return FiniteInterpretation(interp.signature, doms, dict(interp.functions), dict(interp.predicates),
                                dict(interp.assignment))


def check_finite_smoothness(t, interp, phi: Formula, max_size: int = 8) -> PropertyReport:
    """Grow a model of phi one element at a time up to ``max_size``,
    re-checking membership and phi at each size."""
    from .star import StarInterpretation, grow_star, is_star, transport
    from .witness import t2n_grow

    require_qf(phi)
    sizes = []
    if isinstance(interp, StarInterpretation):
        cur = interp
        if not is_star(cur) or not evaluate(cur.to_interpretation(), phi):
            raise LogicError("input is not a star model of phi")
        cases = []
        while cur.size < max_size:
            nxt, case = grow_star(cur)
            nxt = nxt.with_assignment({v: transport(cur, nxt, val) for v, val in cur.assignment.items()})
            if not is_star(nxt) or not evaluate(nxt.to_interpretation(), phi):
                return PropertyReport(t.name, "finitely-smooth", REFUTED, {"phi": phi, "case": case},
                                      {"max_size": max_size}, counterexample=phi)
            cases.append(case)
            cur = nxt
            sizes.append(cur.size)
        return PropertyReport(t.name, "finitely-smooth", CONSTRUCTED, {"sizes": sizes, "cases": cases},
                              {"max_size": max_size})
    if not t.membership(interp) or not evaluate(interp, phi):
        raise LogicError("input is not a model of phi in the theory")
    grow = t2n_grow if t.family == "t2n" else _grow_plain
    if t.family not in ("t2n", "teq"):
        raise LogicError(f"no finite growth construction for {t.name}")
    for target in range(interp.size() + 1, max_size + 1):
        out = grow(interp, target)
        if out.size() != target or not t.membership(out) or not evaluate(out, phi):
            return PropertyReport(t.name, "finitely-smooth", REFUTED, {"phi": phi, "target": target},
                                  {"max_size": max_size}, counterexample=phi)
        sizes.append(target)
    return PropertyReport(t.name, "finitely-smooth", CONSTRUCTED, {"sizes": sizes}, {"max_size": max_size})


def check_not_smooth_star(stars: Sequence) -> PropertyReport:
    """Distinguishing property across star levels: prefix-distinct ρ, τ give
    different f-values at every number past their first difference."""
    from .star import distinguishing_failures

    if not stars or len(stars[0].rho) < 2:
        raise ValueError("need a family with at least two functions")
    levels = []
    failures = []
    for st in stars:
        failures += [(st.n,) + f for f in distinguishing_failures(st)]
        layer = {m: len({st.f(r, m) for r in st.rho}) for m in range(st.n - 1)}
        levels.append({"n": st.n, "distinct_values": layer})
    verdict = REFUTED if failures else CONSTRUCTED
    return PropertyReport("star", "distinguishing", verdict, {"levels": levels},
                          {"levels": [s.n for s in stars]}, counterexample=failures or None)


# ---------------------------------------------------------------------------
# Oracle-swap experiments
# ---------------------------------------------------------------------------


def oracle_swap(t) -> Optional[dict]:
    """A formula whose decide (or mm) answer changes when the injected oracle
    changes, or None when the theory has no oracle dependence."""
    from .minimal_model import s_reduction_formula
    from .theories import SOracle, TheoryConfig, make_theory, table_oracle

    if t.family == "ti":
        x, y = Var("x"), Var("y")
        alt_s = SOracle(frozenset({11}) if 7 in t.config.s else frozenset({7}))
        alt = make_theory(t.name.replace("adds(", "adds-").rstrip(")"),
                          TheoryConfig(alt_s, t.config.h, t.config.pred_cut, t.config.star_n))
        probe = conj([cycle_formula(7, x), Eq(App(F, (y,)), y)])
        mm_probe = s_reduction_formula(7)
        return {
            "oracle": "S",
            "decide_probe": probe,
            "decide": (t.decide(probe), alt.decide(probe)),
            "mm_probe": mm_probe,
            "mm": (sorted(str(v) for v in t.mm(mm_probe)), sorted(str(v) for v in alt.mm(mm_probe))),
        }
    if t.family == "th":
        from .logic import Pred

        h = t.config.h
        alt_h = table_oracle({1: not h(1)}, name="flipped")
        alt = make_theory("th", TheoryConfig(t.config.s, alt_h, t.config.pred_cut, t.config.star_n))
        probe = Pred(t.signature.predicate("P1"), ())
        return {"oracle": "h", "decide_probe": probe, "decide": (t.decide(probe), alt.decide(probe))}
    return None


def _decidable(t) -> tuple[bool, dict]:
    if t.decide is None:
        return False, {"reason": "no decision procedure"}
    if "decide" not in t.oracle_dependent:
        return True, {"reason": "procedure without oracle calls"}
    sw = oracle_swap(t)
    changed = sw is not None and sw["decide"][0] != sw["decide"][1]
    return not changed, {"reason": "answer follows the oracle" if changed else "oracle swap had no effect",
                         "swap": sw}


def _smooth_probe(t, bound: int) -> tuple[bool, dict]:
    """x=x has a one-element model; can the theory host two elements at all?"""
    x = Var("x")
    fresh = FreshVars([x])
    two = distinct_formula([fresh(SIGMA1), fresh(SIGMA1)])
    if t.family == "ti":
        rep = check_stable_infiniteness(t, Bounds(samples=4))
        return rep.verdict == CONSTRUCTED, {"ray": rep.verdict}
    ok = sat_bounded(t, two, bound).is_sat
    return ok, {"two_elements": ok}


def _witness_ok(t, corpus: Sequence[Formula], bound: int) -> tuple[bool, dict]:
    from .witness import verify_strong_witness

    if t.strong_witness is None:
        return False, {"reason": "no strong witness"}
    rep = verify_strong_witness(t, t.strong_witness, corpus, bound, extra_vars=1, equivalence=False)
    return rep.ok, {"checked": rep.checked, "ok": rep.ok}


def _mm_computable(t) -> tuple[bool, dict]:
    if t.mm is None:
        return False, {"reason": "no minimal model function"}
    if "mm" not in t.oracle_dependent:
        return True, {"reason": "mm without oracle calls"}
    sw = oracle_swap(t)
    changed = sw is not None and sw["mm"][0] != sw["mm"][1]
    return not changed, {"reason": "mm follows the oracle" if changed else "oracle swap had no effect", "swap": sw}


def _witness_corpus() -> list[Formula]:
    x, y = Var("x"), Var("y")
    fx = App(F, (x,))
    return [Eq(fx, x), Not(Eq(fx, x)), Eq(fx, y), conj([Eq(fx, y), Not(Eq(x, y))])]


# ---------------------------------------------------------------------------
# Table and Venn reproduction
# ---------------------------------------------------------------------------


TABLE1_THEORIES = ("t1", "t2", "t3", "t4", "adds-t1", "adds-t2", "adds-t3", "adds-t4")
TABLE1_COLUMNS = ("one-sorted", "SI", "convex")


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple  # (name, {column: bool}, evidence)

    def grid(self) -> dict:
        return {name: tuple(cells[c] for c in self.columns) for name, cells, _ in self.rows}

    def to_markdown(self) -> str:
        head = "| Theory | " + " | ".join(self.columns) + " |"
        sep = "|---" * (len(self.columns) + 1) + "|"
        lines = [head, sep]
        for name, cells, _ in self.rows:
            lines.append(f"| {name} | " + " | ".join("✓" if cells[c] else "✗" for c in self.columns) + " |")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"columns": list(self.columns),
                "rows": [{"theory": n, "cells": dict(c), "evidence": _jsonable(e)} for n, c, e in self.rows]}


def _display(name: str) -> str:
    return f"adds(T{name[-1]})" if name.startswith("adds") else name.upper()


def _parallel_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def reproduce_table1(bounds: Bounds = Bounds(), config=None, threads: int = 1) -> Table:
    from .minimal_model import decide_s_membership
    from .theories import SOracle, TheoryConfig, make_theory

    cfg = config or TheoryConfig(SOracle())

    def row(name):
        t = make_theory(name, cfg)
        si = check_stable_infiniteness(t, bounds)
        cv = check_convexity(t, bounds.var_bound, bounds.disj_bound, bounds.model_bound, bounds.samples, bounds.seed)
        sfw, sfw_ev = _witness_ok(t, _witness_corpus(), bounds.model_bound)
        cells = {"one-sorted": t.one_sorted, "SI": si.verdict == CONSTRUCTED, "convex": cv.verdict == HOLDS}
        evidence = {"SI": si.to_json(), "convex": cv.to_json(), "strong_witness": sfw_ev}
        if t.one_sorted:
            # the minimal model of the reduction formula reveals S membership
            evidence["mm_reveals_S"] = {n: decide_s_membership(t.index, t.mm, n) for n in (7, 17)}
        return (_display(name), cells, evidence)

    return Table(TABLE1_COLUMNS, tuple(_parallel_map(row, TABLE1_THEORIES, threads)))


VENN_THEORIES = ("teq", "teq1", "th", "t1", "t2")
VENN_SETS = ("strongly-polite", "decidable", "shiny")


def reproduce_venn(bounds: Bounds = Bounds(), config=None, threads: int = 1) -> dict:
    """Circle memberships per theory, each decided by bounded evidence."""
    from .theories import SOracle, TheoryConfig, make_theory

    cfg = config or TheoryConfig(SOracle())

    def place(name):
        t = make_theory(name, cfg)
        smooth, smooth_ev = _smooth_probe(t, bounds.model_bound)
        dec, dec_ev = _decidable(t)
        wit, wit_ev = (_witness_ok(t, _witness_corpus() if t.family == "ti" else [Eq(Var("x"), Var("y"))],
                                   bounds.model_bound) if smooth else (False, {"reason": "not smooth"}))
        mm_ok, mm_ev = _mm_computable(t)
        regions = []
        if smooth and wit:
            regions.append("strongly-polite")
        if dec:
            regions.append("decidable")
        if smooth and mm_ok:
            regions.append("shiny")
        return {"regions": regions,
                "evidence": _jsonable({"smooth": smooth_ev, "decidable": dec_ev,
                                       "witness": wit_ev, "mm": mm_ev})}

    return dict(zip(VENN_THEORIES, _parallel_map(place, VENN_THEORIES, threads)))
