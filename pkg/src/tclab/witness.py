"""Witness functions and the model constructions behind them."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .finite_model import models, sat_bounded
from .flat import FlatConjunction, flatten, is_flat_literal
from .logic import (
    SIGMA1,
    TRUE,
    And,
    App,
    Arrangement,
    Eq,
    FiniteInterpretation,
    Formula,
    FreshVars,
    LogicError,
    Not,
    Signature,
    Sort,
    Var,
    arrangement_formula,
    compile_formula,
    conj,
    conjuncts,
    disj,
    distinct_formula,
    dnf_cubes,
    enumerate_arrangements,
    evaluate,
    free_vars,
    require_qf,
)


@dataclass(frozen=True)
class WitnessFn:
    """A map on QF formulas with its claimed strength.

    ``strength`` is "plain", "strong" or "pre-witness"; ``additive`` marks
    S-additive witnesses.
    """

    fn: Callable[[Formula], Formula]
    additive: bool = False
    strength: str = "strong"
    name: str = "wit"
    diagnostics: tuple = field(default=(), compare=False)

    def __call__(self, phi: Formula) -> Formula:
        require_qf(phi)
        out = self.fn(phi)
        require_qf(out)
        return out


def identity_witness(name: str = "identity") -> WitnessFn:
    return WitnessFn(lambda phi: phi, strength="plain", name=name)


# ---------------------------------------------------------------------------
# T_i witness
# ---------------------------------------------------------------------------


def wit_ti(signature: Signature) -> Callable[[FlatConjunction, FreshVars], Formula]:
    """The flat-conjunction witness: φ itself, plus ``w=w`` for each sort
    without variables (on Σ_f this is the single σ1 case)."""

    def fn(flat: FlatConjunction, fresh: FreshVars) -> Formula:
        phi = flat.formula()
        present = {v.sort for v in flat.variables}
        pads = [fresh(s) for s in signature.sorts if s not in present]
        return conj([phi] + [Eq(w, w) for w in pads]) if pads else phi

    return fn


def dnf_lift(wit_on_flat: Callable[[FlatConjunction, FreshVars], Formula], name: str = "wit") -> WitnessFn:
    """Apply a flat-conjunction witness cube by cube over the syntactic DNF.

    Fresh variables come from one counter per call, so cubes never share them.
    """

    def fn(phi: Formula) -> Formula:
        fresh = FreshVars(phi)
        parts = [wit_on_flat(flatten(conj(cube), fresh), fresh) for cube in dnf_cubes(phi)]
        return disj(parts)

    return WitnessFn(fn, name=name)


def _flat_graph(witphi: FlatConjunction | Formula):
    lits = witphi.all_literals if isinstance(witphi, FlatConjunction) else conjuncts(witphi)
    defs = []
    for lit in lits:
        if not is_flat_literal(lit):
            raise LogicError(f"not a flat literal: {lit!r}")
        if isinstance(lit, Eq) and isinstance(lit.left, App):
            defs.append((lit.left.args[0], lit.right))
    return defs


def complete_to_witness_model(i: int, s, witphi: FlatConjunction | Formula, delta: Arrangement,
                              seed: FiniteInterpretation) -> FiniteInterpretation:
    """T_i-model on exactly V/E that satisfies witphi ∧ δ.

    Vertices are the classes of δ.  Edges of defined vertices (G_1) come from
    the seed; the others (G_2) are closed by `complete_graph`.
    """
    from .theories import complete_graph, membership_ti

    formula = witphi.formula() if isinstance(witphi, FlatConjunction) else witphi
    dphi = arrangement_formula(delta)
    if not membership_ti(i, s, seed):
        raise LogicError("seed is not a model of the theory")
    missing = [v for v in free_vars(formula) if v not in delta.variables]
    if missing:
        raise LogicError(f"arrangement misses variables {[v.name for v in missing]}")
    unassigned = [v.name for v in delta.variables if v not in seed.assignment]
    if unassigned:
        raise LogicError(f"seed assigns no value to {unassigned}")
    if not evaluate(seed, conj([formula, dphi])):
        raise LogicError("seed does not satisfy witphi and the arrangement")
    defs = _flat_graph(witphi)
    cls = delta.class_map()
    sorts = seed.signature.sorts
    index: dict[Sort, dict[int, int]] = {s_: {} for s_ in sorts}
    for b, block in enumerate(delta.blocks):
        srt = block[0].sort
        index[srt][b] = len(index[srt])
    n1 = len(index[SIGMA1])
    if n1 == 0:
        raise LogicError("the arrangement has no sigma1 class")
    rep = {index[SIGMA1][cls[v]]: seed.assignment[v] for v in delta.variables if v.sort == SIGMA1}
    back = {val: k for k, val in rep.items()}
    f = seed.unary("f")
    edges = {}
    for a, _ in defs:
        k = index[SIGMA1][cls[a]]
        edges[k] = back[f[rep[k]]]
    succ = complete_graph(edges, n1)
    doms = {srt: tuple(range(len(index[srt]))) for srt in sorts}
    assignment = {v: index[v.sort][cls[v]] for v in delta.variables}
    out = FiniteInterpretation(seed.signature, doms, {"f": {(k,): succ[k] for k in range(n1)}}, {}, assignment)
    if not membership_ti(i, s, out):
        raise AssertionError("completion left the theory")
    if not evaluate(out, conj([formula, dphi])):
        raise AssertionError("completion lost the formula")
    return out


# ---------------------------------------------------------------------------
# Additive witnesses
# ---------------------------------------------------------------------------


def wit_prime(t, wit: WitnessFn) -> WitnessFn:
    """φ ↦ φ ∧ wit(φ), as a raw binary conjunction."""

    def fn(phi: Formula) -> Formula:
        return And((phi, wit(phi)))

    return WitnessFn(fn, strength=wit.strength, name=f"{wit.name}'")


def in_prime_image(wit_p: WitnessFn, phi: Formula) -> bool:
    """φ = ψ ∧ χ with wit′(ψ) = φ."""
    return isinstance(phi, And) and len(phi.args) == 2 and wit_p(phi.args[0]) == phi


def _is_flat_var_conj(psi: Formula, sorts: Iterable[Sort]) -> bool:
    allowed = set(sorts)
    if psi == TRUE:
        return True
    for lit in conjuncts(psi):
        atom = lit.arg if isinstance(lit, Not) else lit
        if not isinstance(atom, Eq) or not (isinstance(atom.left, Var) and isinstance(atom.right, Var)):
            return False
        if atom.left.sort not in allowed:
            return False
    return True


def wit_double_prime(t, wit_p: WitnessFn, sort_set: Optional[Iterable[Sort]] = None) -> WitnessFn:
    """χ ↦ χ when χ = wit′(φ) ∧ ψ (ψ a conjunction of variable (dis)equalities
    over the sorts in ``sort_set``), otherwise wit′(χ)."""
    sorts = tuple(sort_set) if sort_set is not None else t.signature.sorts
    diags = ()
    if not t.signature.is_algebraic:
        diags = ("signature has predicates: strength of the additive witness is not asserted",)
        warnings.warn(diags[0], stacklevel=2)

    def shaped(chi: Formula) -> bool:
        if in_prime_image(wit_p, chi):
            return True
        if isinstance(chi, And) and len(chi.args) == 2:
            head, psi = chi.args
            return _is_flat_var_conj(psi, sorts) and shaped(head)
        return False

    def fn(chi: Formula) -> Formula:
        return chi if shaped(chi) else wit_p(chi)

    strength = wit_p.strength if t.signature.is_algebraic else "plain"
    return WitnessFn(fn, additive=True, strength=strength, name=f"{wit_p.name}'", diagnostics=diags)


# ---------------------------------------------------------------------------
# Shiny theories
# ---------------------------------------------------------------------------


def _padding(ws: Sequence[Var]) -> Formula:
    if len(ws) == 1:
        return Eq(ws[0], ws[0])
    return distinct_formula(ws)


def shiny_witness(t, bound=None) -> WitnessFn:
    """Witness for a theory with decide and mm capabilities.

    wit(φ) = ⋁_E δ_E ∧ φ ∧ pad_E over the arrangements E of vars(φ) with
    φ ∧ δ_E satisfiable; pad_E names, per sort, as many distinct fresh
    variables as the minimal model of φ ∧ δ_E has elements.
    """
    if t.mm is None or t.decide is None:
        raise LogicError(f"{t.name} lacks the decide or mm capability")
    sorts = t.signature.sorts

    def fn(phi: Formula) -> Formula:
        fresh = FreshVars(phi)
        vs = free_vars(phi)
        disjuncts = []
        pads: dict[Sort, list[Var]] = {s: [] for s in sorts}

        def pad_vars(s: Sort, n: int) -> list[Var]:
            while len(pads[s]) < n:
                pads[s].append(fresh(s))
            return pads[s][:n]

        for delta in enumerate_arrangements(vs):
            body = conj([arrangement_formula(delta), phi])
            mm = t.mm(body)
            if not mm:
                continue
            best = min(mm, key=lambda v: tuple(v.values))
            padding = [_padding(pad_vars(s, max(1, best[s]))) for s in sorts]
            disjuncts.append(conj([arrangement_formula(delta), phi] + padding))
        return disj(disjuncts)

    return WitnessFn(fn, name=f"shiny_{t.name}")


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class WitnessReport:
    theory: str
    witness: str
    checked: int = 0
    satisfiable: int = 0
    failures: list = field(default_factory=list)
    equivalence_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.equivalence_failures

    def to_json(self) -> dict:
        from .textio import print_formula

        return {
            "theory": self.theory,
            "witness": self.witness,
            "checked": self.checked,
            "satisfiable": self.satisfiable,
            "ok": self.ok,
            "failures": [{"phi": print_formula(p), "arrangement": str(d)} for p, d in self.failures],
            "equivalence_failures": [print_formula(p) for p in self.equivalence_failures],
        }


def exact_model(t, phi: Formula, delta: Arrangement) -> Optional[FiniteInterpretation]:
    """A model of φ ∧ δ whose domains are exactly the values of δ's variables."""
    sig = t.finite_signature(phi) if hasattr(t, "finite_signature") else t.signature
    counts = tuple(delta.count(s) for s in sig.sorts)
    if any(c == 0 for c in counts):
        return None
    body = conj([phi, arrangement_formula(delta)])
    for m in models(t, body, counts, variables=delta.variables):
        if m.sizes() == counts:
            return m
    return None


def verify_strong_witness(t, wit: WitnessFn, corpus: Iterable[Formula], bound,
                          extra_vars: int = 0, equivalence: bool = True) -> WitnessReport:
    """Check the strong-witness clause on every (φ, δ) and, optionally, that
    φ and ∃w wit(φ) agree on the models of φ's variables within ``bound``."""
    report = WitnessReport(t.name, wit.name)
    for phi in corpus:
        w = wit(phi)
        vs = list(free_vars(w))
        fresh = FreshVars(w)
        vs += [fresh(t.signature.default_sort) for _ in range(extra_vars)]
        for delta in enumerate_arrangements(vs):
            report.checked += 1
            if exact_model(t, w, delta) is not None:
                report.satisfiable += 1
                continue
            if sat_bounded(t, conj([w, arrangement_formula(delta)]), bound).is_sat:
                report.satisfiable += 1
                report.failures.append((phi, delta))
        if equivalence and not _equivalent_at_bound(t, phi, w, bound):
            report.equivalence_failures.append(phi)
    return report


def _equivalent_at_bound(t, phi: Formula, w: Formula, bound) -> bool:
    # every model of φ extends to one of wit(φ), and every model of wit(φ) satisfies φ
    ev_phi = compile_formula(phi)
    for m in models(t, w, bound):
        if not ev_phi(m.assignment, m.functions, m.predicates):
            return False
    base = list(free_vars(phi))
    ev_w = compile_formula(w)
    extra = [v for v in free_vars(w) if v not in set(base)]
    for m in models(t, phi, bound):
        found = False
        doms = [m.domains[v.sort] for v in extra]
        for vals in itertools.product(*doms):
            a = dict(m.assignment)
            a.update(zip(extra, vals))
            if ev_w(a, m.functions, m.predicates):
                found = True
                break
        if not found:
            return False
    return True


# ---------------------------------------------------------------------------
# T_2n constructions
# ---------------------------------------------------------------------------


def t2n_grow(interp: FiniteInterpretation, target_size: int) -> FiniteInterpretation:
    """Adjoin fresh elements outside P until the domain has ``target_size`` elements."""
    dom = list(interp.domains[SIGMA1])
    if target_size < len(dom):
        raise ValueError(f"target {target_size} is below the current size {len(dom)}")
    nxt = max((e for e in dom if isinstance(e, int)), default=-1) + 1
    while len(dom) < target_size:
        while nxt in dom:
            nxt += 1
        dom.append(nxt)
        nxt += 1
    return FiniteInterpretation(interp.signature, {SIGMA1: tuple(dom)}, dict(interp.functions),
                                dict(interp.predicates), dict(interp.assignment))


def t2n_shrink(interp: FiniteInterpretation, phi: Formula) -> FiniteInterpretation:
    """Restrict to X ∪ Y: X the values of φ's variables, Y as many non-P
    elements as X has P elements (outside X where possible)."""
    from .theories import t2n_member

    require_qf(phi)
    if not evaluate(interp, phi):
        raise LogicError("the interpretation does not satisfy phi")
    p = {e for (e,) in interp.predicates.get("P", frozenset())}
    dom = interp.domains[SIGMA1]
    xs = {interp.assignment[v] for v in free_vars(phi)}
    need = len(xs & p)
    outside = [e for e in dom if e not in p and e not in xs]
    inside = [e for e in dom if e not in p and e in xs]
    ys = (outside + inside)[:need]
    keep = xs | set(ys)
    if not keep:
        keep = {next(e for e in dom if e not in p)}
    new_dom = tuple(e for e in dom if e in keep)
    preds = {"P": frozenset((e,) for e in new_dom if e in p)}
    assignment = {v: val for v, val in interp.assignment.items() if val in keep}
    out = FiniteInterpretation(interp.signature, {SIGMA1: new_dom}, {}, preds, assignment)
    if not t2n_member(out) or not evaluate(out, phi):
        raise AssertionError("shrink left the theory or lost phi")
    return out
