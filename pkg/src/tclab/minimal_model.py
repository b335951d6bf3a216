"""Minimal model functions: brute force, from a decision procedure, and the
reverse direction (deciding satisfiability from minimal models)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .finite_model import CardinalityVector, bound_hint, brute_mm, extremal_elements
from .logic import (
    Formula,
    FreshVars,
    LogicError,
    Or,
    Sort,
    Var,
    arrangement_formula,
    conj,
    cycle_formula,
    distinct_formula,
    dnf_cubes,
    enumerate_arrangements,
    free_vars,
    iterate,
    require_qf,
    F,
    Eq,
)


class OracleError(RuntimeError):
    """A backing procedure broke its contract."""


@dataclass(frozen=True)
class MmCapability:
    fn: Callable[[Formula], frozenset]
    provenance: str = "brute"

    def __call__(self, phi: Formula) -> frozenset:
        require_qf(phi)
        return frozenset(self.fn(phi))


def brute_mm_capability(t, bound=None) -> MmCapability:
    """brute_mm at a fixed bound, or at `bound_hint` per formula."""

    def fn(phi: Formula) -> frozenset:
        return brute_mm(t, phi, bound if bound is not None else bound_hint(t, phi))

    return MmCapability(fn, "brute")


def mm_from_decision(t, phi: Formula) -> frozenset:
    """Minimal model vectors from the decide capability and a strong witness.

    For each disjunct ψ of wit(φ), the arrangements E of vars(ψ) with
    ψ ∧ δ_E satisfiable give the vectors σ ↦ |V_σ/E|; the result keeps the
    minimal ones.  Arrangements are visited by increasing block count, and
    those whose vector dominates a vector already found are skipped.

    Theories whose decision procedure is itself a search over arrangements
    (``arrangement_models``) hand over that search directly: each model it
    yields has domains exactly the classes of a satisfiable arrangement.
    """
    if t.decide is None:
        raise LogicError(f"{t.name} has no decide capability")
    if t.strong_witness is None:
        raise LogicError(f"{t.name} has no strong witness")
    require_qf(phi)
    sorts = t.signature.sorts
    w = t.strong_witness(phi)
    found: list[tuple] = []
    def dominated(vec: tuple) -> bool:
        return any(all(a <= b for a, b in zip(f, vec)) for f in found)

    search = getattr(t, "arrangement_models", None)
    for cube in dnf_cubes(w):
        psi = conj(cube)
        if search is not None:
            vs = free_vars(psi)
            for m in search(psi, prune=dominated):
                vec = tuple(max(1, len({m.assignment[v] for v in vs if v.sort == s})) for s in sorts)
                if m.sizes() != vec:
                    raise OracleError("arrangement search returned a model larger than its arrangement")
                if not dominated(vec):
                    found.append(vec)
            continue
        if not t.decide(psi):
            continue
        vs = free_vars(psi)
        for delta in enumerate_arrangements(vs):
            vec = tuple(max(1, delta.count(s)) for s in sorts)
            if dominated(vec):
                continue
            if t.decide(conj([psi, arrangement_formula(delta)])):
                found.append(vec)
    return frozenset(CardinalityVector.of(sorts, v) for v in extremal_elements(found, "minimal"))


def from_decision_capability(t) -> MmCapability:
    return MmCapability(lambda phi: mm_from_decision(t, phi), "from_decision")


def mm_single_sort(mm_set, sort: Optional[Sort | str] = None) -> int:
    """min over the set of the chosen sort's entry (first sort by default)."""
    vecs = list(mm_set)
    if not vecs:
        raise ValueError("empty minimal model set")
    key = sort if sort is not None else sorted(vecs[0].sorts)[0]
    return min(v[key] for v in vecs)


def decide_from_mm(t, phi: Formula, mm: Optional[Callable[[Formula], frozenset]] = None,
                   sort: Optional[Sort] = None) -> bool:
    """Satisfiability via minimal models of φ ∨ ≠(x_1..x_{k+1}).

    k is the minimum of mm(φ) on the chosen sort (the lexicographically first
    one by default).  An empty mm(φ) is read as k = 1.
    """
    require_qf(phi)
    mm = mm or t.mm
    if mm is None:
        raise LogicError(f"{t.name} has no minimal model function")
    sort = sort or min(t.signature.sorts)
    first = mm(phi)
    k = mm_single_sort(first, sort.name) if first else 1
    fresh = FreshVars(phi)
    xs = [fresh(sort) for _ in range(k + 1)]
    big = Or((phi, distinct_formula(xs)))
    second = mm(big)
    if not second:
        raise OracleError("minimal model function returned nothing for a satisfiable disjunction")
    return mm_single_sort(second, sort.name) == k


def s_reduction_formula(n: int) -> Formula:
    """cycle_n(x) ∧ f^4(y) = y."""
    x, y = Var("x"), Var("y")
    return conj([cycle_formula(n, x), Eq(iterate(F, 4, y), y)])


def decide_s_membership(i: int, mm: Callable[[Formula], frozenset], n: int) -> bool:
    """n ∈ S iff the minimal model of cycle_n(x) ∧ f^4(y)=y has n+4 elements."""
    from .theories import is_prime

    if not is_prime(n) or n < 7:
        raise ValueError(f"n must be a prime >= 7, got {n}")
    return mm_single_sort(mm(s_reduction_formula(n))) == n + 4

