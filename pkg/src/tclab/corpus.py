"""Seeded random formula generators for the oracle-equivalence suites."""
from __future__ import annotations

import random
from typing import Optional, Sequence

from .logic import (
    F,
    P,
    SIGMA1,
    SIGMA2,
    And,
    App,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Pred,
    Signature,
    Sort,
    Var,
    conj,
    iterate,
)


def variables(k: int, sort: Sort = SIGMA1, prefix: str = "x") -> list[Var]:
    return [Var(f"{prefix}{i}", sort) for i in range(k)]


def _boolean(rng: random.Random, atoms: list[Formula], n_literals: int) -> Formula:
    """A random and/or/not tree with ``n_literals`` leaves drawn from ``atoms``."""
    leaves = []
    for _ in range(n_literals):
        a = rng.choice(atoms)
        leaves.append(Not(a) if rng.random() < 0.35 else a)
    while len(leaves) > 1:
        k = rng.randint(2, min(3, len(leaves)))
        i = rng.randrange(len(leaves) - k + 1)
        group = tuple(leaves[i:i + k])
        node = And(group) if rng.random() < 0.6 else Or(group)
        if rng.random() < 0.1:
            node = Not(node)
        leaves[i:i + k] = [node]
    return leaves[0]


def unary_atoms(vs: Sequence[Var], depth: int) -> list[Formula]:
    terms = [iterate(F, d, v) for v in vs for d in range(depth + 1)]
    return [Eq(a, b) for i, a in enumerate(terms) for b in terms[i + 1:]]


CYCLE_LENGTHS = (1, 2, 3, 4, 6, 7)


def random_sigma_f_formula(rng: random.Random, max_vars: int = 4, max_literals: int = 5,
                           depth: int = 3, two_sorted: bool = False, cycles: bool = True) -> Formula:
    """QF formula over Σ_f with at most ``max_vars`` variables and
    ``max_literals`` literal occurrences; f-depth at most ``depth``.  With
    ``cycles`` some leaves are cycle formulas (counted as one literal)."""
    from .logic import cycle_formula

    k = rng.randint(1, max_vars)
    vs = variables(k)
    atoms = unary_atoms(vs, depth)
    if cycles:
        cyc = [cycle_formula(n, v) for v in vs for n in CYCLE_LENGTHS]
        atoms = atoms + cyc * max(1, len(atoms) // (3 * len(cyc)))
    if two_sorted:
        us = variables(rng.randint(1, 2), SIGMA2, "u")
        atoms += [Eq(a, b) for i, a in enumerate(us) for b in us[i + 1:]] or [Eq(us[0], us[0])]
    return _boolean(rng, atoms, rng.randint(1, max_literals))


def random_flat_conjunction(rng: random.Random, n_vars: int = 4, max_literals: int = 5) -> Formula:
    """Conjunction of flat Σ_f literals: f(v)=w, v=w, v≠w."""
    vs = variables(n_vars)
    lits = []
    for _ in range(rng.randint(0, max_literals)):
        r = rng.random()
        a, b = rng.choice(vs), rng.choice(vs)
        if r < 0.5:
            lits.append(Eq(App(F, (a,)), b))
        elif r < 0.7:
            lits.append(Eq(a, b))
        else:
            lits.append(Not(Eq(a, b)))
    return conj(lits)


def random_empty_formula(rng: random.Random, sorts: Sequence[Sort] = (SIGMA1, SIGMA2),
                         max_vars: int = 4, max_literals: int = 5) -> Formula:
    """Equality formula over the empty signature with sorts drawn from ``sorts``."""
    k = rng.randint(1, max_vars)
    vs = [Var(f"v{i}", rng.choice(list(sorts))) for i in range(k)]
    atoms = [Eq(a, b) for i, a in enumerate(vs) for b in vs[i:] if a.sort == b.sort]
    return _boolean(rng, atoms, rng.randint(1, max_literals))


def random_t2n_formula(rng: random.Random, max_vars: int = 3, max_literals: int = 4) -> Formula:
    vs = variables(rng.randint(1, max_vars))
    atoms = [Pred(P, (v,)) for v in vs] + [Eq(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]]
    return _boolean(rng, atoms, rng.randint(1, max_literals))


def random_t2n_conjunction(rng: random.Random, max_vars: int = 3, max_literals: int = 4) -> Formula:
    vs = variables(rng.randint(1, max_vars))
    lits = []
    for _ in range(rng.randint(1, max_literals)):
        if rng.random() < 0.5 or len(vs) == 1:
            a = Pred(P, (rng.choice(vs),))
        else:
            a, b = rng.sample(vs, 2)
            a = Eq(a, b)
        lits.append(Not(a) if rng.random() < 0.4 else a)
    return conj(lits)


def _random_term(rng: random.Random, sig: Signature, sort: Sort, pool: dict, depth: int):
    fns = [f for f in sig.functions if f.result == sort]
    if depth > 0 and fns and rng.random() < 0.5:
        fn = rng.choice(fns)
        return App(fn, tuple(_random_term(rng, sig, s, pool, depth - 1) for s in fn.args))
    return rng.choice(pool[sort])


def random_formula(rng: random.Random, sig: Signature, depth: int = 3, quantifiers: bool = True) -> Formula:
    """Arbitrary well-sorted formula over a finite signature (parser corpus)."""
    pool = {s: [Var(n, s) for n in ("x", "y", "z", "_w0")] for s in sig.sorts}

    def atom() -> Formula:
        r = rng.random()
        if r < 0.1:
            return Const(rng.random() < 0.5)
        if sig.predicates and r < 0.4:
            p = rng.choice(sig.predicates)
            return Pred(p, tuple(_random_term(rng, sig, s, pool, 2) for s in p.args))
        s = rng.choice(sig.sorts)
        return Eq(_random_term(rng, sig, s, pool, 3), _random_term(rng, sig, s, pool, 3))

    def rec(d: int) -> Formula:
        if d == 0 or rng.random() < 0.3:
            return atom()
        r = rng.random()
        if r < 0.2:
            return Not(rec(d - 1))
        if r < 0.45:
            return And(tuple(rec(d - 1) for _ in range(rng.randint(0, 3))))
        if r < 0.7:
            return Or(tuple(rec(d - 1) for _ in range(rng.randint(0, 3))))
        if r < 0.8 or not quantifiers:
            return Implies(rec(d - 1), rec(d - 1))
        v = rng.choice(pool[rng.choice(sig.sorts)])
        return (Forall if r < 0.9 else Exists)(v, rec(d - 1))

    return rec(depth)


def corpus(kind: str, n: int, seed: int = 0, **kw) -> list[Formula]:
    """``n`` formulas of one generator kind from a single seeded stream."""
    rng = random.Random(seed)
    gens = {
        "sigma-f": random_sigma_f_formula,
        "flat": random_flat_conjunction,
        "empty": random_empty_formula,
        "t2n": random_t2n_formula,
        "t2n-conj": random_t2n_conjunction,
    }
    if kind == "any":
        from .logic import SIGMA_F2

        sig: Optional[Signature] = kw.pop("signature", None) or SIGMA_F2
        return [random_formula(rng, sig, **kw) for _ in range(n)]
    if kind not in gens:
        raise ValueError(f"unknown corpus kind {kind!r}; choose from {', '.join(sorted(gens))}, any")
    return [gens[kind](rng, **kw) for _ in range(n)]
