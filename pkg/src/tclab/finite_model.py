"""Brute-force ground truth: bounded structure enumeration and model search.

Two search strategies back `sat_bounded` and `brute_mm`:

* labeled enumeration of every structure up to the bound (`enumerate_structures`)
  followed by every variable assignment;
* generated search, which builds only the part of a structure reachable from
  the variables (elements labeled in discovery order, so each pointed
  structure appears exactly once) and prunes with three-valued evaluation of
  the query.  It is exhaustive for theories closed under the substructure
  generated by the variables.  For function-free signatures it also adds
  unnamed padding elements, enumerated up to isomorphism by predicate type.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .logic import (
    App,
    FiniteInterpretation,
    Formula,
    LogicError,
    Or,
    Signature,
    Sort,
    Var,
    compile_formula,
    compile_partial,
    dnf_cubes,
    enumerate_arrangements,
    free_vars,
    is_quantifier_free,
    literal_terms,
    subterms,
    symbols_of,
)

ALEPH0 = math.inf


@dataclass(frozen=True, order=True)
class CardinalityVector:
    """Per-sort cardinalities; values are positive ints or ALEPH0."""

    sorts: tuple[str, ...]
    values: tuple

    def __post_init__(self):
        if len(self.sorts) != len(self.values):
            raise ValueError("one value per sort required")
        for v in self.values:
            if not (v == ALEPH0 or (isinstance(v, int) and v >= 0)):
                raise ValueError(f"bad cardinality {v!r}")

    @classmethod
    def of(cls, sorts: Iterable[Sort | str], values: Iterable) -> "CardinalityVector":
        names = tuple(s.name if isinstance(s, Sort) else s for s in sorts)
        return cls(names, tuple(values))

    def __getitem__(self, key):
        if isinstance(key, Sort):
            key = key.name
        if isinstance(key, str):
            return self.values[self.sorts.index(key)]
        return self.values[key]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def leq(self, other: "CardinalityVector") -> bool:
        return all(a <= b for a, b in zip(self.values, other.values))

    @property
    def finite(self) -> bool:
        return all(v != ALEPH0 for v in self.values)

    def to_json(self) -> dict:
        return {s: ("aleph0" if v == ALEPH0 else v) for s, v in zip(self.sorts, self.values)}

    def __str__(self) -> str:
        return "(" + ",".join("aleph0" if v == ALEPH0 else str(v) for v in self.values) + ")"


MinimalModelSet = frozenset  # of CardinalityVector


def vec(*values, sorts: Sequence[str] = ("sigma1",)) -> CardinalityVector:
    """Shorthand: ``vec(11)`` or ``vec(2, 3, sorts=("sigma1", "sigma2"))``."""
    if len(sorts) != len(values):
        sorts = tuple(f"sigma{i}" for i in range(1, len(values) + 1))
    return CardinalityVector(tuple(sorts), tuple(values))


def _leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def extremal_elements(tuples: Iterable, mode: str = "minimal") -> set:
    """Minimal or maximal elements under the componentwise order."""
    items = list(dict.fromkeys(tuples))
    if mode not in ("minimal", "maximal"):
        raise ValueError(f"mode must be 'minimal' or 'maximal', not {mode!r}")
    out = set()
    for a in items:
        dominated = False
        for b in items:
            if a == b:
                continue
            if (mode == "minimal" and _leq(b, a)) or (mode == "maximal" and _leq(a, b)):
                dominated = True
                break
        if not dominated:
            out.add(a)
    return out


def is_antichain(vectors: Iterable) -> bool:
    vs = list(vectors)
    return all(not _leq(a, b) for a in vs for b in vs if a != b)


@dataclass(frozen=True, eq=False)
class SatVerdict:
    """``sat`` carries a model; ``unsat-up-to`` a bound; ``unsat`` is certified."""

    kind: str
    model: Optional[FiniteInterpretation] = None
    bound: Optional[CardinalityVector] = None

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"

    def to_json(self) -> dict:
        from .textio import interpretation_to_json

        return {
            "verdict": self.kind,
            "model": interpretation_to_json(self.model) if self.model is not None else None,
            "bound": self.bound.to_json() if self.bound is not None else None,
        }


def normalize_bound(signature: Signature, bound) -> tuple[int, ...]:
    """Per-sort integer bounds aligned with ``signature.sorts``."""
    if isinstance(bound, CardinalityVector):
        vals = tuple(bound[s] for s in signature.sorts)
    elif isinstance(bound, Mapping):
        vals = tuple(bound[s] if s in bound else bound[s.name] for s in signature.sorts)
    elif isinstance(bound, int):
        vals = (bound,) * len(signature.sorts)
    else:
        vals = tuple(bound)
    if len(vals) != len(signature.sorts):
        raise ValueError("bound does not match the sorts of the signature")
    for v in vals:
        if v == ALEPH0:
            raise ValueError("enumeration bounds must be finite")
        if v < 1:
            raise ValueError("enumeration bounds must be positive")
    return tuple(int(v) for v in vals)


# ---------------------------------------------------------------------------
# Labeled enumeration
# ---------------------------------------------------------------------------


def _structures_of_size(sig: Signature, sizes: Sequence[int]) -> Iterator[FiniteInterpretation]:
    doms = {s: tuple(range(k)) for s, k in zip(sig.sorts, sizes)}
    f_choices = []
    for fn in sig.functions:
        points = list(itertools.product(*(doms[s] for s in fn.args)))
        f_choices.append((fn.name, points, doms[fn.result]))
    p_choices = []
    for p in sig.predicates:
        points = list(itertools.product(*(doms[s] for s in p.args)))
        p_choices.append((p.name, points))
    f_iters = [itertools.product(cod, repeat=len(points)) for _, points, cod in f_choices]
    for f_values in itertools.product(*[list(it) for it in f_iters]):
        funcs = {name: dict(zip(points, vals)) for (name, points, _), vals in zip(f_choices, f_values)}
        p_iters = [itertools.product((False, True), repeat=len(points)) for _, points in p_choices]
        for p_values in itertools.product(*[list(it) for it in p_iters]):
            preds = {
                name: frozenset(pt for pt, on in zip(points, bits) if on)
                for (name, points), bits in zip(p_choices, p_values)
            }
            yield FiniteInterpretation(sig, doms, funcs, preds, {})


def _color(interp: FiniteInterpretation, sort: Sort, e) -> tuple:
    sig = interp.signature
    key = []
    for p in sig.predicates:
        if p.args == (sort,):
            key.append((e,) in interp.predicates[p.name])
    for fn in sig.functions:
        if fn.args == (sort,):
            table = interp.functions[fn.name]
            if fn.result == sort:
                key.append(table[(e,)] == e)
                key.append(sum(1 for v in table.values() if v == e))
    return tuple(key)


def canonical_form(interp: FiniteInterpretation) -> tuple:
    """Isomorphism-invariant key: the lexicographically least encoding over
    all color-preserving relabelings of each sort."""
    sig = interp.signature
    per_sort = []
    for s in sig.sorts:
        dom = interp.domains[s]
        colors: dict[tuple, list] = {}
        for e in dom:
            colors.setdefault(_color(interp, s, e), []).append(e)
        ordered = sorted(colors.items())
        perms = [list(itertools.permutations(elems)) for _, elems in ordered]
        per_sort.append((s, ordered, perms))
    best = None
    for choice in itertools.product(*[itertools.product(*perms) for _, _, perms in per_sort]):
        relabel = {}
        for (s, _, _), blocks in zip(per_sort, choice):
            i = 0
            for block in blocks:
                for e in block:
                    relabel[(s, e)] = i
                    i += 1
        enc = []
        for fn in sig.functions:
            rows = sorted(
                (tuple(relabel[(srt, a)] for srt, a in zip(fn.args, args)), relabel[(fn.result, v)])
                for args, v in interp.functions[fn.name].items()
            )
            enc.append(tuple(rows))
        for p in sig.predicates:
            rows = sorted(tuple(relabel[(srt, a)] for srt, a in zip(p.args, row)) for row in interp.predicates[p.name])
            enc.append(tuple(rows))
        key = (interp.sizes(), tuple(enc))
        if best is None or key < best:
            best = key
    return best


def enumerate_structures(
    signature: Signature,
    size_bound,
    filter: Optional[Callable[[FiniteInterpretation], bool]] = None,
    canonical: bool = False,
) -> Iterator[FiniteInterpretation]:
    """Every structure with domains {0..k-1}, k up to the bound, sizes ascending.

    Labeled by default.  With ``canonical=True`` only the first member of each
    isomorphism class is emitted.
    """
    if signature.is_lazy:
        raise LogicError("instantiate lazy symbol families before enumerating")
    bound = normalize_bound(signature, size_bound)
    seen: set = set()
    size_tuples = sorted(itertools.product(*(range(1, b + 1) for b in bound)), key=lambda t: (sum(t), t))
    for sizes in size_tuples:
        for interp in _structures_of_size(signature, sizes):
            if filter is not None and not filter(interp):
                continue
            if canonical:
                key = canonical_form(interp)
                if key in seen:
                    continue
                seen.add(key)
            yield interp


# ---------------------------------------------------------------------------
# Model search
# ---------------------------------------------------------------------------


def _search_signature(theory, phi: Formula) -> Signature:
    sig = theory.signature
    if hasattr(theory, "finite_signature"):
        return theory.finite_signature(phi)
    if sig.is_lazy:
        funcs, preds = symbols_of(phi)
        return Signature(
            sig.sorts,
            tuple(sig.function(n) for n in sorted(funcs)),
            tuple(sig.predicate(n) for n in sorted(preds)),
        )
    return sig


def _generated_applicable(sig: Signature, closed: bool) -> bool:
    if any(fn.arity != 1 for fn in sig.functions):
        return False
    if any(p.arity > 1 for p in sig.predicates):
        return False
    return closed or not sig.functions


def _unary_types(sig: Signature, sort: Sort) -> list:
    names = [p.name for p in sig.predicates if p.args == (sort,)]
    return [dict(zip(names, bits)) for bits in itertools.product((False, True), repeat=len(names))]


def generated_models(
    sig: Signature,
    phi: Formula,
    bound: Sequence[int],
    membership: Callable[[FiniteInterpretation], bool],
    *,
    padding: bool = False,
    prune: Optional[Callable[[tuple], bool]] = None,
    variables: Sequence[Var] = (),
) -> Iterator[FiniteInterpretation]:
    """Models of phi generated by its variables, within ``bound``.

    ``prune(sizes)`` may cut every extension of a partial structure whose
    per-sort sizes are already ``sizes`` (sizes never shrink along a branch).
    With ``padding`` (function-free signatures only) unnamed elements are added
    up to isomorphism.
    """
    sorts = sig.sorts
    sidx = {s: i for i, s in enumerate(sorts)}
    vs = list(dict.fromkeys(list(free_vars(phi)) + list(variables)))
    for v in vs:
        if v.sort not in sidx:
            raise LogicError(f"variable {v.name} of unknown sort {v.sort}")
    partial = compile_partial(phi)
    full = compile_formula(phi)
    funcs_by_sort: dict[Sort, list] = {s: [] for s in sorts}
    for fn in sig.functions:
        funcs_by_sort[fn.args[0]].append(fn)
    counts = [0] * len(sorts)
    assign: dict = {}
    tables: dict = {fn.name: {} for fn in sig.functions}
    queue: list = []
    preds_unknown: dict = {}

    def new_element(s: Sort) -> int:
        i = sidx[s]
        e = counts[i]
        counts[i] += 1
        for fn in funcs_by_sort[s]:
            queue.append((fn, e))
        return e

    def drop_element(s: Sort) -> None:
        i = sidx[s]
        counts[i] -= 1
        n = len(funcs_by_sort[s])
        if n:
            del queue[-n:]

    def ok() -> bool:
        if prune is not None and prune(tuple(counts)):
            return False
        return partial(assign, tables, preds_unknown) is not False

    def leaves() -> Iterator[FiniteInterpretation]:
        doms = {s: tuple(range(counts[sidx[s]])) for s in sorts}
        pred_points = [
            (p.name, list(itertools.product(*(doms[s] for s in p.args)))) for p in sig.predicates
        ]
        for bits in itertools.product(*[list(itertools.product((False, True), repeat=len(pts))) for _, pts in pred_points]):
            preds = {name: frozenset(pt for pt, on in zip(pts, b) if on) for (name, pts), b in zip(pred_points, bits)}
            if not full(assign, tables, preds):
                continue
            if not padding:
                interp = FiniteInterpretation(sig, doms, {k: dict(v) for k, v in tables.items()}, preds, dict(assign))
                if membership(interp):
                    yield interp
                continue
            yield from pad(doms, preds)

    def pad(doms, preds) -> Iterator[FiniteInterpretation]:
        room = [b - len(doms[s]) for s, b in zip(sorts, bound)]
        per_sort_options = []
        for s, r in zip(sorts, room):
            types = _unary_types(sig, s)
            opts = []
            for m in range(r + 1):
                opts.extend(itertools.combinations_with_replacement(range(len(types)), m))
            per_sort_options.append((s, types, opts))
        combos = itertools.product(*[opts for _, _, opts in per_sort_options])
        for combo in sorted(combos, key=lambda c: sum(len(x) for x in c)):
            if prune is not None and prune(tuple(len(doms[s]) + len(c) for s, c in zip(sorts, combo))):
                continue
            new_doms = dict(doms)
            new_preds = {k: set(v) for k, v in preds.items()}
            for (s, types, _), extra in zip(per_sort_options, combo):
                base = len(doms[s])
                new_doms[s] = tuple(range(base + len(extra)))
                for j, t in enumerate(extra):
                    for name, on in types[t].items():
                        if on:
                            new_preds[name].add((base + j,))
            interp = FiniteInterpretation(sig, new_doms, {}, {k: frozenset(v) for k, v in new_preds.items()}, dict(assign))
            if membership(interp):
                yield interp

    def close(qi: int) -> Iterator[FiniteInterpretation]:
        if qi == len(queue):
            yield from leaves()
            return
        fn, e = queue[qi]
        rs = fn.result
        table = tables[fn.name]
        for target in range(counts[sidx[rs]]):
            table[(e,)] = target
            if ok():
                yield from close(qi + 1)
        if counts[sidx[rs]] < bound[sidx[rs]]:
            target = new_element(rs)
            table[(e,)] = target
            if ok():
                yield from close(qi + 1)
            drop_element(rs)
        del table[(e,)]

    def place(vi: int) -> Iterator[FiniteInterpretation]:
        if vi == len(vs):
            created = []
            for s in sorts:
                if counts[sidx[s]] == 0:
                    new_element(s)
                    created.append(s)
            if not created or ok():
                yield from close(0)
            for s in reversed(created):
                drop_element(s)
            return
        v = vs[vi]
        s = v.sort
        for e in range(counts[sidx[s]]):
            assign[v] = e
            if ok():
                yield from place(vi + 1)
        if counts[sidx[s]] < bound[sidx[s]]:
            assign[v] = new_element(s)
            if ok():
                yield from place(vi + 1)
            drop_element(s)
        del assign[v]

    yield from place(0)


def _labeled_models(sig, phi, bound, membership, prune=None, variables=()):
    vs = list(dict.fromkeys(list(free_vars(phi)) + list(variables)))
    ev = compile_formula(phi)
    symmetric = sig.is_empty
    for interp in enumerate_structures(sig, bound):
        if prune is not None and prune(interp.sizes()):
            continue
        if not membership(interp):
            continue
        if symmetric:
            assignments = _symmetric_assignments(vs, interp)
        else:
            assignments = (dict(zip(vs, vals)) for vals in itertools.product(*(interp.domains[v.sort] for v in vs)))
        for a in assignments:
            if ev(a, interp.functions, interp.predicates):
                yield interp.with_assignment(a)


def _symmetric_assignments(vs, interp) -> Iterator[dict]:
    # Empty signature: assignments up to permutation of each domain.
    by_sort: dict = {}
    for v in vs:
        by_sort.setdefault(v.sort, []).append(v)
    groups = list(by_sort.items())

    def rgs(n, limit):
        a = [0] * n

        def rec(i, m):
            if i == n:
                yield tuple(a)
                return
            for val in range(min(m + 2, limit)):
                a[i] = val
                yield from rec(i + 1, max(m, val))

        if n == 0:
            yield ()
        else:
            yield from rec(0, -1)

    per = [list(rgs(len(g), len(interp.domains[s]))) for s, g in groups]
    for combo in itertools.product(*per):
        a = {}
        for (s, g), r in zip(groups, combo):
            a.update(zip(g, r))
        yield a


def models(theory, phi: Formula, bound, *, prune=None, variables=()) -> Iterator[FiniteInterpretation]:
    """All models of phi in ``theory`` within ``bound`` that the strategy for
    this theory visits (see module docstring)."""
    if not is_quantifier_free(phi):
        raise LogicError("quantifier-free formula required")
    sig = _search_signature(theory, phi)
    b = normalize_bound(sig, bound)
    closed = getattr(theory, "generated_closed", False)
    if _generated_applicable(sig, closed):
        return generated_models(sig, phi, b, theory.membership, padding=not closed, prune=prune, variables=variables)
    return _labeled_models(sig, phi, b, theory.membership, prune=prune, variables=variables)


def _disjuncts(phi: Formula) -> list[Formula]:
    """Top-level disjuncts of phi, nested disjunctions flattened."""
    if isinstance(phi, Or):
        return [d for a in phi.args for d in _disjuncts(a)]
    return [phi]


def sat_bounded(theory, phi: Formula, bound) -> SatVerdict:
    """Search for a model of phi in ``theory`` within ``bound``; never certifies unsat.

    Top-level disjuncts are searched one at a time: a variable that occurs
    only in other disjuncts is irrelevant, and searching them jointly
    multiplies the placements the enumeration has to try.
    """
    sig = _search_signature(theory, phi)
    b = normalize_bound(sig, bound)
    parts = [phi] if theory.signature.is_lazy else _disjuncts(phi)
    for part in parts:
        for m in models(theory, part, b):
            missing = {v: m.domains[v.sort][0] for v in free_vars(phi) if v not in m.assignment}
            if missing:
                m = m.with_assignment({**m.assignment, **missing})
            return SatVerdict("sat", m, CardinalityVector.of(sig.sorts, b))
    return SatVerdict("unsat-up-to", None, CardinalityVector.of(sig.sorts, b))


def brute_mm(theory, phi: Formula, bound) -> frozenset:
    """Antichain of minimal cardinality vectors realized by models within bound.

    Candidate vectors are tried by increasing total size and the search at
    each one is itself bounded by it, so a satisfiable formula never pays for
    exploring structures larger than its minimal models.
    """
    sig = _search_signature(theory, phi)
    b = normalize_bound(sig, bound)
    found: list[tuple] = []

    def dominated(sizes: tuple) -> bool:
        return any(_leq(f, sizes) for f in found)

    candidates = sorted(itertools.product(*(range(1, k + 1) for k in b)), key=lambda v: (sum(v), v))
    # minimal models of a disjunction are the minimal ones among its disjuncts'
    for part in _disjuncts(phi):
        for cand in candidates:
            if dominated(cand):
                continue
            for m in models(theory, part, cand, prune=dominated):
                sizes = m.sizes()
                if not dominated(sizes):
                    found[:] = [f for f in found if not _leq(sizes, f)]
                    found.append(sizes)
                break
    return frozenset(CardinalityVector.of(sig.sorts, f) for f in extremal_elements(found, "minimal"))


# ---------------------------------------------------------------------------
# Completeness bounds
# ---------------------------------------------------------------------------


def flat_variable_counts(phi: Formula) -> list[dict[Sort, int]]:
    """Per DNF cube, the number of variables its flattening uses, by sort."""
    out = []
    for cube in dnf_cubes(phi):
        seen: dict = {}
        for lit in cube:
            for t in literal_terms(lit):
                for v in (t,) if isinstance(t, Var) else ():
                    seen[v] = v.sort
                if isinstance(t, App):
                    for st in subterms(t):
                        seen[st] = st.symbol.result
                        for a in st.args:
                            if isinstance(a, Var):
                                seen[a] = a.sort
        # a top-level equation between two applications needs no extra
        # variable beyond one per distinct subterm, which is what we count
        counts: dict[Sort, int] = {}
        for s in seen.values():
            counts[s] = counts.get(s, 0) + 1
        out.append(counts)
    return out


def bound_hint(theory, phi: Formula) -> CardinalityVector:
    """A per-sort bound within which phi has a model if it has one at all.

    Uses the lemma-backed complete bound where one is known: flattened
    variable count for the cycle theories, twice the variable count for the
    P-doubling theory, and the variable count for pure equality.
    """
    sig = theory.signature
    kind = getattr(theory, "family", "")
    base_vars = free_vars(phi)
    counts = flat_variable_counts(phi) or [{}]
    if kind in ("ti", "teq"):
        vals = tuple(max(1, max(c.get(s, 0) for c in counts)) for s in sig.sorts)
    elif kind == "t2n":
        vals = (max(1, 2 * len(base_vars)),)
    elif kind in ("teq1", "th"):
        vals = (1,) * len(sig.sorts)
    elif kind == "spectrum":
        vals = tuple(max(1, sum(1 for v in base_vars if v.sort == s)) for s in sig.sorts)
    else:
        raise ValueError(f"no completeness bound known for theory {theory.name}")
    return CardinalityVector.of(sig.sorts, vals)


# ---------------------------------------------------------------------------
# Empty signatures
# ---------------------------------------------------------------------------


def empty_sig_decide(spectrum_max: Iterable[CardinalityVector], phi: Formula,
                     sorts: Optional[Sequence[Sort | str]] = None) -> bool:
    """Satisfiability over an empty signature from the maximal spectrum tuples.

    phi holds in some model iff some sort-respecting arrangement E of its
    variables makes phi true under the quotient assignment and the block
    counts of E are dominated by a maximal spectrum tuple.
    """
    if not is_quantifier_free(phi):
        raise LogicError("quantifier-free formula required")
    funcs, preds = symbols_of(phi)
    if funcs or preds:
        raise LogicError("empty_sig_decide needs a formula over an empty signature")
    maxima = list(spectrum_max)
    if not maxima:
        return False
    names = tuple(s.name if isinstance(s, Sort) else s for s in (sorts or maxima[0].sorts))
    ev = compile_formula(phi)
    vs = free_vars(phi)
    for delta in enumerate_arrangements(vs):
        cls = delta.class_map()
        if not ev(cls, {}, {}):
            continue
        counts = tuple(sum(1 for b in delta.blocks if b[0].sort.name == s) for s in names)
        for m in maxima:
            if all(c <= m[s] for c, s in zip(counts, names)):
                return True
    return False
