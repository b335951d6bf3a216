"""Concrete theories as `TheoryHandle` objects.

Oracles: the cycle theories are parameterized by a set S of primes and
T<h> by a function h.  Both are injected (`SOracle`, `HOracle`) with
decidable defaults so that reductions can be run against them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .finite_model import ALEPH0, CardinalityVector, empty_sig_decide
from .flat import FlatConjunction, flatten
from .logic import (
    F,
    SIGMA1,
    SIGMA_1,
    SIGMA_F,
    SIGMA_F2,
    SIGMA_P,
    SIGMA_PN,
    App,
    Const,
    Eq,
    Exists,
    FiniteInterpretation,
    Forall,
    Formula,
    FreshVars,
    Implies,
    LogicError,
    Not,
    Pred,
    Signature,
    Var,
    cardinality_sentence,
    compile_formula,
    conj,
    cycle_formula,
    dnf_cubes,
    free_vars,
    iterate,
    neq,
    require_qf,
    symbols_of,
)


class ConfigError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class SOracle:
    """Stand-in for the set S of primes >= 7 (default {7, 11, 13})."""

    members: frozenset = frozenset({7, 11, 13})

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        bad = [n for n in self.members if not (isinstance(n, int) and n >= 7 and is_prime(n))]
        if bad:
            raise ConfigError(f"S may only contain primes >= 7, got {sorted(bad)}")

    @classmethod
    def parse(cls, text: str) -> "SOracle":
        text = text.strip()
        if not text:
            return cls(frozenset())
        try:
            return cls(frozenset(int(p) for p in text.split(",")))
        except ValueError as exc:
            raise ConfigError(f"bad S set {text!r}: {exc}") from None

    def __contains__(self, n) -> bool:
        return n in self.members

    def __str__(self) -> str:
        return "{" + ",".join(str(n) for n in sorted(self.members)) + "}"


@dataclass(frozen=True)
class HOracle:
    """Stand-in for h: N -> {0,1}; ``calls`` records every queried index."""

    name: str
    fn: Callable[[int], bool]
    calls: list = field(default_factory=list, compare=False, repr=False)

    def __call__(self, n: int) -> bool:
        self.calls.append(n)
        return bool(self.fn(n))


def parity_oracle() -> HOracle:
    return HOracle("parity", lambda n: n % 2 == 1)


def table_oracle(values: Mapping[int, bool] | Iterable[int], name: str = "table") -> HOracle:
    """h from an explicit table (missing indices map to 0), or the set of indices where h is 1."""
    on = {k for k, v in values.items() if v} if isinstance(values, Mapping) else set(values)
    return HOracle(name, lambda n: n in on)


@dataclass(frozen=True)
class TheoryConfig:
    s: SOracle = SOracle()
    h: Optional[HOracle] = None
    pred_cut: int = 4
    star_n: int = 4


# ---------------------------------------------------------------------------
# Functional graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionalGraph:
    """Successor array of a total self-map on {0..n-1}."""

    succ: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "succ", tuple(self.succ))
        n = len(self.succ)
        if any(not (0 <= v < n) for v in self.succ):
            raise ValueError("successor outside the vertex set")

    @classmethod
    def from_interp(cls, interp: FiniteInterpretation, fn: str = "f") -> "FunctionalGraph":
        dom = interp.domains[SIGMA1]
        index = {e: i for i, e in enumerate(dom)}
        table = interp.functions[fn]
        return cls(tuple(index[table[(e,)]] for e in dom))

    @property
    def size(self) -> int:
        return len(self.succ)

    def cycles(self) -> list[tuple[int, ...]]:
        """Each cycle once, starting from its least vertex."""
        state = [0] * len(self.succ)  # 0 new, 1 on stack, 2 done
        out = []
        for start in range(len(self.succ)):
            path = []
            v = start
            while state[v] == 0:
                state[v] = 1
                path.append(v)
                v = self.succ[v]
            if state[v] == 1:
                cyc = path[path.index(v):]
                k = cyc.index(min(cyc))
                out.append(tuple(cyc[k:] + cyc[:k]))
            for u in path:
                state[u] = 2
        return sorted(out)


def cycle_lengths(g: FunctionalGraph) -> tuple[int, ...]:
    """Sorted multiset of cycle lengths."""
    return tuple(sorted(len(c) for c in g.cycles()))


def ti_allowed(i: int, s: SOracle, lengths: Iterable[int], size: int) -> bool:
    ls = set(lengths)
    short = 1 in ls or 2 in ls
    ok = not (short and any(n in s for n in ls))
    if i in (2, 4):
        ok = ok and 6 not in ls
    if i in (3, 4):
        ok = ok and (1 not in ls or size == 1)
    return ok


def _check_index(i: int) -> None:
    if i not in (1, 2, 3, 4):
        raise ConfigError(f"theory index must be 1..4, got {i}")


def membership_ti(i: int, s: SOracle, interp: FiniteInterpretation) -> bool:
    _check_index(i)
    sig = interp.signature
    if not sig.has_function("f") or sig.function("f") != F:
        raise LogicError("T_i membership needs the unary f over sigma1")
    if any(len(interp.domains[srt]) == 0 for srt in sig.sorts):
        return False
    g = FunctionalGraph.from_interp(interp)
    return ti_allowed(i, s, cycle_lengths(g), g.size)


def ti_axioms(i: int, s: SOracle, max_n: int) -> list[Formula]:
    """Axioms of T_i with the schema over S cut at ``max_n``."""
    _check_index(i)
    x, y = Var("x"), Var("y")
    ax = [
        Implies(Exists(x, cycle_formula(n, x)), Forall(x, neq(iterate(F, 2, x), x)))
        for n in sorted(s.members)
        if n <= max_n
    ]
    if i in (2, 4):
        ax.append(Not(Exists(x, cycle_formula(6, x))))
    if i in (3, 4):
        ax.append(Implies(Exists(x, Eq(App(F, (x,)), x)), Forall(x, Forall(y, Eq(x, y)))))
    return ax


def complete_graph(edges: Mapping[int, int], n: int) -> list[int]:
    """Total self-map on {0..n-1} extending ``edges`` per the four-case completion.

    G_1 are the vertices with an edge, G_2 the rest.  If G_1 has a cycle, G_2
    points into it.  Otherwise G_2 is closed into a single cycle, or two
    3-cycles when |G_2| = 6; a lone G_2 vertex becomes a loop when G_1 is
    empty, else it points back at a predecessor, closing a 2-cycle.
    """
    succ = [edges.get(v, -1) for v in range(n)]
    g2 = [v for v in range(n) if succ[v] < 0]
    if not g2:
        return succ
    on_cycle = None
    for start in edges:
        seen = set()
        v = start
        while v in edges and v not in seen:
            seen.add(v)
            v = edges[v]
        if v in seen:
            on_cycle = v
            break
    if on_cycle is not None:
        for v in g2:
            succ[v] = on_cycle
    elif len(g2) == 6:
        for block in (g2[:3], g2[3:]):
            for a, b in zip(block, block[1:] + block[:1]):
                succ[a] = b
    elif len(g2) >= 2:
        for a, b in zip(g2, g2[1:] + g2[:1]):
            succ[a] = b
    else:
        v = g2[0]
        preds = [w for w, t in edges.items() if t == v]
        succ[v] = preds[0] if preds else v
    return succ


# ---------------------------------------------------------------------------
# Exact-size realizations of flat conjunctions in T_i
# ---------------------------------------------------------------------------


def _split_flat(flat: FlatConjunction):
    defs, eqs, neqs = [], [], []
    for lit in flat.all_literals:
        if isinstance(lit, Const):
            if not lit.value:
                return None
            continue
        if isinstance(lit, Not):
            a = lit.arg
            if not isinstance(a, Eq) or isinstance(a.left, App) or isinstance(a.right, App):
                raise LogicError(f"unexpected flat literal {lit!r}")
            neqs.append((a.left, a.right))
        elif isinstance(lit, Eq):
            if isinstance(lit.left, App):
                if lit.left.symbol != F:
                    raise LogicError(f"unexpected function {lit.left.symbol.name}")
                defs.append((lit.left.args[0], lit.right))
            else:
                eqs.append((lit.left, lit.right))
        else:
            raise LogicError(f"predicates do not occur over Sigma_f: {lit!r}")
    return defs, eqs, neqs


def ti_realizations(
    i: int,
    s: SOracle,
    flat: FlatConjunction,
    extra: Sequence[Var] = (),
    signature: Signature = SIGMA_F,
    prune: Optional[Callable[[tuple], bool]] = None,
) -> Iterator[FiniteInterpretation]:
    """T_i-models whose domains are exactly the classes of some arrangement.

    Walks the arrangements of the flat variables (plus ``extra``) that are
    consistent with the literals and with functionality of f, completes each
    quotient graph with `complete_graph` and keeps the members.  Sorts with no
    variables get a single element.  ``prune(counts)`` may cut a branch whose
    per-sort class counts are ``counts`` (counts only grow along a branch).
    """
    parts = _split_flat(flat)
    if parts is None:
        return
    defs, eqs, neqs = parts
    vs = list(dict.fromkeys(list(flat.variables) + list(extra)))
    for v in vs:
        if v.sort not in signature.sorts:
            raise LogicError(f"variable {v.name} has a sort outside the signature")
    pos = {v: k for k, v in enumerate(vs)}
    checks: list[list] = [[] for _ in vs]
    for a, b in eqs:
        checks[max(pos[a], pos[b])].append(("eq", a, b))
    for a, b in neqs:
        checks[max(pos[a], pos[b])].append(("ne", a, b))
    for (a, b), (c, d) in itertools.combinations(defs, 2):
        checks[max(pos[a], pos[b], pos[c], pos[d])].append(("fn", a, b, c, d))
    cls: dict[Var, int] = {}
    counts = {srt: 0 for srt in signature.sorts}

    def ok(k: int) -> bool:
        for chk in checks[k]:
            if chk[0] == "eq":
                if cls[chk[1]] != cls[chk[2]]:
                    return False
            elif chk[0] == "ne":
                if cls[chk[1]] == cls[chk[2]]:
                    return False
            elif cls[chk[1]] == cls[chk[3]] and cls[chk[2]] != cls[chk[4]]:
                return False
        return True

    def leaf() -> Optional[FiniteInterpretation]:
        n1 = counts[SIGMA1]
        edges = {cls[a]: cls[b] for a, b in defs}
        if n1 == 0:
            succ = [0]
            n1 = 1
        else:
            succ = complete_graph(edges, n1)
        if not ti_allowed(i, s, cycle_lengths(FunctionalGraph(tuple(succ))), n1):
            return None
        doms = {srt: tuple(range(max(1, counts[srt]))) for srt in signature.sorts}
        doms[SIGMA1] = tuple(range(n1))
        return FiniteInterpretation(signature, doms, {"f": {(k,): succ[k] for k in range(n1)}}, {}, dict(cls))

    def rec(k: int) -> Iterator[FiniteInterpretation]:
        if k == len(vs):
            m = leaf()
            if m is not None:
                yield m
            return
        v = vs[k]
        for c in range(counts[v.sort] + 1):
            new = c == counts[v.sort]
            cls[v] = c
            if new:
                counts[v.sort] += 1
            if ok(k) and not (new and prune is not None and prune(tuple(counts[q] for q in signature.sorts))):
                yield from rec(k + 1)
            if new:
                counts[v.sort] -= 1
        del cls[v]

    yield from rec(0)


# ---------------------------------------------------------------------------
# Theory handles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TheoryHandle:
    """A theory: signature, finite membership test and optional capabilities.

    ``decide`` maps a QF formula to a bool; ``witness``/``strong_witness`` are
    `WitnessFn` objects; ``mm`` is an `MmCapability`.  ``flags`` records the
    expected property verdicts; ``oracle_dependent`` names the capabilities
    whose answers depend on an injected oracle.
    """

    name: str
    family: str
    signature: Signature
    membership: Callable[[FiniteInterpretation], bool]
    decide: Optional[Callable[[Formula], bool]] = None
    witness: Any = None
    strong_witness: Any = None
    mm: Any = None
    find_model: Optional[Callable[[Formula], Optional[FiniteInterpretation]]] = None
    arrangement_models: Optional[Callable] = None
    axioms: tuple = ()
    flags: Mapping[str, bool] = field(default_factory=dict)
    oracle_dependent: frozenset = frozenset()
    generated_closed: bool = True
    config: TheoryConfig = TheoryConfig()
    index: int = 0
    base: Optional["TheoryHandle"] = None

    @property
    def one_sorted(self) -> bool:
        return len(self.signature.sorts) == 1

    def finite_signature(self, phi: Formula) -> Signature:
        sig = self.signature
        if not sig.is_lazy:
            return sig
        funcs, preds = symbols_of(phi)
        cut = self.config.pred_cut
        fam = sig.predicate_family
        if fam is not None:
            for p in preds:
                if p.startswith(fam) and p[len(fam):].isdigit():
                    cut = max(cut, int(p[len(fam):]))
        fam_f = sig.function_family
        fnames = sorted(f[len(fam_f) + 1:] for f in funcs if fam_f and f.startswith(fam_f + "_"))
        return sig.instantiate(predicate_cut=cut, function_names=fnames)

    def is_member(self, interp: FiniteInterpretation) -> bool:
        return self.membership(interp)

    def __repr__(self) -> str:
        return f"TheoryHandle({self.name})"


def _teq_family_flags(**kw) -> dict:
    base = dict(one_sorted=True, SI=False, SF=False, smooth=False, SW=False, CMMF=False,
                convex=False, decidable=False, polite=False, shiny=False)
    base.update(kw)
    return base


TI_FLAGS = {
    1: _teq_family_flags(SI=True, SF=True, smooth=True, SW=True, convex=True, polite=True),
    2: _teq_family_flags(SI=True, SF=True, smooth=True, SW=True, convex=False, polite=True),
    3: _teq_family_flags(SI=False, SF=True, SW=True, convex=True),
    4: _teq_family_flags(SI=False, SF=True, SW=True, convex=False),
}


def _cube_flats(phi: Formula, fresh: Optional[FreshVars] = None) -> list[FlatConjunction]:
    fresh = fresh or FreshVars(phi)
    return [flatten(conj(cube), fresh) for cube in dnf_cubes(phi)]


def _make_ti(i: int, cfg: TheoryConfig, two_sorted: bool = False) -> TheoryHandle:
    from .minimal_model import brute_mm_capability
    from .witness import dnf_lift, wit_ti

    _check_index(i)
    s = cfg.s
    sig = SIGMA_F2 if two_sorted else SIGMA_F

    def membership(interp: FiniteInterpretation) -> bool:
        return membership_ti(i, s, interp)

    def arrangement_models(phi: Formula, prune=None) -> Iterator[FiniteInterpretation]:
        require_qf(phi)
        extra = free_vars(phi)
        for flat in _cube_flats(phi):
            yield from ti_realizations(i, s, flat, extra, sig, prune)

    def find_model(phi: Formula) -> Optional[FiniteInterpretation]:
        for m in arrangement_models(phi):
            return m
        return None

    def decide(phi: Formula) -> bool:
        return find_model(phi) is not None

    wit = dnf_lift(wit_ti(sig), name=f"wit_t{i}")
    name = f"adds(t{i})" if two_sorted else f"t{i}"
    flags = dict(TI_FLAGS[i])
    flags["one_sorted"] = not two_sorted
    handle = TheoryHandle(
        name=name,
        family="ti",
        signature=sig,
        membership=membership,
        decide=decide,
        witness=wit,
        strong_witness=wit,
        find_model=find_model,
        arrangement_models=arrangement_models,
        axioms=tuple(ti_axioms(i, s, 13 if not s.members else max(s.members))),
        flags=flags,
        oracle_dependent=frozenset({"decide", "mm"}),
        generated_closed=True,
        config=cfg,
        index=i,
    )
    object.__setattr__(handle, "mm", brute_mm_capability(handle))
    return handle


def _quotient_model(sig: Signature, phi: Formula, delta_classes: Mapping[Var, int], counts) -> FiniteInterpretation:
    doms = {srt: tuple(range(max(1, counts.get(srt, 0)))) for srt in sig.sorts}
    return FiniteInterpretation(sig, doms, {}, {}, dict(delta_classes))


def _make_teq(cfg: TheoryConfig) -> TheoryHandle:
    from .minimal_model import MmCapability
    from .witness import dnf_lift, wit_ti

    sig = SIGMA_1
    spectrum = [CardinalityVector.of(sig.sorts, (ALEPH0,))]

    def decide(phi: Formula) -> bool:
        require_qf(phi)
        return empty_sig_decide(spectrum, phi, sig.sorts)

    def mm(phi: Formula) -> frozenset:
        from .logic import enumerate_arrangements

        require_qf(phi)
        ev = compile_formula(phi)
        best = None
        for delta in enumerate_arrangements(free_vars(phi)):
            if ev(delta.class_map(), {}, {}):
                best = max(1, len(delta))
                break
        return frozenset() if best is None else frozenset({CardinalityVector.of(sig.sorts, (best,))})

    def find_model(phi: Formula):
        from .logic import enumerate_arrangements

        ev = compile_formula(phi)
        for delta in enumerate_arrangements(free_vars(phi)):
            cm = delta.class_map()
            if ev(cm, {}, {}):
                return _quotient_model(sig, phi, cm, {SIGMA1: len(delta)})
        return None

    wit = dnf_lift(wit_ti(sig), name="wit_teq")
    return TheoryHandle(
        name="teq", family="teq", signature=sig, membership=lambda interp: True,
        decide=decide, witness=wit, strong_witness=wit, mm=MmCapability(mm, "arrangements"),
        find_model=find_model, axioms=(),
        flags=_teq_family_flags(SI=True, SF=True, smooth=True, SW=True, CMMF=True, convex=True,
                                decidable=True, polite=True, shiny=True),
        generated_closed=True, config=cfg,
    )


def _singleton(interp: FiniteInterpretation) -> bool:
    return all(len(interp.domains[srt]) == 1 for srt in interp.signature.sorts)


def _make_teq1(cfg: TheoryConfig) -> TheoryHandle:
    from .minimal_model import MmCapability

    sig = SIGMA_1
    spectrum = [CardinalityVector.of(sig.sorts, (1,))]

    def decide(phi: Formula) -> bool:
        require_qf(phi)
        return empty_sig_decide(spectrum, phi, sig.sorts)

    def mm(phi: Formula) -> frozenset:
        return frozenset({CardinalityVector.of(sig.sorts, (1,))}) if decide(phi) else frozenset()

    def find_model(phi: Formula):
        a = {v: 0 for v in free_vars(phi)}
        if compile_formula(phi)(a, {}, {}):
            return _quotient_model(sig, phi, a, {SIGMA1: 1})
        return None

    return TheoryHandle(
        name="teq1", family="teq1", signature=sig, membership=_singleton,
        decide=decide, mm=MmCapability(mm, "arrangements"), find_model=find_model,
        axioms=(cardinality_sentence("eq", SIGMA1, 1),),
        flags=_teq_family_flags(SF=True, CMMF=True, convex=True, decidable=True),
        generated_closed=True, config=cfg,
    )


def _pred_index(name: str, fam: str) -> Optional[int]:
    rest = name[len(fam):]
    return int(rest) if name.startswith(fam) and rest.isdigit() else None


def _make_th(cfg: TheoryConfig) -> TheoryHandle:
    h = cfg.h or parity_oracle()
    sig = SIGMA_PN
    fam = sig.predicate_family

    def membership(interp: FiniteInterpretation) -> bool:
        if not _singleton(interp):
            return False
        for p in interp.signature.predicates:
            k = _pred_index(p.name, fam)
            if k is None:
                continue
            holds = () in interp.predicates.get(p.name, frozenset())
            if holds != h(k):
                return False
        return True

    def find_model(phi: Formula):
        require_qf(phi)
        fsig = handle.finite_signature(phi)
        a = {v: 0 for v in free_vars(phi)}
        preds = {}
        for p in fsig.predicates:
            k = _pred_index(p.name, fam)
            preds[p.name] = frozenset({()}) if h(k) else frozenset()
        if compile_formula(phi)(a, {}, preds):
            return FiniteInterpretation(fsig, {SIGMA1: (0,)}, {}, preds, a)
        return None

    def decide(phi: Formula) -> bool:
        return find_model(phi) is not None

    handle = TheoryHandle(
        name="th", family="th", signature=sig, membership=membership,
        decide=decide, find_model=find_model, axioms=(cardinality_sentence("eq", SIGMA1, 1),),
        flags=_teq_family_flags(SF=True, convex=True),
        oracle_dependent=frozenset({"decide"}), generated_closed=True,
        config=TheoryConfig(cfg.s, h, cfg.pred_cut, cfg.star_n),
    )
    return handle


def t2n_member(interp: FiniteInterpretation) -> bool:
    size = len(interp.domains[SIGMA1])
    return size >= 2 * len(interp.predicates.get("P", frozenset()))


def t2n_axioms(max_n: int) -> list[Formula]:
    """ψ^P_n -> ψ_{>=2n} for n = 1..max_n."""
    from .logic import P, distinct_formula

    out = []
    for n in range(1, max_n + 1):
        xs = [Var(f"_p{k}") for k in range(1, n + 1)]
        body = conj(([distinct_formula(xs)] if n > 1 else []) + [Pred(P, (x,)) for x in xs])
        for x in reversed(xs):
            body = Exists(x, body)
        out.append(Implies(body, cardinality_sentence("geq", SIGMA1, 2 * n)))
    return out


def _make_t2n(cfg: TheoryConfig) -> TheoryHandle:
    from .finite_model import bound_hint, sat_bounded
    from .minimal_model import brute_mm_capability
    from .witness import shiny_witness

    def find_model(phi: Formula):
        require_qf(phi)
        v = sat_bounded(handle, phi, bound_hint(handle, phi))
        return v.model

    def decide(phi: Formula) -> bool:
        return find_model(phi) is not None

    handle = TheoryHandle(
        name="t2n", family="t2n", signature=SIGMA_P, membership=t2n_member,
        decide=decide, find_model=find_model, axioms=tuple(t2n_axioms(4)),
        flags=_teq_family_flags(SI=True, SF=True, smooth=True, SW=True, CMMF=True, convex=True,
                                decidable=True, polite=True, shiny=True),
        generated_closed=False, config=cfg,
    )
    object.__setattr__(handle, "mm", brute_mm_capability(handle))
    wit = shiny_witness(handle)
    object.__setattr__(handle, "witness", wit)
    object.__setattr__(handle, "strong_witness", wit)
    return handle


THEORY_NAMES = ("teq", "teq1", "th", "t2n", "t1", "t2", "t3", "t4", "adds-t1", "adds-t2", "adds-t3", "adds-t4", "star")


def make_theory(name: str, config: Optional[TheoryConfig] = None) -> TheoryHandle:
    """Build a theory by name: teq, teq1, th, t2n, t1..t4, adds-t1..adds-t4, star."""
    cfg = config or TheoryConfig()
    key = name.lower().replace("_", "-")
    if key in ("t1", "t2", "t3", "t4"):
        return _make_ti(int(key[1]), cfg)
    if key.startswith("adds-t") or key.startswith("adds(t"):
        return add_sort(_make_ti(int(key[6]), cfg))
    if key == "teq":
        return _make_teq(cfg)
    if key == "teq1":
        return _make_teq1(cfg)
    if key == "th":
        return _make_th(cfg)
    if key == "t2n":
        return _make_t2n(cfg)
    if key == "star":
        from .star import make_star_theory

        return make_star_theory(cfg)
    raise ConfigError(f"unknown theory {name!r}; choose from {', '.join(THEORY_NAMES)}")


def add_sort(t: TheoryHandle) -> TheoryHandle:
    """adds(T): the same axioms over Sigma_f with a second, unconstrained sort."""
    if t.family != "ti" or t.signature != SIGMA_F:
        raise ConfigError("add_sort applies to the cycle theories over Sigma_f")
    lifted = _make_ti(t.index, t.config, two_sorted=True)
    object.__setattr__(lifted, "base", t)
    return lifted
