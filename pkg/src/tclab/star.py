"""Finite ⋆-interpretations and their growth constructions.

Encoding: numbers are ints 0..n-1; tree nodes are strings ``"t" + bits``
(``"t"`` is the empty sequence).  An infinite ρ is a `RhoSpec`: explicit
leading bits followed by a constant tail.  Each named ρ gives a function
symbol ``f_<name>``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .logic import (
    LT,
    N_PRED,
    SIGMA1,
    SIGMA_STAR,
    App,
    Eq,
    FiniteInterpretation,
    Formula,
    LogicError,
    Not,
    Pred,
    Var,
    evaluate,
)

EPSILON = "t"


class StarError(LogicError):
    pass


def node(bits: str) -> str:
    if any(b not in "01" for b in bits):
        raise StarError(f"malformed bit string {bits!r}")
    return EPSILON + bits


def bits_of(elem) -> str:
    if not is_tree(elem):
        raise StarError(f"{elem!r} is not a tree node")
    return elem[1:]


def is_tree(elem) -> bool:
    return isinstance(elem, str) and elem.startswith(EPSILON) and all(b in "01" for b in elem[1:])


def is_number(elem) -> bool:
    return isinstance(elem, int) and not isinstance(elem, bool)


@dataclass(frozen=True)
class RhoSpec:
    """ρ(i) = bits[i] for i < len(bits), else ``tail``."""

    bits: str = ""
    tail: str = "0"

    def __post_init__(self):
        if any(b not in "01" for b in self.bits) or self.tail not in ("0", "1"):
            raise StarError("rho bits must be 0/1")

    def bit(self, i: int) -> str:
        return self.bits[i] if i < len(self.bits) else self.tail

    def prefix(self, m: int) -> str:
        return "".join(self.bit(i) for i in range(m))


def all_leaves(n: int) -> frozenset:
    return frozenset(node("".join(b)) for b in itertools.product("01", repeat=n - 1))


@dataclass(frozen=True, eq=False)
class StarInterpretation:
    """⋆-interpretation with n levels, leaf set S and a finite ρ-family.

    ``top[name]`` is the chosen value of f_name(n-1); ``assignment`` is an
    optional variable assignment over the encoded domain.
    """

    n: int
    leaves: frozenset
    rho: Mapping[str, RhoSpec]
    top: Mapping[str, str]
    assignment: Mapping[Var, object] = field(default_factory=dict)

    @property
    def numbers(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def tree(self) -> tuple[str, ...]:
        internal = [node("".join(b)) for k in range(self.n - 1) for b in itertools.product("01", repeat=k)]
        return tuple(internal) + tuple(sorted(self.leaves))

    @property
    def domain(self) -> tuple:
        return self.numbers + self.tree

    @property
    def size(self) -> int:
        return self.n + (2 ** (self.n - 1) - 1) + len(self.leaves)

    @property
    def full(self) -> bool:
        return len(self.leaves) == 2 ** (self.n - 1)

    def f(self, name: str, elem):
        if is_tree(elem):
            return elem
        if elem <= self.n - 2:
            return node(self.rho[name].prefix(elem))
        return self.top[name]

    def with_assignment(self, assignment: Mapping[Var, object]) -> "StarInterpretation":
        return StarInterpretation(self.n, self.leaves, self.rho, self.top, dict(assignment))

    def signature(self):
        return SIGMA_STAR.instantiate(function_names=sorted(self.rho))

    def to_interpretation(self) -> FiniteInterpretation:
        sig = self.signature()
        dom = self.domain
        funcs = {f"f_{r}": {(e,): self.f(r, e) for e in dom} for r in self.rho}
        preds = {
            "N": frozenset((e,) for e in self.numbers),
            "T": frozenset((e,) for e in self.tree),
            "<": frozenset((a, b) for a in self.numbers for b in self.numbers if a < b),
        }
        return FiniteInterpretation(sig, {SIGMA1: dom}, funcs, preds, dict(self.assignment))


def build_star(n: int, leaves: Optional[Iterable[str]], rho_family: Mapping[str, RhoSpec | tuple],
               assignment: Optional[Mapping[Var, object]] = None) -> StarInterpretation:
    """Validated ⋆-interpretation.

    ``leaves`` are bit strings of length n-1 (``None`` means all of them);
    each ρ entry is a RhoSpec plus the value of f_ρ(n-1) as a bit string, or
    a bare RhoSpec, in which case f_ρ(n-1) defaults to the root.
    """
    if not isinstance(n, int) or n < 2:
        raise StarError("a ⋆-interpretation needs n >= 2")
    leaf_nodes = set(all_leaves(n)) if leaves is None else set()
    for bits in leaves or ():
        if is_tree(bits):
            bits = bits_of(bits)
        if any(c not in "01" for c in bits) or len(bits) != n - 1:
            raise StarError(f"leaf {bits!r} is not a bit string of length {n - 1}")
        leaf_nodes.add(node(bits))
    tree = set(StarInterpretation(n, frozenset(leaf_nodes), {}, {}).tree)
    rho, top = {}, {}
    for name, entry in rho_family.items():
        spec, value = (entry, "") if isinstance(entry, RhoSpec) else entry
        if is_number(value):
            raise StarError(f"f_{name}({n - 1}) must lie in T, got the number {value}")
        elem = value if is_tree(value) else node(value)
        if elem not in tree:
            raise StarError(f"f_{name}({n - 1}) = {value!r} is outside the T-part")
        rho[name] = spec
        top[name] = elem
    star = StarInterpretation(n, frozenset(leaf_nodes), rho, top, dict(assignment or {}))
    check_star(star)
    return star


def check_star(star: StarInterpretation) -> None:
    """Raise StarError unless every clause of the definition holds."""
    m = star.to_interpretation()
    dom = m.domains[SIGMA1]
    nums = {e for (e,) in m.predicates["N"]}
    tree = {e for (e,) in m.predicates["T"]}
    if nums & tree or nums | tree != set(dom):
        raise StarError("N and T must partition the domain")
    if nums != set(range(star.n)):
        raise StarError("N must be [0, n-1]")
    expected_tree = {node("".join(b)) for k in range(star.n - 1) for b in itertools.product("01", repeat=k)}
    if not expected_tree <= tree:
        raise StarError("T must contain every sequence of length <= n-2")
    if any(len(bits_of(e)) != star.n - 1 for e in tree - expected_tree):
        raise StarError("extra T elements must have length n-1")
    lt = m.predicates["<"]
    if lt != {(a, b) for a in nums for b in nums if a < b}:
        raise StarError("< must be the order of N")
    for r, spec in star.rho.items():
        table = m.functions[f"f_{r}"]
        for k in range(star.n - 1):
            if table[(k,)] != node(spec.prefix(k)):
                raise StarError(f"f_{r}({k}) is not the prefix of length {k}")
        if table[(star.n - 1,)] not in tree:
            raise StarError(f"f_{r}({star.n - 1}) outside T")
        for t in tree:
            if table[(t,)] != t:
                raise StarError(f"f_{r} must fix {t}")
    for v, val in star.assignment.items():
        if val not in set(dom):
            raise StarError(f"{v.name} assigned outside the domain")


def is_star(star: StarInterpretation) -> bool:
    try:
        check_star(star)
    except StarError:
        return False
    return True


def sample_star() -> StarInterpretation:
    """n=4, full leaves, ρ = 000..., f_ρ(3) = 10."""
    return build_star(4, None, {"rho": (RhoSpec("", "0"), "10")})


# ---------------------------------------------------------------------------
# Growth by one element
# ---------------------------------------------------------------------------


def grow_star(star: StarInterpretation) -> tuple[StarInterpretation, str]:
    """A ⋆-interpretation one element larger that preserves every literal
    true in ``star`` under the transported assignment.

    Case I (all leaves present): add a level.  The new top number takes the
    old top's f-values, old leaves become inner nodes, and variables at the
    old top move to the new top.  Case II: add the first missing leaf.
    """
    if star.full:
        n = star.n + 1
        top = dict(star.top)
        assignment = {v: (n - 1 if val == star.n - 1 else val) for v, val in star.assignment.items()}
        grown = StarInterpretation(n, frozenset(), dict(star.rho), top, assignment)
        case = "I"
    else:
        missing = sorted(all_leaves(star.n) - star.leaves)
        grown = StarInterpretation(star.n, star.leaves | {missing[0]}, dict(star.rho), dict(star.top),
                                   dict(star.assignment))
        case = "II"
    check_star(grown)
    if grown.size != star.size + 1:
        raise AssertionError("growth must add exactly one element")
    return grown, case


def transport(star: StarInterpretation, grown: StarInterpretation, value):
    """Image of an element of ``star`` in ``grown``."""
    if grown.n == star.n + 1 and value == star.n - 1:
        return grown.n - 1
    return value


def literal_corpus(star: StarInterpretation, variables: Sequence[Var]) -> list[Formula]:
    """Every literal of the five kinds over ``variables``: ±N(x), ±T(x),
    ±(x<y), ±(x=y), ±(f_ρ(x)=y)."""
    from .logic import T_PRED

    sig = star.signature()
    lits: list[Formula] = []
    for x in variables:
        lits += [Pred(N_PRED, (x,)), Pred(T_PRED, (x,))]
    for x, y in itertools.product(variables, repeat=2):
        lits.append(Pred(LT, (x, y)))
        if x != y:
            lits.append(Eq(x, y))
        for r in sorted(star.rho):
            lits.append(Eq(App(sig.function(f"f_{r}"), (x,)), y))
    return lits + [Not(a) for a in lits]


def literal_kind(lit: Formula) -> str:
    atom = lit.arg if isinstance(lit, Not) else lit
    if isinstance(atom, Pred):
        return atom.symbol.name
    if isinstance(atom.left, App):
        return "f"
    return "="


def growth_preserves(star: StarInterpretation, literals: Iterable[Formula]) -> tuple[StarInterpretation, str, list]:
    """Grow once; return the grown structure, the case and the literals that
    held before but fail after (empty when growth is literal-preserving)."""
    grown, case = grow_star(star)
    grown = grown.with_assignment({v: transport(star, grown, val) for v, val in star.assignment.items()})
    a, b = star.to_interpretation(), grown.to_interpretation()
    broken = [lit for lit in literals if evaluate(a, lit) and not evaluate(b, lit)]
    return grown, case, broken


def distinguishing_failures(star: StarInterpretation) -> list[tuple[str, str, int]]:
    """Pairs (ρ, τ, m) with m <= n-2 where the prefixes differ but f_ρ(m) = f_τ(m)."""
    out = []
    for r, t in itertools.combinations(sorted(star.rho), 2):
        for m in range(1, star.n - 1):
            if star.rho[r].prefix(m) != star.rho[t].prefix(m) and star.f(r, m) == star.f(t, m):
                out.append((r, t, m))
    return out


def star_member(interp: FiniteInterpretation, rho: Mapping[str, RhoSpec]) -> bool:
    """Whether an encoded interpretation is a ⋆-interpretation for the ρ-family."""
    dom = interp.domains[SIGMA1]
    nums = sorted(e for e in dom if is_number(e))
    trees = [e for e in dom if is_tree(e)]
    if len(nums) + len(trees) != len(dom) or not nums:
        return False
    n = len(nums)
    if nums != list(range(n)) or n < 2:
        return False
    leaves = frozenset(e for e in trees if len(bits_of(e)) == n - 1)
    names = [f[2:] for f in interp.functions if f.startswith("f_")]
    if any(r not in rho for r in names):
        return False
    top = {r: interp.functions[f"f_{r}"][(n - 1,)] for r in names}
    if any(not is_tree(v) for v in top.values()):
        return False
    cand = StarInterpretation(n, leaves, {r: rho[r] for r in names}, top, dict(interp.assignment))
    if not is_star(cand):
        return False
    ref = cand.to_interpretation()
    return (
        set(dom) == set(ref.domains[SIGMA1])
        and {k: frozenset(v) for k, v in interp.predicates.items()} == dict(ref.predicates)
        and all(dict(interp.functions[k]) == dict(ref.functions[k]) for k in ref.functions)
    )


DEFAULT_RHOS = {
    "a": RhoSpec("", "0"),
    "b": RhoSpec("1", "0"),
    "c": RhoSpec("01", "0"),
    "d": RhoSpec("11", "0"),
}


def make_star_theory(cfg):
    from .theories import TheoryHandle

    rho = dict(DEFAULT_RHOS)

    def membership(interp: FiniteInterpretation) -> bool:
        return star_member(interp, rho)

    return TheoryHandle(
        name="star", family="star", signature=SIGMA_STAR, membership=membership,
        flags={"one_sorted": True, "smooth": False, "finitely_smooth": True},
        generated_closed=False, config=cfg,
    )
