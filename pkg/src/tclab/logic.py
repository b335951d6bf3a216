"""Many-sorted first-order syntax, finite interpretations and evaluation.

Everything here is immutable after construction.  Formulas are plain frozen
dataclasses compared structurally; no hash-consing.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Sequence

FRESH_PREFIX = "_w"


class LogicError(Exception):
    """Base class for errors raised by the logic kernel."""


class SortError(LogicError):
    pass


class UnknownSymbolError(LogicError):
    pass


class UnassignedVariableError(LogicError):
    pass


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name


SIGMA1 = Sort("sigma1")
SIGMA2 = Sort("sigma2")


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[Sort, ...]
    result: Sort

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    args: tuple[Sort, ...]

    @property
    def arity(self) -> int:
        return len(self.args)


_PRED_FAMILY_RE = re.compile(r"^(?P<prefix>.+?)(?P<index>[1-9][0-9]*)$")


@dataclass(frozen=True)
class Signature:
    """Sorts, function symbols and predicate symbols.

    Equality is implicit for every sort.  Two lazy families are supported:
    ``predicate_family="P"`` makes every nullary ``P1, P2, ...`` available, and
    ``function_family="f"`` makes every unary ``f_<name>`` on the first sort
    available.  Lazy members are materialized on lookup; `instantiate` turns a
    finite cut of them into ordinary symbols.
    """

    sorts: tuple[Sort, ...]
    functions: tuple[FunctionSymbol, ...] = ()
    predicates: tuple[PredicateSymbol, ...] = ()
    predicate_family: Optional[str] = None
    function_family: Optional[str] = None

    def __post_init__(self):
        if not self.sorts:
            raise SortError("a signature needs at least one sort")
        names = [s.name for s in self.sorts]
        if len(set(names)) != len(names):
            raise SortError(f"duplicate sort names in {names}")
        declared = set(self.sorts)
        for sym in (*self.functions, *self.predicates):
            for s in sym.args:
                if s not in declared:
                    raise SortError(f"{sym.name}: undeclared sort {s}")
        for fn in self.functions:
            if fn.result not in declared:
                raise SortError(f"{fn.name}: undeclared sort {fn.result}")
        symbols = [s.name for s in (*self.functions, *self.predicates)]
        if len(set(symbols)) != len(symbols):
            raise SortError("duplicate symbol names")

    @property
    def default_sort(self) -> Sort:
        return self.sorts[0]

    @property
    def is_lazy(self) -> bool:
        return self.predicate_family is not None or self.function_family is not None

    @property
    def is_empty(self) -> bool:
        return not (self.functions or self.predicates or self.is_lazy)

    @property
    def is_algebraic(self) -> bool:
        return not self.predicates and self.predicate_family is None

    def sort(self, name: str) -> Sort:
        for s in self.sorts:
            if s.name == name:
                return s
        raise UnknownSymbolError(f"unknown sort {name!r}")

    def function(self, name: str) -> FunctionSymbol:
        for fn in self.functions:
            if fn.name == name:
                return fn
        fam = self.function_family
        if fam is not None and name.startswith(fam + "_") and len(name) > len(fam) + 1:
            s = self.default_sort
            return FunctionSymbol(name, (s,), s)
        raise UnknownSymbolError(f"unknown function symbol {name!r}")

    def predicate(self, name: str) -> PredicateSymbol:
        for p in self.predicates:
            if p.name == name:
                return p
        fam = self.predicate_family
        if fam is not None:
            m = _PRED_FAMILY_RE.match(name)
            if m and m.group("prefix") == fam:
                return PredicateSymbol(name, ())
        raise UnknownSymbolError(f"unknown predicate symbol {name!r}")

    def has_function(self, name: str) -> bool:
        try:
            self.function(name)
        except UnknownSymbolError:
            return False
        return True

    def has_predicate(self, name: str) -> bool:
        try:
            self.predicate(name)
        except UnknownSymbolError:
            return False
        return True

    def instantiate(self, predicate_cut: int = 0, function_names: Iterable[str] = ()) -> "Signature":
        """Finite signature with the first `predicate_cut` family predicates
        and the named family functions added as ordinary symbols."""
        preds = list(self.predicates)
        if self.predicate_family is not None:
            preds += [PredicateSymbol(f"{self.predicate_family}{i}", ()) for i in range(1, predicate_cut + 1)]
        funcs = list(self.functions)
        if self.function_family is not None:
            funcs += [self.function(f"{self.function_family}_{n}") for n in function_names]
        return Signature(self.sorts, tuple(funcs), tuple(preds))

    def with_sorts(self, *extra: Sort) -> "Signature":
        return Signature(self.sorts + tuple(extra), self.functions, self.predicates,
                         self.predicate_family, self.function_family)


F = FunctionSymbol("f", (SIGMA1,), SIGMA1)
P = PredicateSymbol("P", (SIGMA1,))
N_PRED = PredicateSymbol("N", (SIGMA1,))
T_PRED = PredicateSymbol("T", (SIGMA1,))
LT = PredicateSymbol("<", (SIGMA1, SIGMA1))

SIGMA_1 = Signature((SIGMA1,))
SIGMA_F = Signature((SIGMA1,), (F,))
SIGMA_F2 = Signature((SIGMA1, SIGMA2), (F,))
SIGMA_P = Signature((SIGMA1,), (), (P,))
SIGMA_PN = Signature((SIGMA1,), predicate_family="P")
SIGMA_STAR = Signature((SIGMA1,), (), (N_PRED, T_PRED, LT), function_family="f")


# ---------------------------------------------------------------------------
# Terms and formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Var:
    name: str
    sort: Sort = SIGMA1

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    symbol: FunctionSymbol
    args: tuple

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise SortError(f"{self.symbol.name} expects {self.symbol.arity} arguments, got {len(self.args)}")
        for want, arg in zip(self.symbol.args, self.args):
            if term_sort(arg) != want:
                raise SortError(f"{self.symbol.name}: argument of sort {term_sort(arg)}, expected {want}")


Term = Any  # Var | App


def term_sort(t) -> Sort:
    if isinstance(t, Var):
        return t.sort
    return t.symbol.result


def iterate(fn: FunctionSymbol, n: int, x):
    """The term fn^n(x); fn^0(x) is x itself."""
    if n < 0:
        raise ValueError("negative iteration count")
    t = x
    for _ in range(n):
        t = App(fn, (t,))
    return t


class Formula:
    """Marker base class for formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Eq(Formula):
    left: Any
    right: Any

    def __post_init__(self):
        ls, rs = term_sort(self.left), term_sort(self.right)
        if ls != rs:
            raise SortError(f"equality between sorts {ls} and {rs}")


@dataclass(frozen=True)
class Pred(Formula):
    symbol: PredicateSymbol
    args: tuple = ()

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise SortError(f"{self.symbol.name} expects {self.symbol.arity} arguments, got {len(self.args)}")
        for want, arg in zip(self.symbol.args, self.args):
            if term_sort(arg) != want:
                raise SortError(f"{self.symbol.name}: argument of sort {term_sort(arg)}, expected {want}")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction builder: drops ``true``, collapses 0 and 1 conjuncts."""
    items = [p for p in parts if p != TRUE]
    if any(p == FALSE for p in items):
        return FALSE
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(parts: Iterable[Formula]) -> Formula:
    items = [p for p in parts if p != FALSE]
    if any(p == TRUE for p in items):
        return TRUE
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def neq(a, b) -> Formula:
    return Not(Eq(a, b))


# ---------------------------------------------------------------------------
# Syntactic queries
# ---------------------------------------------------------------------------


def term_vars(t) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


def _walk_vars(phi: Formula, bound: frozenset) -> Iterator[Var]:
    if isinstance(phi, Const):
        return
    if isinstance(phi, Eq):
        for v in itertools.chain(term_vars(phi.left), term_vars(phi.right)):
            if v not in bound:
                yield v
    elif isinstance(phi, Pred):
        for a in phi.args:
            for v in term_vars(a):
                if v not in bound:
                    yield v
    elif isinstance(phi, Not):
        yield from _walk_vars(phi.arg, bound)
    elif isinstance(phi, (And, Or)):
        for a in phi.args:
            yield from _walk_vars(a, bound)
    elif isinstance(phi, Implies):
        yield from _walk_vars(phi.left, bound)
        yield from _walk_vars(phi.right, bound)
    elif isinstance(phi, (Forall, Exists)):
        yield from _walk_vars(phi.body, bound | {phi.var})
    else:
        raise TypeError(f"not a formula: {phi!r}")


def free_vars(phi: Formula) -> tuple[Var, ...]:
    """Free variables in order of first occurrence."""
    return tuple(dict.fromkeys(_walk_vars(phi, frozenset())))


def vars_by_sort(phi: Formula) -> dict[Sort, tuple[Var, ...]]:
    out: dict[Sort, list[Var]] = {}
    for v in free_vars(phi):
        out.setdefault(v.sort, []).append(v)
    return {s: tuple(vs) for s, vs in out.items()}


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Forall, Exists)):
        return False
    if isinstance(phi, Not):
        return is_quantifier_free(phi.arg)
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(a) for a in phi.args)
    if isinstance(phi, Implies):
        return is_quantifier_free(phi.left) and is_quantifier_free(phi.right)
    return True


def require_qf(phi: Formula) -> None:
    if not is_quantifier_free(phi):
        raise LogicError("quantifier-free formula required")


def is_literal(phi: Formula) -> bool:
    if isinstance(phi, Not):
        phi = phi.arg
    return isinstance(phi, (Eq, Pred, Const))


def conjuncts(phi: Formula) -> tuple[Formula, ...]:
    """Flatten nested conjunctions; ``true`` is the empty conjunction."""
    if phi == TRUE:
        return ()
    if isinstance(phi, And):
        out: list[Formula] = []
        for a in phi.args:
            out.extend(conjuncts(a))
        return tuple(out)
    return (phi,)


def symbols_of(phi: Formula) -> tuple[set[str], set[str]]:
    """Names of (function, predicate) symbols occurring in phi."""
    funcs: set[str] = set()
    preds: set[str] = set()

    def term(t):
        if isinstance(t, App):
            funcs.add(t.symbol.name)
            for a in t.args:
                term(a)

    def walk(p):
        if isinstance(p, Eq):
            term(p.left)
            term(p.right)
        elif isinstance(p, Pred):
            preds.add(p.symbol.name)
            for a in p.args:
                term(a)
        elif isinstance(p, Not):
            walk(p.arg)
        elif isinstance(p, (And, Or)):
            for a in p.args:
                walk(a)
        elif isinstance(p, Implies):
            walk(p.left)
            walk(p.right)
        elif isinstance(p, (Forall, Exists)):
            walk(p.body)

    walk(phi)
    return funcs, preds


# ---------------------------------------------------------------------------
# Formula builders
# ---------------------------------------------------------------------------


def distinct_formula(variables: Sequence) -> Formula:
    """Pairwise disequality of the given same-sort terms."""
    if len(variables) < 2:
        raise ValueError("distinct needs at least two terms")
    sorts = {term_sort(v) for v in variables}
    if len(sorts) != 1:
        raise SortError(f"distinct over mixed sorts {sorted(s.name for s in sorts)}")
    return conj(neq(a, b) for a, b in itertools.combinations(variables, 2))


def cardinality_sentence(kind: str, sort: Sort, n: int) -> Formula:
    """``geq``: at least n elements; ``leq``: at most n; ``eq``: exactly n.

    ``leq`` is taken verbatim: exists x1..xn, forall y, y = x1 or ... or y = xn,
    without requiring the xi distinct.
    """
    if n < 1:
        raise ValueError("cardinality bound must be positive")
    xs = [Var(f"_c{i}", sort) for i in range(1, n + 1)]
    if kind == "geq":
        body = distinct_formula(xs) if n >= 2 else Eq(xs[0], xs[0])
        out: Formula = body
        for x in reversed(xs):
            out = Exists(x, out)
        return out
    if kind == "leq":
        y = Var("_cy", sort)
        out = Forall(y, disj(Eq(y, x) for x in xs))
        for x in reversed(xs):
            out = Exists(x, out)
        return out
    if kind == "eq":
        return And((cardinality_sentence("geq", sort, n), cardinality_sentence("leq", sort, n)))
    raise ValueError(f"unknown cardinality kind {kind!r}")


def proper_divisors(n: int) -> list[int]:
    return [m for m in range(1, n) if n % m == 0]


def cycle_formula(n: int, x: Var, fn: FunctionSymbol = F) -> Formula:
    """x lies on a cycle of length exactly n: f^n(x)=x and f^m(x)!=x for each
    proper divisor m of n."""
    if n < 1:
        raise ValueError("cycle length must be positive")
    if fn.args != (term_sort(x),) or fn.result != term_sort(x):
        raise SortError(f"{fn.name} is not a self-map on the sort of {x}")
    return conj([Eq(iterate(fn, n, x), x)] + [neq(iterate(fn, m, x), x) for m in proper_divisors(n)])


# ---------------------------------------------------------------------------
# Finite interpretations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteInterpretation:
    """A finite structure plus a variable assignment.

    ``functions[name]`` maps argument tuples to values; ``predicates[name]`` is
    the set of argument tuples where the predicate holds (``{()}`` for a true
    nullary predicate).  Tables only need entries for symbols that are used.
    """

    signature: Signature
    domains: Mapping[Sort, tuple]
    functions: Mapping[str, Mapping[tuple, Any]] = field(default_factory=dict)
    predicates: Mapping[str, frozenset] = field(default_factory=dict)
    assignment: Mapping[Var, Any] = field(default_factory=dict)

    def size(self, sort: Sort | None = None) -> int:
        return len(self.domains[sort or self.signature.default_sort])

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(self.domains[s]) for s in self.signature.sorts)

    def with_assignment(self, assignment: Mapping[Var, Any]) -> "FiniteInterpretation":
        return FiniteInterpretation(self.signature, self.domains, self.functions, self.predicates, dict(assignment))

    def value(self, t):
        return eval_term(self, t)

    def unary(self, name: str = "f") -> dict:
        """The table of a unary function as element -> element."""
        return {args[0]: v for args, v in self.functions[name].items()}

    def check(self) -> None:
        """Raise LogicError unless every invariant holds."""
        for s in self.signature.sorts:
            if s not in self.domains or not self.domains[s]:
                raise LogicError(f"domain of {s} missing or empty")
            if len(set(self.domains[s])) != len(self.domains[s]):
                raise LogicError(f"duplicate elements in domain of {s}")
        for name, table in self.functions.items():
            sym = self.signature.function(name)
            for args in itertools.product(*(self.domains[s] for s in sym.args)):
                if args not in table:
                    raise LogicError(f"{name} undefined at {args}")
                if table[args] not in self.domains[sym.result]:
                    raise LogicError(f"{name}{args} = {table[args]!r} outside its domain")
        for name, rows in self.predicates.items():
            sym = self.signature.predicate(name)
            for row in rows:
                if len(row) != sym.arity or any(a not in self.domains[s] for a, s in zip(row, sym.args)):
                    raise LogicError(f"bad tuple {row} in {name}")
        for v, val in self.assignment.items():
            if v.sort not in self.domains or val not in self.domains[v.sort]:
                raise SortError(f"{v.name} assigned {val!r} outside the domain of {v.sort}")

    def __eq__(self, other):
        if not isinstance(other, FiniteInterpretation):
            return NotImplemented
        return (
            self.signature == other.signature
            and {s: tuple(d) for s, d in self.domains.items()} == {s: tuple(d) for s, d in other.domains.items()}
            and {k: dict(v) for k, v in self.functions.items()} == {k: dict(v) for k, v in other.functions.items()}
            and {k: frozenset(v) for k, v in self.predicates.items()}
            == {k: frozenset(v) for k, v in other.predicates.items()}
            and dict(self.assignment) == dict(other.assignment)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        doms = ", ".join(f"{s}:{len(d)}" for s, d in self.domains.items())
        return f"FiniteInterpretation({doms}, assignment={dict((v.name, a) for v, a in self.assignment.items())})"


def unary_interpretation(succ: Sequence[int], assignment: Mapping[Var, int] | None = None,
                         signature: Signature = SIGMA_F, fn: str = "f") -> FiniteInterpretation:
    """Σ_f-interpretation on {0..n-1} whose function is i -> succ[i]."""
    dom = tuple(range(len(succ)))
    return FiniteInterpretation(
        signature,
        {signature.default_sort: dom},
        {fn: {(i,): succ[i] for i in dom}},
        {},
        dict(assignment or {}),
    )


def eval_term(interp: FiniteInterpretation, t):
    if isinstance(t, Var):
        try:
            return interp.assignment[t]
        except KeyError:
            raise UnassignedVariableError(f"variable {t.name} is not assigned") from None
    name = t.symbol.name
    table = interp.functions.get(name)
    if table is None:
        raise UnknownSymbolError(f"function {name!r} has no table in this interpretation")
    args = tuple(eval_term(interp, a) for a in t.args)
    try:
        return table[args]
    except KeyError:
        raise LogicError(f"{name} undefined at {args}") from None


def evaluate(interp: FiniteInterpretation, phi: Formula) -> bool:
    """Truth value of phi in interp; quantifiers range over the finite domains."""
    if isinstance(phi, Const):
        return phi.value
    if isinstance(phi, Eq):
        return eval_term(interp, phi.left) == eval_term(interp, phi.right)
    if isinstance(phi, Pred):
        name = phi.symbol.name
        if name not in interp.predicates:
            if not interp.signature.has_predicate(name):
                raise UnknownSymbolError(f"predicate {name!r} not in signature")
            raise UnknownSymbolError(f"predicate {name!r} has no table in this interpretation")
        return tuple(eval_term(interp, a) for a in phi.args) in interp.predicates[name]
    if isinstance(phi, Not):
        return not evaluate(interp, phi.arg)
    if isinstance(phi, And):
        return all(evaluate(interp, a) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate(interp, a) for a in phi.args)
    if isinstance(phi, Implies):
        return (not evaluate(interp, phi.left)) or evaluate(interp, phi.right)
    if isinstance(phi, (Forall, Exists)):
        v = phi.var
        if v.sort not in interp.domains:
            raise SortError(f"no domain for sort {v.sort}")
        test = all if isinstance(phi, Forall) else any
        base = dict(interp.assignment)

        def holds(elem):
            base[v] = elem
            return evaluate(interp.with_assignment(base), phi.body)

        return test(holds(e) for e in interp.domains[v.sort])
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Compiled evaluation for search loops
# ---------------------------------------------------------------------------

Env = tuple  # (assignment dict, function tables dict, predicate tables dict)


def _compile_term(t):
    if isinstance(t, Var):
        return lambda a, fs: a[t]
    name = t.symbol.name
    if t.symbol.arity == 1:
        sub = _compile_term(t.args[0])
        return lambda a, fs: fs[name][(sub(a, fs),)]
    subs = [_compile_term(x) for x in t.args]
    return lambda a, fs: fs[name][tuple(s(a, fs) for s in subs)]


def compile_formula(phi: Formula) -> Callable[[dict, dict, dict], bool]:
    """Closure ``ev(assignment, functions, predicates)`` for a QF formula."""
    require_qf(phi)
    if isinstance(phi, Const):
        val = phi.value
        return lambda a, fs, ps: val
    if isinstance(phi, Eq):
        lt, rt = _compile_term(phi.left), _compile_term(phi.right)
        return lambda a, fs, ps: lt(a, fs) == rt(a, fs)
    if isinstance(phi, Pred):
        name = phi.symbol.name
        subs = [_compile_term(x) for x in phi.args]
        return lambda a, fs, ps: tuple(s(a, fs) for s in subs) in ps[name]
    if isinstance(phi, Not):
        sub = compile_formula(phi.arg)
        return lambda a, fs, ps: not sub(a, fs, ps)
    if isinstance(phi, And):
        subs = [compile_formula(x) for x in phi.args]
        return lambda a, fs, ps: all(s(a, fs, ps) for s in subs)
    if isinstance(phi, Or):
        subs = [compile_formula(x) for x in phi.args]
        return lambda a, fs, ps: any(s(a, fs, ps) for s in subs)
    if isinstance(phi, Implies):
        lf, rf = compile_formula(phi.left), compile_formula(phi.right)
        return lambda a, fs, ps: (not lf(a, fs, ps)) or rf(a, fs, ps)
    raise TypeError(f"not a formula: {phi!r}")


def _compile_partial_term(t):
    if isinstance(t, Var):
        return lambda a, fs: a.get(t)
    name = t.symbol.name
    subs = [_compile_partial_term(x) for x in t.args]

    def ev(a, fs):
        args = []
        for s in subs:
            v = s(a, fs)
            if v is None:
                return None
            args.append(v)
        return fs[name].get(tuple(args))

    return ev


def compile_partial(phi: Formula) -> Callable[[dict, dict, dict], Optional[bool]]:
    """Kleene three-valued evaluation over partial tables.

    Unassigned variables and undefined function entries evaluate to None; a
    predicate table of None means "not chosen yet".
    """
    require_qf(phi)
    if isinstance(phi, Const):
        val = phi.value
        return lambda a, fs, ps: val
    if isinstance(phi, Eq):
        lt, rt = _compile_partial_term(phi.left), _compile_partial_term(phi.right)

        def ev_eq(a, fs, ps):
            x = lt(a, fs)
            if x is None:
                return None
            y = rt(a, fs)
            if y is None:
                return None
            return x == y

        return ev_eq
    if isinstance(phi, Pred):
        name = phi.symbol.name
        subs = [_compile_partial_term(x) for x in phi.args]

        def ev_pred(a, fs, ps):
            table = ps.get(name)
            if table is None:
                return None
            args = []
            for s in subs:
                v = s(a, fs)
                if v is None:
                    return None
                args.append(v)
            return tuple(args) in table

        return ev_pred
    if isinstance(phi, Not):
        sub = compile_partial(phi.arg)

        def ev_not(a, fs, ps):
            v = sub(a, fs, ps)
            return None if v is None else not v

        return ev_not
    if isinstance(phi, (And, Or)):
        subs = [compile_partial(x) for x in phi.args]
        absorbing = isinstance(phi, Or)

        def ev_junction(a, fs, ps):
            unknown = False
            for s in subs:
                v = s(a, fs, ps)
                if v is None:
                    unknown = True
                elif v == absorbing:
                    return absorbing
            return None if unknown else (not absorbing)

        return ev_junction
    if isinstance(phi, Implies):
        return compile_partial(Or((Not(phi.left), phi.right)))
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Arrangements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrangement:
    """A sort-respecting partition of a finite variable set.

    ``blocks`` list members in the order of ``variables``; blocks are ordered
    by their first member.
    """

    variables: tuple[Var, ...]
    blocks: tuple[tuple[Var, ...], ...]

    def __post_init__(self):
        seen = [v for b in self.blocks for v in b]
        if sorted(seen) != sorted(self.variables) or len(set(seen)) != len(seen):
            raise ValueError("blocks must partition the variable set exactly")
        for b in self.blocks:
            if len({v.sort for v in b}) > 1:
                raise SortError("arrangement block mixes sorts")

    @classmethod
    def from_blocks(cls, variables: Sequence[Var], blocks: Iterable[Iterable[Var]]) -> "Arrangement":
        order = {v: i for i, v in enumerate(variables)}
        bs = [tuple(sorted(b, key=order.__getitem__)) for b in blocks if b]
        bs.sort(key=lambda b: order[b[0]])
        return cls(tuple(variables), tuple(bs))

    def block_of(self, v: Var) -> int:
        for i, b in enumerate(self.blocks):
            if v in b:
                return i
        raise KeyError(v)

    def class_map(self) -> dict[Var, int]:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    def count(self, sort: Sort) -> int:
        return sum(1 for b in self.blocks if b[0].sort == sort)

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "; ".join("=".join(v.name for v in b) for b in self.blocks)


def _rgs(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n (set partitions of n items)."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i: int, m: int):
        if i == n:
            yield tuple(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    a[0] = 0
    yield from rec(1, 0)


def enumerate_arrangements(variables: Iterable[Var]) -> Iterator[Arrangement]:
    """All sort-respecting partitions of ``variables``, each once.

    Order: fewest blocks first (coarsest refinement level), ties broken
    lexicographically by the per-sort restricted growth strings.
    """
    vs = tuple(dict.fromkeys(variables))
    by_sort: dict[Sort, list[Var]] = {}
    for v in vs:
        by_sort.setdefault(v.sort, []).append(v)
    groups = list(by_sort.values())
    items = []
    for combo in itertools.product(*(list(_rgs(len(g))) for g in groups)):
        nblocks = sum((max(r) + 1) if r else 0 for r in combo)
        items.append((nblocks, combo))
    items.sort(key=lambda it: it[0])
    for _, combo in items:
        blocks: list[list[Var]] = []
        for g, r in zip(groups, combo):
            local: dict[int, list[Var]] = {}
            for v, label in zip(g, r):
                local.setdefault(label, []).append(v)
            blocks.extend(local.values())
        yield Arrangement.from_blocks(vs, blocks)


def arrangement_formula(delta: Arrangement) -> Formula:
    """x=y for same-block pairs, not(x=y) for different-block pairs of one sort."""
    cls = delta.class_map()
    lits = []
    for a, b in itertools.combinations(delta.variables, 2):
        if a.sort != b.sort:
            continue
        lits.append(Eq(a, b) if cls[a] == cls[b] else neq(a, b))
    return conj(lits)


def induced_arrangement(interp: FiniteInterpretation, variables: Iterable[Var]) -> Arrangement:
    vs = tuple(dict.fromkeys(variables))
    groups: dict[tuple, list[Var]] = {}
    for v in vs:
        if v not in interp.assignment:
            raise UnassignedVariableError(f"variable {v.name} is not assigned")
        groups.setdefault((v.sort, interp.assignment[v]), []).append(v)
    return Arrangement.from_blocks(vs, groups.values())


class FreshVars:
    """Deterministic supply of reserved-prefix variables avoiding names in use."""

    def __init__(self, *avoid: Formula | Iterable[Var]):
        self.used: set[str] = set()
        for item in avoid:
            vs = free_vars(item) if isinstance(item, Formula) else item
            self.used.update(v.name for v in vs)
        self.counter = 0

    def __call__(self, sort: Sort = SIGMA1) -> Var:
        while f"{FRESH_PREFIX}{self.counter}" in self.used:
            self.counter += 1
        name = f"{FRESH_PREFIX}{self.counter}"
        self.used.add(name)
        self.counter += 1
        return Var(name, sort)


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------


def nnf(phi: Formula, negate: bool = False) -> Formula:
    """Negation normal form of a QF formula (implications eliminated)."""
    if isinstance(phi, Const):
        return Const(phi.value != negate)
    if isinstance(phi, (Eq, Pred)):
        return Not(phi) if negate else phi
    if isinstance(phi, Not):
        return nnf(phi.arg, not negate)
    if isinstance(phi, Implies):
        return nnf(Or((Not(phi.left), phi.right)), negate)
    if isinstance(phi, And):
        parts = tuple(nnf(a, negate) for a in phi.args)
        return Or(parts) if negate else And(parts)
    if isinstance(phi, Or):
        parts = tuple(nnf(a, negate) for a in phi.args)
        return And(parts) if negate else Or(parts)
    raise LogicError("normal forms are only defined for quantifier-free formulas")


def dnf_cubes(phi: Formula) -> list[tuple[Formula, ...]]:
    """Syntactic DNF as a list of literal tuples.

    ``true`` gives one empty cube, ``false`` gives no cubes.  Cubes containing
    a literal and its negation are kept; callers decide satisfiability.
    """

    def rec(p: Formula) -> list[tuple[Formula, ...]]:
        if isinstance(p, Const):
            return [()] if p.value else []
        if isinstance(p, (Eq, Pred, Not)):
            return [(p,)]
        if isinstance(p, Or):
            out: list[tuple[Formula, ...]] = []
            for a in p.args:
                out.extend(rec(a))
            return out
        if isinstance(p, And):
            acc: list[tuple[Formula, ...]] = [()]
            for a in p.args:
                acc = [x + y for x in acc for y in rec(a)]
            return acc
        raise LogicError(f"unexpected node in NNF: {p!r}")

    return rec(nnf(phi))


def subterms(t) -> Iterator:
    """Non-variable subterms of t, innermost first."""
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
        yield t


def literal_terms(lit: Formula) -> tuple:
    atom = lit.arg if isinstance(lit, Not) else lit
    if isinstance(atom, Eq):
        return (atom.left, atom.right)
    if isinstance(atom, Pred):
        return atom.args
    return ()
