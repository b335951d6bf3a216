"""Flat conjunctions: every function application names its value with a variable."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .logic import (
    FALSE,
    App,
    Const,
    Eq,
    Formula,
    FreshVars,
    LogicError,
    Not,
    Pred,
    Var,
    conj,
    conjuncts,
    free_vars,
    is_literal,
)


@dataclass(frozen=True)
class FlatConjunction:
    """Definitions ``f(v1..vk)=w`` followed by flat literals over variables.

    ``fresh`` lists the variables introduced by flattening, in creation order.
    """

    definitions: tuple[Eq, ...]
    literals: tuple[Formula, ...]
    fresh: tuple[Var, ...] = ()

    @property
    def all_literals(self) -> tuple[Formula, ...]:
        return self.definitions + self.literals

    def formula(self) -> Formula:
        return conj(self.all_literals)

    @property
    def variables(self) -> tuple[Var, ...]:
        return free_vars(self.formula())

    @property
    def is_false(self) -> bool:
        return FALSE in self.literals


def is_flat_literal(lit: Formula) -> bool:
    if isinstance(lit, Const):
        return True
    neg = isinstance(lit, Not)
    atom = lit.arg if neg else lit
    if isinstance(atom, Pred):
        return all(isinstance(a, Var) for a in atom.args)
    if isinstance(atom, Eq):
        l, r = atom.left, atom.right
        if isinstance(l, Var) and isinstance(r, Var):
            return True
        if not neg and isinstance(l, App) and isinstance(r, Var):
            return all(isinstance(a, Var) for a in l.args)
    return False


def flatten(phi: Formula, fresh: Optional[FreshVars] = None) -> FlatConjunction:
    """Name every nested application by a fresh variable.

    One fresh variable per distinct subterm.  A positive equation between an
    unnamed application and a variable becomes that application's definition,
    so ``f(f(x))=x`` flattens to ``f(x)=_w0 ∧ f(_w0)=x``.
    """
    lits = conjuncts(phi)
    for lit in lits:
        if not is_literal(lit):
            raise LogicError("flatten expects a conjunction of literals")
    fresh = fresh or FreshVars(phi)
    names: dict = {}
    defs: list[Eq] = []
    others: list[Formula] = []
    created: list[Var] = []

    def name(t):
        if isinstance(t, Var):
            return t
        if t in names:
            return names[t]
        args = tuple(name(a) for a in t.args)
        w = fresh(t.symbol.result)
        created.append(w)
        defs.append(Eq(App(t.symbol, args), w))
        names[t] = w
        return w

    for lit in lits:
        if isinstance(lit, Const):
            if not lit.value:
                others.append(FALSE)
            continue
        neg = isinstance(lit, Not)
        atom = lit.arg if neg else lit
        if isinstance(atom, Pred):
            flat = Pred(atom.symbol, tuple(name(a) for a in atom.args))
        else:
            l, r = atom.left, atom.right
            if not neg and isinstance(r, App) and isinstance(l, Var):
                l, r = r, l
            if not neg and isinstance(l, App) and isinstance(r, Var) and l not in names:
                args = tuple(name(a) for a in l.args)
                if l in names:  # named while flattening its own arguments
                    flat = Eq(names[l], r)
                else:
                    defs.append(Eq(App(l.symbol, args), r))
                    names[l] = r
                    continue
            else:
                flat = Eq(name(l), name(r))
        others.append(Not(flat) if neg else flat)
    return FlatConjunction(tuple(defs), tuple(others), tuple(created))
