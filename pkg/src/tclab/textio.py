"""S-expression syntax for signatures and formulas; JSON for interpretations.

Grammar (see docs/format.md)::

    formula := true | false | (= t t) | (P t ...) | P | (not F) | (and F ...)
             | (or F ...) | (=> F F) | (forall (x sort) F) | (exists (x sort) F)
             | (cycle n x [f]) | (distinct t t ...) | (card>= sort n)
             | (card<= sort n) | (card= sort n)
    term    := x | x:sort | (f t ...)
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterator, Optional

from .logic import (
    And,
    App,
    Const,
    Eq,
    FiniteInterpretation,
    Forall,
    Exists,
    Formula,
    FunctionSymbol,
    Implies,
    LogicError,
    Not,
    Or,
    Pred,
    PredicateSymbol,
    Signature,
    Sort,
    SortError,
    UnknownSymbolError,
    Var,
    cardinality_sentence,
    cycle_formula,
    distinct_formula,
)

RESERVED = {"=", "not", "and", "or", "=>", "forall", "exists", "true", "false", "cycle", "distinct",
            "card>=", "card<=", "card="}


MAX_SUGAR = 1000


class ParseError(ValueError):
    """Error with a machine-readable code and a 1-based position."""

    def __init__(self, code: str, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {code}: {message}")
        self.code = code
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


def _lex(text: str) -> Iterator[tuple[str, str, int, int]]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            yield (c, c, line, col)
            i += 1
            col += 1
            continue
        start, scol = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            if not (text[i].isprintable()):
                raise ParseError("lex", f"unexpected character {text[i]!r}", line, col)
            i += 1
            col += 1
        yield ("atom", text[start:i], line, scol)


def read_sexprs(text: str) -> list:
    """All top-level S-expressions in ``text``."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("lex", f"input is not UTF-8: {exc.reason}", 1, exc.start + 1) from None
    stack: list[list] = []
    opens: list[tuple[int, int]] = []
    out: list = []
    for kind, tok, line, col in _lex(text):
        if kind == "(":
            stack.append([])
            opens.append((line, col))
        elif kind == ")":
            if not stack:
                raise ParseError("parse", "unbalanced ')'", line, col)
            items = stack.pop()
            l0, c0 = opens.pop()
            node = SList(tuple(items), l0, c0)
            (stack[-1] if stack else out).append(node)
        else:
            (stack[-1] if stack else out).append(Atom(tok, line, col))
    if stack:
        lines = text.split("\n")
        raise ParseError("parse", "unexpected end of input, missing ')'", len(lines), len(lines[-1]) + 1)
    return out


def _err(code: str, msg: str, node) -> ParseError:
    return ParseError(code, msg, node.line, node.col)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class _FormulaReader:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.bound: list[Var] = []

    def var(self, atom: Atom) -> Var:
        text = atom.text
        if ":" in text:
            name, _, sname = text.partition(":")
            try:
                sort = self.sig.sort(sname)
            except UnknownSymbolError:
                raise _err("unknown-symbol", f"unknown sort {sname!r}", atom) from None
        else:
            name, sort = text, self.sig.default_sort
        if not name or name in RESERVED or name[0].isdigit():
            raise _err("parse", f"bad variable name {text!r}", atom)
        for b in reversed(self.bound):
            if b.name == name and b.sort == sort:
                return b
        return Var(name, sort)

    def term(self, node):
        if isinstance(node, Atom):
            if self.sig.has_function(node.text):
                fn = self.sig.function(node.text)
                if fn.arity == 0:
                    return App(fn, ())
            return self.var(node)
        if not node.items or not isinstance(node.items[0], Atom):
            raise _err("parse", "expected a function application", node)
        head = node.items[0]
        try:
            fn = self.sig.function(head.text)
        except UnknownSymbolError:
            raise _err("unknown-symbol", f"unknown function {head.text!r}", head) from None
        args = tuple(self.term(a) for a in node.items[1:])
        if len(args) != fn.arity:
            raise _err("arity", f"{fn.name} expects {fn.arity} arguments, got {len(args)}", node)
        try:
            return App(fn, args)
        except SortError as exc:
            raise _err("sort", str(exc), node) from None

    def int_atom(self, node) -> int:
        if not isinstance(node, Atom) or not node.text.isascii() or not node.text.isdigit():
            raise _err("parse", "expected a positive integer", node)
        if len(node.text) > 4 or int(node.text) > MAX_SUGAR:
            raise _err("parse", f"integer above the sugar limit {MAX_SUGAR}", node)
        return int(node.text)

    def sort_atom(self, node) -> Sort:
        if not isinstance(node, Atom):
            raise _err("parse", "expected a sort name", node)
        try:
            return self.sig.sort(node.text)
        except UnknownSymbolError:
            raise _err("unknown-symbol", f"unknown sort {node.text!r}", node) from None

    def formula(self, node) -> Formula:
        if isinstance(node, Atom):
            if node.text == "true":
                return Const(True)
            if node.text == "false":
                return Const(False)
            if self.sig.has_predicate(node.text):
                p = self.sig.predicate(node.text)
                if p.arity == 0:
                    return Pred(p, ())
                raise _err("arity", f"{p.name} expects {p.arity} arguments", node)
            raise _err("unknown-symbol", f"unknown proposition {node.text!r}", node)
        if not node.items:
            raise _err("parse", "empty list", node)
        head = node.items[0]
        if not isinstance(head, Atom):
            raise _err("parse", "expected an operator", node)
        op, args = head.text, node.items[1:]

        def need(k: int):
            if len(args) != k:
                raise _err("arity", f"{op} expects {k} arguments, got {len(args)}", node)

        try:
            if op == "=":
                need(2)
                return Eq(self.term(args[0]), self.term(args[1]))
            if op == "not":
                need(1)
                return Not(self.formula(args[0]))
            if op == "and":
                return And(tuple(self.formula(a) for a in args))
            if op == "or":
                return Or(tuple(self.formula(a) for a in args))
            if op == "=>":
                need(2)
                return Implies(self.formula(args[0]), self.formula(args[1]))
            if op in ("forall", "exists"):
                need(2)
                binder = args[0]
                if not (isinstance(binder, SList) and len(binder.items) == 2
                        and all(isinstance(b, Atom) for b in binder.items)):
                    raise _err("parse", "binder must be (name sort)", binder)
                v = Var(binder.items[0].text, self.sort_atom(binder.items[1]))
                self.bound.append(v)
                try:
                    body = self.formula(args[1])
                finally:
                    self.bound.pop()
                return (Forall if op == "forall" else Exists)(v, body)
            if op == "cycle":
                if len(args) not in (2, 3):
                    raise _err("arity", "cycle expects (cycle n x [f])", node)
                n = self.int_atom(args[0])
                x = self.term(args[1])
                if len(args) == 3 and not isinstance(args[2], Atom):
                    raise _err("parse", "expected a function name", args[2])
                fn = self.sig.function(args[2].text) if len(args) == 3 else self.sig.function("f")
                if n < 1:
                    raise _err("parse", "cycle length must be positive", args[0])
                return cycle_formula(n, x, fn)
            if op == "distinct":
                return distinct_formula([self.term(a) for a in args])
            if op in ("card>=", "card<=", "card="):
                need(2)
                kind = {"card>=": "geq", "card<=": "leq", "card=": "eq"}[op]
                n = self.int_atom(args[1])
                if n < 1:
                    raise _err("parse", "cardinality bound must be positive", args[1])
                return cardinality_sentence(kind, self.sort_atom(args[0]), n)
            try:
                p = self.sig.predicate(op)
            except UnknownSymbolError:
                raise _err("unknown-symbol", f"unknown predicate or operator {op!r}", head) from None
            terms = tuple(self.term(a) for a in args)
            if len(terms) != p.arity:
                raise _err("arity", f"{p.name} expects {p.arity} arguments, got {len(terms)}", node)
            return Pred(p, terms)
        except ParseError:
            raise
        except UnknownSymbolError as exc:
            raise _err("unknown-symbol", str(exc), node) from None
        except SortError as exc:
            raise _err("sort", str(exc), node) from None
        except LogicError as exc:
            raise _err("sort", str(exc), node) from None
        except ValueError as exc:
            raise _err("parse", str(exc), node) from None


def parse_formula(text: str, signature: Signature) -> Formula:
    """Parse exactly one formula."""
    nodes = read_sexprs(text)
    if not nodes:
        raise ParseError("parse", "empty input", 1, 1)
    if len(nodes) > 1:
        raise _err("parse", "more than one formula", nodes[1])
    try:
        return _FormulaReader(signature).formula(nodes[0])
    except RecursionError:
        raise _err("parse", "nesting too deep", nodes[0]) from None


def parse_formulas(text: str, signature: Signature) -> list[Formula]:
    reader = _FormulaReader(signature)
    try:
        return [reader.formula(n) for n in read_sexprs(text)]
    except RecursionError:
        raise ParseError("parse", "nesting too deep", 1, 1) from None


def print_term(t, default: Optional[Sort] = None) -> str:
    if isinstance(t, Var):
        if default is not None and t.sort != default:
            return f"{t.name}:{t.sort.name}"
        return t.name
    if not t.args:
        return t.symbol.name
    return "(" + " ".join([t.symbol.name] + [print_term(a, default) for a in t.args]) + ")"


def print_formula(phi: Formula, default: Sort = Sort("sigma1")) -> str:
    """Canonical text; inverse of `parse_formula` over a signature whose
    first sort is ``default``."""
    if isinstance(phi, Const):
        return "true" if phi.value else "false"
    if isinstance(phi, Eq):
        return f"(= {print_term(phi.left, default)} {print_term(phi.right, default)})"
    if isinstance(phi, Pred):
        if not phi.args:
            return phi.symbol.name
        return "(" + " ".join([phi.symbol.name] + [print_term(a, default) for a in phi.args]) + ")"
    if isinstance(phi, Not):
        return f"(not {print_formula(phi.arg, default)})"
    if isinstance(phi, (And, Or)):
        op = "and" if isinstance(phi, And) else "or"
        return "(" + " ".join([op] + [print_formula(a, default) for a in phi.args]) + ")"
    if isinstance(phi, Implies):
        return f"(=> {print_formula(phi.left, default)} {print_formula(phi.right, default)})"
    if isinstance(phi, (Forall, Exists)):
        op = "forall" if isinstance(phi, Forall) else "exists"
        return f"({op} ({phi.var.name} {phi.var.sort.name}) {print_formula(phi.body, default)})"
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


def parse_signature(text: str) -> Signature:
    sorts: list[Sort] = []
    funcs: list[tuple] = []
    preds: list[tuple] = []
    pfam = ffam = None
    for node in read_sexprs(text):
        if not isinstance(node, SList) or not node.items or not isinstance(node.items[0], Atom):
            raise _err("parse", "expected a declaration", node)
        kind = node.items[0].text
        rest = node.items[1:]
        if kind == "sort":
            for a in rest:
                if not isinstance(a, Atom):
                    raise _err("parse", "sort names are atoms", a)
                sorts.append(Sort(a.text))
        elif kind == "fun":
            if len(rest) != 3 or not isinstance(rest[0], Atom) or not isinstance(rest[1], SList) \
                    or not isinstance(rest[2], Atom):
                raise _err("parse", "expected (fun name (arg-sorts) result-sort)", node)
            funcs.append((rest[0], rest[1], rest[2]))
        elif kind == "pred":
            if len(rest) != 2 or not isinstance(rest[0], Atom) or not isinstance(rest[1], SList):
                raise _err("parse", "expected (pred name (arg-sorts))", node)
            preds.append((rest[0], rest[1]))
        elif kind == "pred-family":
            if len(rest) != 1 or not isinstance(rest[0], Atom):
                raise _err("parse", "expected (pred-family prefix)", node)
            pfam = rest[0].text
        elif kind == "fun-family":
            if len(rest) != 1 or not isinstance(rest[0], Atom):
                raise _err("parse", "expected (fun-family prefix)", node)
            ffam = rest[0].text
        else:
            raise _err("parse", f"unknown declaration {kind!r}", node)
    if not sorts:
        raise ParseError("parse", "a signature needs at least one sort", 1, 1)
    by_name = {s.name: s for s in sorts}

    def lookup(a) -> Sort:
        if not isinstance(a, Atom) or a.text not in by_name:
            raise _err("unknown-symbol", f"undeclared sort {getattr(a, 'text', a)!r}", a)
        return by_name[a.text]

    fsyms = tuple(FunctionSymbol(n.text, tuple(lookup(a) for a in args.items), lookup(r)) for n, args, r in funcs)
    psyms = tuple(PredicateSymbol(n.text, tuple(lookup(a) for a in args.items)) for n, args in preds)
    try:
        return Signature(tuple(sorts), fsyms, psyms, pfam, ffam)
    except SortError as exc:
        raise ParseError("sort", str(exc), 1, 1) from None


def print_signature(sig: Signature) -> str:
    parts = ["(sort " + " ".join(s.name for s in sig.sorts) + ")"]
    for f in sig.functions:
        parts.append(f"(fun {f.name} (" + " ".join(s.name for s in f.args) + f") {f.result.name})")
    for p in sig.predicates:
        parts.append(f"(pred {p.name} (" + " ".join(s.name for s in p.args) + "))")
    if sig.predicate_family:
        parts.append(f"(pred-family {sig.predicate_family})")
    if sig.function_family:
        parts.append(f"(fun-family {sig.function_family})")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Interpretations
# ---------------------------------------------------------------------------


def interpretation_to_json(interp: FiniteInterpretation) -> dict:
    """Domains as string lists; tables as arrays of domain indices."""
    sig = interp.signature
    index = {s: {e: i for i, e in enumerate(interp.domains[s])} for s in sig.sorts}
    funcs = {}
    for name, table in sorted(interp.functions.items()):
        sym = sig.function(name)
        rows = sorted(
            [[index[s][a] for s, a in zip(sym.args, args)] + [index[sym.result][v]] for args, v in table.items()]
        )
        funcs[name] = rows
    preds = {}
    for name, rows in sorted(interp.predicates.items()):
        sym = sig.predicate(name)
        preds[name] = sorted([index[s][a] for s, a in zip(sym.args, row)] for row in rows)
    return {
        "signature": print_signature(sig),
        "domains": {s.name: [str(e) for e in interp.domains[s]] for s in sig.sorts},
        "functions": funcs,
        "predicates": preds,
        "assignment": {
            (v.name if v.sort == sig.default_sort else f"{v.name}:{v.sort.name}"): index[v.sort][val]
            for v, val in sorted(interp.assignment.items())
        },
    }


def interpretation_from_json(data: dict | str) -> FiniteInterpretation:
    """Inverse of `interpretation_to_json`; elements become their indices."""
    if isinstance(data, str):
        data = json.loads(data)
    sig = parse_signature(data["signature"])
    doms = {s: tuple(range(len(data["domains"][s.name]))) for s in sig.sorts}
    funcs = {}
    for name, rows in data.get("functions", {}).items():
        sym = sig.function(name)
        funcs[name] = {tuple(r[: sym.arity]): r[sym.arity] for r in rows}
    preds = {name: frozenset(tuple(r) for r in rows) for name, rows in data.get("predicates", {}).items()}
    assignment = {}
    for key, val in data.get("assignment", {}).items():
        name, _, sname = key.partition(":")
        assignment[Var(name, sig.sort(sname) if sname else sig.default_sort)] = val
    interp = FiniteInterpretation(sig, doms, funcs, preds, assignment)
    interp.check()
    return interp


def dumps(obj: Any) -> str:
    """Deterministic JSON."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)
