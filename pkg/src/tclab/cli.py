"""Command-line entry point: ``tclab <subcommand> ...``.

Exit codes: 0 success, 1 a property check ran and refuted the property,
2 usage, parse or configuration errors.  Results go to stdout as JSON with
sorted keys, so equal inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .finite_model import CardinalityVector, bound_hint, brute_mm, models, sat_bounded
from .logic import (
    TRUE,
    Arrangement,
    Eq,
    Formula,
    LogicError,
    Var,
    arrangement_formula,
    conj,
    dnf_cubes,
    free_vars,
)
from .textio import ParseError, dumps, interpretation_to_json, parse_formulas, print_formula

MAX_BOUND = 64


class UsageError(Exception):
    """Bad flags or inputs; reported with exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's output."""

    theory: str = "t1"
    s_set: str = "7,11,13"
    h: str = "parity"
    star_n: int = 4
    bound: Optional[str] = None
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(args.theory, args.s_set, args.h, args.star_n, args.bound, args.seed)


# ---------------------------------------------------------------------------
# Configuration helpers
# ---------------------------------------------------------------------------


def _h_oracle(spec: str):
    from .theories import HOracle, parity_oracle, table_oracle

    if spec == "parity":
        return parity_oracle()
    if spec == "zero":
        return table_oracle(set(), name="zero")
    if spec == "one":
        return HOracle("one", lambda n: True)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--h must be parity, zero, one or a JSON file; {spec!r} is none of these")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed oracle file {spec}: {exc}") from exc
    if isinstance(data, dict):
        return table_oracle({int(k): bool(v) for k, v in data.items()}, name=path.name)
    if isinstance(data, list):
        return table_oracle([int(k) for k in data], name=path.name)
    raise UsageError(f"oracle file {spec} must hold a list of indices or an index->0/1 map")


def make_config(run: RunConfig):
    from .theories import ConfigError, SOracle, TheoryConfig

    try:
        s = SOracle.parse(run.s_set)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    if run.star_n < 2:
        raise UsageError("--star-n must be at least 2")
    return TheoryConfig(s, _h_oracle(run.h), star_n=run.star_n)


def make_theory_from(args):
    from .theories import ConfigError, make_theory

    run = RunConfig.from_args(args)
    try:
        return make_theory(run.theory, make_config(run))
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc


def read_formula(path: Optional[str], signature) -> Formula:
    if path is None:
        return TRUE
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    fs = parse_formulas(text, signature)
    if not fs:
        raise UsageError(f"{path} holds no formula")
    return conj(fs)


def parse_bound(text: Optional[str], t, phi: Formula):
    if text is None:
        return bound_hint(t, phi)
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--bound takes positive integers, got {text!r}") from exc
    if any(v < 1 for v in vals):
        raise UsageError("--bound values must be positive")
    if any(v > MAX_BOUND for v in vals):
        raise UsageError(f"--bound {text} overflows the enumeration limit {MAX_BOUND}")
    sig = t.finite_signature(phi)
    if len(vals) == 1:
        vals = vals * len(sig.sorts)
    if len(vals) != len(sig.sorts):
        raise UsageError(f"--bound needs {len(sig.sorts)} values for {t.name}")
    return CardinalityVector.of(sig.sorts, vals)


def parse_arrangement(text: str, phi: Formula, sort_of: dict) -> Arrangement:
    """'x=y; z' -> blocks {x,y} and {z}; names resolve against phi's variables."""
    known = {v.name: v for v in free_vars(phi)}
    blocks = []
    for chunk in text.split(";"):
        names = [n.strip() for n in chunk.split("=") if n.strip()]
        if not names:
            continue
        blocks.append(tuple(known.get(n) or Var(n, sort_of.get(n) or next(iter(sort_of.values()))) for n in names))
    if not blocks:
        raise UsageError("empty arrangement")
    try:
        seen = [v for b in blocks for v in b]
        if len(set(seen)) != len(seen):
            raise UsageError(f"a variable occurs twice in {text!r}")
        return Arrangement.from_blocks(seen, blocks)
    except (LogicError, ValueError) as exc:
        raise UsageError(f"bad arrangement {text!r}: {exc}") from exc


def emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _vectors(mm) -> list:
    return [v.to_json() for v in sorted(mm, key=lambda v: (sum(x for x in v.values if x != float("inf")), v.values))]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_sat(args) -> int:
    t = make_theory_from(args)
    phi = read_formula(args.file, t.finite_signature(TRUE))
    verdict = sat_bounded(t, phi, parse_bound(args.bound, t, phi))
    emit({**verdict.to_json(), "theory": t.name})
    return 0


def cmd_models(args) -> int:
    t = make_theory_from(args)
    phi = read_formula(args.file, t.finite_signature(TRUE))
    out = []
    for m in models(t, phi, parse_bound(args.bound, t, phi)):
        out.append(interpretation_to_json(m))
        if len(out) >= args.limit:
            break
    emit({"theory": t.name, "count": len(out), "models": out, "truncated": len(out) >= args.limit})
    return 0


def cmd_mm(args) -> int:
    from .minimal_model import mm_from_decision

    t = make_theory_from(args)
    phi = read_formula(args.file, t.finite_signature(TRUE))
    if args.algo == "brute":
        mm = brute_mm(t, phi, parse_bound(args.bound, t, phi))
    else:
        if t.decide is None or t.strong_witness is None:
            raise UsageError(f"{t.name} lacks the decide or witness capability for --algo from-decision")
        mm = mm_from_decision(t, phi)
    emit({"theory": t.name, "algo": args.algo, "mm": _vectors(mm)})
    return 0


def cmd_decide(args) -> int:
    from .minimal_model import decide_from_mm

    t = make_theory_from(args)
    phi = read_formula(args.file, t.finite_signature(TRUE))
    if args.via == "mm":
        if t.mm is None:
            raise UsageError(f"{t.name} has no minimal model function")
        sat = decide_from_mm(t, phi)
    else:
        if t.decide is None:
            raise UsageError(f"{t.name} has no decision procedure")
        sat = t.decide(phi)
    emit({"theory": t.name, "via": args.via, "sat": bool(sat)})
    return 0


def cmd_decide_s(args) -> int:
    from .minimal_model import decide_s_membership, mm_single_sort, s_reduction_formula

    t = make_theory_from(args)
    if t.family != "ti" or not t.one_sorted:
        raise UsageError("decide-s needs one of t1..t4")
    try:
        in_s = decide_s_membership(t.index, t.mm, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    size = mm_single_sort(t.mm(s_reduction_formula(args.n)))
    emit({"theory": t.name, "n": args.n, "in_s": in_s, "min_size": size})
    return 0


def _witness_of(t, which: str):
    from .witness import shiny_witness

    if which == "shiny":
        if t.mm is None:
            raise UsageError(f"the shiny witness needs a minimal model function; {t.name} has none")
        return shiny_witness(t)
    if t.strong_witness is None:
        raise UsageError(f"{t.name} has no witness")
    return t.strong_witness


def cmd_witness(args) -> int:
    t = make_theory_from(args)
    phi = read_formula(args.file, t.finite_signature(TRUE))
    w = _witness_of(t, args.witness)
    emit({"theory": t.name, "witness": w.name, "input": print_formula(phi), "output": print_formula(w(phi))})
    return 0


def cmd_complete(args) -> int:
    from .logic import SIGMA1, SIGMA2
    from .witness import complete_to_witness_model

    t = make_theory_from(args)
    if t.family != "ti":
        raise UsageError("complete applies to t1..t4 and adds-t1..adds-t4")
    phi = read_formula(args.file, t.finite_signature(TRUE))
    sorts = {"u": SIGMA2} if len(t.signature.sorts) > 1 else {}
    names = [n.strip() for chunk in args.arrangement.split(";") for n in chunk.split("=") if n.strip()]
    sort_of = {n: (SIGMA2 if n[:1] in sorts else SIGMA1) for n in names} or {"x": SIGMA1}
    if phi == TRUE:
        phi = conj([Eq(Var(n, s), Var(n, s)) for n, s in sort_of.items()])
    delta = parse_arrangement(args.arrangement, phi, sort_of)
    w = t.strong_witness(phi)
    for cube in dnf_cubes(w):
        psi = conj(cube)
        missing = [v for v in free_vars(psi) if v not in delta.variables]
        full = (Arrangement.from_blocks(list(delta.variables) + missing, list(delta.blocks) + [(v,) for v in missing])
                if missing else delta)
        seed = t.find_model(conj([psi, arrangement_formula(full)]))
        if seed is None:
            continue
        out = complete_to_witness_model(t.index, t.config.s, psi, full, seed)
        emit({"theory": t.name, "satisfiable": True, "witness_cube": print_formula(psi),
              "arrangement": str(full), "model": interpretation_to_json(out)})
        return 0
    emit({"theory": t.name, "satisfiable": False, "arrangement": str(delta)})
    return 0


def _corpus_for(t, n: int, seed: int):
    from .corpus import corpus

    kind = {"ti": "flat", "t2n": "t2n-conj", "teq": "empty", "teq1": "empty"}.get(t.family)
    if kind is None:
        raise UsageError(f"no generated corpus for {t.name}")
    kw = {"sorts": tuple(t.signature.sorts), "max_vars": 3} if kind == "empty" else {}
    if kind == "flat":
        kw = {"n_vars": 3, "max_literals": 4}
    return corpus(kind, n, seed, **kw)


def cmd_verify_witness(args) -> int:
    from .witness import verify_strong_witness

    t = make_theory_from(args)
    w = _witness_of(t, args.witness)
    forms = _corpus_for(t, args.corpus, args.seed)
    bound = int(args.bound) if args.bound else 6
    if bound > MAX_BOUND:
        raise UsageError(f"--bound {bound} overflows the enumeration limit {MAX_BOUND}")
    rep = verify_strong_witness(t, w, forms, bound)
    emit(rep.to_json())
    return 0 if rep.ok else 1


def cmd_check(args) -> int:
    from . import properties as pl
    from .star import DEFAULT_RHOS, build_star

    t = make_theory_from(args)
    b = pl.Bounds(args.var_bound, args.disj_bound, args.model_bound, args.samples, args.ray_max, args.seed)
    if args.property == "convexity":
        rep = pl.check_convexity(t, b.var_bound, b.disj_bound, b.model_bound, b.samples, b.seed)
    elif args.property == "si":
        if t.family != "ti":
            raise UsageError("the ray construction applies to t1..t4 and adds-t1..adds-t4")
        rep = pl.check_stable_infiniteness(t, b)
    elif args.property == "fsmooth":
        phi = read_formula(args.formula, t.finite_signature(TRUE))
        limit = b.model_bound
        if t.family == "star":
            base = build_star(args.star_n, None, DEFAULT_RHOS)
            m = base.with_assignment({v: 0 for v in free_vars(phi)})
            limit = base.size + b.model_bound
        elif t.family in ("teq", "t2n"):
            m = t.find_model(phi)
            if m is None:
                raise UsageError("the formula has no model to grow")
        else:
            raise UsageError("fsmooth applies to teq, t2n and star")
        try:
            rep = pl.check_finite_smoothness(t, m, phi, limit)
        except LogicError as exc:
            raise UsageError(str(exc)) from exc
    else:
        stars = [build_star(n, None, DEFAULT_RHOS) for n in range(2, args.star_n + 1)]
        rep = pl.check_not_smooth_star(stars)
    emit(rep.to_json())
    return 1 if rep.refuted else 0


def cmd_reproduce(args) -> int:
    from . import properties as pl
    from .theories import TheoryConfig

    threads = _threads()
    cfg = TheoryConfig(make_config(RunConfig.from_args(args)).s)
    b = pl.Bounds(seed=args.seed)
    if args.what == "table1":
        table = pl.reproduce_table1(b, cfg, threads)
        if args.json:
            emit(table.to_json())
        else:
            sys.stdout.write(table.to_markdown())
        return 0
    venn = pl.reproduce_venn(b, cfg, threads)
    if args.markdown:
        lines = ["| Theory | " + " | ".join(pl.VENN_SETS) + " |", "|---" * (len(pl.VENN_SETS) + 1) + "|"]
        for name, entry in venn.items():
            lines.append(f"| {name} | " + " | ".join("✓" if r in entry["regions"] else "✗" for r in pl.VENN_SETS) + " |")
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        emit(venn)
    return 0


def cmd_corpus(args) -> int:
    from .corpus import corpus

    try:
        forms = corpus(args.kind, args.n, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    texts = [print_formula(f) for f in forms]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        width = max(4, len(str(len(texts))))
        for k, text in enumerate(texts):
            (out / f"{args.kind}-{k:0{width}d}.fml").write_text(text + "\n", encoding="utf-8")
        emit({"kind": args.kind, "n": len(texts), "seed": args.seed, "dir": str(out)})
    else:
        sys.stdout.write("".join(t + "\n" for t in texts))
    return 0


def _threads() -> int:
    raw = os.environ.get("TCLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"TCLAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theory", default="t1", help="teq, teq1, th, t2n, t1..t4, adds-t1..adds-t4, star")
    common.add_argument("--s-set", default="7,11,13", help="comma-separated primes >= 7 for S (default 7,11,13)")
    common.add_argument("--h", default="parity", help="h oracle: parity, zero, one, or a JSON file")
    common.add_argument("--star-n", type=int, default=4, help="number of levels for star checks (default 4)")
    common.add_argument("--bound", default=None, help="model size bound, one value or one per sort")
    common.add_argument("--seed", type=int, default=0, help="seed for generated corpora")

    p = argparse.ArgumentParser(prog="tclab", description="Theory-combination property lab.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("sat", cmd_sat, "Bounded satisfiability: search T-models of the formula up to --bound.")
    sp.add_argument("file", nargs="?", help=".fml file ('-' for stdin)")
    sp = add("models", cmd_models, "List T-models of the formula up to --bound.")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--limit", type=int, default=20)
    sp = add("mm", cmd_mm, "Minimal model function: the antichain of minimal cardinality vectors.")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--algo", choices=("brute", "from-decision"), default="brute",
                    help="brute enumeration, or derived from decide plus a strong witness")
    sp = add("decide", cmd_decide, "Decide T-satisfiability, natively or from the minimal model function.")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--via", choices=("native", "mm"), default="native")
    sp = add("decide-s", cmd_decide_s,
             "Recover membership of n in S from the minimal model of cycle_n(x) and f^4(y)=y.")
    sp.add_argument("--n", type=int, required=True)
    sp = add("witness", cmd_witness, "Apply a witness function to the formula.")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--witness", choices=("default", "shiny"), default="default")
    sp = add("complete", cmd_complete,
             "Strong-witness completion: a T_i-model whose domain is exactly the classes of the arrangement.")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--arrangement", required=True, help="blocks separated by ';', e.g. 'x=y;z'")
    sp = add("verify-witness", cmd_verify_witness,
             "Check the strong-witness clause on a generated corpus and all its arrangements.")
    sp.add_argument("--witness", choices=("default", "shiny"), default="default")
    sp.add_argument("--corpus", type=int, default=20, help="number of generated formulas")
    sp = add("check", cmd_check,
             "Property checks: convexity search, ray construction (si), finite smoothness, star distinguishing.")
    sp.add_argument("property", choices=("convexity", "si", "fsmooth", "star"))
    sp.add_argument("--formula", default=None, help=".fml file for fsmooth (default: true)")
    sp.add_argument("--var-bound", type=int, default=4)
    sp.add_argument("--disj-bound", type=int, default=2)
    sp.add_argument("--model-bound", type=int, default=8)
    sp.add_argument("--samples", type=int, default=40)
    sp.add_argument("--ray-max", type=int, default=3)
    sp = add("reproduce", cmd_reproduce,
             "Reproduce the property grid of the cycle theories (table1) or the Venn placement (venn).")
    sp.add_argument("what", choices=("table1", "venn"))
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--markdown", action="store_true")
    sp = add("corpus", cmd_corpus, "Write a seeded formula corpus as .fml files (or to stdout).")
    sp.add_argument("--kind", default="sigma-f", help="sigma-f, flat, empty, t2n, t2n-conj, any")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--out", default=None, help="directory for the .fml files")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(f"tclab: error: {exc}\n")
        return 2
    except ParseError as exc:
        sys.stderr.write(f"tclab: parse error: {exc}\n")
        return 2
    except LogicError as exc:
        sys.stderr.write(f"tclab: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
