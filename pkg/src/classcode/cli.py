"""Command-line front end.

Exit status: 0 on success, 1 when the input is well-formed but the domain
operation fails (invalid code, failed audit, decoding error), 2 on usage or
parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from .etr import CyclicRelation, RecursionInstance, WellOrder, WfRelation, compare_wellorders, etr_check, etr_solve
from .hfset import (
    CapExceeded,
    HFSet,
    format_hf,
    h_bounded,
    hf_measures,
    hf_ordinal,
    hf_transitive_closure,
    hf_unack,
    hf_v_stage,
    parse_hf,
)
from .logic import (
    DecodeError,
    FormulaSyntaxError,
    ScopeError,
    classify,
    evaluate,
    format_formula,
    free_set_vars,
    full_model,
    godel_decode,
    godel_encode,
    parse_formula,
)
from .memcode import (
    CodeError,
    canonical_code,
    code_from_json,
    code_to_dot,
    code_to_json,
    collapse,
    function_code,
    function_of_code,
    glue,
    iso,
    max_ipi,
    normalize,
    ordinal_code,
    pair_code,
    relation_code,
    restrict_below,
    union_code,
    validate,
    vin,
    wellorder_code,
)
from .translate import StarMode, cutoff_interpret, etr_star_translate, star_translate
from .truth import (
    FULLPARAMS,
    DefBounds,
    def_op,
    l_code,
    table_to_text,
    tr_audit,
    tr_layered,
    tr_materialize,
    tr_query,
)
from .unroll import Axiom, Direction, audit_axiom, audit_sep0_all, count_ordinals, cutoff, roundtrip_audit, unroll


class DomainFailure(Exception):
    pass


class Usage(Exception):
    pass


# --- helpers ------------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _codes(args, n: int) -> list:
    paths = args.inputs or []
    if len(paths) != n:
        raise Usage(f"expected {n} --in argument(s), got {len(paths)}")
    out = []
    for p in paths:
        try:
            raw = code_from_json(_read(p))
        except (ValueError, OSError) as e:
            raise Usage(str(e)) from None
        out.append(validate(raw))
    return out


def _hf(text: str) -> HFSet:
    try:
        return parse_hf(text)
    except ValueError as e:
        raise Usage(str(e)) from None


def _formula(text: str):
    try:
        return parse_formula(text)
    except (FormulaSyntaxError, ScopeError) as e:
        raise Usage(str(e)) from None


def _lit(x: HFSet) -> str:
    try:
        return f"#{x.ack}"
    except OverflowError:
        return format_hf(x)


def _universe(args) -> list[HFSet]:
    if getattr(args, "tc", None) is not None:
        return h_bounded(args.tc)
    return sorted(hf_v_stage(args.vstage).elements)


def _lets(items) -> dict:
    out = {}
    for item in items or []:
        k, sep, v = item.partition("=")
        if not sep:
            raise Usage(f"--let expects NAME=LITERAL, got {item!r}")
        out[k] = _hf(v)
    return out


def _emit_code(args, code) -> None:
    if args.fmt == "dot":
        print(code_to_dot(code))
    else:
        print(code_to_json(code))


def _emit(args, text_lines: list[str], data) -> None:
    if args.fmt == "json":
        print(json.dumps(data, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _mode(args):
    if args.mode == "full":
        return FULLPARAMS
    return DefBounds(args.size_bound if args.size_bound is not None else 3, args.params)


def _levels(n: int) -> WellOrder:
    return WellOrder([hf_ordinal(i) for i in range(n)])


# --- code ------------------------------------------------------------------------------


def cmd_code(args) -> int:
    op = args.op
    if op == "validate":
        (c,) = _codes(args, 1)
        _emit(args, [f"VALID ({len(c.nodes)} nodes)"], {"valid": True, "nodes": len(c.nodes)})
    elif op == "collapse":
        (c,) = _codes(args, 1)
        x = collapse(c)
        _emit(args, [_lit(x), format_hf(x)], {"ack": _lit(x), "set": format_hf(x)})
    elif op == "normalize":
        raw = code_from_json(_read(args.inputs[0])) if args.inputs else None
        if raw is None:
            raise Usage("normalize needs --in")
        _emit_code(args, normalize(raw))
    elif op == "canon":
        _emit_code(args, canonical_code(_hf(args.set)))
    elif op == "restrict":
        (c,) = _codes(args, 1)
        _emit_code(args, restrict_below(c, args.node))
    elif op in ("iso", "ipi"):
        a, b = _codes(args, 2)
        m = iso(a, b) if op == "iso" else max_ipi(a, b)
        pairs = sorted((str(k), str(v)) for k, v in (m.items() if m is not None else []))
        head = ("ISOMORPHIC" if m is not None else "NOT ISOMORPHIC") if op == "iso" else f"IPI ({len(pairs)} pairs)"
        _emit(args, [head] + [f"{k} -> {v}" for k, v in pairs], {"result": head, "map": pairs})
    elif op == "vin":
        a, b = _codes(args, 2)
        v = vin(a, b)
        if v.positive:
            _emit(args, [f"IN (witness {v.witness})"], {"in": True, "witness": str(v.witness)})
        else:
            cert = [[str(n), kind, str(w)] for n, kind, w in v.certificate]
            _emit(args, ["NOT IN"] + [f"{n}: {k} {w}" for n, k, w in cert], {"in": False, "certificate": cert})
    elif op == "pair":
        a, b = _codes(args, 2)
        _emit_code(args, pair_code(a, b))
    elif op == "union":
        (a,) = _codes(args, 1)
        _emit_code(args, union_code(a))
    elif op == "glue":
        a, b = _codes(args, 2)
        g = glue(a, b)
        data = {
            "nodes": list(g.nodes),
            "edges": sorted([list(e) for e in g.edges]),
            "embed_a": {str(k): v for k, v in sorted(g.embed_a.items(), key=lambda kv: str(kv[0]))},
        }
        print(json.dumps(data, sort_keys=True))
    elif op == "wo":
        (a,) = _codes(args, 1)
        _emit_code(args, wellorder_code(a, _list(args.order)))
    elif op == "ord":
        _emit_code(args, ordinal_code(_list(args.order)))
    elif op in ("fn", "rel"):
        a, b = _codes(args, 2)
        pairs = [tuple(p.split(":", 1)) for p in _list(args.map)]
        if any(len(p) != 2 for p in pairs):
            raise Usage("--map expects SRC:DST pairs")
        code = function_code(a, b, dict(pairs)) if op == "fn" else relation_code(a, b, pairs)
        _emit_code(args, code)
    elif op == "fnof":
        g, a, b = _codes(args, 3)
        f = function_of_code(g, a, b)
        pairs = sorted((str(k), str(v)) for k, v in f.items())
        _emit(args, [f"{k} -> {v}" for k, v in pairs], {"map": pairs})
    return 0


def _list(text: str | None) -> list[str]:
    if not text:
        return []
    return [t for t in text.split(",") if t]


# --- hf ------------------------------------------------------------------------------


def cmd_hf(args) -> int:
    op = args.op
    if op == "ack":
        print(_hf(args.value).ack)
    elif op == "unack":
        try:
            n = int(args.value)
        except ValueError:
            raise Usage("unack needs a natural number") from None
        print(format_hf(hf_unack(n)))
    elif op == "measures":
        r, t = hf_measures(_hf(args.value))
        _emit(args, [f"rank {r}", f"tcSize {t}"], {"rank": r, "tcSize": t})
    elif op == "vstage":
        x = hf_v_stage(int(args.value))
        _emit(args, [_lit(y) for y in sorted(x.elements)], [_lit(y) for y in sorted(x.elements)])
    elif op == "enum":
        xs = h_bounded(int(args.value))
        _emit(args, [_lit(y) for y in xs], [_lit(y) for y in xs])
    return 0


# --- formula ---------------------------------------------------------------------------


def cmd_formula(args) -> int:
    op = args.op
    if op == "decode":
        try:
            phi = godel_decode(_hf(args.text))
        except DecodeError as e:
            raise DomainFailure(str(e)) from None
        print(format_formula(phi))
        return 0
    phi = _formula(args.text)
    if op == "parse":
        print(format_formula(phi))
    elif op == "encode":
        code = godel_encode(phi)
        _emit(args, [f"rank {code.rank}", _lit(code)], {"rank": code.rank, "code": _lit(code)})
    elif op == "classify":
        c = classify(phi)
        _emit(args, [str(c)], {"tag": c.tag, "sigma": c.sigma, "pi": c.pi, "second_order": c.second_order})
    elif op == "eval":
        m = full_model(_universe(args))
        v = _lets(args.let)
        missing = free_set_vars(phi) - set(v)
        if missing:
            raise Usage(f"no value for {', '.join(sorted(missing))}")
        try:
            val = evaluate(m, phi, v)
        except ValueError as e:
            raise DomainFailure(str(e)) from None
        print("true" if val else "false")
    return 0


# --- unroll / cutoff / roundtrip / audit ------------------------------------------------------


def cmd_unroll(args) -> int:
    m = full_model(_universe(args))
    u = unroll(m, args.budget, threads=args.threads)
    _emit(args, [f"{len(u)} elements, kappa {u.kappa}"] + [_lit(x) for x in u.elements],
          {"kappa": u.kappa, "elements": [_lit(x) for x in u.elements]})
    return 0


def cmd_cutoff(args) -> int:
    n = h_bounded(args.tc) if args.set is None else hf_transitive_closure([_hf(args.set)])
    try:
        m = cutoff(n, args.k, args.reading)
    except ValueError as e:
        raise DomainFailure(str(e)) from None
    uni = [_lit(x) for x in m.universe]
    classes = ["{" + ",".join(_lit(x) for x in sorted(c)) + "}" for c in m.classes]
    _emit(args, ["universe " + " ".join(uni)] + ["class " + c for c in classes],
          {"universe": uni, "classes": classes})
    return 0


def cmd_roundtrip(args) -> int:
    if args.direction == "cut-unroll":
        m = full_model(_universe(args))
        r = roundtrip_audit(Direction.CUT_UNROLL, m, args.budget, args.k, args.reading)
        size = (r.unrolled_size, len(r.classes))
    else:
        if args.tc is None or args.k is None:
            raise Usage("unroll-cut needs --tc and --k")
        r = roundtrip_audit(Direction.UNROLL_CUT, h_bounded(args.tc), args.budget, args.k, args.reading)
        size = (r.unrolled_size, 0)
    head = ("ISOMORPHIC" if r.ok else "MISMATCH") + f" ({size[0]} elements, {size[1]} classes)"
    lines = [head] + [f"unmatched element {_lit(x)}" for x in r.unmatched_elements]
    lines += ["unmatched class {" + ",".join(_lit(x) for x in sorted(c)) + "}" for c in r.unmatched_classes]
    _emit(args, lines, {"ok": r.ok, "elements": size[0], "classes": size[1]})
    return 0 if r.ok else 1


def cmd_audit(args) -> int:
    u = unroll(full_model(_universe(args)), args.budget, threads=args.threads)
    name = args.axiom.upper()
    if name == "SEP0ALL":
        rep = audit_sep0_all(u, args.size_bound if args.size_bound is not None else 7, exhaustive=args.exhaustive)
    elif name == "S0TR":
        if args.formula is None:
            raise Usage("S0TR needs --formula (bounded step in x, ordinal index i and partial solution Y)")
        ords = [x for x in u.elements if count_ordinals([x]) and all(count_ordinals([y]) for y in x.elements)]
        rel = WellOrder(ords[: args.length]).relation()
        try:
            inst = RecursionInstance(_formula(args.formula), u.model(), "x", "i", "Y")
        except ValueError as e:
            raise Usage(str(e)) from None
        rep = audit_axiom(u, Axiom.S0TR, instance=(inst, rel))
    else:
        try:
            ax = Axiom[name]
        except KeyError:
            raise Usage(f"unknown axiom {args.axiom}") from None
        phi = _formula(args.formula) if args.formula else None
        rep = audit_axiom(u, ax, formula=phi)
    lines = [f"{rep.axiom.value}: {rep.status} ({rep.checked} checked, {rep.outside_budget} outside budget)"]
    lines += [f"failure {f}" for f in rep.failures]
    _emit(args, lines, {"axiom": rep.axiom.value, "status": rep.status, "checked": rep.checked,
                        "outside_budget": rep.outside_budget, "failures": [str(f) for f in rep.failures]})
    return 0 if rep.ok else 1


# --- truth / def / lhier --------------------------------------------------------------------------


def cmd_truth(args) -> int:
    m = full_model(_universe(args))
    gamma = _levels(args.levels)
    param = frozenset(_hf(x) for x in _list(args.param)) if args.param is not None else None
    if args.op == "eval":
        if args.formula is None:
            raise Usage("truth eval needs --formula")
        phi = _formula(args.formula)
        level = hf_ordinal(args.level)
        if level not in gamma:
            raise DomainFailure(f"level {args.level} is outside the well-order")
        try:
            val = tr_query(m, param, gamma, level, phi, _lets(args.let))
        except ValueError as e:
            raise DomainFailure(str(e)) from None
        print("true" if val else "false")
        return 0
    bound = args.size_bound if args.size_bound is not None else 8
    if args.op == "table":
        table = tr_materialize(m, param, gamma, bound, threads=args.threads)
    else:
        table = tr_layered(m, param, gamma, bound)
    rep = tr_audit(table)
    sys.stdout.write(table_to_text(table))
    if not rep.ok:
        print(f"audit failed at {len(rep.violations)} points", file=sys.stderr)
        return 1
    return 0


def cmd_def(args) -> int:
    m = full_model(_universe(args))
    fam = def_op(m, (), _mode(args))
    rows = sorted((sorted(s) for s in fam), key=lambda s: (len(s), [x.key for x in s]))
    lines = ["{" + ",".join(_lit(x) for x in s) + "}" for s in rows]
    _emit(args, [f"{len(rows)} definable subsets"] + lines, lines)
    return 0


def cmd_lhier(args) -> int:
    lines = []
    for k in range(args.length + 1):
        x = collapse(l_code(k, None, _mode(args)))
        lines.append(f"L{k} {len(x)} elements {_lit(x)}")
    _emit(args, lines, lines)
    return 0


# --- etr -------------------------------------------------------------------------------------------------


def _relation(path: str) -> WfRelation:
    """A JSON list of [a, b] pairs of HF literals."""
    try:
        data = json.loads(_read(path))
    except (ValueError, OSError) as e:
        raise Usage(str(e)) from None
    if not isinstance(data, list) or any(not isinstance(p, list) or len(p) != 2 for p in data):
        raise Usage("relation file must hold a list of [a, b] pairs")
    try:
        return WfRelation((), frozenset((_hf(str(a)), _hf(str(b))) for a, b in data))
    except CyclicRelation as e:
        raise DomainFailure(str(e)) from None


_VSTEP = "(ex r (and (rel r i R) (allin z x (rel r z Y))))"


def cmd_etr(args) -> int:
    if args.op == "compare":
        c = compare_wellorders(_levels(args.gamma), _levels(args.delta))
        print(c.verdict)
        return 0
    uni = _universe(args)
    m = full_model(uni)
    if args.rel is not None:
        rel = _relation(args.rel)
    else:
        length = args.length if args.length is not None else len(uni)
        rel = WellOrder(uni[:length]).relation()
    step = _formula(args.formula or _VSTEP)
    try:
        inst = RecursionInstance(step, m, "x", "i", "Y", {"R": rel.closure_pairs})
    except ValueError as e:
        raise Usage(str(e)) from None
    sol = etr_solve(inst, rel)
    if args.op == "solve":
        lines = []
        for r in rel.topological():
            lines.append(" ".join([f"{_lit(r)}:"] + [_lit(x) for x in sorted(sol.slice(r))]))
        _emit(args, lines, lines)
        return 0
    res = etr_check(inst, rel, sol)
    print("OK" if res.ok else f"FAIL at {_lit(res.failing)}")
    return 0 if res.ok else 1


# --- translate ----------------------------------------------------------------------------------------


def cmd_translate(args) -> int:
    phi = _formula(args.formula)
    if args.op == "star":
        print(format_formula(star_translate(phi, StarMode[args.star_mode.upper()])))
    elif args.op == "interp":
        print(format_formula(cutoff_interpret(phi)))
    else:
        params = {}
        for item in args.param or []:
            k, sep, path = item.partition("=")
            if not sep:
                raise Usage("--param expects NAME=PATH")
            params[k] = validate(code_from_json(_read(path)))
        est = etr_star_translate(phi, params)
        print(format_formula(est.formula))
        print(code_to_json(est.code))
        print(json.dumps({k: str(v) for k, v in sorted(est.anchors.items())}, sort_keys=True))
    return 0


# --- parser ---------------------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="inputs", action="append", metavar="PATH", help="code JSON file, '-' for stdin")
    p.add_argument("--fmt", choices=["text", "json", "dot"], default="text")
    p.add_argument("--budget", type=int, default=3)
    p.add_argument("--size-bound", type=int, default=None)
    p.add_argument("--mode", choices=["full", "bounded"], default="full")
    p.add_argument("--params", type=int, default=0, help="set parameters in bounded Def")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--vstage", type=int, default=2)
    p.add_argument("--tc", type=int, default=None, help="use h_bounded(TC) instead of a V-stage")


COMMANDS: dict[str, Callable] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="classcode", description="Membership codes, unrollings and truth predicates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code", help="membership code operations")
    p.add_argument("op", choices=["validate", "collapse", "iso", "vin", "pair", "union", "wo", "fn", "fnof", "rel",
                                  "ord", "normalize", "canon", "restrict", "ipi", "glue"])
    p.add_argument("--order", help="comma-separated node labels")
    p.add_argument("--map", help="comma-separated SRC:DST pairs")
    p.add_argument("--node")
    p.add_argument("--set", help="HF literal")
    _common(p)
    COMMANDS["code"] = cmd_code

    p = sub.add_parser("hf", help="hereditarily finite sets")
    p.add_argument("op", choices=["ack", "unack", "measures", "vstage", "enum"])
    p.add_argument("value")
    _common(p)
    COMMANDS["hf"] = cmd_hf

    p = sub.add_parser("formula", help="formula syntax, coding and evaluation")
    p.add_argument("op", choices=["parse", "encode", "decode", "classify", "eval"])
    p.add_argument("text")
    p.add_argument("--let", action="append", metavar="NAME=LITERAL")
    _common(p)
    COMMANDS["formula"] = cmd_formula

    p = sub.add_parser("unroll", help="unroll (V_n or h_bounded, FULL)")
    _common(p)
    COMMANDS["unroll"] = cmd_unroll

    p = sub.add_parser("cutoff", help="cut a transitive set at a hereditary-size bound")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--set", help="HF literal whose transitive closure is cut")
    p.add_argument("--reading", choices=["tc", "rank"], default="tc")
    _common(p)
    COMMANDS["cutoff"] = cmd_cutoff

    p = sub.add_parser("roundtrip", help="bi-interpretability round trips")
    p.add_argument("--direction", choices=["cut-unroll", "unroll-cut"], default="cut-unroll")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--reading", choices=["tc", "rank"], default="tc")
    _common(p)
    p.set_defaults(budget=None)
    COMMANDS["roundtrip"] = cmd_roundtrip

    p = sub.add_parser("audit", help="axiom audits of an unrolling")
    p.add_argument("--axiom", required=True, help="EXT, PAIR, UNION, FOUND, SEP0, SEP0ALL or S0TR")
    p.add_argument("--formula")
    p.add_argument("--length", type=int, default=4)
    p.add_argument("--exhaustive", action="store_true", help="SEP0ALL: enumerate formulas even when subset-closed")
    _common(p)
    COMMANDS["audit"] = cmd_audit

    p = sub.add_parser("truth", help="iterated truth predicates")
    p.add_argument("op", choices=["eval", "table", "iter"])
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--formula")
    p.add_argument("--param", help="comma-separated HF literals forming the class parameter")
    p.add_argument("--let", action="append", metavar="NAME=LITERAL")
    _common(p)
    COMMANDS["truth"] = cmd_truth

    p = sub.add_parser("def", help="definable subsets of a V-stage")
    _common(p)
    COMMANDS["def"] = cmd_def

    p = sub.add_parser("lhier", help="iterate Def from the empty code")
    p.add_argument("--length", type=int, default=3)
    _common(p)
    COMMANDS["lhier"] = cmd_lhier

    p = sub.add_parser("etr", help="recursion along well-orders")
    p.add_argument("op", choices=["solve", "check", "compare"])
    p.add_argument("--formula", help="step formula in x, index i, partial solution Y and order R")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--rel", metavar="PATH", help="JSON list of [a, b] pairs; default: the universe in order")
    p.add_argument("--gamma", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    _common(p)
    COMMANDS["etr"] = cmd_etr

    p = sub.add_parser("translate", help="formula translations")
    p.add_argument("op", choices=["star", "etrstar", "interp"])
    p.add_argument("formula")
    p.add_argument("--star-mode", choices=["witness", "certificate", "absorb"], default="witness")
    p.add_argument("--param", action="append", metavar="NAME=PATH")
    _common(p)
    COMMANDS["translate"] = cmd_translate
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Usage as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except CodeError as e:
        msg = str(e)
        name = type(e).__name__
        print(msg if msg.startswith(name) else f"{name}: {msg}", file=sys.stderr)
        return 1
    except (DomainFailure, CapExceeded, DecodeError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
