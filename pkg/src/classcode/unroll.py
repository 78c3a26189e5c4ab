"""Unrolling a second-order model into the sets coded by its classes, and cutting back.

``unroll`` collects the membership codes available in a model, up to a node
budget, and represents each isomorphism class by its collapse.  ``cutoff``
goes the other way: from a transitive set it keeps the elements of bounded
hereditary size as sets and the remaining subsets of those as classes.
"""
from __future__ import annotations

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .config import caps
from .hfset import CapExceeded
from .etr import RecursionInstance, WfRelation, _is_formula, etr_solve
from .hfset import HFSet, hf_kpair, hf_union
from .logic.coding import DecodeError, _unpair
from .logic.semantics import FULL, SOModel, code_model, compile_formula, evaluate, full_model
from .logic.syntax import Formula, free_set_vars, is_first_order, is_sigma0, quantifier_depth
from .memcode import (
    CodeError,
    MemCode,
    RawPointedGraph,
    canonical_code,
    collapse,
    enumerate_codes,
    restrict_below,
    validate,
)
from .translate import StarMode, cutoff_interpret, etr_star_translate, star_name, star_translate

__all__ = [
    "UnrolledStructure",
    "unroll",
    "cutoff",
    "Direction",
    "RoundTrip",
    "roundtrip_audit",
    "Axiom",
    "AxiomReport",
    "audit_axiom",
    "audit_sep0_all",
    "TranslationReport",
    "audit_translation",
    "audit_interpretation",
    "code_from_pairs",
    "count_ordinals",
]


@dataclass(frozen=True)
class UnrolledStructure:
    budget: int
    elements: tuple
    kappa: int
    full: bool = True
    witnesses: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.members

    @property
    def members(self) -> frozenset:
        cached = self.__dict__.get("_members")
        if cached is None:
            cached = frozenset(self.elements)
            object.__setattr__(self, "_members", cached)
        return cached

    def model(self) -> SOModel:
        return full_model(self.elements, self.kappa)


def count_ordinals(universe: Iterable[HFSet]) -> int:
    uni = set(universe)

    def is_ordinal(x: HFSet) -> bool:
        return all(y.elements <= x.elements for y in x.elements) and all(
            a in b.elements or a is b or b in a.elements for a in x.elements for b in x.elements
        )

    return sum(1 for x in uni if is_ordinal(x))


def code_from_pairs(pairs: Iterable[tuple]) -> MemCode | None:
    """Read a relation as a code (nodes are its field, top its unique maximum); ``None`` if it is not one.

    The empty relation has no nodes and codes nothing.
    """
    pairs = list(pairs)
    if not pairs:
        return None
    nodes = {a for a, _ in pairs} | {b for _, b in pairs}
    sources = {a for a, _ in pairs}
    tops = [n for n in nodes if n not in sources]
    if len(tops) != 1:
        return None
    try:
        return validate(RawPointedGraph.build(nodes, pairs, tops[0]))
    except CodeError:
        return None


def _as_pairs(cls: frozenset) -> list | None:
    out = []
    for e in cls:
        if isinstance(e, tuple) and len(e) == 2:
            out.append(e)
        elif isinstance(e, HFSet):
            try:
                out.append(_unpair(e))
            except DecodeError:
                return None
        else:
            return None
    return out


def _cones(code: MemCode) -> list[MemCode]:
    return [restrict_below(code, x) for x in sorted(code.nodes, key=lambda n: str(n))]


def unroll(m: SOModel, budget: int, threads: int = 1) -> UnrolledStructure:
    """The sets coded by codes with at most ``budget`` nodes available in ``m``.

    Under ``FULL`` every code on at most ``budget`` nodes is available.
    Otherwise the available codes are those whose edge set is a class (as a
    binary class or a class of Kuratowski pairs), the codes ``E_Y`` of
    unary classes, the codes ``E_a`` of elements, and the restrictions of all
    of these below a node.  ``threads`` > 1 collapses candidates in a
    thread pool; the result does not depend on it.
    """
    cap = caps()["budget"]
    if budget > cap:
        raise CapExceeded(f"budget {budget} exceeds cap {cap}")
    if m.universe is None:
        raise ValueError("unrolling needs a universe")
    kappa = count_ordinals(m.universe)
    found: dict[HFSet, MemCode] = {}
    if m.classes is FULL:
        candidates = enumerate_codes(budget)
    else:
        seeds: list[MemCode] = [canonical_code(a) for a in m.universe]
        for c in m.classes:
            pairs = _as_pairs(c)
            code = code_from_pairs(pairs) if pairs is not None else None
            if code is not None:
                seeds.append(code)
            if all(isinstance(e, HFSet) for e in c):
                seeds.append(canonical_code(HFSet(c)))
        candidates = [cone for seed in seeds if len(seed.nodes) <= budget for cone in _cones(seed)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(collapse, candidates))
    else:
        values = [collapse(c) for c in candidates]
    # first candidate wins, so the witnesses follow candidate order
    for x, code in zip(values, candidates):
        found.setdefault(x, code)
    elements = tuple(sorted(found))
    return UnrolledStructure(budget, elements, kappa, m.classes is FULL, {x: found[x] for x in elements})


def cutoff(n: Iterable[HFSet], k: int, reading: str = "tc") -> SOModel:
    """Sets of hereditary size at most ``k`` (or rank below ``k``) with the subsets of those found in ``n``."""
    members = frozenset(n)
    for x in members:
        if not x.elements <= members:
            raise ValueError(f"not transitive: {x} has an element outside")
    if reading == "tc":
        small = [x for x in members if x.tc_size <= k]
    elif reading == "rank":
        small = [x for x in members if x.rank < k]
    else:
        raise ValueError(f"unknown reading {reading!r}")
    uni = frozenset(small)
    classes = sorted((y for y in members if y.elements <= uni), key=lambda y: y.key)
    return SOModel(tuple(sorted(uni)), tuple(frozenset(y.elements) for y in classes), k)


class Direction(enum.Enum):
    CUT_UNROLL = "cut-unroll"
    UNROLL_CUT = "unroll-cut"


@dataclass(frozen=True)
class RoundTrip:
    direction: Direction
    elements: dict  # source element -> recovered element
    classes: dict  # source class -> recovered class
    unmatched_elements: tuple
    unmatched_classes: tuple
    unrolled_size: int

    @property
    def ok(self) -> bool:
        return not self.unmatched_elements and not self.unmatched_classes


def roundtrip_audit(direction: Direction, seed, budget: int | None = None, k: int | None = None,
                    reading: str = "tc") -> RoundTrip:
    """Run one composite and compare with the seed.

    CUT_UNROLL: ``seed`` is an SOModel; unroll with ``budget`` (default
    ``|M|+1``) and cut at ``k`` (default: the largest hereditary size, or one
    past the largest rank, in the seed).  Elements map by ``a -> collapse(E_a)``
    and classes by ``A -> collapse(E_A)``.

    UNROLL_CUT: ``seed`` is a transitive set; cut at ``k`` and unroll with
    ``budget`` (default: the largest hereditary size in the seed).
    """
    if direction is Direction.CUT_UNROLL:
        uni = list(seed.universe)
        budget = len(uni) + 1 if budget is None else budget
        if k is None:
            k = max(x.tc_size for x in uni) if reading == "tc" else max(x.rank for x in uni) + 1
        u = unroll(seed, budget)
        back = cutoff(u.elements, k, reading)
        got = set(back.universe)
        emap = {a: collapse(canonical_code(a)) for a in uni}
        bad_e = [a for a, b in emap.items() if b not in got] + [b for b in got if b not in set(uni)]
        src_classes = seed.unary_classes()
        got_classes = set(back.classes)
        cmap = {c: frozenset(collapse(canonical_code(HFSet(c))).elements) for c in src_classes}
        bad_c = [c for c, d in cmap.items() if d not in got_classes]
        bad_c += [d for d in got_classes if d not in set(src_classes)]
        return RoundTrip(direction, emap, cmap, tuple(sorted(bad_e)), tuple(sorted(bad_c, key=sorted)), len(u))
    n = sorted(set(seed))
    if k is None:
        raise ValueError("UNROLL_CUT needs the cut level k")
    budget = max(x.tc_size for x in n) if budget is None else budget
    model = cutoff(n, k, reading)
    u = unroll(model, budget)
    emap = {x: x for x in n if x in u}
    bad = [x for x in n if x not in u] + [y for y in u.elements if y not in set(n)]
    return RoundTrip(direction, emap, {}, tuple(sorted(bad)), (), len(u))


# --- axiom audits --------------------------------------------------------------------


class Axiom(enum.Enum):
    EXT = "EXT"
    PAIR = "PAIR"
    UNION = "UNION"
    FOUND = "FOUND"
    SEP0 = "SEP0"
    S0TR = "S0TR"


@dataclass(frozen=True)
class AxiomReport:
    axiom: Axiom
    checked: int
    outside_budget: int
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        if self.failures:
            return "fail"
        return "pass within budget" if self.outside_budget else "pass"


def _fits(u: UnrolledStructure, x: HFSet) -> bool:
    return x.tc_size <= u.budget


def audit_axiom(u: UnrolledStructure, axiom: Axiom, formula: Formula | None = None, var: str = "z",
                instance: tuple | None = None) -> AxiomReport:
    """Brute-force check of one axiom in ``u``.

    SEP0 takes a bounded formula and the separation variable ``var``; every
    other free variable ranges over ``u`` and the separated subset of each
    element must be present.  S0TR takes ``(RecursionInstance, WfRelation)``
    whose step is evaluated in ``u``; the solution set of pairs must be present.
    """
    els = u.elements
    mem = u.members
    fails: list = []
    skipped = 0
    checked = 0
    if axiom is Axiom.EXT:
        seen: dict = {}
        for x in els:
            checked += 1
            ext = frozenset(z for z in els if z in x.elements)
            if ext in seen:
                fails.append((seen[ext], x))
            seen[ext] = x
    elif axiom is Axiom.FOUND:
        for x in els:
            checked += 1
            inside = [z for z in x.elements if z in mem]
            if inside and not any(not (z.elements & x.elements) for z in inside):
                fails.append(x)
    elif axiom is Axiom.PAIR:
        for a, b in itertools.combinations_with_replacement(els, 2):
            p = HFSet((a, b))
            checked += 1
            if p in mem:
                continue
            if _fits(u, p):
                fails.append((a, b))
            else:
                skipped += 1
    elif axiom is Axiom.UNION:
        for x in els:
            y = hf_union(x)
            checked += 1
            if y in mem:
                continue
            if _fits(u, y):
                fails.append(x)
            else:
                skipped += 1
    elif axiom is Axiom.SEP0:
        if formula is None or not is_sigma0(formula) or not is_first_order(formula):
            raise ValueError("SEP0 needs a bounded first-order formula")
        params = sorted(free_set_vars(formula) - {var})
        fn = compile_formula(u.model(), formula)
        for x in els:
            for vals in itertools.product(els, repeat=len(params)):
                env = dict(zip(params, vals))
                sep = []
                for z in x.sorted_elements:
                    env[var] = z
                    if fn(env):
                        sep.append(z)
                s = HFSet(sep)
                checked += 1
                if s not in mem:
                    fails.append((x, vals, s))
    elif axiom is Axiom.S0TR:
        if instance is None:
            raise ValueError("S0TR needs (instance, relation)")
        inst, rel = instance
        if _is_formula(inst.step) and not is_sigma0(inst.step):
            raise ValueError("S0TR needs a bounded step formula")
        sol = etr_solve(inst, rel)
        idx = inst.index or (lambda s: s)
        whole = HFSet(hf_kpair(idx(r), x) for r, x in sol.pairs)
        for r in rel.domain:
            s = HFSet(sol.slice(r))
            checked += 1
            if s not in mem:
                if _fits(u, s):
                    fails.append(("slice", r, s))
                else:
                    skipped += 1
        checked += 1
        if whole not in mem:
            if _fits(u, whole):
                fails.append(("solution", whole))
            else:
                skipped += 1
    else:
        raise ValueError(f"unknown axiom {axiom}")
    return AxiomReport(axiom, checked, skipped, tuple(fails))


def audit_sep0_all(u: UnrolledStructure, max_size: int, params: int = 1, exhaustive: bool = False) -> AxiomReport:
    """Separation for every bounded formula of at most ``max_size`` nodes.

    The separated set is always a subset of an element, so when ``u`` contains
    every subset of every element there is nothing left to check.  Otherwise
    every meaning of such a formula (free variables: the separation variable,
    the bounding element and ``params`` parameters) is enumerated and its
    separated subsets looked up.  ``exhaustive`` forces the enumeration even
    without gaps.
    """
    import numpy as np

    from ._enum import enumerate_meanings

    mem = u.members
    gaps = []
    checked = 0
    for x in u.elements:
        elems = x.sorted_elements
        for r in range(len(elems) + 1):
            for sub in itertools.combinations(elems, r):
                checked += 1
                if HFSet(sub) not in mem:
                    gaps.append((x, HFSet(sub)))
    if not gaps and not exhaustive:
        return AxiomReport(Axiom.SEP0, checked, 0, ())
    els = list(u.elements)
    pos = {x: i for i, x in enumerate(els)}
    member = np.array([[a in b.elements for b in els] for a in els], dtype=bool)
    names = ["z", "x"] + [f"p{i}" for i in range(1, params + 1)]
    gapset = {(pos[x], s) for x, s in gaps}
    fails = set()
    for mean in enumerate_meanings(member, names, max_size, True):
        vs = mean.vars
        others = [v for v in names[1:] if v in vs]
        for assign in itertools.product(range(len(els)), repeat=len(others)):
            env = dict(zip(others, assign))
            xs = [env["x"]] if "x" in env else range(len(els))
            for xi in xs:
                env["x"] = xi
                sep = []
                for z in els[xi].sorted_elements:
                    env["z"] = pos[z]
                    if bool(mean.table[tuple(env[v] for v in vs)]):
                        sep.append(z)
                s = HFSet(sep)
                checked += 1
                if (xi, s) in gapset:
                    fails.add((els[xi], s))
    return AxiomReport(Axiom.SEP0, checked, 0, tuple(sorted(fails)))


# --- translation audits ---------------------------------------------------------------


@dataclass(frozen=True)
class TranslationReport:
    formula: Formula
    unrolled: bool
    translated: dict  # mode name -> value

    @property
    def ok(self) -> bool:
        return all(v == self.unrolled for v in self.translated.values())


def audit_translation(m: SOModel, budget: int, phi: Formula, params: dict | None = None,
                      max_depth: int = 2) -> TranslationReport:
    """Compare truth in the unrolling with truth of the translations.

    Sentences go through ``star_translate`` in every mode, evaluated with
    code quantifiers ranging over all codes of at most ``budget`` nodes.
    Bounded formulas with ``params`` (codes for their free variables) also go
    through ``etr_star_translate``, evaluated over the single glued code.
    """
    if quantifier_depth(phi) > max_depth:
        raise ValueError(f"quantifier depth {quantifier_depth(phi)} exceeds {max_depth}")
    u = unroll(m, budget)
    params = dict(params or {})
    sets = {k: collapse(c) for k, c in params.items()}
    for k, x in sets.items():
        if x not in u:
            raise ValueError(f"parameter {k} codes a set outside the unrolling")
    truth = evaluate(u.model(), phi, sets)
    out = {}
    family = code_model(enumerate_codes(budget))
    if params or free_set_vars(phi):
        env = {star_name(k): c for k, c in params.items()}
        for mode in StarMode:
            out[mode.name] = evaluate(family, star_translate(phi, mode), env)
        if is_sigma0(phi):
            est = etr_star_translate(phi, params)
            out["ETR_STAR"] = evaluate(code_model([est.code]), est.formula, est.valuation())
    else:
        for mode in StarMode:
            out[mode.name] = evaluate(family, star_translate(phi, mode))
    return TranslationReport(phi, truth, out)


def audit_interpretation(n: Sequence[HFSet], k: int, phi: Formula) -> tuple[bool, bool]:
    """Truth of a second-order sentence in ``cutoff(n, k)`` and of its interpretation in ``n``."""
    model = cutoff(n, k)
    inner = evaluate(model, phi)
    outer = evaluate(full_model(sorted(set(n)), k), cutoff_interpret(phi))
    return inner, outer
