"""Iterated truth predicates, the Def operator and Def-iterating codes.

Truth is queried lazily: ``Truth.query(level, phi, valuation)`` evaluates
``phi`` with the ``tr`` atom answered by recursive queries at strictly
smaller levels.  A :class:`TruthTable` is the projection of this relation to
a finite domain: the primitive formulas (``=``, ``in``, ``tr``, ``inclass``
on the parameter, binary ``or``, ``not``, ``ex``) over a fixed variable set
whose codes have rank at most ``size_bound``, together with every partial
valuation of those variables that covers the formula's free variables.
"""
from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ._enum import enumerate_meanings
from .etr import RecursionInstance, WellOrder, WfRelation, etr_solve
from .hfset import EMPTY, HFSet, format_hf
from .logic.coding import DecodeError, decode_valuation, encode_valuation, godel_decode, godel_encode
from .logic.semantics import FULL, SOModel, compile_formula
from .logic.syntax import (
    And,
    Eq,
    Exists,
    ExistsIn,
    Forall,
    ForallIn,
    Formula,
    In,
    InClass,
    Not,
    Or,
    Tr,
    format_formula,
    free_set_vars,
    parse_formula,
)
from .memcode import (
    MemCode,
    RawPointedGraph,
    _Fresh,
    _sort_key,
    normalize,
    restrict_below,
    validate,
    vin,
)

__all__ = [
    "PARAM",
    "Truth",
    "tr_query",
    "is_primitive",
    "desugar",
    "primitive_formulas",
    "TruthTable",
    "tr_materialize",
    "tr_audit",
    "tr_fixed_points",
    "tr_layered",
    "table_to_text",
    "DefBounds",
    "FULLPARAMS",
    "def_op",
    "def_code",
    "l_code",
]

# name of the class parameter in formulas
PARAM = "A"


class _FullParams:
    def __repr__(self) -> str:
        return "FULLPARAMS"


FULLPARAMS = _FullParams()


@dataclass(frozen=True)
class DefBounds:
    max_size: int
    max_params: int = 0


# --- primitive language -----------------------------------------------------


def is_primitive(phi: Formula, param: bool = True) -> bool:
    t = type(phi)
    if t in (Eq, In, Tr):
        return True
    if t is InClass:
        return param and phi.cls == PARAM
    if t is Not:
        return is_primitive(phi.body, param)
    if t is Or:
        return len(phi.args) == 2 and all(is_primitive(a, param) for a in phi.args)
    if t is Exists:
        return is_primitive(phi.body, param)
    return False


def _falsum(var: str) -> Formula:
    return Exists(var, Not(Eq(var, var)))


def desugar(phi: Formula) -> Formula:
    """Rewrite ``and``, n-ary ``or``, ``all`` and bounded quantifiers into the primitive language."""
    t = type(phi)
    if t in (Eq, In, Tr, InClass):
        return phi
    if t is Not:
        return Not(desugar(phi.body))
    if t is Exists:
        return Exists(phi.var, desugar(phi.body))
    if t is Forall:
        return Not(Exists(phi.var, Not(desugar(phi.body))))
    if t is ExistsIn:
        return Exists(phi.var, desugar(And((In(phi.var, phi.bound), phi.body))))
    if t is ForallIn:
        return Not(Exists(phi.var, Not(desugar(Or((Not(In(phi.var, phi.bound)), phi.body))))))
    if t is Or:
        args = [desugar(a) for a in phi.args]
        if not args:
            return _falsum("x")
        out = args[-1]
        for a in reversed(args[:-1]):
            out = Or((a, out))
        return out
    if t is And:
        if not phi.args:
            return Not(_falsum("x"))
        return Not(desugar(Or(tuple(Not(a) for a in phi.args))))
    raise ValueError(f"{t.__name__} has no primitive rewriting")


# --- lazy truth ---------------------------------------------------------------


class Truth:
    """The Gamma-iterated truth predicate over ``model``, relative to ``param``.

    Levels are the elements of ``gamma``; they need not belong to the
    universe, but only universe elements can be named by a ``tr`` atom.
    """

    def __init__(self, model: SOModel, gamma: WellOrder, param: frozenset | None = None):
        if model.universe is None:
            raise ValueError("truth needs a structure with a universe")
        self.model = model
        self.gamma = gamma
        self.param = frozenset(param) if param is not None else None
        self._memo: dict = {}
        self._compiled: dict = {}
        self._lock = threading.Lock()

    def _check_level(self, level) -> None:
        if level not in self.gamma:
            raise ValueError(f"level {level} is not in the well-order")

    def valuation_ok(self, phi: Formula, v: Mapping[str, HFSet]) -> bool:
        members = self.model.members
        return free_set_vars(phi) <= set(v) and all(x in members for x in v.values())

    def tr_atom(self, level, ax, ay, az) -> bool:
        """The ``tr`` clause: ``ax`` strictly below ``level``, ``ay`` a formula, ``az`` a valuation for it."""
        if not self.gamma.less(ax, level):
            return False
        try:
            psi = godel_decode(ay)
            w = decode_valuation(az)
        except DecodeError:
            return False
        if not is_primitive(psi, self.param is not None) or not self.valuation_ok(psi, w):
            return False
        return self.query(ax, psi, w)

    def _fn(self, level, phi):
        key = (level, phi)
        fn = self._compiled.get(key)
        if fn is None:
            fn = compile_formula(self.model, phi, tr=lambda a, b, c: self.tr_atom(level, a, b, c))
            self._compiled.setdefault(key, fn)
        return fn

    def query(self, level, phi: Formula, v: Mapping[str, HFSet]) -> bool:
        self._check_level(level)
        if not self.valuation_ok(phi, v):
            raise ValueError("valuation does not cover the free variables with universe elements")
        fv = free_set_vars(phi)
        key = (level, phi, frozenset((k, x) for k, x in v.items() if k in fv))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        env = {k: v[k] for k in fv}
        if self.param is not None:
            env[PARAM] = self.param
        out = bool(self._fn(level, phi)(env))
        # identical concurrent queries insert the same value
        with self._lock:
            return self._memo.setdefault(key, out)


def tr_query(m: SOModel, A, gamma: WellOrder, level, phi: Formula, v: Mapping[str, HFSet] | None = None) -> bool:
    return Truth(m, gamma, A).query(level, phi, dict(v or {}))


# --- bounded tables -------------------------------------------------------------


def primitive_formulas(size_bound: int, variables: Sequence[str] = ("x", "y"), param: bool = False) -> list[Formula]:
    """Primitive formulas over ``variables`` whose code has rank <= ``size_bound``, by (rank, code)."""
    vs = list(variables)
    found: dict[Formula, HFSet] = {}

    def add(phi) -> bool:
        if phi in found:
            return False
        code = godel_encode(phi)
        if code.rank > size_bound:
            return False
        found[phi] = code
        return True

    layer = []
    for a in vs:
        for b in vs:
            layer += [Eq(a, b), In(a, b)]
            layer += [Tr(a, b, c) for c in vs]
        if param:
            layer.append(InClass(a, PARAM))
    layer = [f for f in layer if add(f)]
    # a compound code has rank at least two above each field
    while layer:
        nxt = []
        pool = [f for f in found if found[f].rank <= size_bound - 4]
        for f in layer:
            cands = [Not(f)] + [Exists(x, f) for x in vs]
            if found[f].rank <= size_bound - 4:
                for g in pool:
                    cands += [Or((f, g)), Or((g, f))]
            nxt += [c for c in cands if add(c)]
        layer = nxt
    return sorted(found, key=lambda f: (found[f].rank, found[f].key))


def _valuations(phi: Formula, variables: Sequence[str], universe: Sequence[HFSet]) -> list[dict]:
    fv = free_set_vars(phi)
    choices = [[(v, a) for a in universe] if v in fv else [None] + [(v, a) for a in universe] for v in variables]
    return [dict(p for p in combo if p is not None) for combo in itertools.product(*choices)]


@dataclass(frozen=True)
class TruthTable:
    gamma: WellOrder
    param: frozenset | None
    model: SOModel
    size_bound: int
    variables: tuple
    formulas: tuple
    entries: frozenset = field(repr=False)

    def domain(self) -> list[tuple]:
        """Every (level, formula, valuation) of the table's domain, valuations as frozen items."""
        out = []
        for lvl in self.gamma:
            for phi in self.formulas:
                for v in _valuations(phi, self.variables, self.model.universe):
                    out.append((lvl, phi, frozenset(v.items())))
        return out

    def triples(self) -> list[tuple[HFSet, HFSet, HFSet]]:
        return sorted(
            ((lvl, godel_encode(phi), encode_valuation(dict(v))) for lvl, phi, v in self.entries),
            key=lambda t: (t[0].key, t[1].key, t[2].key),
        )

    def restrict(self, levels: Iterable) -> frozenset:
        keep = set(levels)
        return frozenset(e for e in self.entries if e[0] in keep)

    def __contains__(self, item) -> bool:
        lvl, phi, v = item
        return (lvl, phi, frozenset(dict(v).items())) in self.entries


def _formula_domain(size_bound: int, variables, param: bool) -> tuple:
    return tuple(primitive_formulas(size_bound, variables, param))


def tr_materialize(
    m: SOModel,
    A,
    gamma: WellOrder,
    size_bound: int,
    variables: Sequence[str] = ("x", "y"),
    threads: int = 1,
) -> TruthTable:
    if size_bound < 0:
        raise ValueError("size bound must be a natural number")
    truth = Truth(m, gamma, A)
    formulas = _formula_domain(size_bound, tuple(variables), A is not None)
    points = [(lvl, phi, v) for lvl in gamma for phi in formulas for v in _valuations(phi, variables, m.universe)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(lambda p: truth.query(*p), points))
    else:
        values = [truth.query(*p) for p in points]
    entries = {(lvl, phi, frozenset(v.items())) for (lvl, phi, v), b in zip(points, values) if b}
    return TruthTable(gamma, truth.param, m, size_bound, tuple(variables), formulas, frozenset(entries))


# --- clause checking --------------------------------------------------------------


class _Lookup:
    """Membership in a candidate table, with references outside its domain answered lazily."""

    def __init__(self, m, gamma, param, formulas, variables, member):
        self.formulas = set(formulas)
        self.variables = set(variables)
        self.member = member
        self.truth = Truth(m, gamma, param)
        self.gamma = gamma
        self.param = param

    def __call__(self, lvl, phi, v: frozenset):
        if phi in self.formulas and {k for k, _ in v} <= self.variables:
            return self.member((lvl, phi, v))
        return self.truth.query(lvl, phi, dict(v))

    def tr(self, level, ax, ay, az):
        if not self.gamma.less(ax, level):
            return False
        try:
            psi = godel_decode(ay)
            w = decode_valuation(az)
        except DecodeError:
            return False
        if not is_primitive(psi, self.param is not None) or not self.truth.valuation_ok(psi, w):
            return False
        return self(ax, psi, frozenset(w.items()))


def _clause(look: _Lookup, universe, lvl, phi, v: frozenset) -> tuple[str, bool]:
    """Name of the clause governing ``phi`` and the value it demands."""
    d = dict(v)
    t = type(phi)
    if t is Eq:
        return "eq", d[phi.left] == d[phi.right]
    if t is In:
        return "in", d[phi.elem] in d[phi.container].elements
    if t is InClass:
        return "param", d[phi.term] in look.param
    if t is Tr:
        return "tr", look.tr(lvl, d[phi.level], d[phi.formula], d[phi.valuation])
    if t is Or:
        return "or", look(lvl, phi.args[0], v) or look(lvl, phi.args[1], v)
    if t is Not:
        return "not", not look(lvl, phi.body, v)
    if t is Exists:
        rest = {k: a for k, a in d.items() if k != phi.var}
        return "ex", any(look(lvl, phi.body, frozenset({**rest, phi.var: b}.items())) for b in universe)
    raise ValueError(f"{t.__name__} is not primitive")


@dataclass(frozen=True)
class AuditReport:
    checked: int
    violations: tuple
    per_clause: dict

    @property
    def ok(self) -> bool:
        return not self.violations


def tr_audit(table: TruthTable) -> AuditReport:
    """Check every clause as a biconditional at every point of the table's domain."""
    look = _Lookup(table.model, table.gamma, table.param, table.formulas, table.variables,
                   table.entries.__contains__)
    bad = []
    counts: dict[str, int] = {}
    dom = table.domain()
    for lvl, phi, v in dom:
        name, want = _clause(look, table.model.universe, lvl, phi, v)
        counts[name] = counts.get(name, 0) + 1
        if want != ((lvl, phi, v) in table.entries):
            bad.append((name, lvl, phi, v))
    return AuditReport(len(dom), tuple(bad), counts)


def tr_fixed_points(
    m: SOModel,
    A,
    gamma: WellOrder,
    size_bound: int,
    variables: Sequence[str] = ("x", "y"),
    limit: int = 2,
) -> list[frozenset]:
    """Search all subsets of the domain for tables satisfying every clause.

    Points are decided in (level, rank) order, trying both truth values and
    rejecting an assignment as soon as a clause whose references are all
    decided fails.  Stops after ``limit`` solutions.
    """
    param = frozenset(A) if A is not None else None
    formulas = _formula_domain(size_bound, tuple(variables), A is not None)
    rank = {f: godel_encode(f).rank for f in formulas}
    pos = gamma.position
    points = []
    for lvl in gamma:
        for phi in formulas:
            for v in _valuations(phi, variables, m.universe):
                points.append((lvl, phi, frozenset(v.items())))
    points.sort(key=lambda p: (pos[p[0]], rank[p[1]]))
    index = {p: i for i, p in enumerate(points)}
    value: dict = {}

    class Undecided(Exception):
        pass

    def member(p):
        if p not in value:
            raise Undecided
        return value[p]

    look = _Lookup(m, gamma, param, formulas, variables, member)
    uni = m.universe
    # for each point, the points whose clause may become checkable once it is set
    watchers: list[list[int]] = [[] for _ in points]
    for i, p in enumerate(points):
        refs = _references(p, uni, look)
        last = max((index[r] for r in refs if r in index), default=-1)
        watchers[max(last, i)].append(i)

    solutions: list[frozenset] = []

    def consistent(i) -> bool:
        for j in watchers[i]:
            try:
                _, want = _clause(look, uni, *points[j])
            except Undecided:
                continue
            if want != value[points[j]]:
                return False
        return True

    def rec(i) -> None:
        if len(solutions) >= limit:
            return
        if i == len(points):
            solutions.append(frozenset(p for p, b in value.items() if b))
            return
        for b in (False, True):
            value[points[i]] = b
            if consistent(i):
                rec(i + 1)
            del value[points[i]]

    rec(0)
    return solutions


def _references(p, universe, look: _Lookup) -> list:
    lvl, phi, v = p
    d = dict(v)
    t = type(phi)
    if t is Or:
        return [(lvl, a, v) for a in phi.args]
    if t is Not:
        return [(lvl, phi.body, v)]
    if t is Exists:
        rest = {k: a for k, a in d.items() if k != phi.var}
        return [(lvl, phi.body, frozenset({**rest, phi.var: b}.items())) for b in universe]
    if t is Tr:
        ax, ay, az = d[phi.level], d[phi.formula], d[phi.valuation]
        try:
            return [(ax, godel_decode(ay), frozenset(decode_valuation(az).items()))]
        except DecodeError:
            return []
    return []


def _depth(phi) -> int:
    t = type(phi)
    if t is Not or t is Exists:
        return 1 + _depth(phi.body)
    if t is Or:
        return 1 + max(_depth(a) for a in phi.args)
    return 0


def tr_layered(
    m: SOModel,
    A,
    gamma: WellOrder,
    size_bound: int,
    variables: Sequence[str] = ("x", "y"),
) -> TruthTable:
    """Build the table as the solution of a recursion along stages (level, formula depth).

    The slice at a stage holds the true (formula, valuation) points of that
    stage; each is decided by its clause read off the partial solution.
    """
    param = frozenset(A) if A is not None else None
    formulas = _formula_domain(size_bound, tuple(variables), A is not None)
    depth = {f: _depth(f) for f in formulas}
    top = max(depth.values(), default=0)
    stages = [(i, d) for i in range(len(gamma)) for d in range(top + 1)]
    order = {s: k for k, s in enumerate(stages)}
    rel = WfRelation(tuple(stages), frozenset((stages[a], stages[b]) for b in range(len(stages)) for a in range(b)))
    levels = list(gamma)
    by_stage: dict = {s: [] for s in stages}
    for i, lvl in enumerate(levels):
        for phi in formulas:
            for v in _valuations(phi, variables, m.universe):
                by_stage[(i, depth[phi])].append((phi, frozenset(v.items())))

    last: list = [None, None]

    def step(candidate, r, partial):
        # one slice calls this for every candidate with the same partial solution
        if last[0] is not partial:
            last[:] = [partial, {(levels[s[0]], phi, v) for s, (phi, v) in partial}]
        known = last[1]

        def member(p):
            lvl, phi, _ = p
            if order[(levels.index(lvl), depth[phi])] >= order[r]:
                raise AssertionError("stage refers to itself")
            return p in known

        look = _Lookup(m, gamma, param, formulas, variables, member)
        phi, v = candidate
        return _clause(look, m.universe, levels[r[0]], phi, v)[1]

    inst = RecursionInstance(step, candidates=lambda r: by_stage[r])
    sol = etr_solve(inst, rel)
    entries = frozenset((levels[s[0]], phi, v) for s, (phi, v) in sol.pairs)
    return TruthTable(gamma, param, m, size_bound, tuple(variables), formulas, entries)


def _ack_text(x: HFSet) -> str:
    try:
        return f"#{x.ack}"
    except OverflowError:
        return format_hf(x)


def table_to_text(table: TruthTable) -> str:
    """One line per entry: level, formula, valuation; sorted by level, formula code, valuation code.

    Levels and assigned values are printed as Ackermann literals; formulas as
    s-expressions because their codes have astronomically large indices.
    """
    rows = []
    for lvl, phi, v in table.entries:
        d = dict(v)
        val = ",".join(f"{k}={_ack_text(d[k])}" for k in sorted(d)) or "-"
        key = (lvl.key if isinstance(lvl, HFSet) else (), godel_encode(phi).key, encode_valuation(d).key)
        rows.append((key, f"{_ack_text(lvl) if isinstance(lvl, HFSet) else lvl}\t{format_formula(phi)}\t{val}"))
    rows.sort(key=lambda r: r[0])
    return "".join(line + "\n" for _, line in rows)


# --- Def -----------------------------------------------------------------------


def _structure(m) -> tuple[list, np.ndarray]:
    if isinstance(m, SOModel):
        elems = list(m.universe)
    else:
        elems = sorted(set(m))
    member = np.array([[a in b.elements for b in elems] for a in elems], dtype=bool).reshape(len(elems), len(elems))
    return elems, member


def _definable(elems: list, member: np.ndarray, predicates: list[np.ndarray], mode) -> frozenset:
    n = len(elems)
    if mode is FULLPARAMS:
        out = set()
        idx = list(range(n))
        for r in range(n + 1):
            for subset in itertools.combinations(idx, r):
                # x = p1 or ... or x = pk with pi the members of the subset
                ext = frozenset(i for i in idx if any(i == p for p in subset))
                if ext != frozenset(subset):
                    raise AssertionError("disjunction of equalities misdefines a subset")
                out.add(ext)
        return frozenset(out)
    if n == 0:
        return frozenset({frozenset()})
    params = [f"p{i}" for i in range(1, mode.max_params + 1)]
    out = set()
    for mean in enumerate_meanings(member, ["x"] + params, mode.max_size, False, predicates):
        vs = mean.vars
        t = mean.table
        used = [p for p in params if p in vs]
        for assign in itertools.product(range(n), repeat=len(used)):
            env = dict(zip(used, assign))
            ext = set()
            for i in range(n):
                env["x"] = i
                if bool(t[tuple(env[v] for v in vs)]):
                    ext.add(i)
            out.add(frozenset(ext))
    return frozenset(out)


def def_op(m, params: Sequence[frozenset] = (), mode=FULLPARAMS) -> frozenset:
    """Subsets of the universe definable from ``params`` (unary predicates), possibly with set parameters.

    ``m`` is an :class:`SOModel` or any finite collection of HF sets, taken
    with membership restricted to it.
    """
    elems, member = _structure(m)
    preds = [np.array([e in p for e in elems], dtype=bool) for p in params]
    found = _definable(elems, member, preds, mode)
    return frozenset(frozenset(elems[i] for i in s) for s in found)


def def_code(E: MemCode, mode=FULLPARAMS, predicate: MemCode | None = None) -> MemCode:
    """A code for the definable subsets of the set coded by ``E``.

    Elements are the penultimate nodes with the edges of ``E`` among them;
    ``predicate`` (a code) marks the elements it contains.
    """
    pen = sorted(E.pen, key=_sort_key)
    pos = {x: i for i, x in enumerate(pen)}
    member = np.zeros((len(pen), len(pen)), dtype=bool)
    for a, b in E.edges:
        if a in pos and b in pos:
            member[pos[a], pos[b]] = True
    preds = []
    if predicate is not None:
        preds.append(np.array([vin(restrict_below(E, x), predicate).positive for x in pen], dtype=bool))
    found = _definable(pen, member, preds, mode)
    fresh = _Fresh(E.nodes)
    nodes = set(E.nodes)
    edges = set(E.edges)
    top = fresh("def")
    nodes.add(top)
    for s in sorted(found, key=lambda s: sorted(s)):
        node = fresh("def")
        nodes.add(node)
        edges |= {(pen[i], node) for i in s}
        edges.add((node, top))
    return normalize(RawPointedGraph.build(nodes, edges, top))


def l_code(gamma, A: MemCode | None = None, mode=FULLPARAMS) -> MemCode:
    """Iterate :func:`def_code` along ``gamma`` (a length or a well-order) from the empty code."""
    k = gamma if isinstance(gamma, int) else len(gamma)
    code = validate(RawPointedGraph.build(["aux:top0"], [], "aux:top0"))
    for _ in range(k):
        code = def_code(code, mode, A)
    return code
