"""Second-order structures and a compiling evaluator.

A structure has a transitive universe of HF sets (or none, for a pure code
structure), a class family, an optional bound ``kappa`` for ``hk`` atoms and
an optional family of membership codes.

Class quantifiers range over the family, split by sort: a class used with
``inclass`` is unary, one used with ``rel`` is binary.  Two guarded shapes
enumerate something else instead:

* ``(exC X (and (code X) ...))`` / ``(allC X (or (not (code X)) ...))``
  range over the code family;
* ``(exC F (and (ipi F S T) ...))`` / ``(allC F (or (not (ipi F S T)) ...))``
  range over every initial partial isomorphism from ``S`` to ``T``, found by
  brute-force search.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from ..config import caps
from ..hfset import HFSet
from ..memcode import MemCode, RawPointedGraph, enumerate_ipis, is_ipi, restrict_below, validate
from .syntax import (
    And,
    Down,
    Eq,
    Exists,
    ExistsClass,
    ExistsIn,
    ExistsNode,
    ExistsPen,
    Forall,
    ForallClass,
    ForallIn,
    ForallNode,
    ForallPen,
    Formula,
    Hk,
    In,
    InClass,
    Ipi,
    IsCode,
    Not,
    Or,
    Rel,
    Tr,
    subformulas,
)

__all__ = [
    "FULL",
    "SOModel",
    "EvaluationError",
    "UnboundVariable",
    "evaluate",
    "compile_formula",
    "class_sort",
    "full_model",
    "code_model",
]


class _Full:
    def __repr__(self) -> str:
        return "FULL"

    def __reduce__(self):
        return "FULL"


FULL = _Full()


class EvaluationError(ValueError):
    pass


class UnboundVariable(EvaluationError):
    pass


def _is_pair(x) -> bool:
    return isinstance(x, tuple) and len(x) == 2


@dataclass(frozen=True)
class SOModel:
    """``universe``: transitive tuple of HF sets, or ``None`` for code-only structures.

    ``classes`` is :data:`FULL` or a tuple of frozensets whose members are
    universe elements (unary) or pairs of them (binary).
    """

    universe: tuple | None
    classes: Any = FULL
    kappa: int | None = None
    codes: tuple | None = None
    _members: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        if self.universe is None:
            return
        uni = tuple(sorted(set(self.universe)))
        if len(uni) != len(self.universe):
            raise ValueError("universe has duplicates")
        members = frozenset(uni)
        for x in uni:
            if not x.elements <= members:
                raise ValueError(f"universe is not transitive: {x} has an element outside it")
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "_members", members)
        if self.classes is not FULL:
            fam = []
            for c in self.classes:
                c = frozenset(c)
                for e in c:
                    ok = e in members if not _is_pair(e) else (e[0] in members and e[1] in members)
                    if not ok:
                        raise ValueError("class contains an element outside the universe")
                fam.append(c)
            object.__setattr__(self, "classes", tuple(fam))

    @property
    def members(self) -> frozenset:
        return self._members

    def unary_classes(self) -> list[frozenset]:
        if self.universe is None:
            raise EvaluationError("structure has no universe for class quantifiers")
        if self.classes is FULL:
            n = len(self.universe)
            if n > caps()["class_universe"]:
                raise EvaluationError(f"FULL class quantification over {n} > {caps()['class_universe']} elements")
            return [frozenset(s) for r in range(n + 1) for s in itertools.combinations(self.universe, r)]
        return [c for c in self.classes if all(not _is_pair(e) for e in c)]

    def binary_classes(self) -> list[frozenset]:
        if self.universe is None:
            raise EvaluationError("structure has no universe for class quantifiers")
        if self.classes is FULL:
            pairs = [(a, b) for a in self.universe for b in self.universe]
            if len(pairs) > caps()["class_universe"]:
                raise EvaluationError(
                    f"FULL binary class quantification over {len(pairs)} > {caps()['class_universe']} pairs"
                )
            return [frozenset(s) for r in range(len(pairs) + 1) for s in itertools.combinations(pairs, r)]
        return [c for c in self.classes if all(_is_pair(e) for e in c)]


def full_model(universe: Iterable[HFSet], kappa: int | None = None) -> SOModel:
    return SOModel(tuple(universe), FULL, kappa)


def code_model(codes: Sequence[MemCode]) -> SOModel:
    return SOModel(None, (), None, tuple(codes))


def class_sort(phi: Formula, name: str) -> str | None:
    """``"unary"``, ``"binary"``, ``"code"`` or ``None`` (unused) for a class variable."""
    sorts = set()

    def term(c, role):
        if isinstance(c, Down):
            term(c.cls, "code")
        elif c == name:
            sorts.add(role)

    for s in subformulas(phi):
        if isinstance(s, (ExistsClass, ForallClass)) and s.var == name and s is not phi:
            break
        t = type(s)
        if t is InClass:
            term(s.cls, "unary")
        elif t is Rel:
            term(s.cls, "binary")
        elif t is IsCode:
            term(s.cls, "code")
        elif t is Ipi:
            term(s.fn, "binary")
            term(s.dom, "code")
            term(s.cod, "code")
        elif t in (ExistsNode, ForallNode, ExistsPen, ForallPen):
            term(s.cls, "code")
    if len(sorts) > 1:
        if sorts == {"binary", "code"}:
            return "code"
        raise EvaluationError(f"class variable {name!r} used with incompatible sorts {sorted(sorts)}")
    return next(iter(sorts), None)


_MISSING = object()
Env = dict


def _relation_is_code(rel: frozenset) -> bool:
    if not rel:
        return False
    nodes = {a for a, _ in rel} | {b for _, b in rel}
    has_succ = {a for a, _ in rel}
    tops = [n for n in nodes if n not in has_succ]
    if len(tops) != 1:
        return False
    names = {n: f"n{i}" for i, n in enumerate(sorted(nodes, key=repr))}
    try:
        validate(RawPointedGraph.build(names.values(), [(names[a], names[b]) for a, b in rel], names[tops[0]]))
    except ValueError:
        return False
    return True


class _Compiler:
    def __init__(self, model: SOModel, tr: Callable | None):
        self.model = model
        self.tr = tr
        self.cone_cache: dict = {}

    def var(self, name: str):
        def get(env):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariable(f"unbound variable {name!r}") from None

        return get

    def cls(self, c):
        if isinstance(c, Down):
            inner = self.cls(c.cls)
            node = self.var(c.node)
            cache = self.cone_cache

            def down(env):
                code = inner(env)
                x = node(env)
                key = (id(code), x)
                hit = cache.get(key)
                if hit is None or hit[0] is not code:
                    if not isinstance(code, MemCode):
                        raise EvaluationError("(down C x) needs a code")
                    hit = (code, restrict_below(code, x))
                    cache[key] = hit
                return hit[1]

            return down
        return self.var(c)

    def compile(self, phi):
        t = type(phi)
        return getattr(self, "c_" + t.__name__)(phi)

    # atoms
    def c_Eq(self, phi):
        a, b = self.var(phi.left), self.var(phi.right)
        return lambda env: a(env) == b(env)

    def c_In(self, phi):
        a, b = self.var(phi.elem), self.var(phi.container)

        def f(env):
            y = b(env)
            if not isinstance(y, HFSet):
                raise EvaluationError("'in' needs set values")
            return a(env) in y.elements

        return f

    def c_InClass(self, phi):
        a, c = self.var(phi.term), self.cls(phi.cls)

        def f(env):
            cv = c(env)
            if isinstance(cv, MemCode):
                return a(env) in cv.preds
            return a(env) in cv

        return f

    def c_Rel(self, phi):
        a, b, c = self.var(phi.left), self.var(phi.right), self.cls(phi.cls)

        def f(env):
            cv = c(env)
            if isinstance(cv, MemCode):
                return (a(env), b(env)) in cv.edges
            return (a(env), b(env)) in cv

        return f

    def c_IsCode(self, phi):
        c = self.cls(phi.cls)

        def f(env):
            cv = c(env)
            if isinstance(cv, MemCode):
                return True
            return isinstance(cv, frozenset) and all(_is_pair(e) for e in cv) and _relation_is_code(cv)

        return f

    def c_Ipi(self, phi):
        fn, dom, cod = self.cls(phi.fn), self.cls(phi.dom), self.cls(phi.cod)

        def f(env):
            fv, a, b = fn(env), dom(env), cod(env)
            if not (isinstance(a, MemCode) and isinstance(b, MemCode)):
                raise EvaluationError("ipi needs codes as its second and third arguments")
            if isinstance(fv, MemCode) or not all(_is_pair(e) for e in fv):
                return False
            m = dict(fv)
            return len(m) == len(fv) and is_ipi(m, a, b)

        return f

    def c_Hk(self, phi):
        a = self.var(phi.term)
        kappa = self.model.kappa
        if kappa is None:
            raise EvaluationError("hk atom needs a structure with a bound")
        return lambda env: a(env).tc_size <= kappa

    def c_Tr(self, phi):
        if self.tr is None:
            raise EvaluationError("tr atom evaluated without a truth context")
        a, b, c = self.var(phi.level), self.var(phi.formula), self.var(phi.valuation)
        tr = self.tr
        return lambda env: tr(a(env), b(env), c(env))

    # connectives
    def c_And(self, phi):
        parts = [self.compile(a) for a in phi.args]
        return lambda env: all(p(env) for p in parts)

    def c_Or(self, phi):
        parts = [self.compile(a) for a in phi.args]
        return lambda env: any(p(env) for p in parts)

    def c_Not(self, phi):
        body = self.compile(phi.body)
        return lambda env: not body(env)

    # quantifiers
    @staticmethod
    def _loop(var, domain, body, exists):
        def f(env):
            old = env.get(var, _MISSING)
            try:
                for a in domain(env):
                    env[var] = a
                    if body(env) == exists:
                        return exists
                return not exists
            finally:
                if old is _MISSING:
                    env.pop(var, None)
                else:
                    env[var] = old

        return f

    def _universe(self):
        uni = self.model.universe
        if uni is None:
            raise EvaluationError("unbounded set quantifier in a structure without a universe")
        return lambda env: uni

    def c_Exists(self, phi):
        return self._loop(phi.var, self._universe(), self.compile(phi.body), True)

    def c_Forall(self, phi):
        return self._loop(phi.var, self._universe(), self.compile(phi.body), False)

    def _elements(self, bound):
        b = self.var(bound)

        def dom(env):
            y = b(env)
            if not isinstance(y, HFSet):
                raise EvaluationError("bounded quantifier needs a set bound")
            return y.elements

        return dom

    def c_ExistsIn(self, phi):
        return self._loop(phi.var, self._elements(phi.bound), self.compile(phi.body), True)

    def c_ForallIn(self, phi):
        return self._loop(phi.var, self._elements(phi.bound), self.compile(phi.body), False)

    def _nodes(self, term):
        c = self.cls(term)

        def dom(env):
            cv = c(env)
            if isinstance(cv, MemCode):
                return cv.nodes
            return sorted({a for a, _ in cv} | {b for _, b in cv}, key=repr)

        return dom

    def _pen(self, term):
        c = self.cls(term)

        def dom(env):
            cv = c(env)
            if not isinstance(cv, MemCode):
                raise EvaluationError("penultimate-level quantifier needs a code")
            return cv.pen

        return dom

    def c_ExistsNode(self, phi):
        return self._loop(phi.var, self._nodes(phi.cls), self.compile(phi.body), True)

    def c_ForallNode(self, phi):
        return self._loop(phi.var, self._nodes(phi.cls), self.compile(phi.body), False)

    def c_ExistsPen(self, phi):
        return self._loop(phi.var, self._pen(phi.cls), self.compile(phi.body), True)

    def c_ForallPen(self, phi):
        return self._loop(phi.var, self._pen(phi.cls), self.compile(phi.body), False)

    def _class_domain(self, var, body, exists):
        items = body.args if isinstance(body, And if exists else Or) else (body,)
        for g in items:
            if not exists:
                if not isinstance(g, Not):
                    continue
                g = g.body
            if isinstance(g, IsCode) and g.cls == var:
                codes = self.model.codes
                if codes is None:
                    raise EvaluationError("code-guarded quantifier in a structure without a code family")
                return lambda env: codes
            if isinstance(g, Ipi) and g.fn == var and var not in _names(g.dom) | _names(g.cod):
                dom, cod = self.cls(g.dom), self.cls(g.cod)

                def ipis(env):
                    a, b = dom(env), cod(env)
                    return [frozenset(m.items()) for m in enumerate_ipis(a, b)]

                return ipis
        sort = class_sort(body, var)
        if sort == "code":
            raise EvaluationError(f"class variable {var!r} is used as a code but not guarded by (code {var})")
        model = self.model
        if sort == "binary":
            fam = None

            def binary(env):
                nonlocal fam
                if fam is None:
                    fam = model.binary_classes()
                return fam

            return binary
        fam_u = None

        def unary(env):
            nonlocal fam_u
            if fam_u is None:
                fam_u = model.unary_classes()
            return fam_u

        return unary

    def c_ExistsClass(self, phi):
        return self._loop(phi.var, self._class_domain(phi.var, phi.body, True), self.compile(phi.body), True)

    def c_ForallClass(self, phi):
        return self._loop(phi.var, self._class_domain(phi.var, phi.body, False), self.compile(phi.body), False)


def _names(c) -> set[str]:
    if isinstance(c, Down):
        return _names(c.cls) | {c.node}
    return {c}


def compile_formula(model: SOModel, phi: Formula, tr: Callable | None = None) -> Callable[[dict], bool]:
    """Compile once, evaluate many times with environments (dicts from names to values)."""
    return _Compiler(model, tr).compile(phi)


def evaluate(model: SOModel, phi: Formula, valuation: Mapping[str, Any] | None = None, tr: Callable | None = None) -> bool:
    """Tarskian truth of ``phi`` in ``model``.

    The valuation may assign variables that ``phi`` binds; quantifiers
    override such assignments.
    """
    env = dict(valuation or {})
    if model.universe is not None:
        for k, v in env.items():
            if isinstance(v, HFSet) and v not in model.members:
                raise ValueError(f"valuation assigns {k!r} a set outside the universe")
    return bool(compile_formula(model, phi, tr)(env))
