"""Source-to-source translations.

* :func:`star_translate` turns a first-order formula about sets into a
  second-order formula about membership codes.  Each set variable ``x``
  becomes a code variable (``X``), equality and membership become code
  isomorphism and code membership, and a bounded quantifier over ``y``
  becomes a quantifier over the penultimate level of ``y``'s code.
* :func:`etr_star_translate` handles bounded formulas whose free variables are
  filled by concrete codes: all codes are glued into one code ``P`` and the
  formula is rewritten to quantify over nodes of ``P``.
* :func:`cutoff_interpret` reads a second-order formula inside a first-order
  structure with a bound: sets become elements satisfying ``hk`` and classes
  become elements all of whose members satisfy ``hk``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .memcode import Label, MemCode, set_code
from .logic.syntax import (
    ATOMS,
    And,
    ClassTerm,
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
    _all_names,
    free_set_vars,
    is_first_order,
    is_sigma0,
    nnf,
    prenex,
)

__all__ = [
    "StarMode",
    "StarContext",
    "star_translate",
    "star_name",
    "iso_formula",
    "vin_formula",
    "ipi_formula",
    "max_ipi_formula",
    "etr_star_translate",
    "EtrStar",
    "cutoff_interpret",
    "TranslationError",
]


class TranslationError(ValueError):
    pass


class StarMode(enum.Enum):
    WITNESS = "witness"
    CERTIFICATE = "certificate"
    ABSORB = "absorb"


@dataclass(frozen=True)
class StarContext:
    """How to expand code isomorphism and code membership.

    ``WITNESS`` asserts a partial isomorphism with the required shape exists;
    ``CERTIFICATE`` asserts every maximal one has it.  ``ABSORB`` picks, for
    each literal, the form whose class quantifier joins the nearest enclosing
    block, which keeps the quantifier count of the input.
    """

    mode: StarMode = StarMode.WITNESS


class _Names:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counter = itertools.count(1)

    def __call__(self, base: str) -> str:
        while True:
            name = f"{base}{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name


# --- code-level macros -------------------------------------------------------------------


def _dom(fresh, f, s, t, a) -> Formula:
    b = fresh("b")
    return ExistsNode(b, t, Rel(a, b, f))


def _rng(fresh, f, s, t, b) -> Formula:
    a = fresh("a")
    return ExistsNode(a, s, Rel(a, b, f))


def ipi_formula(f: ClassTerm, s: ClassTerm, t: ClassTerm, fresh=None) -> Formula:
    """First-order content of ``(ipi f s t)`` for ``f`` a relation between the nodes of ``s`` and ``t``."""
    fresh = fresh or _Names(())
    a, a2, b, b2, z, w = (fresh(n) for n in "aabbzw")
    functional = ForallNode(a, s, ForallNode(b, t, ForallNode(b2, t, Or((
        Not(Rel(a, b, f)), Not(Rel(a, b2, f)), Eq(b, b2))))))
    injective = ForallNode(a, s, ForallNode(a2, s, ForallNode(b, t, Or((
        Not(Rel(a, b, f)), Not(Rel(a2, b, f)), Eq(a, a2))))))
    dom_closed = ForallNode(a, s, ForallNode(b, t, Or((
        Not(Rel(a, b, f)),
        ForallNode(z, s, Or((Not(Rel(z, a, s)), ExistsNode(w, t, Rel(z, w, f)))))))))
    rng_closed = ForallNode(a, s, ForallNode(b, t, Or((
        Not(Rel(a, b, f)),
        ForallNode(w, t, Or((Not(Rel(w, b, t)), ExistsNode(z, s, Rel(z, w, f)))))))))
    a3, b3 = fresh("a"), fresh("b")
    edges = ForallNode(a, s, ForallNode(b, t, ForallNode(a3, s, ForallNode(b3, t, Or((
        Not(Rel(a, b, f)), Not(Rel(a3, b3, f)),
        And((Or((Not(Rel(a, a3, s)), Rel(b, b3, t))), Or((Rel(a, a3, s), Not(Rel(b, b3, t))))))))))))
    return And((functional, injective, dom_closed, rng_closed, edges))


def max_ipi_formula(f: ClassTerm, s: ClassTerm, t: ClassTerm, fresh) -> Formula:
    """No single pair extends the initial partial isomorphism ``f``.

    For an initial partial isomorphism this is equivalent to being the maximum one.
    """
    a, b, z, w = fresh("a"), fresh("b"), fresh("z"), fresh("w")
    preds_mapped = ForallNode(z, s, Or((
        Not(Rel(z, a, s)), ExistsNode(w, t, And((Rel(z, w, f), Rel(w, b, t)))))))
    w2, z2 = fresh("w"), fresh("z")
    preds_hit = ForallNode(w2, t, Or((
        Not(Rel(w2, b, t)), ExistsNode(z2, s, And((Rel(z2, w2, f), Rel(z2, a, s)))))))
    extension = ExistsNode(a, s, ExistsNode(b, t, And((
        Not(_dom(fresh, f, s, t, a)), Not(_rng(fresh, f, s, t, b)), preds_mapped, preds_hit))))
    return Not(extension)


def _total(fresh, f, s, t) -> Formula:
    a = fresh("a")
    return ForallNode(a, s, _dom(fresh, f, s, t, a))


def _onto(fresh, f, s, t) -> Formula:
    b = fresh("b")
    return ForallNode(b, t, _rng(fresh, f, s, t, b))


def _top_into_pen(fresh, f, s, t) -> Formula:
    a, b, z = fresh("a"), fresh("b"), fresh("z")
    is_top = Not(ExistsNode(z, s, Rel(a, z, s)))
    return ExistsNode(a, s, And((is_top, ExistsPen(b, t, Rel(a, b, f)))))


def _expand(shape, s, t, witness: bool, fresh) -> Formula:
    f = fresh("F")
    goal = shape(fresh, f, s, t)
    if witness:
        return ExistsClass(f, And((Ipi(f, s, t), goal)))
    return ForallClass(f, Or((Not(Ipi(f, s, t)), Not(max_ipi_formula(f, s, t, fresh)), goal)))


def iso_formula(s: ClassTerm, t: ClassTerm, witness: bool = True, fresh=None) -> Formula:
    """``s`` and ``t`` are isomorphic codes."""
    fresh = fresh or _Names(())
    return _expand(lambda fr, f, s, t: And((_total(fr, f, s, t), _onto(fr, f, s, t))), s, t, witness, fresh)


def vin_formula(s: ClassTerm, t: ClassTerm, witness: bool = True, fresh=None) -> Formula:
    """``s`` is isomorphic to the cone below a penultimate node of ``t``."""
    fresh = fresh or _Names(())
    return _expand(lambda fr, f, s, t: And((_total(fr, f, s, t), _top_into_pen(fr, f, s, t))), s, t, witness, fresh)


# --- the * translation ----------------------------------------------------------------------


def star_name(x: str) -> str:
    """Code variable standing for the set variable ``x``."""
    return x[0].upper() + x[1:]


def star_translate(phi: Formula, ctx: StarContext | StarMode = StarMode.WITNESS) -> Formula:
    """Translate a first-order formula about sets into one about codes.

    Free set variable ``x`` becomes free code variable ``star_name(x)``.  In
    ``ABSORB`` mode the input is first put in prenex form (quantifiers pulled
    through connectives).
    """
    mode = ctx.mode if isinstance(ctx, StarContext) else ctx
    for sub in _subs(phi):
        if type(sub) not in (Eq, In, And, Or, Not, Exists, Forall, ExistsIn, ForallIn):
            raise TranslationError(f"star translation takes formulas of the pure membership language, got {sub}")
    if mode is StarMode.ABSORB:
        phi = prenex(phi)
    names = _all_names(phi)
    upper = {star_name(n) for n in names}
    if len(upper) != len(names) or upper & names:
        raise TranslationError("set variable names must stay distinct and not collide once capitalized")
    fresh = _Names(names | upper)
    env = {n: star_name(n) for n in names}
    return _star(phi, env, mode, fresh, positive=True, kind=None)


def _subs(phi):
    from .logic.syntax import subformulas

    return subformulas(phi)


def _star(phi, env, mode, fresh, positive, kind) -> Formula:
    t = type(phi)
    if t in (Eq, In):
        a, b = (phi.left, phi.right) if t is Eq else (phi.elem, phi.container)
        if mode is StarMode.ABSORB:
            witness = positive == (kind is not False)
        else:
            witness = mode is StarMode.WITNESS
        build = iso_formula if t is Eq else vin_formula
        return build(env[a], env[b], witness, fresh)
    if t is Not:
        return Not(_star(phi.body, env, mode, fresh, not positive, kind))
    if t in (And, Or):
        return t(tuple(_star(a, env, mode, fresh, positive, kind) for a in phi.args))
    if t in (Exists, Forall):
        big = star_name(phi.var)
        inner = {**env, phi.var: big}
        # under a negation the quantifier acts with the dual kind
        k = (t is Exists) == positive
        body = _star(phi.body, inner, mode, fresh, positive, k)
        if t is Exists:
            return ExistsClass(big, And((IsCode(big), body)))
        return ForallClass(big, Or((Not(IsCode(big)), body)))
    if t in (ExistsIn, ForallIn):
        node = fresh("n")
        bound = env[phi.bound]
        inner = {**env, phi.var: Down(bound, node)}
        body = _star(phi.body, inner, mode, fresh, positive, kind)
        return (ExistsPen if t is ExistsIn else ForallPen)(node, bound, body)
    raise TranslationError(f"unexpected {phi}")


# --- the bounded translation over one glued code ---------------------------------------------


@dataclass(frozen=True)
class EtrStar:
    formula: Formula
    code: MemCode
    anchors: Mapping[str, Label]
    code_name: str

    def valuation(self) -> dict:
        return {self.code_name: self.code, **self.anchors}


def etr_star_translate(phi: Formula, params: Mapping[str, MemCode] | Sequence[tuple[str, MemCode]]) -> EtrStar:
    """Glue the parameter codes into one code ``P`` and bound every quantifier by ``P``.

    ``params`` assigns a code to each free variable.  The result's valuation
    sends each variable to the node of ``P`` representing its code, so that
    the translated formula holds there iff ``phi`` holds of the coded sets.
    """
    if not is_sigma0(phi) or not is_first_order(phi):
        raise TranslationError("only bounded first-order formulas can be translated over a single code")
    for sub in _subs(phi):
        if type(sub) not in (Eq, In, And, Or, Not, ExistsIn, ForallIn):
            raise TranslationError(f"unsupported construct {sub}")
    items = list(params.items()) if isinstance(params, Mapping) else list(params)
    missing = free_set_vars(phi) - {k for k, _ in items}
    if missing:
        raise TranslationError(f"no code given for {', '.join(sorted(missing))}")
    code, tops = set_code([c for _, c in items])
    names = _all_names(phi)
    p = "P"
    if p in names:
        p = _Names(names)("P")
    return EtrStar(_bounded(phi, p), code, {k: n for (k, _), n in zip(items, tops)}, p)


def _bounded(phi, p) -> Formula:
    t = type(phi)
    if t is Eq:
        return phi
    if t is In:
        return Rel(phi.elem, phi.container, p)
    if t is Not:
        return Not(_bounded(phi.body, p))
    if t in (And, Or):
        return t(tuple(_bounded(a, p) for a in phi.args))
    body = _bounded(phi.body, p)
    if t is ExistsIn:
        return ExistsNode(phi.var, p, And((Rel(phi.var, phi.bound, p), body)))
    return ForallNode(phi.var, p, Or((Not(Rel(phi.var, phi.bound, p)), body)))


# --- the cut-off interpretation ------------------------------------------------------------------


def cutoff_interpret(phi: Formula) -> Formula:
    """Interpret a second-order formula in a first-order structure with a bound.

    Set quantifiers are relativized to ``hk``, class quantifiers to elements
    whose members all satisfy ``hk``, and a class variable ``X`` becomes the
    set variable ``X`` (so ``(inclass u X)`` turns into ``(in u X)``).
    """
    for sub in _subs(phi):
        if type(sub) in (Rel, IsCode, Ipi, Hk, ExistsNode, ForallNode, ExistsPen, ForallPen):
            raise TranslationError(f"cannot interpret {sub}")
        if type(sub) is InClass and isinstance(sub.cls, Down):
            raise TranslationError(f"cannot interpret {sub}")
    fresh = _Names(_all_names(phi))
    return _interp(phi, fresh)


def _interp(phi, fresh) -> Formula:
    t = type(phi)
    if t is InClass:
        return In(phi.term, phi.cls)
    if t in ATOMS:
        return phi
    if t is Not:
        return Not(_interp(phi.body, fresh))
    if t in (And, Or):
        return t(tuple(_interp(a, fresh) for a in phi.args))
    body = _interp(phi.body, fresh)
    if t is Exists:
        return Exists(phi.var, And((Hk(phi.var), body)))
    if t is Forall:
        return Forall(phi.var, Or((Not(Hk(phi.var)), body)))
    if t in (ExistsIn, ForallIn):
        return t(phi.var, phi.bound, body)
    z = fresh("z")
    small = ForallIn(z, phi.var, Hk(z))
    if t is ExistsClass:
        return Exists(phi.var, And((small, body)))
    return Forall(phi.var, Or((Not(small), body)))
