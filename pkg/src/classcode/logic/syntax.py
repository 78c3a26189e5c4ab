"""Formula AST, s-expression reader/printer and syntactic utilities.

Set terms are variable names.  Class terms are names or ``(down C x)``, the
code ``C`` restricted below its node ``x``.  Besides the core language
(``= in inclass tr and or not ex all exin allin exC allC``) there is a small
code-level vocabulary used by the translations: ``rel`` for binary classes and
code edges, node quantifiers ``exnode/allnode`` and ``expen/allpen`` ranging
over the nodes, resp. the penultimate level, of a code, and the atoms
``code``, ``ipi`` and ``hk``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Formula",
    "ClassTerm",
    "Down",
    "Eq",
    "In",
    "InClass",
    "Tr",
    "Rel",
    "IsCode",
    "Ipi",
    "Hk",
    "And",
    "Or",
    "Not",
    "Exists",
    "Forall",
    "ExistsIn",
    "ForallIn",
    "ExistsClass",
    "ForallClass",
    "ExistsNode",
    "ForallNode",
    "ExistsPen",
    "ForallPen",
    "FormulaSyntaxError",
    "ScopeError",
    "parse_formula",
    "format_formula",
    "free_set_vars",
    "free_class_vars",
    "subformulas",
    "depth",
    "size",
    "nnf",
    "prenex",
    "is_sigma0",
    "is_first_order",
    "quantifier_depth",
    "rename_class",
    "fresh_name",
    "implies",
    "iff",
    "TRUE",
    "FALSE",
]


@dataclass(frozen=True)
class Down:
    cls: "ClassTerm"
    node: str


ClassTerm = Union[str, Down]


class _F:
    __slots__ = ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Eq(_F):
    left: str
    right: str


@dataclass(frozen=True)
class In(_F):
    elem: str
    container: str


@dataclass(frozen=True)
class InClass(_F):
    term: str
    cls: ClassTerm


@dataclass(frozen=True)
class Tr(_F):
    level: str
    formula: str
    valuation: str


@dataclass(frozen=True)
class Rel(_F):
    left: str
    right: str
    cls: ClassTerm


@dataclass(frozen=True)
class IsCode(_F):
    cls: ClassTerm


@dataclass(frozen=True)
class Ipi(_F):
    fn: ClassTerm
    dom: ClassTerm
    cod: ClassTerm


@dataclass(frozen=True)
class Hk(_F):
    term: str


@dataclass(frozen=True)
class And(_F):
    args: tuple


@dataclass(frozen=True)
class Or(_F):
    args: tuple


@dataclass(frozen=True)
class Not(_F):
    body: "Formula"


@dataclass(frozen=True)
class Exists(_F):
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall(_F):
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsIn(_F):
    var: str
    bound: str
    body: "Formula"


@dataclass(frozen=True)
class ForallIn(_F):
    var: str
    bound: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsClass(_F):
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ForallClass(_F):
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsNode(_F):
    var: str
    cls: ClassTerm
    body: "Formula"


@dataclass(frozen=True)
class ForallNode(_F):
    var: str
    cls: ClassTerm
    body: "Formula"


@dataclass(frozen=True)
class ExistsPen(_F):
    var: str
    cls: ClassTerm
    body: "Formula"


@dataclass(frozen=True)
class ForallPen(_F):
    var: str
    cls: ClassTerm
    body: "Formula"


Formula = Union[
    Eq, In, InClass, Tr, Rel, IsCode, Ipi, Hk, And, Or, Not, Exists, Forall, ExistsIn, ForallIn,
    ExistsClass, ForallClass, ExistsNode, ForallNode, ExistsPen, ForallPen,
]

TRUE = And(())
FALSE = Or(())

ATOMS = (Eq, In, InClass, Tr, Rel, IsCode, Ipi, Hk)
SET_QUANTIFIERS = (Exists, Forall)
BOUNDED = (ExistsIn, ForallIn)
CLASS_QUANTIFIERS = (ExistsClass, ForallClass)
NODE_QUANTIFIERS = (ExistsNode, ForallNode, ExistsPen, ForallPen)

DUAL = {
    Exists: Forall, Forall: Exists, ExistsIn: ForallIn, ForallIn: ExistsIn,
    ExistsClass: ForallClass, ForallClass: ExistsClass, ExistsNode: ForallNode, ForallNode: ExistsNode,
    ExistsPen: ForallPen, ForallPen: ExistsPen, And: Or, Or: And,
}


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


def iff(a: Formula, b: Formula) -> Formula:
    return And((implies(a, b), implies(b, a)))


# --- reader -------------------------------------------------------------------------

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")

KEYWORDS = {
    "=": (Eq, "ss"),
    "in": (In, "ss"),
    "inclass": (InClass, "sc"),
    "tr": (Tr, "sss"),
    "rel": (Rel, "ssc"),
    "code": (IsCode, "c"),
    "ipi": (Ipi, "ccc"),
    "hk": (Hk, "s"),
    "not": (Not, "f"),
    "ex": (Exists, "bf"),
    "all": (Forall, "bf"),
    "exin": (ExistsIn, "bsf"),
    "allin": (ForallIn, "bsf"),
    "exC": (ExistsClass, "Bf"),
    "allC": (ForallClass, "Bf"),
    "exnode": (ExistsNode, "bcf"),
    "allnode": (ForallNode, "bcf"),
    "expen": (ExistsPen, "bcf"),
    "allpen": (ForallPen, "bcf"),
}
HEAD = {cls: kw for kw, (cls, _) in KEYWORDS.items()}
HEAD[And] = "and"
HEAD[Or] = "or"
_RESERVED = set(KEYWORDS) | {"and", "or", "down"}


class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        self.pos = pos
        super().__init__(f"{msg} at position {pos}")


class ScopeError(ValueError):
    pass


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise FormulaSyntaxError("unexpected character", pos)
            return out
        start = m.start(m.lastindex)
        out.append((m.group(m.lastindex), start))
        pos = m.end()


def _read(tokens, i):
    tok, pos = tokens[i]
    if tok == ")":
        raise FormulaSyntaxError("unexpected ')'", pos)
    if tok != "(":
        return tok, i + 1, pos
    items = []
    i += 1
    while True:
        if i >= len(tokens):
            raise FormulaSyntaxError("unclosed '('", pos)
        if tokens[i][0] == ")":
            return (items, pos), i + 1, pos
        item, i, _ = _read(tokens, i)
        items.append(item)


def parse_formula(text: str) -> Formula:
    """Parse the s-expression grammar; raises :class:`FormulaSyntaxError` or :class:`ScopeError`."""
    tokens = _tokens(text)
    if not tokens:
        raise FormulaSyntaxError("empty input", 0)
    tree, i, _ = _read(tokens, 0)
    if i != len(tokens):
        raise FormulaSyntaxError("trailing input", tokens[i][1])
    phi = _build(tree, 0)
    check_scope(phi)
    return phi


def _name(tree, pos) -> str:
    if not isinstance(tree, str):
        raise FormulaSyntaxError("expected a variable name", tree[1] if isinstance(tree, tuple) else pos)
    if not _NAME.match(tree) or tree in _RESERVED:
        raise FormulaSyntaxError(f"bad variable name {tree!r}", pos)
    return tree


def _class_term(tree, pos) -> ClassTerm:
    if isinstance(tree, str):
        return _name(tree, pos)
    items, p = tree
    if len(items) != 3 or items[0] != "down":
        raise FormulaSyntaxError("expected a class name or (down C x)", p)
    return Down(_class_term(items[1], p), _name(items[2], p))


def _build(tree, pos) -> Formula:
    if isinstance(tree, str):
        raise FormulaSyntaxError(f"expected a formula, got {tree!r}", pos)
    items, pos = tree
    if not items or not isinstance(items[0], str):
        raise FormulaSyntaxError("expected an operator", pos)
    head = items[0]
    args = items[1:]
    if head in ("and", "or"):
        return (And if head == "and" else Or)(tuple(_build(a, pos) for a in args))
    if head not in KEYWORDS:
        raise FormulaSyntaxError(f"unknown operator {head!r}", pos)
    cls, sig = KEYWORDS[head]
    if len(args) != len(sig):
        raise FormulaSyntaxError(f"{head} takes {len(sig)} arguments, got {len(args)}", pos)
    built = []
    for kind, a in zip(sig, args):
        if kind in "sbB":
            built.append(_name(a, pos))
        elif kind == "c":
            built.append(_class_term(a, pos))
        else:
            built.append(_build(a, pos))
    return cls(*built)


# --- printer -----------------------------------------------------------------------


def _fmt_class(c: ClassTerm) -> str:
    if isinstance(c, Down):
        return f"(down {_fmt_class(c.cls)} {c.node})"
    return c


def format_formula(phi: Formula) -> str:
    parts: list[str] = []
    _emit(phi, parts)
    return "".join(parts)


def _emit(phi, out: list[str]) -> None:
    t = type(phi)
    if t in (And, Or):
        out.append("(" + HEAD[t])
        for a in phi.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")
        return
    out.append("(" + HEAD[t])
    for v in _fields(phi):
        out.append(" ")
        if isinstance(v, _F):
            _emit(v, out)
        else:
            out.append(_fmt_class(v))
    out.append(")")


def _fields(phi):
    return [getattr(phi, f) for f in phi.__dataclass_fields__]


# --- scope ----------------------------------------------------------------------------


def check_scope(phi: Formula) -> None:
    """Every name is used with one sort (set or class) throughout the formula."""
    sets, classes = set(), set()
    _collect_names(phi, sets, classes)
    clash = sets & classes
    if clash:
        raise ScopeError(f"name(s) used both as set and class variable: {', '.join(sorted(clash))}")
    for sub in subformulas(phi):
        if isinstance(sub, BOUNDED) and sub.var == sub.bound:
            raise ScopeError(f"bounded quantifier binds its own bound {sub.var!r}")


def _collect_class(c: ClassTerm, sets, classes):
    if isinstance(c, Down):
        _collect_class(c.cls, sets, classes)
        sets.add(c.node)
    else:
        classes.add(c)


def _collect_names(phi, sets, classes):
    t = type(phi)
    if t is Eq or t is In:
        sets.update(_fields(phi))
    elif t is Tr:
        sets.update(_fields(phi))
    elif t is Hk:
        sets.add(phi.term)
    elif t is InClass:
        sets.add(phi.term)
        _collect_class(phi.cls, sets, classes)
    elif t is Rel:
        sets.update((phi.left, phi.right))
        _collect_class(phi.cls, sets, classes)
    elif t is IsCode:
        _collect_class(phi.cls, sets, classes)
    elif t is Ipi:
        for c in (phi.fn, phi.dom, phi.cod):
            _collect_class(c, sets, classes)
    elif t in (And, Or):
        for a in phi.args:
            _collect_names(a, sets, classes)
    elif t is Not:
        _collect_names(phi.body, sets, classes)
    elif t in SET_QUANTIFIERS:
        sets.add(phi.var)
        _collect_names(phi.body, sets, classes)
    elif t in BOUNDED:
        sets.update((phi.var, phi.bound))
        _collect_names(phi.body, sets, classes)
    elif t in CLASS_QUANTIFIERS:
        classes.add(phi.var)
        _collect_names(phi.body, sets, classes)
    elif t in NODE_QUANTIFIERS:
        sets.add(phi.var)
        _collect_class(phi.cls, sets, classes)
        _collect_names(phi.body, sets, classes)
    else:
        raise TypeError(f"not a formula: {phi!r}")


# --- structural utilities ----------------------------------------------------------------


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    t = type(phi)
    if t in (And, Or):
        for a in phi.args:
            yield from subformulas(a)
    elif hasattr(phi, "body"):
        yield from subformulas(phi.body)


def _class_free(c: ClassTerm) -> tuple[set[str], set[str]]:
    if isinstance(c, Down):
        s, k = _class_free(c.cls)
        return s | {c.node}, k
    return set(), {c}


def _free(phi) -> tuple[frozenset, frozenset]:
    t = type(phi)
    if t in (Eq, In, Tr):
        return frozenset(_fields(phi)), frozenset()
    if t is Hk:
        return frozenset([phi.term]), frozenset()
    if t in (InClass, Rel, IsCode, Ipi):
        sets: set[str] = set()
        classes: set[str] = set()
        if t is InClass:
            sets.add(phi.term)
        elif t is Rel:
            sets.update((phi.left, phi.right))
        terms = (phi.fn, phi.dom, phi.cod) if t is Ipi else (phi.cls,)
        for c in terms:
            s, k = _class_free(c)
            sets |= s
            classes |= k
        return frozenset(sets), frozenset(classes)
    if t in (And, Or):
        s, k = frozenset(), frozenset()
        for a in phi.args:
            s2, k2 = _free(a)
            s, k = s | s2, k | k2
        return s, k
    if t is Not:
        return _free(phi.body)
    s, k = _free(phi.body)
    if t in SET_QUANTIFIERS:
        return s - {phi.var}, k
    if t in BOUNDED:
        return (s - {phi.var}) | {phi.bound}, k
    if t in CLASS_QUANTIFIERS:
        return s, k - {phi.var}
    if t in NODE_QUANTIFIERS:
        cs, ck = _class_free(phi.cls)
        return (s - {phi.var}) | cs, k | ck
    raise TypeError(f"not a formula: {phi!r}")


def free_set_vars(phi: Formula) -> frozenset[str]:
    return _free(phi)[0]


def free_class_vars(phi: Formula) -> frozenset[str]:
    return _free(phi)[1]


def depth(phi: Formula) -> int:
    """Nesting depth; atoms have depth 1."""
    t = type(phi)
    if t in ATOMS:
        return 1
    if t in (And, Or):
        return 1 + max((depth(a) for a in phi.args), default=0)
    return 1 + depth(phi.body)


def size(phi: Formula) -> int:
    """Number of AST nodes."""
    t = type(phi)
    if t in ATOMS:
        return 1
    if t in (And, Or):
        return 1 + sum(size(a) for a in phi.args)
    return 1 + size(phi.body)


def quantifier_depth(phi: Formula) -> int:
    t = type(phi)
    if t in ATOMS:
        return 0
    if t in (And, Or):
        return max((quantifier_depth(a) for a in phi.args), default=0)
    if t is Not:
        return quantifier_depth(phi.body)
    return 1 + quantifier_depth(phi.body)


def is_first_order(phi: Formula) -> bool:
    return not any(isinstance(s, CLASS_QUANTIFIERS) for s in subformulas(phi))


def is_sigma0(phi: Formula) -> bool:
    """No unbounded set or class quantifiers."""
    return not any(isinstance(s, SET_QUANTIFIERS + CLASS_QUANTIFIERS) for s in subformulas(phi))


def fresh_name(base: str, taken: set[str]) -> str:
    for i in itertools.count():
        name = f"{base}{i}" if i else base
        if name not in taken:
            taken.add(name)
            return name
    raise AssertionError


def _all_names(phi) -> set[str]:
    sets, classes = set(), set()
    _collect_names(phi, sets, classes)
    return sets | classes


# --- substitution -------------------------------------------------------------------------


def _sub_class(c: ClassTerm, sets: dict, classes: dict) -> ClassTerm:
    if isinstance(c, Down):
        return Down(_sub_class(c.cls, sets, classes), sets.get(c.node, c.node))
    return classes.get(c, c)


def substitute(phi: Formula, sets: dict | None = None, classes: dict | None = None) -> Formula:
    """Rename free set and class variables.  Values are names (classes may map to class terms).

    Callers ensure the new names are not captured (quantified names never
    collide with substituted ones in this package's use).
    """
    sets = sets or {}
    classes = classes or {}
    t = type(phi)
    g = sets.get
    if t is Eq:
        return Eq(g(phi.left, phi.left), g(phi.right, phi.right))
    if t is In:
        return In(g(phi.elem, phi.elem), g(phi.container, phi.container))
    if t is Tr:
        return Tr(g(phi.level, phi.level), g(phi.formula, phi.formula), g(phi.valuation, phi.valuation))
    if t is Hk:
        return Hk(g(phi.term, phi.term))
    if t is InClass:
        return InClass(g(phi.term, phi.term), _sub_class(phi.cls, sets, classes))
    if t is Rel:
        return Rel(g(phi.left, phi.left), g(phi.right, phi.right), _sub_class(phi.cls, sets, classes))
    if t is IsCode:
        return IsCode(_sub_class(phi.cls, sets, classes))
    if t is Ipi:
        return Ipi(*(_sub_class(c, sets, classes) for c in (phi.fn, phi.dom, phi.cod)))
    if t in (And, Or):
        return t(tuple(substitute(a, sets, classes) for a in phi.args))
    if t is Not:
        return Not(substitute(phi.body, sets, classes))
    if t in SET_QUANTIFIERS:
        inner = {k: v for k, v in sets.items() if k != phi.var}
        return t(phi.var, substitute(phi.body, inner, classes))
    if t in BOUNDED:
        inner = {k: v for k, v in sets.items() if k != phi.var}
        return t(phi.var, g(phi.bound, phi.bound), substitute(phi.body, inner, classes))
    if t in CLASS_QUANTIFIERS:
        inner = {k: v for k, v in classes.items() if k != phi.var}
        return t(phi.var, substitute(phi.body, sets, inner))
    if t in NODE_QUANTIFIERS:
        inner = {k: v for k, v in sets.items() if k != phi.var}
        return t(phi.var, _sub_class(phi.cls, sets, classes), substitute(phi.body, inner, classes))
    raise TypeError(f"not a formula: {phi!r}")


def rename_class(phi: Formula, old: str, new: ClassTerm) -> Formula:
    return substitute(phi, classes={old: new})


# --- normal forms ----------------------------------------------------------------------------


def nnf(phi: Formula, negate: bool = False) -> Formula:
    """Negation normal form: negations only on atoms."""
    t = type(phi)
    if t in ATOMS:
        return Not(phi) if negate else phi
    if t is Not:
        return nnf(phi.body, not negate)
    if t in (And, Or):
        return (DUAL[t] if negate else t)(tuple(nnf(a, negate) for a in phi.args))
    q = DUAL[t] if negate else t
    if t in SET_QUANTIFIERS or t in CLASS_QUANTIFIERS:
        return q(phi.var, nnf(phi.body, negate))
    if t in BOUNDED:
        return q(phi.var, phi.bound, nnf(phi.body, negate))
    return q(phi.var, phi.cls, nnf(phi.body, negate))


def prenex(phi: Formula) -> Formula:
    """Pull unbounded set and class quantifiers to the front through connectives.

    Works on the negation normal form; bound names are made distinct first.
    Bounded and node quantifiers stay in place, so quantifiers below them are
    not moved.  When the prefixes of several conjuncts or disjuncts are merged,
    like quantifiers are grouped so that the number of alternations is as
    small as the parts allow.  Assumes a nonempty universe.
    """
    phi = nnf(_distinct_bound(phi))
    counted = CLASS_QUANTIFIERS if not is_first_order(phi) else SET_QUANTIFIERS
    prefix, matrix = _prenex(phi, counted, None)
    for q, v in reversed(prefix):
        matrix = q(v, matrix)
    return matrix


_EXISTS = (Exists, ExistsClass)


def _prenex(phi, counted, last):
    # ``last`` is the kind of the nearest enclosing counted quantifier
    t = type(phi)
    if t in SET_QUANTIFIERS or t in CLASS_QUANTIFIERS:
        inner = (t in _EXISTS) if t in counted else last
        prefix, matrix = _prenex(phi.body, counted, inner)
        return [(t, phi.var)] + prefix, matrix
    if t in (And, Or):
        prefixes = []
        parts = []
        for a in phi.args:
            p, m = _prenex(a, counted, last)
            prefixes.append(p)
            parts.append(m)
        return _merge(prefixes, counted, last), t(tuple(parts))
    return [], phi


def _blocks(prefix, counted, last=None) -> int:
    n = 0
    for q, _ in prefix:
        if q in counted:
            kind = q in _EXISTS
            if kind != last:
                n, last = n + 1, kind
    return n


def _merge(prefixes, counted, last):
    best = None
    for start in ((last, not last) if last is not None else (True, False)):
        queues = [list(p) for p in prefixes]
        out = []
        kind = start
        while any(queues):
            moved = False
            for q in queues:
                while q and (q[0][0] not in counted or (q[0][0] in _EXISTS) == kind):
                    out.append(q.pop(0))
                    moved = True
            if not moved:
                kind = not kind
        if best is None or _blocks(out, counted, last) < _blocks(best, counted, last):
            best = out
    return best


def _distinct_bound(phi: Formula) -> Formula:
    taken = _all_names(phi)
    seen: set[str] = set()

    def walk(f):
        t = type(f)
        if t in ATOMS:
            return f
        if t in (And, Or):
            return t(tuple(walk(a) for a in f.args))
        if t is Not:
            return Not(walk(f.body))
        var = f.var
        body = f.body
        if var in seen:
            new = fresh_name(var, taken)
            if t in CLASS_QUANTIFIERS:
                body = substitute(body, classes={var: new})
            else:
                body = substitute(body, sets={var: new})
            var = new
        seen.add(var)
        body = walk(body)
        if t in SET_QUANTIFIERS or t in CLASS_QUANTIFIERS:
            return t(var, body)
        if t in BOUNDED:
            return t(var, f.bound, body)
        return t(var, f.cls, body)

    # free names must not be reused as bound names either
    seen |= free_set_vars(phi) | free_class_vars(phi)
    return walk(phi)
