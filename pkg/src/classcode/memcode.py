"""Membership codes: finite well-founded extensional pointed digraphs.

An edge ``(a, b)`` means ``a`` is an immediate member of ``b``.  The top node
is the unique maximum; collapsing a code along its edges yields the set it
represents.  Surgeries build a :class:`RawPointedGraph` first and then call
:func:`normalize`, which restricts to the cone below the top and merges
nodes with equal collapse.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .hfset import EMPTY, HFSet, format_hf, hf_kpair

__all__ = [
    "RawPointedGraph",
    "MemCode",
    "CodeError",
    "CycleFound",
    "NoTop",
    "ExtensionalityViolation",
    "UnknownNode",
    "InitialPartialIso",
    "Verdict",
    "validate",
    "topological_order",
    "is_ipi",
    "enumerate_ipis",
    "enumerate_codes",
    "collapse",
    "collapse_map",
    "canonical_code",
    "normalize",
    "restrict_below",
    "max_ipi",
    "iso",
    "vin",
    "check_vin_certificate",
    "union_code",
    "glue",
    "Glued",
    "pair_code",
    "set_code",
    "wellorder_code",
    "relation_code",
    "function_code",
    "function_of_code",
    "ordinal_code",
    "relabel",
    "code_from_json",
    "code_to_json",
    "code_to_dot",
]

Label = str


class CodeError(ValueError):
    """A graph fails to be a membership code."""


class CycleFound(CodeError):
    def __init__(self, path: Sequence[Label]):
        self.path = list(path)
        super().__init__("CycleFound: " + " -> ".join(self.path))


class NoTop(CodeError):
    def __init__(self, node: Label, top: Label):
        self.node = node
        super().__init__(f"NoTop: node {node!r} does not reach top {top!r}")


class ExtensionalityViolation(CodeError):
    def __init__(self, a: Label, b: Label):
        self.pair = (a, b)
        super().__init__(f"ExtensionalityViolation: {a!r} and {b!r} have the same predecessors")


class UnknownNode(CodeError):
    def __init__(self, node: Label):
        self.node = node
        super().__init__(f"unknown node {node!r}")


def _sort_key(label: Label):
    # numeric-aware so n2 < n10
    parts = []
    num = ""
    text = ""
    for ch in label:
        if ch.isdigit():
            if text:
                parts.append((1, text, 0))
                text = ""
            num += ch
        else:
            if num:
                parts.append((0, "", int(num)))
                num = ""
            text += ch
    if num:
        parts.append((0, "", int(num)))
    if text:
        parts.append((1, text, 0))
    return tuple(parts), label


@dataclass(frozen=True)
class RawPointedGraph:
    nodes: tuple[Label, ...]
    edges: frozenset[tuple[Label, Label]]
    top: Label

    @classmethod
    def build(cls, nodes: Iterable[Label], edges: Iterable[tuple[Label, Label]], top: Label):
        edges = frozenset((str(a), str(b)) for a, b in edges)
        node_set = {str(n) for n in nodes} | {str(top)}
        for a, b in edges:
            node_set.add(a)
            node_set.add(b)
        return cls(tuple(sorted(node_set, key=_sort_key)), edges, str(top))

    @property
    def preds(self) -> dict[Label, frozenset[Label]]:
        return _preds(self)

    @property
    def succs(self) -> dict[Label, frozenset[Label]]:
        return _succs(self)

    @property
    def pen(self) -> tuple[Label, ...]:
        return tuple(sorted(self.preds[self.top], key=_sort_key))

    def __len__(self) -> int:
        return len(self.nodes)




def _preds(g: RawPointedGraph) -> dict[Label, frozenset[Label]]:
    cached = g.__dict__.get("_preds")
    if cached is None:
        tmp: dict[Label, set[Label]] = {n: set() for n in g.nodes}
        for a, b in g.edges:
            tmp[b].add(a)
        cached = {n: frozenset(s) for n, s in tmp.items()}
        object.__setattr__(g, "_preds", cached)
    return cached


def _succs(g: RawPointedGraph) -> dict[Label, frozenset[Label]]:
    cached = g.__dict__.get("_succs")
    if cached is None:
        tmp: dict[Label, set[Label]] = {n: set() for n in g.nodes}
        for a, b in g.edges:
            tmp[a].add(b)
        cached = {n: frozenset(s) for n, s in tmp.items()}
        object.__setattr__(g, "_succs", cached)
    return cached


class MemCode(RawPointedGraph):
    """A validated membership code.  Construct via :func:`validate`."""

    def below(self, x: Label) -> frozenset[Label]:
        """Nodes ``y`` with ``y <=_A x``."""
        return _cone(self, x)

    def __repr__(self) -> str:
        return f"MemCode({len(self.nodes)} nodes, top={self.top!r})"


def _cone(g: RawPointedGraph, x: Label) -> frozenset[Label]:
    preds = _preds(g)
    seen = {x}
    stack = [x]
    while stack:
        n = stack.pop()
        for p in preds[n]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def topological_order(g: RawPointedGraph) -> list[Label]:
    """Kahn order, ties broken by label sort.  Raises :class:`CycleFound`."""
    cached = g.__dict__.get("_topo")
    if cached is None:
        cached = tuple(_kahn(g))
        object.__setattr__(g, "_topo", cached)
    return list(cached)


def _kahn(g: RawPointedGraph) -> list[Label]:
    preds = _preds(g)
    succs = _succs(g)
    indeg = {n: len(preds[n]) for n in g.nodes}
    ready = sorted((n for n in g.nodes if indeg[n] == 0), key=_sort_key, reverse=True)
    out = []
    while ready:
        n = ready.pop()
        out.append(n)
        fresh = []
        for s in succs[n]:
            indeg[s] -= 1
            if indeg[s] == 0:
                fresh.append(s)
        if fresh:
            ready.extend(fresh)
            ready.sort(key=_sort_key, reverse=True)
    if len(out) != len(g.nodes):
        raise CycleFound(_find_cycle(g, set(g.nodes) - set(out)))
    return out


def _find_cycle(g: RawPointedGraph, remaining: set[Label]) -> list[Label]:
    succs = _succs(g)
    start = min(remaining, key=_sort_key)
    path = [start]
    index = {start: 0}
    node = start
    while True:
        nxt = min((s for s in succs[node] if s in remaining), key=_sort_key)
        if nxt in index:
            return path[index[nxt]:] + [nxt]
        index[nxt] = len(path)
        path.append(nxt)
        node = nxt


def validate(g: RawPointedGraph) -> MemCode:
    """Check acyclicity, top-reachability and extensionality."""
    if g.top not in g.nodes:
        raise UnknownNode(g.top)
    topological_order(g)
    cone = _cone(g, g.top)
    for n in g.nodes:
        if n not in cone:
            raise NoTop(n, g.top)
    seen: dict[frozenset, Label] = {}
    preds = _preds(g)
    for n in g.nodes:
        p = preds[n]
        if p in seen:
            raise ExtensionalityViolation(seen[p], n)
        seen[p] = n
    if isinstance(g, MemCode):
        return g
    code = MemCode(g.nodes, g.edges, g.top)
    for attr in ("_preds", "_succs"):
        if attr in g.__dict__:
            object.__setattr__(code, attr, g.__dict__[attr])
    return code


def collapse_map(g: RawPointedGraph) -> dict[Label, HFSet]:
    """Mostowski collapse of every node of an acyclic graph."""
    preds = _preds(g)
    out: dict[Label, HFSet] = {}
    for n in topological_order(g):
        out[n] = HFSet(out[p] for p in preds[n])
    return out


def collapse(a: RawPointedGraph) -> HFSet:
    return collapse_map(a)[a.top]


def _label(x: HFSet) -> Label:
    try:
        return f"#{x.ack}"
    except OverflowError:
        return "h:" + format_hf(x)


def canonical_code(x: HFSet) -> MemCode:
    """The code ``E_x``: true membership on ``tc({x})``."""
    nodes = x.tc
    labels = {y: _label(y) for y in nodes}
    edges = [(labels[z], labels[y]) for y in nodes for z in y.elements]
    return validate(RawPointedGraph.build(labels.values(), edges, labels[x]))


def normalize(g: RawPointedGraph) -> MemCode:
    """Restrict to the cone below top and quotient nodes with equal collapse.

    Each class keeps its label-least member, so a valid code comes back unchanged.
    """
    cone = _cone(g, g.top)
    sub = RawPointedGraph.build(cone, [(a, b) for a, b in g.edges if a in cone and b in cone], g.top)
    values = collapse_map(sub)
    rep: dict[HFSet, Label] = {}
    for n in sorted(cone, key=_sort_key):
        rep.setdefault(values[n], n)
    name = {n: rep[values[n]] for n in cone}
    edges = {(name[a], name[b]) for a, b in sub.edges}
    return validate(RawPointedGraph.build(set(name.values()), edges, name[g.top]))


def restrict_below(a: MemCode, x: Label) -> MemCode:
    if x not in a.preds:
        raise UnknownNode(x)
    cone = _cone(a, x)
    return validate(RawPointedGraph.build(cone, [(p, q) for p, q in a.edges if p in cone and q in cone], x))


def relabel(a: RawPointedGraph, mapping: Mapping[Label, Label]) -> RawPointedGraph:
    out = RawPointedGraph.build(
        [mapping[n] for n in a.nodes], [(mapping[p], mapping[q]) for p, q in a.edges], mapping[a.top]
    )
    return validate(out) if isinstance(a, MemCode) else out


# --- partial isomorphisms ----------------------------------------------------


@dataclass(frozen=True)
class InitialPartialIso:
    mapping: Mapping[Label, Label]

    @property
    def domain(self) -> frozenset[Label]:
        return frozenset(self.mapping)

    @property
    def range(self) -> frozenset[Label]:
        return frozenset(self.mapping.values())

    def __contains__(self, item) -> bool:
        return item in self.mapping

    def __getitem__(self, item: Label) -> Label:
        return self.mapping[item]

    def items(self):
        return sorted(self.mapping.items(), key=lambda kv: _sort_key(kv[0]))

    def is_initial_partial_iso(self, a: RawPointedGraph, b: RawPointedGraph) -> bool:
        return is_ipi(self.mapping, a, b)


def is_ipi(m: Mapping[Label, Label], a: RawPointedGraph, b: RawPointedGraph) -> bool:
    """Direct check of the definition: downward-closed domain and range, edges preserved both ways."""
    if len(set(m.values())) != len(m):
        return False
    pa, pb = _preds(a), _preds(b)
    rng = set(m.values())
    for x, y in m.items():
        if x not in pa or y not in pb:
            return False
        if not pa[x] <= m.keys() or not pb[y] <= rng:
            return False
    for x in m:
        for x2 in m:
            if ((x, x2) in a.edges) != ((m[x], m[x2]) in b.edges):
                return False
    return True


def _pred_index(b: RawPointedGraph) -> dict[frozenset, Label]:
    cached = b.__dict__.get("_pindex")
    if cached is None:
        cached = {p: n for n, p in _preds(b).items()}
        object.__setattr__(b, "_pindex", cached)
    return cached


def max_ipi(a: MemCode, b: MemCode) -> InitialPartialIso:
    """Maximum initial partial isomorphism from ``a`` to ``b``.

    Nodes of ``a`` are visited in topological order; ``a`` is mapped exactly when
    all its predecessors are and some node of ``b`` has precisely their images as
    predecessors (unique by extensionality of ``b``).
    """
    pa = _preds(a)
    index = _pred_index(b)
    pi: dict[Label, Label] = {}
    for x in a.__dict__.get("_topo") or topological_order(a):
        try:
            image = frozenset([pi[p] for p in pa[x]])
        except KeyError:
            continue
        target = index.get(image)
        if target is not None:
            pi[x] = target
    return InitialPartialIso(pi)


def iso(a: MemCode, b: MemCode) -> InitialPartialIso | None:
    """The unique isomorphism ``a -> b``, or ``None``."""
    pi = max_ipi(a, b)
    if len(pi.mapping) == len(a.nodes) and len(b.nodes) == len(a.nodes):
        return pi
    return None


@dataclass(frozen=True)
class Verdict:
    """Outcome of a code-level membership test.

    A positive verdict names the node ``witness`` of the penultimate level of
    ``b`` whose cone is isomorphic to ``a``.  A negative verdict carries the
    maximum initial partial isomorphism and, for every penultimate node of
    ``b``, why its cone is not the image of ``a``: either
    ``("outside", n)`` with ``n`` below it and outside the range, or
    ``("top", t)`` when the cone lies inside the range but is not the image of
    the top ``t`` of ``a``.
    """

    positive: bool
    witness: Label | None
    ipi: InitialPartialIso
    certificate: tuple[tuple[Label, str, Label], ...] = ()

    def __bool__(self) -> bool:
        return self.positive


def vin(a: MemCode, b: MemCode) -> Verdict:
    pi = max_ipi(a, b)
    if a.top in pi.mapping and pi.mapping[a.top] in _preds(b)[b.top]:
        return Verdict(True, pi.mapping[a.top], pi)
    rng = pi.range
    topo_b = topological_order(b)
    cert = []
    for n in b.pen:
        cone = _cone(b, n)
        missing = [m for m in topo_b if m in cone and m not in rng]
        if missing:
            cert.append((n, "outside", missing[0]))
        else:
            cert.append((n, "top", a.top))
    return Verdict(False, None, pi, tuple(cert))


def check_vin_certificate(a: MemCode, b: MemCode, verdict: Verdict) -> bool:
    """Verify a negative verdict without trusting :func:`max_ipi`.

    The carried map must be an initial partial isomorphism that no single pair
    extends (hence the maximum one), and every penultimate node of ``b`` must be
    blocked as the certificate claims.
    """
    if verdict.positive:
        w = verdict.witness
        return w in _preds(b)[b.top] and iso(a, restrict_below(b, w)) is not None
    m = dict(verdict.ipi.mapping)
    if not is_ipi(m, a, b):
        return False
    used = set(m.values())
    for x in a.nodes:
        if x in m:
            continue
        for y in b.nodes:
            if y in used:
                continue
            m[x] = y
            ok = is_ipi(m, a, b)
            del m[x]
            if ok:
                return False
    claims = {n: (kind, w) for n, kind, w in verdict.certificate}
    if set(claims) != set(_preds(b)[b.top]):
        return False
    for n, (kind, w) in claims.items():
        if kind == "outside":
            if w not in _cone(b, n) or w in used:
                return False
        elif kind == "top":
            if w != a.top or m.get(a.top) == n:
                return False
            if not _cone(b, n) <= used:
                return False
        else:
            return False
    return True


# --- constructions -------------------------------------------------------------


class _Fresh:
    def __init__(self, taken: Iterable[Label]):
        self.taken = set(taken)
        self.n = 0

    def __call__(self, hint: str = "") -> Label:
        while True:
            label = f"aux:{hint}{self.n}" if hint else f"aux:{self.n}"
            self.n += 1
            if label not in self.taken:
                self.taken.add(label)
                return label


def union_code(x: MemCode) -> MemCode:
    """Cut out the penultimate level: edges into the top are replaced by edges from the level below it."""
    preds = _preds(x)
    top = x.top
    edges = {(p, q) for p, q in x.edges if q != top}
    for y in preds[top]:
        for z in preds[y]:
            edges.add((z, top))
    return normalize(RawPointedGraph.build(x.nodes, edges, top))


@dataclass(frozen=True)
class Glued:
    """Acyclic extensional graph (no new top) holding copies of both inputs."""

    nodes: tuple[Label, ...]
    edges: frozenset[tuple[Label, Label]]
    embed_a: Mapping[Label, Label]
    embed_b: Mapping[Label, Label]

    def pointed(self, top: Label) -> RawPointedGraph:
        return RawPointedGraph.build(self.nodes, self.edges, top)


def _glue_into(a: MemCode, nodes: Iterable[Label], edges: Iterable[tuple[Label, Label]]):
    """Amalgamate ``a`` into an acyclic extensional graph (no top required)."""
    host = RawPointedGraph.build(nodes, edges, next(iter(nodes)))
    index = _pred_index(host)
    pa = _preds(a)
    fresh = _Fresh(host.nodes)
    emb: dict[Label, Label] = {}
    new_edges = set(host.edges)
    for x in topological_order(a):
        image = frozenset(emb[p] for p in pa[x])
        target = index.get(image)
        if target is None:
            target = fresh("a")
            new_edges |= {(p, target) for p in image}
            index[image] = target
        emb[x] = target
    all_nodes = tuple(sorted(set(host.nodes) | set(emb.values()), key=_sort_key))
    return all_nodes, frozenset(new_edges), emb


def glue(a: MemCode, b: MemCode) -> Glued:
    """Amalgamate ``a`` onto ``b`` along their maximum initial partial isomorphism."""
    nodes, edges, emb = _glue_into(a, b.nodes, b.edges)
    return Glued(nodes, edges, emb, {n: n for n in b.nodes})


def pair_code(a: MemCode, b: MemCode) -> MemCode:
    g = glue(a, b)
    top = _Fresh(g.nodes)("p")
    edges = set(g.edges) | {(g.embed_a[a.top], top), (b.top, top)}
    return normalize(RawPointedGraph.build(g.nodes + (top,), edges, top))


def set_code(codes: Sequence[MemCode]) -> tuple[MemCode, list[Label]]:
    """Code for ``{A1, ..., An}`` by iterated gluing; returns the code and the node of each ``Ai``."""
    if not codes:
        return validate(RawPointedGraph.build(["aux:p0"], [], "aux:p0")), []
    nodes: tuple[Label, ...] = codes[0].nodes
    edges: frozenset = codes[0].edges
    tops = [codes[0].top]
    for c in codes[1:]:
        nodes, edges, emb = _glue_into(c, nodes, edges)
        tops.append(emb[c.top])
    top = _Fresh(nodes)("p")
    code = validate(RawPointedGraph.build(nodes + (top,), set(edges) | {(n, top) for n in tops}, top))
    return code, tops


def wellorder_code(a: MemCode, order: Sequence[Label]) -> MemCode:
    """Code for ``{(x, y) : x before y}`` over the elements named by ``pen(a)``."""
    pen = set(_preds(a)[a.top])
    if len(order) != len(set(order)) or set(order) != pen:
        raise ValueError("order must list every penultimate node exactly once")
    pairs = [(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))]
    return _pairs_code(a, [(x, y) for x, y in pairs], drop={a.top})


def _pairs_code(host: RawPointedGraph, pairs: Sequence[tuple[Label, Label]], drop: set[Label]) -> MemCode:
    nodes = set(host.nodes) - drop
    edges = {(p, q) for p, q in host.edges if q not in drop and p not in drop}
    fresh = _Fresh(host.nodes)
    top = fresh("t")
    for x, y in pairs:
        sx, sxy, pxy = fresh("s"), fresh("d"), fresh("k")
        nodes |= {sx, sxy, pxy}
        edges |= {(x, sx), (x, sxy), (y, sxy), (sx, pxy), (sxy, pxy), (pxy, top)}
    nodes.add(top)
    return normalize(RawPointedGraph.build(nodes, edges, top))


def relation_code(a: MemCode, b: MemCode, pairs: Iterable[tuple[Label, Label]]) -> MemCode:
    """Code for the relation ``{(collapse a_i, collapse b_j)}`` given pairs of penultimate nodes."""
    pen_a, pen_b = set(_preds(a)[a.top]), set(_preds(b)[b.top])
    pairs = list(pairs)
    for x, y in pairs:
        if x not in pen_a or y not in pen_b:
            raise ValueError(f"({x!r}, {y!r}) is not a pair of penultimate nodes")
    g = glue(a, b)
    host = RawPointedGraph.build(g.nodes, g.edges, b.top)
    return _pairs_code(host, [(g.embed_a[x], y) for x, y in pairs], drop=set())


def function_code(a: MemCode, b: MemCode, f: Mapping[Label, Label]) -> MemCode:
    pen_a = set(_preds(a)[a.top])
    if set(f) != pen_a:
        raise ValueError("function must be total on the penultimate level of the domain code")
    return relation_code(a, b, sorted(f.items(), key=lambda kv: _sort_key(kv[0])))


def function_of_code(g: MemCode, a: MemCode, b: MemCode) -> dict[Label, Label]:
    """Read a class function ``pen(a) -> pen(b)`` back off a function code.

    Works at code level: penultimate nodes of ``g`` are parsed as Kuratowski
    pairs and their components matched to ``a`` and ``b`` through maximum
    initial partial isomorphisms.
    """
    into_a = {v: k for k, v in max_ipi(a, g).mapping.items()}
    into_b = {v: k for k, v in max_ipi(b, g).mapping.items()}
    pen_a = set(_preds(a)[a.top])
    pen_b = set(_preds(b)[b.top])
    preds = _preds(g)
    out: dict[Label, Label] = {}
    for p in g.pen:
        parts = preds[p]
        singles = [s for s in parts if len(preds[s]) == 1]
        if len(parts) == 1 and singles:
            (x,) = preds[singles[0]]
            y = x
        elif len(parts) == 2 and len(singles) >= 1:
            if len(singles) == 2:
                raise ValueError(f"node {p!r} is not a Kuratowski pair")
            s = singles[0]
            (d,) = [n for n in parts if n != s]
            (x,) = preds[s]
            if len(preds[d]) != 2 or x not in preds[d]:
                raise ValueError(f"node {p!r} is not a Kuratowski pair")
            (y,) = [n for n in preds[d] if n != x]
        else:
            raise ValueError(f"node {p!r} is not a Kuratowski pair")
        xa, yb = into_a.get(x), into_b.get(y)
        if xa not in pen_a or yb not in pen_b:
            raise ValueError(f"pair node {p!r} does not connect the two codes")
        if xa in out and out[xa] != yb:
            raise ValueError(f"code is not functional at {xa!r}")
        out[xa] = yb
    if set(out) != pen_a:
        raise ValueError("code is not total on the domain")
    return out


def ordinal_code(order: Sequence[Label]) -> MemCode:
    """``Gamma + 1``: the strict order plus a new top above everything."""
    order = [str(x) for x in order]
    if len(set(order)) != len(order):
        raise ValueError("well-order labels must be distinct")
    top = _Fresh(order)("top")
    edges = [(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))]
    edges += [(g, top) for g in order]
    return validate(RawPointedGraph.build(order + [top], edges, top))


# --- serialization -------------------------------------------------------------------


def code_from_json(data: str | Mapping) -> RawPointedGraph:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        nodes = [str(n) for n in data["nodes"]]
        edges = [(str(p), str(q)) for p, q in data["edges"]]
        top = str(data["top"])
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed code JSON: {e}") from None
    for p, q in edges:
        for n in (p, q):
            if n not in nodes:
                raise UnknownNode(n)
    return RawPointedGraph.build(nodes, edges, top)


def code_to_json(g: RawPointedGraph) -> str:
    edges = sorted(g.edges, key=lambda e: (_sort_key(e[0]), _sort_key(e[1])))
    return json.dumps({"nodes": list(g.nodes), "edges": [list(e) for e in edges], "top": g.top})


def code_to_dot(g: RawPointedGraph, name: str = "code") -> str:
    lines = [f"digraph {name} {{"]
    for n in g.nodes:
        shape = "doublecircle" if n == g.top else "circle"
        lines.append(f'  "{n}" [shape={shape}];')
    for p, q in sorted(g.edges, key=lambda e: (_sort_key(e[0]), _sort_key(e[1]))):
        lines.append(f'  "{p}" -> "{q}";')
    lines.append("}")
    return "\n".join(lines)


# --- brute-force enumerators (oracles) ---------------------------------------------


def enumerate_ipis(a: RawPointedGraph, b: RawPointedGraph) -> list[dict[Label, Label]]:
    """Every initial partial isomorphism ``a -> b``, by backtracking search.

    Nodes of ``a`` are decided in topological order: either left out or sent to
    an unused node of ``b`` consistent (both edge directions) with the choices
    so far.  Downward closure of the range is checked on completion.
    """
    order = topological_order(a)
    pa = _preds(a)
    pb = _preds(b)
    eb = b.edges
    bnodes = list(b.nodes)
    out: list[dict[Label, Label]] = []
    m: dict[Label, Label] = {}
    used: set[Label] = set()

    def rec(i: int) -> None:
        if i == len(order):
            if all(pb[y] <= used for y in used):
                out.append(dict(m))
            return
        x = order[i]
        rec(i + 1)
        if not pa[x] <= m.keys():
            return
        for y in bnodes:
            if y in used:
                continue
            if any(((p, x) in a.edges) != ((m[p], y) in eb) for p in m):
                continue
            if any(((x, p) in a.edges) != ((y, m[p]) in eb) for p in m):
                continue
            m[x] = y
            used.add(y)
            rec(i + 1)
            used.discard(y)
            del m[x]

    rec(0)
    return out


def enumerate_codes(max_nodes: int) -> list[MemCode]:
    """All valid codes on nodes ``n0..n{k-1}`` (``k <= max_nodes``) labeled along a topological order.

    Edges only run from lower to higher index and the top is the last node, so
    every code appears at least once up to isomorphism.
    """
    out = []
    for k in range(1, max_nodes + 1):
        labels = [f"n{i}" for i in range(k)]
        slots = [(i, j) for j in range(k) for i in range(j)]
        for mask in range(1 << len(slots)):
            edges = [slots[s] for s in range(len(slots)) if mask >> s & 1]
            preds = [0] * k
            for i, j in edges:
                preds[j] |= 1 << i
            if len(set(preds)) != k:
                continue
            g = RawPointedGraph.build(labels, [(labels[i], labels[j]) for i, j in edges], labels[-1])
            try:
                out.append(validate(g))
            except CodeError:
                continue
    return out
