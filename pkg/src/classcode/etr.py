"""Recursion along finite well-founded relations.

A recursion instance fixes a step: either a formula with a distinguished
element variable, an optional index variable and a class variable for the
partial solution, or a Python callable with the same information.  The slice
at ``r`` collects the candidates satisfying the step when the partial
solution holds every pair ``(s, x)`` with ``s`` strictly below ``r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .hfset import HFSet
from .logic.semantics import SOModel, compile_formula
from .logic.syntax import Formula, free_class_vars, free_set_vars

__all__ = [
    "WellOrder",
    "WfRelation",
    "RecursionInstance",
    "Solution",
    "CheckResult",
    "Comparison",
    "etr_solve",
    "etr_check",
    "compare_wellorders",
    "CyclicRelation",
]


class CyclicRelation(ValueError):
    pass


def _key(x):
    if isinstance(x, HFSet):
        return (0, x.key, "")
    return (1, (), repr(x))


@dataclass(frozen=True)
class WellOrder:
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("well-order elements must be distinct")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.position

    @property
    def position(self) -> dict:
        cached = self.__dict__.get("_pos")
        if cached is None:
            cached = {x: i for i, x in enumerate(self.elements)}
            object.__setattr__(self, "_pos", cached)
        return cached

    def less(self, a, b) -> bool:
        pos = self.position
        return a in pos and b in pos and pos[a] < pos[b]

    def prefix(self, n: int) -> "WellOrder":
        return WellOrder(self.elements[:n])

    def relation(self) -> "WfRelation":
        els = self.elements
        return WfRelation(els, frozenset((els[i], els[j]) for j in range(len(els)) for i in range(j)))


@dataclass(frozen=True)
class WfRelation:
    """A finite acyclic relation; ``below(r)`` is the transitive closure's section."""

    domain: tuple
    pairs: frozenset

    def __post_init__(self):
        dom = list(dict.fromkeys(self.domain))
        for a, b in self.pairs:
            for x in (a, b):
                if x not in dom:
                    dom.append(x)
        dom.sort(key=_key)
        object.__setattr__(self, "domain", tuple(dom))
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        preds = {x: set() for x in dom}
        for a, b in self.pairs:
            preds[b].add(a)
        closure: dict = {}
        state: dict = {}

        def visit(x, path):
            if state.get(x) == 1:
                raise CyclicRelation("relation has a cycle through " + " -> ".join(map(str, path + [x])))
            if state.get(x) == 2:
                return closure[x]
            state[x] = 1
            acc = set()
            for p in preds[x]:
                acc.add(p)
                acc |= visit(p, path + [x])
            state[x] = 2
            closure[x] = frozenset(acc)
            return closure[x]

        for x in dom:
            visit(x, [])
        object.__setattr__(self, "_below", closure)

    def below(self, r) -> frozenset:
        return self._below[r]

    def less(self, a, b) -> bool:
        return a in self._below.get(b, ())

    def topological(self, reverse_ties: bool = False) -> list:
        """Elements with everything below an element listed before it; ties by label order."""
        order = sorted(self.domain, key=_key, reverse=reverse_ties)
        done: set = set()
        out = []
        while len(out) < len(order):
            for x in order:
                if x not in done and self._below[x] <= done:
                    done.add(x)
                    out.append(x)
                    break
        return out

    @property
    def closure_pairs(self) -> frozenset:
        return frozenset((a, b) for b in self.domain for a in self._below[b])


@dataclass(frozen=True)
class Solution:
    pairs: frozenset

    def slice(self, r) -> frozenset:
        return frozenset(x for s, x in self.pairs if s == r)

    def below(self, rel: WfRelation, r) -> frozenset:
        under = rel.below(r)
        return frozenset(p for p in self.pairs if p[0] in under)

    def slices(self, rel: WfRelation) -> dict:
        return {r: self.slice(r) for r in rel.domain}


@dataclass(frozen=True)
class RecursionInstance:
    """``step`` is a formula or ``callable(candidate, r, partial_pairs) -> bool``.

    For a formula step the partial solution is bound to ``partial_var`` as a
    binary class of pairs ``(index(s), x)``, the candidate to ``x_var`` and,
    if ``index_var`` is set, ``index(r)`` to ``index_var``.  ``index`` maps
    labels of the relation to universe elements (identity by default).
    ``candidates`` overrides the model universe as the pool of slice elements.
    """

    step: Any
    model: SOModel | None = None
    x_var: str = "x"
    index_var: str | None = None
    partial_var: str = "Y"
    params: Mapping[str, Any] = field(default_factory=dict)
    index: Callable | None = None
    candidates: Callable | None = None

    def __post_init__(self):
        if isinstance(self.step, Callable) and not _is_formula(self.step):
            return
        phi = self.step
        allowed_sets = {self.x_var} | ({self.index_var} if self.index_var else set()) | set(self.params)
        extra = free_set_vars(phi) - allowed_sets
        if extra:
            raise ValueError(f"step formula has unexpected free variables {sorted(extra)}")
        extra = free_class_vars(phi) - {self.partial_var} - set(self.params)
        if extra:
            raise ValueError(f"step formula has unexpected class variables {sorted(extra)}")
        if self.model is None:
            raise ValueError("a formula step needs a model")

    def _pool(self, r) -> Iterable:
        if self.candidates is not None:
            return self.candidates(r)
        if self.model is None or self.model.universe is None:
            raise ValueError("no candidate pool for slices")
        return self.model.universe

    def _compiled(self):
        cached = self.__dict__.get("_fn")
        if cached is None:
            if _is_formula(self.step):
                cached = compile_formula(self.model, self.step)
            else:
                cached = self.step
            object.__setattr__(self, "_fn", cached)
        return cached

    def slice(self, rel: WfRelation, r, partial: frozenset) -> frozenset:
        fn = self._compiled()
        out = []
        if _is_formula(self.step):
            idx = self.index or (lambda s: s)
            y = frozenset((idx(s), x) for s, x in partial)
            env = dict(self.params)
            env[self.partial_var] = y
            if self.index_var:
                env[self.index_var] = idx(r)
            for a in self._pool(r):
                env[self.x_var] = a
                if fn(env):
                    out.append(a)
        else:
            for a in self._pool(r):
                if fn(a, r, partial):
                    out.append(a)
        return frozenset(out)


def _is_formula(x) -> bool:
    from .logic.syntax import _F

    return isinstance(x, _F)


def etr_solve(inst: RecursionInstance, rel: WfRelation, reverse_ties: bool = False) -> Solution:
    """Build the solution slice by slice in topological order."""
    pairs: set = set()
    for r in rel.topological(reverse_ties):
        under = rel.below(r)
        partial = frozenset(p for p in pairs if p[0] in under)
        pairs |= {(r, x) for x in inst.slice(rel, r, partial)}
    return Solution(frozenset(pairs))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    failing: Hashable | None = None
    expected: frozenset | None = None
    found: frozenset | None = None

    def __bool__(self) -> bool:
        return self.ok


def etr_check(inst: RecursionInstance, rel: WfRelation, sol: Solution) -> CheckResult:
    """Check every slice equation against ``sol`` itself; report the first failure in topological order."""
    dom = set(rel.domain)
    if any(s not in dom for s, _ in sol.pairs):
        stray = min((s for s, _ in sol.pairs if s not in dom), key=_key)
        return CheckResult(False, stray, frozenset(), sol.slice(stray))
    for r in rel.topological():
        want = inst.slice(rel, r, sol.below(rel, r))
        have = sol.slice(r)
        if want != have:
            return CheckResult(False, r, want, have)
    return CheckResult(True)


@dataclass(frozen=True)
class Comparison:
    """Embeddings onto initial segments; ``None`` where the longer order cannot embed."""

    gamma_into_delta: dict | None
    delta_into_gamma: dict | None

    @property
    def verdict(self) -> str:
        if self.gamma_into_delta is not None and self.delta_into_gamma is not None:
            return "equal"
        return "shorter" if self.gamma_into_delta is not None else "longer"


def _embed(gamma: WellOrder, delta: WellOrder) -> dict | None:
    # send each element to the least element of delta not yet used
    out: dict = {}
    used: set = set()
    for g in gamma:
        nxt = next((d for d in delta if d not in used), None)
        if nxt is None:
            return None
        out[g] = nxt
        used.add(nxt)
    return out


def compare_wellorders(gamma: WellOrder, delta: WellOrder) -> Comparison:
    return Comparison(_embed(gamma, delta), _embed(delta, gamma))
