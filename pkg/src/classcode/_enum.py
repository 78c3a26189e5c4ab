"""Semantic enumeration of small formulas over a finite membership structure.

Formulas are built bottom-up by AST size and deduplicated by meaning: each
formula is represented by the tuple of variables it depends on and its truth
table over assignments to them (a boolean numpy array, one axis per
variable).  Bound variables are named by nesting depth (``y1`` for the
outermost quantifier, ``y2`` below it, ...), so a formula of depth ``d`` may
mention the free variables and ``y1..yd``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["Meaning", "enumerate_meanings"]


@dataclass(frozen=True)
class Meaning:
    vars: tuple[str, ...]
    table: np.ndarray

    def key(self):
        return self.vars, self.table.tobytes()


def _align(m: Meaning, target: tuple[str, ...], n: int) -> np.ndarray:
    # reorder and broadcast m.table onto the axes of target
    perm = [m.vars.index(v) for v in target if v in m.vars]
    t = np.transpose(m.table, perm) if perm else m.table
    shape = [n if v in m.vars else 1 for v in target]
    return t.reshape(shape)


def _combine(a: Meaning, b: Meaning, op, n: int, order: dict) -> Meaning:
    vs = tuple(sorted(set(a.vars) | set(b.vars), key=order.__getitem__))
    return Meaning(vs, op(_align(a, vs, n), _align(b, vs, n)))


def _reduce(m: Meaning) -> Meaning:
    # drop axes the table does not depend on
    vs = list(m.vars)
    t = m.table
    i = 0
    while i < len(vs):
        first = np.take(t, [0], axis=i)
        if np.array_equal(np.broadcast_to(first, t.shape), t):
            t = np.squeeze(first, axis=i)
            vs.pop(i)
        else:
            i += 1
    return Meaning(tuple(vs), t)


def enumerate_meanings(
    member: np.ndarray,
    free: Sequence[str],
    max_size: int,
    bounded: bool,
    predicates: Sequence[np.ndarray] = (),
) -> list[Meaning]:
    """Distinct meanings of formulas with free variables among ``free``.

    ``member[i, j]`` says element ``i`` belongs to element ``j``.  Atoms are
    equality and membership between variables and, for each unary predicate
    mask, ``P(v)``.  Connectives are negation and binary ``and``/``or``;
    quantifiers are ``ex``/``all`` over the whole structure, or when
    ``bounded`` is set, ``exin``/``allin`` bounded by a variable in scope.
    The size of a formula is its number of AST nodes.
    """
    n = member.shape[0]
    free = tuple(free)
    order = {v: i for i, v in enumerate(free)}
    for d in range(1, max_size + 1):
        order[f"y{d}"] = len(free) + d - 1
    eye = np.eye(n, dtype=bool)
    member = member.astype(bool)

    def ctx(d):
        return free + tuple(f"y{i}" for i in range(1, d + 1))

    # table[d][s]: dict key -> Meaning, formulas of size s over ctx(d)
    table: dict[int, dict[int, dict]] = {}

    def add(bucket, m):
        m = _reduce(m)
        bucket.setdefault(m.key(), m)

    def atoms(d):
        out: dict = {}
        vs = ctx(d)
        for a in vs:
            for b in vs:
                if a == b:
                    add(out, Meaning((), np.array(True)))
                    add(out, Meaning((a,), np.diag(member).copy()))
                    continue
                pair = tuple(sorted((a, b), key=order.__getitem__))
                swap = pair != (a, b)
                add(out, Meaning(pair, eye.copy()))
                add(out, Meaning(pair, member.T.copy() if swap else member.copy()))
            for p in predicates:
                add(out, Meaning((a,), np.asarray(p, dtype=bool)))
        return out

    def build(d, s):
        if d in table and s in table[d]:
            return table[d][s]
        table.setdefault(d, {})
        out: dict = {}
        if s == 1:
            out = atoms(d)
        else:
            for m in build(d, s - 1).values():
                add(out, Meaning(m.vars, ~m.table))
            for a in range(1, (s - 1) // 2 + 1):
                left, right = build(d, a), build(d, s - 1 - a)
                for m1 in left.values():
                    for m2 in right.values():
                        add(out, _combine(m1, m2, np.logical_and, n, order))
                        add(out, _combine(m1, m2, np.logical_or, n, order))
            y = f"y{d + 1}"
            for m in build(d + 1, s - 1).values():
                if y not in m.vars:
                    # vacuous quantifier: same meaning as the body (or trivial when bounded)
                    if not bounded:
                        add(out, m)
                        continue
                ax = m.vars.index(y) if y in m.vars else None
                rest = tuple(v for v in m.vars if v != y)
                if not bounded:
                    add(out, Meaning(rest, m.table.any(axis=ax)))
                    add(out, Meaning(rest, m.table.all(axis=ax)))
                    continue
                for v in ctx(d):
                    vs = tuple(sorted(set(m.vars) | {v, y}, key=order.__getitem__))
                    t = _align(m, vs, n)
                    mem = _align(Meaning(tuple(sorted((y, v), key=order.__getitem__)),
                                         member if order[y] < order[v] else member.T), vs, n)
                    t = np.broadcast_to(t, (n,) * len(vs))
                    mem = np.broadcast_to(mem, (n,) * len(vs))
                    axis = vs.index(y)
                    rest = tuple(w for w in vs if w != y)
                    add(out, Meaning(rest, (mem & t).any(axis=axis)))
                    add(out, Meaning(rest, (~mem | t).all(axis=axis)))
        table[d][s] = out
        return out

    seen: dict = {}
    for s in range(1, max_size + 1):
        for k, m in build(0, s).items():
            seen.setdefault(k, m)
    return list(seen.values())
