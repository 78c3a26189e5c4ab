"""Hypothesis strategies and random generators shared by the test modules."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from classcode.hfset import EMPTY, HFSet
from classcode.memcode import RawPointedGraph, canonical_code, normalize, relabel


def random_hf(rng: random.Random, rank: int, width: int = 3) -> HFSet:
    """A random set of rank at most ``rank`` with at most ``width`` elements per node."""
    if rank <= 0:
        return EMPTY
    n = rng.randint(0, width)
    return HFSet(random_hf(rng, rng.randint(0, rank - 1), width) for _ in range(n))


def hf_sets(max_rank: int = 4, width: int = 3):
    return st.randoms(use_true_random=False).map(lambda r: random_hf(r, max_rank, width))


def random_code(rng: random.Random, max_nodes: int = 12):
    """Random DAG on up to ``max_nodes`` nodes, normalized into a valid code, then relabeled."""
    k = rng.randint(1, max_nodes)
    density = rng.random()
    edges = [(f"g{i}", f"g{j}") for j in range(k) for i in range(j) if rng.random() < density]
    code = normalize(RawPointedGraph.build([f"g{i}" for i in range(k)], edges, f"g{k - 1}"))
    return shuffle_labels(rng, code)


def shuffle_labels(rng: random.Random, code):
    names = list(code.nodes)
    fresh = [f"v{i}" for i in range(len(names))]
    rng.shuffle(fresh)
    return relabel(code, dict(zip(names, fresh)))


def codes(max_nodes: int = 12):
    return st.randoms(use_true_random=False).map(lambda r: random_code(r, max_nodes))


def canonical_codes(max_rank: int = 4):
    return st.randoms(use_true_random=False).map(lambda r: shuffle_labels(r, canonical_code(random_hf(r, max_rank))))


# --- formulas ----------------------------------------------------------------------

from classcode.logic.syntax import (  # noqa: E402
    And,
    Eq,
    Exists,
    ExistsClass,
    ExistsIn,
    Forall,
    ForallClass,
    ForallIn,
    In,
    InClass,
    Not,
    Or,
)


def random_formula(rng: random.Random, depth: int, set_vars=("x", "y", "z"), class_vars=(), bounded=True,
                   unbounded=True, classes=True):
    """Random formula of nesting depth at most ``depth`` over the given names.

    New quantifiers bind names drawn from ``set_vars``/``class_vars`` so that
    shadowing and free occurrences both happen.
    """
    atoms = [lambda: Eq(rng.choice(set_vars), rng.choice(set_vars)),
             lambda: In(rng.choice(set_vars), rng.choice(set_vars))]
    if class_vars:
        atoms.append(lambda: InClass(rng.choice(set_vars), rng.choice(class_vars)))
    if depth <= 1:
        return rng.choice(atoms)()
    ops = ["atom", "not", "and", "or"]
    if unbounded:
        ops += ["ex", "all"]
    if bounded:
        ops += ["exin", "allin"]
    if classes and class_vars:
        ops += ["exC", "allC"]
    op = rng.choice(ops)
    sub = lambda: random_formula(rng, depth - 1, set_vars, class_vars, bounded, unbounded, classes)  # noqa: E731
    if op == "atom":
        return rng.choice(atoms)()
    if op == "not":
        return Not(sub())
    if op in ("and", "or"):
        n = rng.choice([2, 2, 2, 3, 1, 0])
        return (And if op == "and" else Or)(tuple(sub() for _ in range(n)))
    if op in ("ex", "all"):
        return (Exists if op == "ex" else Forall)(rng.choice(set_vars), sub())
    if op in ("exin", "allin"):
        x = rng.choice(set_vars)
        y = rng.choice([v for v in set_vars if v != x])
        return (ExistsIn if op == "exin" else ForallIn)(x, y, sub())
    return (ExistsClass if op == "exC" else ForallClass)(rng.choice(class_vars), sub())
