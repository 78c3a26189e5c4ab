import itertools
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from classcode.etr import WellOrder
from classcode.hfset import EMPTY, HFSet, hf_ordinal, hf_powerset, hf_transitive_closure, hf_v_stage
from classcode.logic import (
    And,
    Eq,
    Exists,
    Forall,
    In,
    InClass,
    Not,
    Or,
    encode_valuation,
    evaluate,
    free_set_vars,
    full_model,
    godel_encode,
    parse_formula,
)
from classcode.memcode import canonical_code, collapse, vin
from classcode.truth import (
    FULLPARAMS,
    DefBounds,
    Truth,
    def_code,
    def_op,
    desugar,
    is_primitive,
    l_code,
    primitive_formulas,
    table_to_text,
    tr_audit,
    tr_fixed_points,
    tr_layered,
    tr_materialize,
    tr_query,
)
from strategies import random_code, random_formula

V1 = sorted(hf_v_stage(1).elements)
V2 = sorted(hf_v_stage(2).elements)
M2 = full_model(V2)
SENTENCE = parse_formula("(ex x (= x x))")


def levels(n):
    return WellOrder([hf_ordinal(i) for i in range(n)])


def rich_model():
    """Universe holding level 1 and the code of a sentence, so tr atoms can fire."""
    return full_model(hf_transitive_closure([hf_ordinal(1), godel_encode(SENTENCE)]))


def test_query_examples():
    assert tr_query(M2, None, levels(1), EMPTY, SENTENCE)
    m = rich_model()
    g = levels(2)
    v = {"l": EMPTY, "f": godel_encode(SENTENCE), "v": encode_valuation({})}
    assert tr_query(m, None, g, hf_ordinal(1), parse_formula("(tr l f v)"), v)
    assert not tr_query(m, None, g, hf_ordinal(0), parse_formula("(tr l f v)"), v)


def test_malformed_tr_arguments_are_false():
    m = rich_model()
    g = levels(2)
    one = hf_ordinal(1)
    tr = parse_formula("(tr l f v)")
    code = godel_encode(SENTENCE)
    # not a formula code, not a valuation, level not below
    assert not tr_query(m, None, g, one, tr, {"l": EMPTY, "f": one, "v": EMPTY})
    assert not tr_query(m, None, g, one, tr, {"l": EMPTY, "f": code, "v": one})
    assert not tr_query(m, None, g, one, tr, {"l": one, "f": code, "v": EMPTY})


def test_level_outside_order():
    with pytest.raises(ValueError):
        tr_query(M2, None, levels(1), hf_ordinal(1), SENTENCE)
    with pytest.raises(ValueError):
        tr_query(M2, None, levels(1), EMPTY, parse_formula("(= x y)"), {"x": EMPTY})


def test_parameter_clause():
    a = frozenset({hf_ordinal(1)})
    g = levels(1)
    assert tr_query(M2, a, g, EMPTY, parse_formula("(inclass x A)"), {"x": hf_ordinal(1)})
    assert not tr_query(M2, a, g, EMPTY, parse_formula("(inclass x A)"), {"x": EMPTY})
    t = tr_materialize(M2, a, g, 8)
    assert any(isinstance(phi, InClass) for phi in t.formulas)
    assert tr_audit(t).ok


def test_desugar_preserves_truth():
    rng = random.Random(5)
    m = full_model(V2)
    for _ in range(200):
        phi = random_formula(rng, 4, set_vars=("x", "y"))
        d = desugar(phi)
        assert is_primitive(d, param=False)
        v = {k: rng.choice(V2) for k in free_set_vars(phi)}
        assert evaluate(m, d, v) == evaluate(m, phi, v)


def test_primitive_formula_counts():
    assert len(primitive_formulas(8)) == 36
    fs = primitive_formulas(10)
    assert len(fs) == 220
    assert all(godel_encode(f).rank <= 10 for f in fs)
    assert parse_formula("(not (not (= x x)))") in fs


def test_level_one_matches_evaluation():
    t = tr_materialize(M2, None, levels(1), 10)
    for lvl, phi, v in t.domain():
        want = evaluate(M2, phi, dict(v), tr=lambda a, b, c: False)
        assert ((lvl, phi, v) in t.entries) == want


@pytest.mark.parametrize("n", [1, 2, 3])
def test_clause_audit(n):
    rep = tr_audit(tr_materialize(M2, None, levels(n), 10))
    assert rep.ok
    assert set(rep.per_clause) == {"eq", "in", "tr", "or", "not", "ex"}


def test_audit_catches_tampering():
    t = tr_materialize(M2, None, levels(2), 8)
    entry = sorted(t.entries, key=str)[0]
    bad = type(t)(t.gamma, t.param, t.model, t.size_bound, t.variables, t.formulas, t.entries - {entry})
    assert not tr_audit(bad).ok


def test_initial_segment_coherence():
    full = tr_materialize(M2, None, levels(3), 10)
    for k in (1, 2):
        short = tr_materialize(M2, None, levels(k), 10)
        assert full.restrict(levels(k)) == short.entries


def test_rich_universe_tables():
    m = rich_model()
    t = tr_materialize(m, None, levels(2), 8)
    assert any(type(phi).__name__ == "Tr" for _, phi, _ in t.entries)
    assert tr_audit(t).ok
    assert table_to_text(tr_layered(m, None, levels(2), 8)) == table_to_text(t)


def test_fixed_point_unique_tiny():
    sols = tr_fixed_points(full_model(V2), None, levels(2), 6)
    assert len(sols) == 1
    assert sols[0] == tr_materialize(full_model(V2), None, levels(2), 6).entries


def test_fixed_point_search_is_exhaustive():
    # a single-variable domain small enough to enumerate every subset directly
    m = full_model(V1)
    g = levels(1)
    t = tr_materialize(m, None, g, 6, variables=("x",))
    points = t.domain()
    assert len(points) <= 16
    survivors = []
    for mask in range(1 << len(points)):
        cand = frozenset(p for i, p in enumerate(points) if mask >> i & 1)
        if tr_audit(type(t)(g, None, m, 6, ("x",), t.formulas, cand)).ok:
            survivors.append(cand)
    assert survivors == [t.entries]
    assert tr_fixed_points(m, None, g, 6, variables=("x",)) == [t.entries]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_layered_matches(n):
    a = tr_materialize(M2, None, levels(n), 10)
    b = tr_layered(M2, None, levels(n), 10)
    assert table_to_text(a) == table_to_text(b)


def test_table_text_is_sorted_and_stable():
    t = tr_materialize(M2, None, levels(1), 8)
    text = table_to_text(t)
    assert text == table_to_text(tr_materialize(M2, None, levels(1), 8, threads=4))
    assert "#0\t(= x x)\tx=#0\n" in text


def test_concurrent_queries():
    truth = Truth(M2, levels(2), None)
    phis = primitive_formulas(8)
    jobs = [(hf_ordinal(i % 2), phi, {"x": EMPTY, "y": hf_ordinal(1)}) for i, phi in enumerate(phis * 4)]
    with ThreadPoolExecutor(8) as pool:
        got = list(pool.map(lambda j: truth.query(*j), jobs))
    assert got == [Truth(M2, levels(2), None).query(*j) for j in jobs]


# --- Def ----------------------------------------------------------------------


def syntactic_extensions(universe, max_size, params):
    """Extensions of every formula of at most ``max_size`` nodes, built and evaluated one by one."""
    m = full_model(universe)
    free = ["x"] + [f"p{i}" for i in range(1, params + 1)]

    def forms(size, ctx):
        if size == 1:
            return [c(a, b) for a in ctx for b in ctx for c in (Eq, In)]
        out = [Not(f) for f in forms(size - 1, ctx)]
        for a in range(1, size - 1):
            for f in forms(a, ctx):
                for g in forms(size - 1 - a, ctx):
                    out += [And((f, g)), Or((f, g))]
        y = f"y{len(ctx)}"
        for f in forms(size - 1, ctx + [y]):
            out += [Exists(y, f), Forall(y, f)]
        return out

    exts = set()
    for s in range(1, max_size + 1):
        for phi in forms(s, free):
            for vals in itertools.product(universe, repeat=params):
                env = dict(zip(free[1:], vals))
                exts.add(frozenset(x for x in universe if evaluate(m, phi, {**env, "x": x})))
    return exts


def test_def_examples():
    m1 = full_model(V1)
    both = {frozenset(), frozenset(V1)}
    assert def_op(m1) == both
    assert def_op(m1, (), DefBounds(3, 0)) == both


@pytest.mark.parametrize("size,params", [(2, 0), (3, 0), (3, 1), (4, 1)])
def test_def_bounded_matches_syntactic(size, params):
    for uni in (V2, sorted(hf_v_stage(3).elements)):
        assert def_op(full_model(uni), (), DefBounds(size, params)) == syntactic_extensions(uni, size, params)


def test_def_bounded_within_full():
    v3 = sorted(hf_v_stage(3).elements)
    m = full_model(v3)
    full = def_op(m)
    assert len(full) == 16
    small = def_op(m, (), DefBounds(3, 1))
    assert small <= full and small != full
    assert def_op(m, (), DefBounds(3, 2)) == full


def test_def_with_predicate():
    a = frozenset({hf_ordinal(1)})
    got = def_op(full_model(V2), [a], DefBounds(1, 0))
    assert frozenset({hf_ordinal(1)}) in got


def test_def_code_examples():
    assert collapse(def_code(canonical_code(EMPTY))) == hf_ordinal(1)
    assert collapse(def_code(canonical_code(hf_v_stage(1)))) == hf_v_stage(2)


def test_def_code_agrees_with_def_op():
    rng = random.Random(2)
    for _ in range(40):
        e = random_code(rng, 6)
        for mode in (FULLPARAMS, DefBounds(3, 1)):
            want = HFSet(HFSet(s) for s in def_op(collapse(e).elements, (), mode))
            assert collapse(def_code(e, mode)) == want


def test_l_code():
    assert collapse(l_code(0)) == EMPTY
    assert collapse(l_code(2)) == hf_v_stage(2)
    for k in range(4):
        assert collapse(l_code(k)) == hf_v_stage(k)
        assert vin(l_code(k), l_code(k + 1)).positive
    assert collapse(l_code(levels(3))) == hf_v_stage(3)
    assert collapse(l_code(2, canonical_code(hf_ordinal(1)))) == hf_v_stage(2)


def test_l_code_bounded_with_predicate():
    # parameter-free, tiny formulas: each level is a subset of the full one
    a = canonical_code(hf_powerset(hf_ordinal(1)))
    for k in range(4):
        small = collapse(l_code(k, a, DefBounds(2, 0)))
        assert small.elements <= hf_v_stage(k).elements
