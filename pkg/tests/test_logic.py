import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classcode.hfset import EMPTY, HFSet, hf_ordinal, hf_v_stage
from classcode.logic import (
    FULL,
    And,
    DecodeError,
    Down,
    Eq,
    EvaluationError,
    Exists,
    ExistsClass,
    Forall,
    ForallClass,
    FormulaSyntaxError,
    In,
    InClass,
    Not,
    Or,
    ScopeError,
    SOModel,
    UnboundVariable,
    classify,
    decode_valuation,
    encode_valuation,
    encode_var,
    evaluate,
    format_formula,
    free_set_vars,
    full_model,
    godel_decode,
    godel_encode,
    nnf,
    parse_formula,
    prenex,
)
from classcode.logic import syntax as S
from strategies import random_formula

P = parse_formula
V2 = hf_v_stage(2).elements
V3 = hf_v_stage(3).elements


# --- parsing -----------------------------------------------------------------------------


def test_parse_examples():
    assert P("(ex x (all y (not (in y x))))") == Exists("x", Forall("y", Not(In("y", "x"))))
    assert P("(in x x)") == In("x", "x")
    assert P("(exC X (inclass a X))") == ExistsClass("X", InClass("a", "X"))
    assert P("(rel u v (down Y x))") == S.Rel("u", "v", Down("Y", "x"))


def test_parse_errors():
    for text, pos in [("(in x)", 0), ("", 0), ("(in x y))", 8), ("(foo x)", 0), ("(in x (y))", 6), ("(and (= x y)", 0)]:
        with pytest.raises(FormulaSyntaxError) as e:
            P(text)
        assert e.value.pos == pos, text
    with pytest.raises(ScopeError):
        P("(and (in x y) (inclass y x))")
    with pytest.raises(FormulaSyntaxError):
        P("(in and x)")


@settings(max_examples=300)
@given(st.randoms(use_true_random=False))
def test_print_parse_roundtrip(rng):
    phi = random_formula(rng, 5, class_vars=("X", "Y"))
    text = format_formula(phi)
    assert P(text) == phi
    assert format_formula(P(text)) == text


# --- coding --------------------------------------------------------------------------------


@settings(max_examples=500)
@given(st.randoms(use_true_random=False))
def test_godel_roundtrip(rng):
    phi = random_formula(rng, 4, class_vars=("X", "Y"))
    assert godel_decode(godel_encode(phi)) == phi


def test_godel_injective_on_sample():
    rng = random.Random(11)
    sample = {random_formula(rng, 4, class_vars=("X",)) for _ in range(500)}
    codes = {godel_encode(f) for f in sample}
    assert len(codes) == len(sample)


def test_atom_codes_are_small():
    assert godel_encode(P("(= x x)")).rank == 4
    for text in ["(in x y)", "(in z w)", "(tr x y z)", "(inclass x A)"]:
        assert godel_encode(P(text)).rank <= 8


def test_var_codes():
    assert encode_var("x") is EMPTY
    assert encode_var("y") is HFSet([EMPTY])
    assert encode_var("x0").ack == 52 and encode_var("X").ack == 26
    with pytest.raises(ValueError):
        encode_var("foo")
    with pytest.raises(ValueError):
        encode_var("x01")


def test_decode_rejects_non_codes():
    for x in [EMPTY, hf_ordinal(3), HFSet([hf_ordinal(2)]), hf_v_stage(3)]:
        with pytest.raises(DecodeError):
            godel_decode(x)


def test_valuation_coding():
    v = {"x": EMPTY, "y": hf_ordinal(2)}
    assert decode_valuation(encode_valuation(v)) == v
    assert encode_valuation({}) is EMPTY


# --- classify ---------------------------------------------------------------------------------


def test_classify_examples():
    assert classify(P("(in x y)")).tag == "Sigma0"
    assert classify(P("(ex x (all y (exin z y (in z x))))")).tag == "Sigma_2"
    assert classify(P("(allC X (ex y (inclass y X)))")).tag == "Pi1_1"
    assert str(classify(P("(allC X (ex y (inclass y X)))"))) == "Π¹₁"
    assert classify(P("(exC X (allC Y (= x x)))")).tag == "Sigma1_2"
    assert classify(P("(all x (ex y (in x y)))")).tag == "Pi_2"


@settings(max_examples=300)
@given(st.randoms(use_true_random=False))
def test_classify_dual(rng):
    phi = random_formula(rng, 5, class_vars=("X",))
    assert classify(Not(phi)) == classify(phi).dual()


@settings(max_examples=300)
@given(st.randoms(use_true_random=False))
def test_classify_prenex_invariant(rng):
    phi = random_formula(rng, 5, class_vars=("X",), bounded=False)
    before, after = classify(phi), classify(prenex(phi))
    assert after.second_order == before.second_order
    assert after.sigma >= before.sigma and after.pi >= before.pi
    assert after.sigma == before.sigma or after.pi == before.pi


# --- evaluation --------------------------------------------------------------------------------


def naive(universe, phi, val):
    """Direct recursive evaluator over FULL class families (bitmask subsets)."""
    t = type(phi)
    if t is Eq:
        return val[phi.left] is val[phi.right]
    if t is In:
        return val[phi.elem] in val[phi.container].elements
    if t is InClass:
        return val[phi.term] in val[phi.cls]
    if t is Not:
        return not naive(universe, phi.body, val)
    if t is And:
        return all(naive(universe, a, val) for a in phi.args)
    if t is Or:
        return any(naive(universe, a, val) for a in phi.args)
    if t in (Exists, Forall):
        results = (naive(universe, phi.body, {**val, phi.var: a}) for a in universe)
        return any(results) if t is Exists else all(results)
    if t in (S.ExistsIn, S.ForallIn):
        results = (naive(universe, phi.body, {**val, phi.var: a}) for a in val[phi.bound].elements)
        return any(results) if t is S.ExistsIn else all(results)
    if t in (ExistsClass, ForallClass):
        subsets = [{universe[i] for i in range(len(universe)) if m >> i & 1} for m in range(1 << len(universe))]
        results = (naive(universe, phi.body, {**val, phi.var: s}) for s in subsets)
        return any(results) if t is ExistsClass else all(results)
    raise TypeError(phi)


def test_eval_examples():
    m = full_model(V2)
    assert evaluate(m, P("(ex x (all y (not (in y x))))"))
    assert evaluate(m, P("(exC X (and (inclass a X) (not (inclass b X))))"), {"a": EMPTY, "b": hf_ordinal(1)})
    assert not evaluate(m, P("(exC X (and (inclass a X) (not (inclass a X))))"), {"a": EMPTY})


def test_eval_errors():
    m = full_model(V2)
    with pytest.raises(UnboundVariable):
        evaluate(m, P("(in x y)"))
    with pytest.raises(EvaluationError):
        evaluate(m, P("(tr x y z)"), {"x": EMPTY, "y": EMPTY, "z": EMPTY})
    with pytest.raises(ValueError):
        evaluate(m, P("(= x x)"), {"x": hf_ordinal(3)})
    big = full_model(hf_enumerate(5))
    with pytest.raises(EvaluationError):
        evaluate(big, P("(exC X (inclass x X))"), {"x": EMPTY})


def hf_enumerate(k):
    from classcode.hfset import hf_enumerate_tc_bounded

    return hf_enumerate_tc_bounded(k)


def test_override_semantics():
    m = full_model(V2)
    # x is assigned but rebound by the quantifier
    assert evaluate(m, P("(ex x (in y x))"), {"x": EMPTY, "y": EMPTY})
    assert not evaluate(m, P("(in y x)"), {"x": EMPTY, "y": EMPTY})


def test_sort_inference_and_binary_classes():
    m = full_model(V2)
    assert evaluate(m, P("(exC R (and (rel x y R) (not (rel y x R))))"), {"x": EMPTY, "y": hf_ordinal(1)})
    n = SOModel(tuple(V2), (frozenset({EMPTY}), frozenset({(EMPTY, EMPTY)})))
    assert evaluate(n, P("(allC X (all z (or (not (inclass z X)) (= z z))))"))
    assert not evaluate(n, P("(exC R (rel x x R))"), {"x": hf_ordinal(1)})
    with pytest.raises(EvaluationError):
        evaluate(m, P("(exC X (and (rel x x X) (inclass x X)))"), {"x": EMPTY})


def test_model_validation():
    with pytest.raises(ValueError):
        SOModel((hf_ordinal(2),), FULL)
    with pytest.raises(ValueError):
        SOModel((EMPTY,), (frozenset({hf_ordinal(1)}),))


def test_full_class_counts():
    for n in range(5):
        uni = [hf_ordinal(i) for i in range(n)]
        m = full_model(uni)
        assert len(m.unary_classes()) == 2 ** n
        assert len({c for c in m.unary_classes()}) == 2 ** n


@settings(max_examples=1000, deadline=None)
@given(st.randoms(use_true_random=False))
def test_eval_agrees_with_naive(rng):
    universe = sorted(V3)
    phi = random_formula(rng, 4, class_vars=("X", "Y"))
    val = {v: rng.choice(universe) for v in ("x", "y", "z")}
    classes = {c: frozenset(a for a in universe if rng.random() < 0.5) for c in ("X", "Y")}
    m = full_model(universe)
    assert evaluate(m, phi, {**val, **classes}) == naive(universe, phi, {**val, **{k: set(v) for k, v in classes.items()}})


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_eval_prenex_and_nnf(rng):
    universe = sorted(V3)
    phi = random_formula(rng, 4, class_vars=("X",), bounded=False)
    val = {v: rng.choice(universe) for v in ("x", "y", "z")}
    val["X"] = frozenset(a for a in universe if rng.random() < 0.5)
    m = full_model(universe)
    truth = evaluate(m, phi, val)
    assert evaluate(m, nnf(phi), val) == truth
    assert evaluate(m, prenex(phi), val) == truth
    assert free_set_vars(prenex(phi)) == free_set_vars(phi)
