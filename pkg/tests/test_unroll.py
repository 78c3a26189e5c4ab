import random

import pytest
from hypothesis import given, settings, strategies as st

from classcode.etr import RecursionInstance, WellOrder
from classcode.hfset import EMPTY, CapExceeded, HFSet, h_bounded, hf_kpair, hf_ordinal, hf_transitive_closure, hf_v_stage
from classcode.logic import SOModel, free_class_vars, free_set_vars, full_model, is_sigma0, parse_formula
from classcode.memcode import collapse, enumerate_codes
from classcode.unroll import (
    Axiom,
    Direction,
    UnrolledStructure,
    audit_axiom,
    audit_interpretation,
    audit_sep0_all,
    audit_translation,
    code_from_pairs,
    count_ordinals,
    cutoff,
    roundtrip_audit,
    unroll,
)
from strategies import random_formula

V2 = sorted(hf_v_stage(2).elements)
V3 = sorted(hf_v_stage(3).elements)
O = hf_ordinal


def test_full_unroll_is_hereditary_bound():
    m = full_model(V2)
    for b in range(1, 6):
        u = unroll(m, b)
        assert set(u.elements) == set(h_bounded(b))
        assert u.full and u.kappa == 2


def test_extent_law():
    u = unroll(full_model(V2), 4)
    codes = enumerate_codes(4)
    assert set(u.elements) == {collapse(c) for c in codes}
    for x, w in u.witnesses.items():
        assert collapse(w) == x and len(w.nodes) <= 4
    # transitive, and each element fits the budget
    assert all(y in u for x in u.elements for y in x.elements)
    assert all(x.tc_size <= 4 for x in u.elements)


def test_unroll_threads_agree():
    m = full_model(V3)
    assert unroll(m, 5).elements == unroll(m, 5, threads=4).elements


def test_budget_cap():
    with pytest.raises(CapExceeded):
        unroll(full_model(V2), 99)


def test_code_from_pairs():
    assert code_from_pairs([]) is None
    assert code_from_pairs([("a", "b"), ("b", "a")]) is None
    assert code_from_pairs([("a", "b"), ("a", "c")]) is None  # two tops
    c = code_from_pairs([("a", "b"), ("b", "c"), ("a", "c")])
    assert collapse(c) == O(2)


def test_restricted_admission():
    # universe elements stand in as node labels; the binary class is the edge set of an ordinal code
    uni = hf_transitive_closure([O(1), HFSet([O(1)]), HFSet([HFSet([O(1)])])])
    labels = sorted(uni)[:4]
    rel = frozenset((labels[i], labels[j]) for j in range(4) for i in range(j))
    m = SOModel(tuple(uni), (rel, frozenset([O(0), O(1)])))
    assert O(3) not in uni and O(2) not in uni
    u = unroll(m, 4)
    assert not u.full
    assert O(3) in u  # from the binary class
    assert O(2) in u  # E_Y of the unary class, and a cone of the ordinal code
    assert set(uni) <= set(u.elements)  # E_a for every element
    assert u.kappa == count_ordinals(uni) == 2
    # the budget limits which seeds are read
    assert O(3) not in unroll(m, 3)


def test_kpair_classes_are_read():
    a, b = O(0), O(1)
    uni = hf_transitive_closure([hf_kpair(a, b)])
    m = SOModel(tuple(uni), (frozenset([hf_kpair(a, b)]),))
    assert O(1) in unroll(m, 2)


def test_empty_relation_adds_nothing():
    m = SOModel(tuple(V2), (frozenset(),))
    assert set(unroll(m, 3).elements) == set(V2) | {EMPTY}


def test_cutoff_examples():
    m = cutoff(V3, 2)
    assert set(m.universe) == {O(0), O(1)}
    assert len(m.classes) == 4 and m.kappa == 2
    r = cutoff(V3, 2, reading="rank")
    assert set(r.universe) == {O(0), O(1)}
    with pytest.raises(ValueError):
        cutoff([O(2)], 1)
    with pytest.raises(ValueError):
        cutoff(V3, 2, reading="size")


def test_cut_unroll_roundtrips():
    for k in (1, 2, 3):
        rt = roundtrip_audit(Direction.CUT_UNROLL, full_model(sorted(hf_v_stage(k).elements)))
        assert rt.ok, rt
    # too small a budget loses the classes that need more nodes
    assert not roundtrip_audit(Direction.CUT_UNROLL, full_model(V3), budget=4).ok
    rt = roundtrip_audit(Direction.CUT_UNROLL, full_model(V3))
    assert rt.ok and len(rt.classes) == 16 and len(rt.elements) == 4


def test_cut_unroll_detects_missing_classes():
    m = SOModel(tuple(V2), ())
    rt = roundtrip_audit(Direction.CUT_UNROLL, m, budget=3)
    assert not rt.ok


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_unroll_cut_roundtrips(k):
    rt = roundtrip_audit(Direction.UNROLL_CUT, h_bounded(k), k=k - 1)
    assert rt.ok
    assert rt.unrolled_size == len(h_bounded(k))


def test_unroll_cut_needs_level():
    with pytest.raises(ValueError):
        roundtrip_audit(Direction.UNROLL_CUT, h_bounded(3))


# --- axioms -----------------------------------------------------------------------


@pytest.mark.parametrize("budget", [3, 4, 5])
def test_axioms_in_full_unrollings(budget):
    u = unroll(full_model(V2), budget)
    for ax in (Axiom.EXT, Axiom.FOUND, Axiom.UNION):
        assert audit_axiom(u, ax).status == "pass"
    pair = audit_axiom(u, Axiom.PAIR)
    assert pair.ok and pair.outside_budget > 0
    assert pair.status == "pass within budget"
    assert audit_sep0_all(u, 3).ok


def test_axiom_audits_find_failures():
    holes = UnrolledStructure(3, (O(0), O(1), HFSet([O(1)])), 2)
    assert audit_axiom(holes, Axiom.PAIR).status == "fail"
    clash = UnrolledStructure(3, (O(0), HFSet([O(1)])), 1)
    assert audit_axiom(clash, Axiom.EXT).status == "fail"
    gappy = UnrolledStructure(4, (O(0), O(1), O(2)), 3)
    sep = audit_axiom(gappy, Axiom.SEP0, parse_formula("(= z p)"))
    assert (O(2), (O(1),), HFSet([O(1)])) in sep.failures


def test_sep0_all_finds_gaps():
    u = UnrolledStructure(4, (O(0), O(1), O(2)), 3)
    rep = audit_sep0_all(u, 2)
    assert not rep.ok
    assert (O(2), HFSet([O(1)])) in rep.failures


def test_sep0_exhaustive_route():
    u = unroll(full_model(V2), 3)
    rep = audit_sep0_all(u, 3, exhaustive=True)
    assert rep.ok and rep.checked > 100


def test_sep0_random_formulas():
    rng = random.Random(11)
    u = unroll(full_model(V2), 4)
    done = 0
    while done < 60:
        phi = random_formula(rng, 5, set_vars=("z", "x", "p"), unbounded=False)
        if not is_sigma0(phi):
            continue
        assert audit_axiom(u, Axiom.SEP0, phi).ok, phi
        done += 1


def test_sep0_rejects_unbounded():
    u = unroll(full_model(V2), 3)
    with pytest.raises(ValueError):
        audit_axiom(u, Axiom.SEP0, parse_formula("(ex y (in y z))"))


def test_s0tr_ordinals():
    u = unroll(full_model(V2), 5)
    ords = [O(i) for i in range(3)]
    rel = WellOrder(ords).relation()
    inst = RecursionInstance(parse_formula("(exin r i (allin z x (rel r z Y)))"), u.model(), "x", "i", "Y")
    rep = audit_axiom(u, Axiom.S0TR, instance=(inst, rel))
    assert rep.ok
    with pytest.raises(ValueError):
        audit_axiom(u, Axiom.S0TR)


# --- translations -----------------------------------------------------------------


SENTENCES = [
    "(ex x (= x x))",
    "(all x (ex y (in x y)))",
    "(ex x (all y (not (in y x))))",
    "(all x (all y (or (not (in x y)) (not (in y x)))))",
    "(ex x (ex y (and (in x y) (not (= x y)))))",
    "(all x (exin y x (= y y)))",
]


@pytest.mark.parametrize("text", SENTENCES)
def test_translation_sentences(text):
    rep = audit_translation(full_model(V2), 3, parse_formula(text))
    assert rep.ok, rep


def test_translation_with_parameters():
    phi = parse_formula("(exin y a (in y b))")
    c = {"a": enumerate_codes(3)[-1], "b": enumerate_codes(3)[-1]}
    rep = audit_translation(full_model(V2), 3, phi, c)
    assert rep.ok and "ETR_STAR" in rep.translated


def test_translation_depth_guard():
    with pytest.raises(ValueError):
        audit_translation(full_model(V2), 3, parse_formula("(ex x (ex y (ex z (= x z))))"))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_interpretation_agrees(seed):
    rng = random.Random(seed)
    phi = random_formula(rng, 4, set_vars=("x", "y"), class_vars=("X",))
    for v in sorted(free_set_vars(phi)):
        phi = parse_formula(f"(all {v} {phi})")
    for v in sorted(free_class_vars(phi)):
        phi = parse_formula(f"(allC {v} {phi})")
    inner, outer = audit_interpretation(V3, 2, phi)
    assert inner == outer
