import random

import pytest
from hypothesis import given, settings

from classcode.hfset import (
    EMPTY,
    CapExceeded,
    HFSet,
    IndexTooLarge,
    format_hf,
    hf_ack,
    hf_enumerate_tc_bounded,
    hf_kpair,
    hf_make,
    hf_measures,
    hf_ordinal,
    hf_union,
    hf_unack,
    hf_v_stage,
    parse_hf,
)
from strategies import hf_sets, random_hf

ONE = hf_make([EMPTY])
TWO = hf_make([EMPTY, ONE])


def tc_size_slow(x):
    seen = set()
    stack = [x]
    while stack:
        y = stack.pop()
        if y not in seen:
            seen.add(y)
            stack.extend(y.elements)
    return len(seen)


def test_make_examples():
    assert hf_make([]) is EMPTY and hf_ack(EMPTY) == 0
    assert hf_ack(ONE) == 1
    assert hf_ack(TWO) == 3
    assert hf_make([EMPTY, EMPTY, ONE]) is TWO


def test_ack_examples():
    assert hf_ack(hf_make([ONE])) == 2
    assert hf_unack(3) is TWO
    with pytest.raises(ValueError):
        hf_unack(-1)


def test_measures_examples():
    assert hf_measures(EMPTY) == (0, 1)
    assert hf_measures(TWO) == (2, 3)
    assert hf_measures(hf_make([ONE])) == (2, 3)


def test_v_stage():
    assert hf_v_stage(0) is EMPTY
    assert hf_v_stage(1) is ONE
    assert hf_v_stage(2) is TWO
    assert len(hf_v_stage(4)) == 16
    with pytest.raises(CapExceeded):
        hf_v_stage(6)


def test_enumerate_small():
    assert hf_enumerate_tc_bounded(1) == [EMPTY]
    assert hf_enumerate_tc_bounded(2) == [EMPTY, ONE]
    assert hf_enumerate_tc_bounded(3) == [EMPTY, ONE, hf_make([ONE]), TWO]


def test_enumerate_against_index_scan():
    # every set with tcSize <= 4 has Ackermann index below 2^16: scan them all
    expected = [x for x in map(hf_unack, range(1 << 16)) if tc_size_slow(x) <= 4]
    assert hf_enumerate_tc_bounded(4) == expected
    assert len(hf_enumerate_tc_bounded(5)) == 80


def test_enumerate_monotone_and_exact():
    for k in range(1, 6):
        small, big = hf_enumerate_tc_bounded(k), hf_enumerate_tc_bounded(k + 1)
        assert set(small) <= set(big)
        assert all(tc_size_slow(x) <= k for x in small)
        assert all(tc_size_slow(x) == k + 1 for x in set(big) - set(small))
        assert [hf_ack(x) for x in big] == sorted(hf_ack(x) for x in big)


def test_enumerate_cap(monkeypatch):
    monkeypatch.setenv("CLASSCODE_CAPS", "tc=3")
    with pytest.raises(CapExceeded):
        hf_enumerate_tc_bounded(4)


def test_caps_rejects_unknown(monkeypatch):
    monkeypatch.setenv("CLASSCODE_CAPS", '{"nope": 1}')
    with pytest.raises(ValueError):
        hf_v_stage(1)


@settings(max_examples=1000)
@given(hf_sets(max_rank=5))
def test_ack_roundtrip(x):
    assert hf_unack(hf_ack(x)) is x


@settings(max_examples=300)
@given(hf_sets(max_rank=5))
def test_measures_invariants(x):
    rank, size = hf_measures(x)
    assert size == tc_size_slow(x)
    assert size >= rank + 1
    assert rank == max((y.rank + 1 for y in x.elements), default=0)


def test_ack_injective_on_sample():
    rng = random.Random(7)
    xs = [random_hf(rng, 4) for _ in range(200)]
    for x in xs:
        for y in xs[:60]:
            assert (hf_ack(x) == hf_ack(y)) == (x is y)


def test_ordering_matches_ack():
    rng = random.Random(3)
    xs = [random_hf(rng, 4) for _ in range(300)]
    assert sorted(xs) == sorted(xs, key=hf_ack)


def test_literals():
    assert parse_hf("{}") is EMPTY
    assert parse_hf("{{},{{}}}") is TWO
    assert parse_hf("#3") is TWO
    assert parse_hf("{#1, {}}") is TWO
    assert format_hf(TWO) == "{{},{{}}}"
    for bad in ["", "{", "{}}", "{,}", "#", "{} {}"]:
        with pytest.raises(ValueError):
            parse_hf(bad)


def test_huge_index_refused():
    x = hf_v_stage(5)
    with pytest.raises(IndexTooLarge):
        HFSet([x]).ack


def test_helpers():
    assert hf_ordinal(3) is HFSet([EMPTY, ONE, TWO])
    assert hf_kpair(EMPTY, EMPTY) is HFSet([ONE])
    assert hf_union(HFSet([ONE, TWO])) is TWO
