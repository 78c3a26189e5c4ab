"""Goedel coding of formulas and valuations as hereditarily finite sets.

A formula is coded as the Kuratowski pair ``(tag, body)`` where ``tag`` is a
small von Neumann ordinal and ``body`` packs the fields: a single field as
itself, several fields as a right-nested chain of pairs, and argument lists of
``and``/``or`` (other than the binary case) as an empty-terminated chain.

Variable names follow ``letter[digits]``.  The letter's position in
``xyzwuvabcdefghijklmnopqrst`` (upper case adds 26) plus 52*(k+1) for a
numeric suffix ``k`` gives an index ``n``; the variable's code is the set with
Ackermann index ``n``.  So ``x`` is coded by 0 and ``y`` by 1.

A valuation is coded as the set of pairs ``(variable code, value)``.
"""
from __future__ import annotations

import re
from typing import Mapping

from ..hfset import EMPTY, HFSet, hf_kpair, hf_ordinal, hf_unack
from .syntax import (
    And,
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
    Tr,
)

__all__ = [
    "godel_encode",
    "godel_decode",
    "encode_var",
    "decode_var",
    "encode_valuation",
    "decode_valuation",
    "DecodeError",
    "LETTERS",
]

LETTERS = "xyzwuvabcdefghijklmnopqrst"
_VAR = re.compile(r"([A-Za-z])([1-9][0-9]*|0)?\Z")

# field layout per node type: s = set variable, c = class term, f = formula
_LAYOUT = [
    (Eq, "ss"),
    (In, "ss"),
    (Tr, "sss"),
    (Or, "ff"),
    (Not, "f"),
    (Exists, "sf"),
    (InClass, "sc"),
    (And, "ff"),
    (Forall, "sf"),
    (ExistsIn, "ssf"),
    (ForallIn, "ssf"),
    (ExistsClass, "cf"),
    (ForallClass, "cf"),
    (Rel, "ssc"),
    (ExistsNode, "scf"),
    (ForallNode, "scf"),
    (ExistsPen, "scf"),
    (ForallPen, "scf"),
    (IsCode, "c"),
    (Ipi, "ccc"),
    (Hk, "s"),
    (Down, "cs"),
    (Or, "*"),
    (And, "*"),
]
_TAGS = [hf_ordinal(i) for i in range(len(_LAYOUT))]
_TAG_INDEX = {t: i for i, t in enumerate(_TAGS)}


class DecodeError(ValueError):
    """The set is not the code of a formula (or valuation)."""


def encode_var(name: str) -> HFSet:
    m = _VAR.match(name)
    if not m or m.group(1).lower() not in LETTERS:
        raise ValueError(f"variable {name!r} is outside the coding scheme letter[digits]")
    letter, digits = m.groups()
    pos = LETTERS.index(letter.lower()) + (26 if letter.isupper() else 0)
    if digits is None:
        return hf_unack(pos)
    return hf_unack(pos + 52 * (int(digits) + 1))


def decode_var(x: HFSet) -> str:
    try:
        n = x.ack
    except OverflowError:
        raise DecodeError("not a variable code") from None
    pos, k = n % 52, n // 52
    letter = LETTERS[pos % 26]
    if pos >= 26:
        letter = letter.upper()
    return letter if k == 0 else f"{letter}{k - 1}"


def _unpair(x: HFSet) -> tuple[HFSet, HFSet]:
    """Inverse of Kuratowski pairing; raises :class:`DecodeError`."""
    els = x.elements
    if len(els) == 1:
        (s,) = els
        if len(s) == 1:
            (a,) = s.elements
            return a, a
    elif len(els) == 2:
        s, d = sorted(els, key=len)
        if len(s) == 1 and len(d) == 2 and s.elements <= d.elements:
            (a,) = s.elements
            (b,) = d.elements - s.elements
            return a, b
    raise DecodeError("not an ordered pair")


def _chain(items: list[HFSet]) -> HFSet:
    out = items[-1]
    for x in reversed(items[:-1]):
        out = hf_kpair(x, out)
    return out


def _unchain(x: HFSet, n: int) -> list[HFSet]:
    out = []
    for _ in range(n - 1):
        a, x = _unpair(x)
        out.append(a)
    out.append(x)
    return out


def _list(items: list[HFSet]) -> HFSet:
    out = EMPTY
    for x in reversed(items):
        out = hf_kpair(x, out)
    return out


def _unlist(x: HFSet) -> list[HFSet]:
    out = []
    while x is not EMPTY:
        a, x = _unpair(x)
        out.append(a)
    return out


def _enc(obj) -> HFSet:
    if isinstance(obj, str):
        return encode_var(obj)
    t = type(obj)
    if t in (And, Or) and len(obj.args) != 2:
        tag = [i for i, (c, lay) in enumerate(_LAYOUT) if c is t and lay == "*"][0]
        return hf_kpair(_TAGS[tag], _list([_enc(a) for a in obj.args]))
    tag = [i for i, (c, lay) in enumerate(_LAYOUT) if c is t and lay != "*"][0]
    if t in (And, Or):
        fields = list(obj.args)
    else:
        fields = [getattr(obj, f) for f in obj.__dataclass_fields__]
    return hf_kpair(_TAGS[tag], _chain([_enc(f) for f in fields]))


def godel_encode(phi: Formula) -> HFSet:
    return _enc(phi)


def _dec(x: HFSet, kind: str):
    if kind == "s":
        return decode_var(x)
    if kind == "c":
        try:
            tag, _ = _unpair(x)
        except DecodeError:
            tag = None
        if tag is not None and _TAG_INDEX.get(tag) == 21:
            return _dec_node(x)
        return decode_var(x)
    return _dec_node(x)


def _dec_node(x: HFSet):
    tag, body = _unpair(x)
    i = _TAG_INDEX.get(tag)
    if i is None:
        raise DecodeError("unknown formula tag")
    cls, layout = _LAYOUT[i]
    if layout == "*":
        args = [_dec_node(a) for a in _unlist(body)]
        if len(args) == 2:
            raise DecodeError("binary connective stored in list form")
        return cls(tuple(args))
    parts = _unchain(body, len(layout))
    vals = [_dec(p, k) for p, k in zip(parts, layout)]
    if cls in (And, Or):
        return cls(tuple(vals))
    return cls(*vals)


def godel_decode(x: HFSet) -> Formula:
    """Inverse of :func:`godel_encode`; raises :class:`DecodeError` on non-codes."""
    out = _dec_node(x)
    if isinstance(out, Down):
        raise DecodeError("class term, not a formula")
    if godel_encode(out) is not x:
        # e.g. a variable slot holding a set that is not a canonical variable code
        raise DecodeError("not a canonical formula code")
    return out


def encode_valuation(v: Mapping[str, HFSet]) -> HFSet:
    return HFSet(hf_kpair(encode_var(k), val) for k, val in v.items())


def decode_valuation(x: HFSet) -> dict[str, HFSet]:
    out: dict[str, HFSet] = {}
    for p in x.elements:
        k, val = _unpair(p)
        name = decode_var(k)
        if name in out:
            raise DecodeError("valuation assigns a variable twice")
        out[name] = val
    return out
