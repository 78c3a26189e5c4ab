"""Hereditarily finite sets with canonical (interned) representation.

Every :class:`HFSet` is unique up to extensionality, so ``x == y`` is an
identity check.  Ackermann indices are computed lazily because the index of
a rank-6 set no longer fits in memory; ordering uses a structural key that
agrees with the Ackermann order without materializing the integer.
"""
from __future__ import annotations

import re
import threading
from functools import cached_property
from typing import Iterable, Iterator

from .config import caps

__all__ = [
    "HFSet",
    "EMPTY",
    "hf_make",
    "hf_ack",
    "hf_unack",
    "hf_measures",
    "hf_v_stage",
    "hf_enumerate_tc_bounded",
    "h_bounded",
    "hf_ordinal",
    "hf_pair",
    "hf_kpair",
    "hf_union",
    "hf_powerset",
    "hf_transitive_closure",
    "parse_hf",
    "format_hf",
    "CapExceeded",
    "IndexTooLarge",
]

# beyond this many bits an Ackermann index is refused rather than built
_MAX_ACK_BITS = 1 << 20


class CapExceeded(ValueError):
    """A configured enumeration cap would be exceeded."""


class IndexTooLarge(OverflowError):
    """The Ackermann index of a set is too large to materialize."""


_store: dict[frozenset, "HFSet"] = {}
_lock = threading.Lock()


class HFSet:
    __slots__ = ("elements", "rank", "__dict__", "__weakref__")

    elements: frozenset["HFSet"]
    rank: int

    def __new__(cls, children: Iterable["HFSet"] = ()):
        key = frozenset(children)
        found = _store.get(key)
        if found is not None:
            return found
        for c in key:
            if not isinstance(c, HFSet):
                raise TypeError(f"HFSet children must be HFSet, got {type(c).__name__}")
        obj = super().__new__(cls)
        obj.elements = key
        obj.rank = max((c.rank + 1 for c in key), default=0)
        with _lock:
            # insert-if-absent keeps the store canonical under races
            return _store.setdefault(key, obj)

    def __reduce__(self):
        return (HFSet, (tuple(self.elements),))

    # identity is equality for interned values
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __iter__(self) -> Iterator["HFSet"]:
        return iter(self.sorted_elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, item) -> bool:
        return item in self.elements

    def __bool__(self) -> bool:
        return bool(self.elements)

    @cached_property
    def key(self) -> tuple:
        """Structural sort key; tuple order coincides with Ackermann order."""
        return tuple(sorted((c.key for c in self.elements), reverse=True))

    def __lt__(self, other: "HFSet") -> bool:
        return self.key < other.key

    def __le__(self, other: "HFSet") -> bool:
        return self is other or self.key < other.key

    def __gt__(self, other: "HFSet") -> bool:
        return other.key < self.key

    def __ge__(self, other: "HFSet") -> bool:
        return self is other or other.key < self.key

    @cached_property
    def sorted_elements(self) -> tuple["HFSet", ...]:
        return tuple(sorted(self.elements, key=lambda c: c.key))

    @cached_property
    def tc(self) -> frozenset["HFSet"]:
        """Transitive closure of ``{self}``, i.e. ``self`` and everything below it."""
        out = {self}
        for c in self.elements:
            out |= c.tc
        return frozenset(out)

    @property
    def tc_size(self) -> int:
        return len(self.tc)

    @cached_property
    def ack(self) -> int:
        bits = 0
        for c in self.elements:
            k = c.ack
            if k > _MAX_ACK_BITS:
                raise IndexTooLarge(f"Ackermann index of a rank-{self.rank} set exceeds 2^{_MAX_ACK_BITS}")
            bits |= 1 << k
        return bits

    def issubset(self, other: "HFSet") -> bool:
        return self.elements <= other.elements

    def __repr__(self) -> str:
        return f"HFSet({format_hf(self)})"

    def __str__(self) -> str:
        return format_hf(self)


EMPTY = HFSet()


def hf_make(children: Iterable[HFSet] = ()) -> HFSet:
    return HFSet(children)


def hf_ack(x: HFSet) -> int:
    return x.ack


def hf_unack(n: int) -> HFSet:
    if n < 0:
        raise ValueError("Ackermann indices are natural numbers")
    out = []
    i = 0
    while n:
        if n & 1:
            out.append(hf_unack(i))
        n >>= 1
        i += 1
    return HFSet(out)


def hf_measures(x: HFSet) -> tuple[int, int]:
    """Return ``(rank, tcSize)``."""
    return x.rank, x.tc_size


def hf_ordinal(n: int) -> HFSet:
    x = EMPTY
    for _ in range(n):
        x = HFSet(x.elements | {x})
    return x


def hf_pair(a: HFSet, b: HFSet) -> HFSet:
    return HFSet((a, b))


def hf_kpair(a: HFSet, b: HFSet) -> HFSet:
    """Kuratowski ordered pair ``{{a}, {a, b}}``."""
    return HFSet((HFSet((a,)), HFSet((a, b))))


def hf_union(x: HFSet) -> HFSet:
    out: set[HFSet] = set()
    for y in x.elements:
        out |= y.elements
    return HFSet(out)


def hf_powerset(x: HFSet) -> HFSet:
    elems = x.sorted_elements
    subsets = []
    for mask in range(1 << len(elems)):
        subsets.append(HFSet(e for i, e in enumerate(elems) if mask >> i & 1))
    return HFSet(subsets)


def hf_transitive_closure(xs: Iterable[HFSet]) -> list[HFSet]:
    """Sorted transitive closure of a collection (each element included)."""
    out: set[HFSet] = set()
    for x in xs:
        out |= x.tc
    return sorted(out)


def hf_v_stage(n: int) -> HFSet:
    cap = caps()["vstage"]
    if n > cap:
        raise CapExceeded(f"v-stage {n} exceeds cap {cap}")
    x = EMPTY
    for _ in range(n):
        x = hf_powerset(x)
    return x


_enum_cache: dict[int, list[HFSet]] = {}


def hf_enumerate_tc_bounded(k: int) -> list[HFSet]:
    """All sets ``x`` with ``tcSize(x) <= k``, sorted by Ackermann order."""
    cap = caps()["tc"]
    if k > cap:
        raise CapExceeded(f"tcSize bound {k} exceeds cap {cap}")
    if k <= 0:
        return []
    if k in _enum_cache:
        return list(_enum_cache[k])
    pool = hf_enumerate_tc_bounded(k - 1)
    found: set[HFSet] = {EMPTY}
    limit = k - 1

    # choose children in pool order; the union of their closures must stay within k-1
    def grow(start: int, chosen: list[HFSet], closure: frozenset[HFSet]) -> None:
        for i in range(start, len(pool)):
            c = pool[i]
            merged = closure | c.tc
            if len(merged) > limit:
                continue
            chosen.append(c)
            found.add(HFSet(chosen))
            grow(i + 1, chosen, merged)
            chosen.pop()

    grow(0, [], frozenset())
    result = sorted(x for x in found if x.tc_size <= k)
    _enum_cache[k] = result
    return list(result)


def h_bounded(k: int) -> list[HFSet]:
    """The finite stand-in for ``H_k``: sets whose transitive closure of the singleton has size <= k."""
    return hf_enumerate_tc_bounded(k)


# --- literal syntax -------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\{)|(\})|(,)|#(\d+))")


def parse_hf(text: str) -> HFSet:
    """Parse ``{{},{{}}}`` brace syntax or ``#N`` Ackermann literals (mixable)."""
    pos = 0
    text = text.strip()

    def fail(msg: str):
        raise ValueError(f"HF literal: {msg} at position {pos}")

    def item() -> HFSet:
        nonlocal pos
        m = _TOKEN.match(text, pos)
        if not m:
            fail("expected '{' or '#N'")
        pos = m.end()
        if m.group(4) is not None:
            return hf_unack(int(m.group(4)))
        if not m.group(1):
            fail("expected '{' or '#N'")
        children = []
        m = _TOKEN.match(text, pos)
        if m and m.group(2):
            pos = m.end()
            return EMPTY
        while True:
            children.append(item())
            m = _TOKEN.match(text, pos)
            if not m or not (m.group(2) or m.group(3)):
                fail("expected ',' or '}'")
            pos = m.end()
            if m.group(2):
                return HFSet(children)

    out = item()
    if text[pos:].strip():
        fail("trailing input")
    return out


def format_hf(x: HFSet) -> str:
    return "{" + ",".join(format_hf(c) for c in x.sorted_elements) + "}"
