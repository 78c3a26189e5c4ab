"""Quantifier-complexity classification.

Levels are computed bottom-up on the negation normal form as a pair
``(sigma, pi)``: the least ``k`` such that the formula is equivalent, by
prenex moves, to a Sigma_k (resp. Pi_k) form.  Level 0 means no counted
quantifiers.

Formulas containing class quantifiers are measured in the second-order
hierarchy, where set and node quantifiers are not counted.  First-order
formulas are measured in the Levy hierarchy, where bounded and node
quantifiers are not counted.
"""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    ATOMS,
    BOUNDED,
    CLASS_QUANTIFIERS,
    NODE_QUANTIFIERS,
    SET_QUANTIFIERS,
    And,
    ExistsClass,
    Exists,
    Formula,
    Not,
    Or,
    is_first_order,
    nnf,
)

__all__ = ["Complexity", "classify", "levels"]

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


@dataclass(frozen=True, order=True)
class Complexity:
    second_order: bool
    sigma: int
    pi: int

    @property
    def kind(self) -> str:
        if self.sigma == 0:
            return "Sigma"
        if self.sigma < self.pi:
            return "Sigma"
        if self.pi < self.sigma:
            return "Pi"
        return "Delta"

    @property
    def level(self) -> int:
        return min(self.sigma, self.pi)

    def dual(self) -> "Complexity":
        return Complexity(self.second_order, self.pi, self.sigma)

    def within_sigma(self, k: int) -> bool:
        return self.sigma <= k

    def within_pi(self, k: int) -> bool:
        return self.pi <= k

    @property
    def tag(self) -> str:
        """ASCII tag such as ``Sigma0``, ``Pi_2`` or ``Sigma1_1``."""
        if self.sigma == 0:
            return "Sigma1_0" if self.second_order else "Sigma0"
        sup = "1" if self.second_order else ""
        return f"{self.kind}{sup}_{self.level}"

    def __str__(self) -> str:
        if self.sigma == 0:
            return "Σ¹₀" if self.second_order else "Σ₀"
        sym = {"Sigma": "Σ", "Pi": "Π", "Delta": "Δ"}[self.kind]
        return sym + ("¹" if self.second_order else "") + str(self.level).translate(_SUB)


def levels(phi: Formula, second_order: bool) -> tuple[int, int]:
    return _levels(nnf(phi), second_order)


def _quant(exists: bool, sig: int, pi: int) -> tuple[int, int]:
    if exists:
        s = max(1, min(sig, pi + 1))
        return s, s + 1
    p = max(1, min(pi, sig + 1))
    return p + 1, p


def _levels(phi, so: bool) -> tuple[int, int]:
    t = type(phi)
    if t in ATOMS:
        return 0, 0
    if t is Not:
        # nnf: body is an atom
        return 0, 0
    if t in (And, Or):
        s = p = 0
        for a in phi.args:
            s2, p2 = _levels(a, so)
            s, p = max(s, s2), max(p, p2)
        return s, p
    s, p = _levels(phi.body, so)
    counted = CLASS_QUANTIFIERS if so else SET_QUANTIFIERS
    if t in counted:
        return _quant(t in (ExistsClass, Exists), s, p)
    if t in BOUNDED or t in NODE_QUANTIFIERS or t in SET_QUANTIFIERS or t in CLASS_QUANTIFIERS:
        return s, p
    raise TypeError(f"not a formula: {phi!r}")


def classify(phi: Formula) -> Complexity:
    so = not is_first_order(phi)
    s, p = levels(phi, so)
    return Complexity(so, s, p)
