"""Joint moments of independent families and cumulant-based diagnostics.

Independence (of each kind) is equivalent to the vanishing of every mixed
cumulant, so the constructive direction plants marginal cumulants on
constant words and zero elsewhere, while the diagnostic direction converts
moments back to cumulants and flags the mixed words that survive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cumulants import CumulantTable, Kind, MomentFunctional, cumulants_from_moments, moments_from_cumulants
from .partitions import BlockConstraint, FamilyTag


class LawClass(enum.Enum):
    IID_GENERAL = "iid_general"
    SYMMETRIC = "symmetric"
    SHIFTED_CENTRAL = "shifted_central"
    CENTERED_CENTRAL = "centered_central"


@dataclass(frozen=True)
class DistributionClass:
    """A single-variable law class together with its independence kind."""

    kind: Kind
    law: LawClass

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "class": self.law.value}


_LAW_CONSTRAINT = {
    LawClass.IID_GENERAL: BlockConstraint.ANY,
    LawClass.SYMMETRIC: BlockConstraint.EVEN,
    LawClass.SHIFTED_CENTRAL: BlockConstraint.AT_MOST_TWO,
    LawClass.CENTERED_CENTRAL: BlockConstraint.EXACTLY_TWO,
}


def law_family(classified: DistributionClass) -> FamilyTag:
    """The partition family carrying the cumulants of the classified law.

    Joint cumulants of an iid family with this law vanish on every
    partition outside the family, and on every partition not refining the
    word's kernel.
    """
    return FamilyTag(classified.kind.lattice, _LAW_CONSTRAINT[classified.law])


@dataclass(frozen=True)
class IndependenceReport:
    kind: Kind
    max_order: int
    offenders: tuple[tuple[tuple[int, ...], Fraction], ...]

    @property
    def passed(self) -> bool:
        return not self.offenders

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "kind": self.kind.value,
            "max_order": self.max_order,
            "offenders": [
                {"word": list(w), "value": f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else v}
                for w, v in self.offenders
            ],
        }


def build_independent_moments(marginals: Sequence[CumulantTable], kind: Kind | None = None) -> MomentFunctional:
    """Joint moments of one variable per marginal, independent of the kind.

    Marginal tables must be single-variable and share kind and max order.
    The joint cumulant table carries marginal values on constant words and
    zero on every mixed word.
    """
    if not marginals:
        raise ValueError("at least one marginal is required")
    kind = kind or marginals[0].kind
    K = marginals[0].max_order
    for m in marginals:
        if m.kind is not kind:
            raise ValueError("marginals must all share the same kind")
        if m.max_order != K:
            raise ValueError("marginals must all share the same max order")
        if m.alphabet_size != 1:
            raise ValueError("marginals must be single-variable tables")
    joint: dict[tuple[int, ...], Fraction] = {}
    for letter, marg in enumerate(marginals, start=1):
        for k in range(1, K + 1):
            v = marg.value((1,) * k)
            if v != 0:
                joint[(letter,) * k] = v
    table = CumulantTable(kind, len(marginals), K, joint)
    return moments_from_cumulants(table)


def test_mixed_vanishing(mom: MomentFunctional, kind: Kind, tol: Fraction = Fraction(0)) -> IndependenceReport:
    """Flag every word with two distinct letters whose cumulant exceeds tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    cums = cumulants_from_moments(mom, kind)
    offenders = []
    for word in sorted(cums.table, key=lambda w: (len(w), w)):
        if len(set(word)) < 2:
            continue
        value = cums.table[word]
        if abs(value) > tol:
            offenders.append((word, value))
    return IndependenceReport(kind, mom.max_order, tuple(offenders))


def classify_distribution(cum: CumulantTable, tol: Fraction = Fraction(0)) -> DistributionClass:
    """Most specific single-variable class by which cumulant orders survive.

    Centered central law: only order 2; shifted central law: orders 1 and 2;
    symmetric: even orders only; otherwise general.
    """
    if cum.alphabet_size != 1:
        raise ValueError("classification expects a single-variable table")
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    def vanishes(order: int) -> bool:
        return abs(cum.value((1,) * order)) <= tol

    orders = range(1, cum.max_order + 1)
    if all(vanishes(k) for k in orders if k != 2):
        law = LawClass.CENTERED_CENTRAL
    elif all(vanishes(k) for k in orders if k >= 3):
        law = LawClass.SHIFTED_CENTRAL
    elif all(vanishes(k) for k in orders if k % 2 == 1):
        law = LawClass.SYMMETRIC
    else:
        law = LawClass.IID_GENERAL
    return DistributionClass(cum.kind, law)
