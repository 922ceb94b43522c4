"""Set partitions of {1..k}, the three lattices, and block-size families.

Partitions are kept in a canonical block form (blocks ordered by their
minimum element, elements ascending inside each block), which is the sole
equality notion used everywhere else: canonical tuples are hashable and
diff-friendly.  Enumeration follows restricted-growth strings in
lexicographic order, with the lattice / block-size predicates applied as
filters, so the output order for a sub-family is always a subsequence of
the order for the full lattice.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

IndexWord = tuple[int, ...]


class Lattice(enum.Enum):
    ALL = "all"
    NONCROSSING = "nc"
    INTERVAL = "int"


class BlockConstraint(enum.Enum):
    ANY = "any"
    EVEN = "even"
    AT_MOST_TWO = "le2"
    EXACTLY_TWO = "eq2"


@dataclass(frozen=True)
class FamilyTag:
    """One of the twelve partition families (lattice x block constraint)."""

    lattice: Lattice
    blocks: BlockConstraint = BlockConstraint.ANY

    def short_name(self) -> str:
        base = {Lattice.ALL: "p", Lattice.NONCROSSING: "nc", Lattice.INTERVAL: "i"}[self.lattice]
        suffix = {
            BlockConstraint.ANY: "",
            BlockConstraint.EVEN: "h",
            BlockConstraint.AT_MOST_TWO: "b",
            BlockConstraint.EXACTLY_TWO: "2",
        }[self.blocks]
        return base + suffix


P = FamilyTag(Lattice.ALL)
P_H = FamilyTag(Lattice.ALL, BlockConstraint.EVEN)
P_B = FamilyTag(Lattice.ALL, BlockConstraint.AT_MOST_TWO)
P_2 = FamilyTag(Lattice.ALL, BlockConstraint.EXACTLY_TWO)
NC = FamilyTag(Lattice.NONCROSSING)
NC_H = FamilyTag(Lattice.NONCROSSING, BlockConstraint.EVEN)
NC_B = FamilyTag(Lattice.NONCROSSING, BlockConstraint.AT_MOST_TWO)
NC_2 = FamilyTag(Lattice.NONCROSSING, BlockConstraint.EXACTLY_TWO)
I = FamilyTag(Lattice.INTERVAL)
I_H = FamilyTag(Lattice.INTERVAL, BlockConstraint.EVEN)
I_B = FamilyTag(Lattice.INTERVAL, BlockConstraint.AT_MOST_TWO)
I_2 = FamilyTag(Lattice.INTERVAL, BlockConstraint.EXACTLY_TWO)

_FAMILY_NAMES = {f.short_name(): f for f in (P, P_H, P_B, P_2, NC, NC_H, NC_B, NC_2, I, I_H, I_B, I_2)}


def parse_family(name: str) -> FamilyTag:
    """Parse a short family name such as ``"nc"``, ``"p_h"`` or ``"i2"``."""
    key = name.strip().lower().replace("_", "").replace("-", "")
    if key == "all":
        key = "p"
    if key == "int":
        key = "i"
    if key not in _FAMILY_NAMES:
        raise ValueError(f"unknown partition family {name!r}; expected one of {sorted(_FAMILY_NAMES)}")
    return _FAMILY_NAMES[key]


class SetPartition:
    """A partition of {1..k} in canonical block form.

    Blocks may be passed in any order; the constructor validates that they
    are disjoint, nonempty and cover {1..k}, then canonicalizes.
    """

    __slots__ = ("ground_size", "blocks", "_hash")

    def __init__(self, ground_size: int, blocks: Iterable[Iterable[int]]):
        if ground_size < 0:
            raise ValueError("ground_size must be nonnegative")
        canon = tuple(sorted((tuple(sorted(set(b))) for b in blocks), key=lambda b: b[0] if b else 0))
        seen: set[int] = set()
        for block in canon:
            if not block:
                raise ValueError("blocks must be nonempty")
            for x in block:
                if not (1 <= x <= ground_size):
                    raise ValueError(f"element {x} outside ground set 1..{ground_size}")
                if x in seen:
                    raise ValueError(f"element {x} appears in two blocks")
                seen.add(x)
        if len(seen) != ground_size:
            raise ValueError("blocks do not cover the ground set")
        object.__setattr__(self, "ground_size", ground_size)
        object.__setattr__(self, "blocks", canon)
        object.__setattr__(self, "_hash", hash((ground_size, canon)))

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("SetPartition is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SetPartition)
            and self.ground_size == other.ground_size
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"SetPartition({self.ground_size}, {format_partition(self)!r})"

    def block_of(self, x: int) -> tuple[int, ...]:
        for block in self.blocks:
            if x in block:
                return block
        raise KeyError(x)

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def as_labels(self) -> tuple[int, ...]:
        """Block index (0-based, by first appearance) of each point 1..k."""
        labels = [0] * self.ground_size
        for idx, block in enumerate(self.blocks):
            for x in block:
                labels[x - 1] = idx
        return tuple(labels)


EMPTY_PARTITION = SetPartition(0, ())


def format_partition(pi: SetPartition) -> str:
    """Render in the text format ``"1 3|2"``; the empty partition is ``""``."""
    return "|".join(" ".join(str(x) for x in block) for block in pi.blocks)


def parse_partition(text: str, ground_size: int | None = None) -> SetPartition:
    """Inverse of :func:`format_partition`.

    When ``ground_size`` is omitted it is taken to be the largest element.
    """
    text = text.strip()
    if not text:
        return SetPartition(ground_size or 0, ())
    blocks = [[int(t) for t in part.split()] for part in text.split("|")]
    k = max(max(b) for b in blocks)
    if ground_size is not None:
        k = ground_size
    return SetPartition(k, blocks)


def single_block(k: int) -> SetPartition:
    return SetPartition(k, (range(1, k + 1),)) if k else EMPTY_PARTITION


def discrete_partition(k: int) -> SetPartition:
    return SetPartition(k, tuple((i,) for i in range(1, k + 1)))


def has_crossing(pi: SetPartition) -> bool:
    """Direct definition: a quadruple s1 < r1 < s2 < r2 across two blocks."""
    for v, w in itertools.combinations(pi.blocks, 2):
        for s1, s2 in itertools.combinations(v, 2):
            if any(s1 < r1 < s2 < r2 for r1, r2 in itertools.combinations(w, 2)):
                return True
        for s1, s2 in itertools.combinations(w, 2):
            if any(s1 < r1 < s2 < r2 for r1, r2 in itertools.combinations(v, 2)):
                return True
    return False


def is_noncrossing(pi: SetPartition) -> bool:
    return not has_crossing(pi)


def is_interval(pi: SetPartition) -> bool:
    """Every block is a contiguous run (no triple s1 < r < s2 across blocks)."""
    return all(block[-1] - block[0] + 1 == len(block) for block in pi.blocks)


def _blocks_ok(pi: SetPartition, constraint: BlockConstraint) -> bool:
    if constraint is BlockConstraint.ANY:
        return True
    if constraint is BlockConstraint.EVEN:
        return all(len(b) % 2 == 0 for b in pi.blocks)
    if constraint is BlockConstraint.AT_MOST_TWO:
        return all(len(b) <= 2 for b in pi.blocks)
    return all(len(b) == 2 for b in pi.blocks)


def in_family(pi: SetPartition, family: FamilyTag) -> bool:
    """Membership test for any of the twelve families."""
    if family.lattice is Lattice.NONCROSSING and has_crossing(pi):
        return False
    if family.lattice is Lattice.INTERVAL and not is_interval(pi):
        return False
    return _blocks_ok(pi, family.blocks)


def _rgs_iter(k: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length k, lexicographically."""
    if k == 0:
        yield ()
        return
    a = [0] * k
    while True:
        yield tuple(a)
        # advance to the next restricted growth string
        i = k - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, k):
                    a[j] = 0
                break
            a[i] = 0
            i -= 1
        else:
            return


def _partition_from_labels(labels: Sequence[int], k: int) -> SetPartition:
    blocks: dict[int, list[int]] = {}
    for pos, lab in enumerate(labels, start=1):
        blocks.setdefault(lab, []).append(pos)
    return SetPartition(k, blocks.values())


@lru_cache(maxsize=None)
def _all_partitions(k: int) -> tuple[SetPartition, ...]:
    return tuple(_partition_from_labels(a, k) for a in _rgs_iter(k))


@lru_cache(maxsize=None)
def _family_partitions(k: int, family: FamilyTag) -> tuple[SetPartition, ...]:
    return tuple(pi for pi in _all_partitions(k) if in_family(pi, family))


def enumerate_partitions(k: int, family: FamilyTag = P) -> tuple[SetPartition, ...]:
    """All members of the family over {1..k}, in restricted-growth order.

    k = 0 yields the single empty partition for every family.  Practical
    cap for the full lattice is about k <= 14 (Bell numbers).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if family == P:
        return _all_partitions(k)
    return _family_partitions(k, family)


def kernel(word: Sequence[int]) -> SetPartition:
    """Partition of positions induced by equality of letters."""
    blocks: dict[int, list[int]] = {}
    for pos, letter in enumerate(word, start=1):
        blocks.setdefault(letter, []).append(pos)
    return SetPartition(len(word), blocks.values())


def refines(pi: SetPartition, sigma: SetPartition) -> bool:
    """True iff every block of pi is contained in a block of sigma."""
    if pi.ground_size != sigma.ground_size:
        raise ValueError("refines() requires equal ground sizes")
    lab = sigma.as_labels()
    for block in pi.blocks:
        first = lab[block[0] - 1]
        if any(lab[x - 1] != first for x in block):
            return False
    return True


def concatenate(pi1: SetPartition, pi2: SetPartition) -> SetPartition:
    """pi1 on the first k1 points followed by pi2 shifted by k1."""
    k1 = pi1.ground_size
    blocks = list(pi1.blocks) + [tuple(x + k1 for x in b) for b in pi2.blocks]
    return SetPartition(k1 + pi2.ground_size, blocks)


def interval_blocks(pi: SetPartition) -> list[tuple[int, ...]]:
    """Blocks of pi that are contiguous runs of integers."""
    return [b for b in pi.blocks if b[-1] - b[0] + 1 == len(b)]


def words(alphabet_size: int, length: int) -> Iterator[IndexWord]:
    """All index words of the given length over {1..alphabet_size}."""
    return itertools.product(range(1, alphabet_size + 1), repeat=length)


def all_words_up_to(alphabet_size: int, max_len: int, include_empty: bool = False) -> Iterator[IndexWord]:
    if include_empty:
        yield ()
    for k in range(1, max_len + 1):
        yield from words(alphabet_size, k)
