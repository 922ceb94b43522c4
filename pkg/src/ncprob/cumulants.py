"""Moment and cumulant tables and the transforms between them.

Three cumulant families are supported, each tied to one partition lattice:
classical to all partitions, free to noncrossing partitions, boolean to
interval partitions.  The moment of a word is the sum over the lattice of
the partition-indexed products of cumulants; the inverse transform peels
off the block containing the first position and is resolved in increasing
word length.  All core arithmetic is exact over the rationals.

The operator-valued layer realizes the coefficient algebra as concrete
d x d rational matrices and evaluates partition-indexed functionals either
blockwise (commutative base) or by the interval-block recursion
(noncrossing partitions, any base).
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import ratmat
from .partitions import (
    FamilyTag,
    IndexWord,
    Lattice,
    SetPartition,
    all_words_up_to,
    enumerate_partitions,
    is_interval,
    is_noncrossing,
    words,
)
from .ratmat import Matrix


class Kind(enum.Enum):
    CLASSICAL = "classical"
    FREE = "free"
    BOOLEAN = "boolean"

    @property
    def lattice(self) -> Lattice:
        return _KIND_LATTICE[self]

    @property
    def family(self) -> FamilyTag:
        return FamilyTag(self.lattice)


_KIND_LATTICE = {
    Kind.CLASSICAL: Lattice.ALL,
    Kind.FREE: Lattice.NONCROSSING,
    Kind.BOOLEAN: Lattice.INTERVAL,
}


def _check_word(word: Sequence[int], n: int, max_order: int) -> IndexWord:
    w = tuple(int(x) for x in word)
    if len(w) > max_order:
        raise ValueError(f"word {w} longer than max order {max_order}")
    if any(not (1 <= x <= n) for x in w):
        raise ValueError(f"word {w} has letters outside 1..{n}")
    return w


class _WordTable:
    """Shared behavior of moment and cumulant tables.

    Entries absent from the table are zero; the empty word is never stored.
    """

    __slots__ = ("alphabet_size", "max_order", "table")

    def __init__(self, alphabet_size: int, max_order: int, table: Mapping[IndexWord, Fraction] | None = None):
        if alphabet_size < 1:
            raise ValueError("alphabet_size must be positive")
        if max_order < 1:
            raise ValueError("max_order must be positive")
        self.alphabet_size = alphabet_size
        self.max_order = max_order
        self.table: dict[IndexWord, Fraction] = {}
        if table:
            for word, value in table.items():
                w = _check_word(word, alphabet_size, max_order)
                if not w:
                    raise ValueError("the empty word must not appear in a table")
                value = value if isinstance(value, float) else Fraction(value)
                if value != 0:
                    self.table[w] = value

    def value(self, word: Sequence[int]):
        w = tuple(word)
        if not w:
            return Fraction(1)
        return self.table.get(w, Fraction(0))

    def words(self, max_len: int | None = None) -> Iterator[IndexWord]:
        yield from all_words_up_to(self.alphabet_size, self.max_order if max_len is None else max_len)

    def _entries_json(self) -> list[dict]:
        entries = []
        for word in sorted(self.table, key=lambda w: (len(w), w)):
            v = self.table[word]
            if isinstance(v, float):
                raise ValueError("float-mode tables have no exact JSON form; quantize first")
            entries.append({"word": list(word), "num": v.numerator, "den": v.denominator})
        return entries

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.alphabet_size == other.alphabet_size
            and self.max_order == other.max_order
            and self.table == other.table
            and getattr(self, "kind", None) == getattr(other, "kind", None)
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.alphabet_size}, K={self.max_order}, {len(self.table)} entries)"


class MomentFunctional(_WordTable):
    """Truncated joint-moment table; the empty word is fixed to 1."""

    def to_json(self) -> dict:
        return {
            "kind": "moment",
            "n": self.alphabet_size,
            "K": self.max_order,
            "entries": self._entries_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MomentFunctional":
        if data.get("kind") != "moment":
            raise ValueError(f"expected kind 'moment', got {data.get('kind')!r}")
        return cls(data["n"], data["K"], _entries_from_json(data["entries"]))


class CumulantTable(_WordTable):
    """Cumulant values on index words for one of the three kinds."""

    __slots__ = ("kind",)

    def __init__(self, kind: Kind, alphabet_size: int, max_order: int, table=None):
        super().__init__(alphabet_size, max_order, table)
        self.kind = kind

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.alphabet_size,
            "K": self.max_order,
            "entries": self._entries_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CumulantTable":
        kind = Kind(data["kind"])
        return cls(kind, data["n"], data["K"], _entries_from_json(data["entries"]))


def _entries_from_json(entries: Iterable[dict]) -> dict[IndexWord, Fraction]:
    table: dict[IndexWord, Fraction] = {}
    for e in entries:
        word = tuple(int(x) for x in e["word"])
        if not word:
            raise ValueError("the empty word must not appear in a table")
        table[word] = Fraction(int(e["num"]), int(e["den"]))
    return table


def load_table(path_or_data) -> MomentFunctional | CumulantTable:
    """Load either table flavor from a JSON file path or parsed dict."""
    data = path_or_data
    if isinstance(path_or_data, (str, bytes)):
        with open(path_or_data) as fh:
            data = json.load(fh)
    if data.get("kind") == "moment":
        return MomentFunctional.from_json(data)
    return CumulantTable.from_json(data)


# ---------------------------------------------------------------------------
# scalar partition-indexed evaluation and the two transforms
# ---------------------------------------------------------------------------


def eval_pi_scalar(table: CumulantTable, pi: SetPartition, word: Sequence[int]):
    """Product over the blocks of pi of the table value on the sub-word.

    pi must lie in the lattice attached to the table's kind.
    """
    w = tuple(word)
    if len(w) != pi.ground_size:
        raise ValueError("word length must equal the partition's ground size")
    lattice = table.kind.lattice
    if lattice is Lattice.NONCROSSING and not is_noncrossing(pi):
        raise ValueError("free cumulants accept noncrossing partitions only")
    if lattice is Lattice.INTERVAL and not is_interval(pi):
        raise ValueError("boolean cumulants accept interval partitions only")
    out = Fraction(1)
    for block in pi.blocks:
        out *= table.value(tuple(w[i - 1] for i in block))
        if out == 0:
            return out
    return out


def moment_by_partition_sum(cum: CumulantTable, word: Sequence[int]):
    """Reference evaluation: literal sum over the whole lattice.

    Exponential in the word length; kept as the transparent cross-check
    for the recursive transform.
    """
    w = tuple(word)
    if not w:
        return Fraction(1)
    total = Fraction(0)
    for pi in enumerate_partitions(len(w), cum.kind.family):
        total += eval_pi_scalar(cum, pi, w)
    return total


@lru_cache(maxsize=None)
def _first_block_splits(kind: Kind, k: int) -> tuple:
    """Decompositions of {1..k} by the block containing position 1.

    Returns tuples (block_positions, remainder_groups); the groups list the
    positions whose moments multiply the block's cumulant:
    one group (the complement) classically, the gaps between consecutive
    block elements for the free kind, the suffix for the boolean kind.
    """
    out = []
    positions = tuple(range(1, k + 1))
    if kind is Kind.BOOLEAN:
        for j in range(1, k + 1):
            out.append((positions[:j], (positions[j:],) if j < k else ()))
        return tuple(out)

    rest = positions[1:]
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            block = (1,) + extra
            if kind is Kind.CLASSICAL:
                comp = tuple(p for p in positions if p not in block)
                out.append((block, (comp,) if comp else ()))
            else:  # FREE: the rest splits into gaps between block elements
                gaps = []
                for a, b in zip(block, block[1:] + (k + 1,)):
                    gap = tuple(range(a + 1, b))
                    if gap:
                        gaps.append(gap)
                out.append((block, tuple(gaps)))
    return tuple(out)


def moments_from_cumulants(cum: CumulantTable) -> MomentFunctional:
    """Sum the cumulant table over its lattice, up to the table's order.

    Computed by peeling the block containing the first position, which
    enumerates every lattice partition exactly once.
    """
    n, K = cum.alphabet_size, cum.max_order
    moments: dict[IndexWord, Fraction] = {}

    def mom(w: IndexWord):
        if not w:
            return Fraction(1)
        return moments.get(w, Fraction(0))

    for k in range(1, K + 1):
        splits = _first_block_splits(cum.kind, k)
        for w in words(n, k):
            total = Fraction(0)
            for block, groups in splits:
                c = cum.value(tuple(w[i - 1] for i in block))
                if c == 0:
                    continue
                for g in groups:
                    c *= mom(tuple(w[i - 1] for i in g))
                    if c == 0:
                        break
                total += c
            if total != 0:
                moments[w] = total
    return MomentFunctional(n, K, moments)


def cumulants_from_moments(mom: MomentFunctional, kind: Kind) -> CumulantTable:
    """Invert the lattice sum recursively, in increasing word length."""
    n, K = mom.alphabet_size, mom.max_order
    cums: dict[IndexWord, Fraction] = {}

    for k in range(1, K + 1):
        splits = _first_block_splits(kind, k)
        for w in words(n, k):
            total = Fraction(0)
            for block, groups in splits:
                if len(block) == k:
                    continue  # the full block is the unknown being solved for
                c = cums.get(tuple(w[i - 1] for i in block), Fraction(0))
                if c == 0:
                    continue
                for g in groups:
                    c *= mom.value(tuple(w[i - 1] for i in g))
                    if c == 0:
                        break
                total += c
            value = mom.value(w) - total
            if value != 0:
                cums[w] = value
    return CumulantTable(kind, n, K, cums)


# ---------------------------------------------------------------------------
# operator-valued layer: B realized as d x d rational matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BArg:
    """One argument b_left . x_letter . b_right with matrix coefficients."""

    letter: int
    left: Matrix | None = None
    right: Matrix | None = None

    def coeffs(self, d: int) -> tuple[Matrix, Matrix]:
        ident = ratmat.identity(d)
        return (self.left or ident, self.right or ident)


def _absorb_right(args: Sequence[BArg], d: int) -> tuple[Matrix, tuple[int, ...], tuple[Matrix, ...], Matrix]:
    """Normalize to right-absorbed form.

    Returns (b0, letters, interior coefficients, bn): interior[t] sits
    between argument t and argument t+1 and equals right_t . left_{t+1}.
    """
    lefts, rights = zip(*(a.coeffs(d) for a in args))
    letters = tuple(a.letter for a in args)
    interior = tuple(ratmat.mul(rights[t], lefts[t + 1]) for t in range(len(args) - 1))
    return lefts[0], letters, interior, rights[-1]


class BFunctionalSeq:
    """A sequence of multilinear functionals into d x d rational matrices.

    Two concrete models are provided.  ``from_word_tables`` assigns every
    letter word a diagonal matrix (a commutative base); interior
    coefficients multiply the core value.  ``from_letter_matrices`` maps
    each letter to a fixed matrix and evaluates the interleaved product
    b0 M c1 M ... M bn, which is a genuine bimodule map over a
    noncommutative base.
    """

    def __init__(self, d: int, commutative_base: bool,
                 core: Callable[[tuple[int, ...]], Matrix] | None,
                 letter_matrices: Mapping[int, Matrix] | None = None,
                 alphabet_size: int = 2):
        self.d = d
        self.commutative_base = commutative_base
        self.alphabet_size = alphabet_size
        self._core = core
        self._letter_matrices = dict(letter_matrices) if letter_matrices else None
        self._comm_checked = False

    @classmethod
    def from_word_tables(cls, d: int, tables: Mapping[tuple[int, ...], Sequence]) -> "BFunctionalSeq":
        """Diagonal model: tables maps letter words to length-d value rows."""
        store = {tuple(w): tuple(Fraction(v) for v in vals) for w, vals in tables.items()}
        alphabet = max((max(w) for w in store if w), default=1)

        def core(letters: tuple[int, ...]) -> Matrix:
            vals = store.get(letters, (Fraction(0),) * d)
            return tuple(tuple(vals[i] if i == j else Fraction(0) for j in range(d)) for i in range(d))

        return cls(d, commutative_base=True, core=core, alphabet_size=alphabet)

    @classmethod
    def from_letter_matrices(cls, mats: Mapping[int, Matrix]) -> "BFunctionalSeq":
        d = len(next(iter(mats.values())))
        return cls(d, commutative_base=False, core=None, letter_matrices=mats,
                   alphabet_size=max(mats))

    def _check_commutative(self) -> None:
        """Sampled commutator check backing the commutative_base claim."""
        if self._comm_checked or self._core is None:
            return
        letters = range(1, self.alphabet_size + 1)
        samples = [self._core((ell,)) for ell in letters]
        samples += [self._core((a, b)) for a in letters for b in letters]
        for i, a in enumerate(samples):
            for b in samples[i + 1:]:
                if not ratmat.is_zero(ratmat.commutator(a, b)):
                    raise ValueError("base declared commutative but sampled commutators are nonzero")
        self._comm_checked = True

    def eval_order(self, args: Sequence[BArg]) -> Matrix:
        """Evaluate the functional of order len(args) on interleaved args."""
        if not args:
            raise ValueError("eval_order requires at least one argument")
        b0, letters, interior, bn = _absorb_right(args, self.d)
        if self._letter_matrices is not None:
            out = b0
            for t, letter in enumerate(letters):
                out = ratmat.mul(out, self._letter_matrices[letter])
                if t < len(interior):
                    out = ratmat.mul(out, interior[t])
            return ratmat.mul(out, bn)
        if not self.commutative_base and any(not _is_identity(c) for c in interior):
            raise ValueError("interior coefficients need a commutative base in the table model")
        self._check_commutative()
        out = ratmat.mul(b0, self._core(letters))
        for c in interior:
            out = ratmat.mul(out, c)
        return ratmat.mul(out, bn)

    def check_bimodule_sample(self, args: Sequence[BArg], b0: Matrix, bn: Matrix) -> bool:
        """The displayed bimodule identity on one sample."""
        wrapped = list(args)
        first = wrapped[0]
        last = wrapped[-1]
        lhs_args = (
            [BArg(first.letter, ratmat.mul(b0, first.coeffs(self.d)[0]), first.right)]
            + wrapped[1:-1]
            + [BArg(last.letter, last.left, ratmat.mul(last.coeffs(self.d)[1], bn))]
        )
        if len(wrapped) == 1:
            only = wrapped[0]
            lhs_args = [BArg(only.letter, ratmat.mul(b0, only.coeffs(self.d)[0]),
                             ratmat.mul(only.coeffs(self.d)[1], bn))]
        lhs = self.eval_order(lhs_args)
        rhs = ratmat.mul(ratmat.mul(b0, self.eval_order(list(args))), bn)
        return lhs == rhs


def _is_identity(m: Matrix) -> bool:
    d = len(m)
    return all(m[i][j] == (1 if i == j else 0) for i in range(d) for j in range(d))


def eval_pi_blocks(rho: BFunctionalSeq, pi: SetPartition, args: Sequence[BArg]) -> Matrix:
    """Blockwise product evaluation; requires a commutative base."""
    if not rho.commutative_base:
        raise ValueError("blockwise evaluation over the full lattice needs a commutative base")
    rho._check_commutative()
    if len(args) != pi.ground_size:
        raise ValueError("argument count must match the partition's ground size")
    out = ratmat.identity(rho.d)
    for block in pi.blocks:
        out = ratmat.mul(out, rho.eval_order([args[i - 1] for i in block]))
    return out


def eval_pi_nested(rho: BFunctionalSeq, pi: SetPartition, args: Sequence[BArg],
                   extraction: str = "leftmost") -> Matrix:
    """Recursive evaluation by removing one interval block at a time.

    Only noncrossing partitions are accepted; those always contain an
    interval block, and the result does not depend on which one is removed.
    """
    if len(args) != pi.ground_size:
        raise ValueError("argument count must match the partition's ground size")
    if not is_noncrossing(pi):
        raise ValueError("nested evaluation is defined for noncrossing partitions only")
    work = list(args)
    blocks = [list(b) for b in pi.blocks]
    while True:
        if len(blocks) == 1:
            return rho.eval_order(work)
        candidates = [b for b in blocks if b[-1] - b[0] + 1 == len(b)]
        block = candidates[0] if extraction == "leftmost" else candidates[-1]
        lo, hi = block[0] - 1, block[-1] - 1  # 0-based span of the interval block
        value = rho.eval_order(work[lo:hi + 1])
        if lo > 0:
            prev = work[lo - 1]
            pl, pr = prev.coeffs(rho.d)
            work[lo - 1] = BArg(prev.letter, pl, ratmat.mul(pr, value))
        else:
            nxt = work[hi + 1]
            nl, nr = nxt.coeffs(rho.d)
            work[hi + 1] = BArg(nxt.letter, ratmat.mul(value, nl), nr)
        del work[lo:hi + 1]
        blocks.remove(block)
        removed = len(block)
        blocks = [[x - removed if x > block[-1] else x for x in b] for b in blocks]


def lattice_moment(rho: BFunctionalSeq, kind: Kind, args: Sequence[BArg]) -> Matrix:
    """Sum of partition evaluations over the lattice attached to the kind."""
    k = len(args)
    total = ratmat.zeros(rho.d)
    for pi in enumerate_partitions(k, kind.family):
        if kind is Kind.CLASSICAL:
            total = ratmat.add(total, eval_pi_blocks(rho, pi, args))
        else:
            total = ratmat.add(total, eval_pi_nested(rho, pi, args))
    return total
