"""Distributional symmetry checks for truncated joint moment tables.

The finite groups (permutations, signed permutations) are enumerated and
checked exactly over the rationals.  The continuous groups (orthogonal,
bistochastic orthogonal) are handled by seeded Monte Carlo Haar sampling
with a mean / standard-error pass rule.  Genuinely quantum symmetries are
delegated to bounded ideal-membership certificates, with concrete matrix
representations available to refute invariance soundly.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import algebra
from .algebra import FormalSum, MembershipCertificate, RelationSchema
from .cumulants import MomentFunctional
from .partitions import IndexWord, all_words_up_to, words


class GroupFamily(enum.Enum):
    SYM = "sym"
    HYPEROCT = "hyperoct"
    BISTOCH = "bistoch"
    ORTH = "orth"


_ENUM_CAPS = {GroupFamily.SYM: 6, GroupFamily.HYPEROCT: 4}


@dataclass(frozen=True)
class GroupTag:
    family: GroupFamily
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group size must be positive")


class Mode(enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class InvarianceReport:
    group: GroupTag
    max_order: int
    mode: Mode
    passed: bool
    residuals: Mapping[IndexWord, object]
    seed: int | None = None
    samples: int | None = None
    extension: int | None = None

    def to_json(self) -> dict:
        def fmt(v):
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            if isinstance(v, tuple):
                return {"mean": v[0], "stderr": v[1]}
            return v

        out = {
            "group": self.group.family.value,
            "n": self.group.n,
            "K": self.max_order,
            "mode": self.mode.value,
            "passed": self.passed,
            "residuals": {" ".join(map(str, w)): fmt(v) for w, v in self.residuals.items()},
        }
        if self.mode is Mode.MONTE_CARLO:
            out["seed"] = self.seed
            out["samples"] = self.samples
        if self.extension is not None:
            out["extension"] = self.extension
        return out


def coaction_expand(word: Sequence[int], n: int) -> list[tuple[IndexWord, tuple[tuple[int, int], ...]]]:
    """Expand a monomial under X_i -> sum_k X_k (x) u(k, i).

    Returns the n^len(word) summands in lexicographic order of the new
    word, each with its coordinate monomial as an (row, col) index list.
    """
    w = tuple(word)
    if any(not (1 <= x <= n) for x in w):
        raise ValueError("letters must lie in 1..n")
    out = []
    for jw in itertools.product(range(1, n + 1), repeat=len(w)):
        out.append((jw, tuple(zip(jw, w))))
    return out


# ---------------------------------------------------------------------------
# exact checks over finite signed-permutation groups
# ---------------------------------------------------------------------------


def group_elements(tag: GroupTag) -> Iterator[tuple[tuple[Fraction, ...], ...]]:
    """Exact matrices of the finite groups; entry [i][j] is row i, column j."""
    cap = _ENUM_CAPS.get(tag.family)
    if cap is None:
        raise ValueError(f"{tag.family.value} is not enumerable; use the Monte Carlo check")
    if tag.n > cap:
        raise ValueError(f"{tag.family.value} enumeration is capped at n <= {cap}")
    n = tag.n
    sign_sets: Iterator[tuple[int, ...]]
    if tag.family is GroupFamily.SYM:
        sign_sets = iter([(1,) * n])
    else:
        sign_sets = itertools.product((1, -1), repeat=n)
    for signs in sign_sets:
        for perm in itertools.permutations(range(n)):
            yield tuple(
                tuple(Fraction(signs[j]) if perm[j] == i else Fraction(0) for j in range(n))
                for i in range(n)
            )


def _transformed_moment(mom: MomentFunctional, g: Sequence[Sequence], word: IndexWord):
    """sum over j-words of mu(j) * prod_t g[j_t - 1][i_t - 1], sparse in g."""
    column_support = []
    for letter in word:
        col = [(row + 1, g[row][letter - 1]) for row in range(len(g)) if g[row][letter - 1] != 0]
        if not col:
            return Fraction(0)
        column_support.append(col)
    total = Fraction(0)
    for picks in itertools.product(*column_support):
        jword = tuple(p[0] for p in picks)
        value = mom.value(jword)
        if value == 0:
            continue
        coef = Fraction(1)
        for p in picks:
            coef *= p[1]
        total += coef * value
    return total


def check_invariance_exact(mom: MomentFunctional, group: GroupTag,
                           max_order: int | None = None,
                           extension: int = 0) -> InvarianceReport:
    """Exact residuals over every group element, words up to max_order.

    With a nonzero extension the group matrix is padded by an identity
    block: the first group.n letters transform, the rest stay fixed, and
    words range over the full extended alphabet.
    """
    if group.family not in (GroupFamily.SYM, GroupFamily.HYPEROCT):
        raise ValueError("exact checks cover the enumerable groups only")
    total_letters = group.n + extension
    if mom.alphabet_size < total_letters:
        raise ValueError("moment table does not cover the group's alphabet")
    K = mom.max_order if max_order is None else max_order
    residuals: dict[IndexWord, Fraction] = {}
    elements = [_extend(g, extension) for g in group_elements(group)]
    for word in all_words_up_to(total_letters, K):
        worst = Fraction(0)
        base = mom.value(word)
        for g in elements:
            r = _transformed_moment(mom, g, word) - base
            if abs(r) > worst:
                worst = abs(r)
        residuals[word] = worst
    passed = all(v == 0 for v in residuals.values())
    return InvarianceReport(group, K, Mode.EXACT, passed, residuals,
                            extension=extension or None)


def _extend(g, extension: int):
    if not extension:
        return g
    n = len(g)
    total = n + extension
    return tuple(
        tuple((g[i][j] if i < n and j < n else Fraction(1 if i == j else 0)) for j in range(total))
        for i in range(total)
    )


# ---------------------------------------------------------------------------
# Monte Carlo checks for the continuous groups
# ---------------------------------------------------------------------------


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar sample from O(n): QR of a Gaussian matrix, sign-fixed diagonal."""
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


_BISTOCH_BASIS: dict[int, np.ndarray] = {}


def _ones_stabilizer_basis(n: int) -> np.ndarray:
    """Orthogonal matrix whose first column is the normalized all-ones vector."""
    h = _BISTOCH_BASIS.get(n)
    if h is None:
        u = np.ones(n) / np.sqrt(n)
        v = u - np.eye(n)[0]
        norm2 = v @ v
        h = np.eye(n) if norm2 == 0 else np.eye(n) - 2.0 * np.outer(v, v) / norm2
        _BISTOCH_BASIS[n] = h
    return h


def haar_bistochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar sample from the orthogonal stabilizer of the all-ones vector."""
    if n == 1:
        return np.ones((1, 1))
    h = _ones_stabilizer_basis(n)
    block = np.eye(n)
    block[1:, 1:] = haar_orthogonal(n - 1, rng)
    return h @ block @ h.T


def _moment_tensors(mom: MomentFunctional, n: int, K: int) -> list[np.ndarray]:
    tensors = []
    for k in range(1, K + 1):
        t = np.zeros((n,) * k)
        for w in words(n, k):
            t[tuple(x - 1 for x in w)] = float(mom.value(w))
        tensors.append(t)
    return tensors


def _transform_tensor(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    # contract every mode with g: out[i..] = sum_j t[j..] prod g[j_t, i_t]
    out = t
    for _ in range(t.ndim):
        out = np.tensordot(out, g, axes=([0], [0]))
    return out


def check_invariance_mc(mom: MomentFunctional, group: GroupTag,
                        max_order: int | None = None, samples: int = 10_000,
                        seed: int | None = None, tol: Fraction = Fraction(0),
                        extension: int = 0) -> InvarianceReport:
    """Seeded Monte Carlo invariance: per-word residual mean and stderr.

    A word passes when |mean| <= max(tol, 3 stderr, eps guard); the guard
    is a few thousand ulps at the scale of the moment table, needed because
    an exactly invariant table leaves only rounding noise in both the mean
    and the stderr.  Per-sample generators are derived from (seed, sample
    index), so the outcome is independent of any chunking of the loop.
    """
    if group.family not in (GroupFamily.BISTOCH, GroupFamily.ORTH):
        raise ValueError("Monte Carlo checks cover the continuous groups only")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if seed is None:
        raise ValueError("a seed is required for reproducible sampling")
    total_letters = group.n + extension
    if mom.alphabet_size < total_letters:
        raise ValueError("moment table does not cover the group's alphabet")
    K = mom.max_order if max_order is None else max_order
    n = group.n
    tensors = _moment_tensors(mom, total_letters, K)
    draw = haar_orthogonal if group.family is GroupFamily.ORTH else haar_bistochastic

    # lexicographic word order coincides with the row-major tensor layout
    word_list = list(all_words_up_to(total_letters, K))
    index_of = {w: i for i, w in enumerate(word_list)}
    per_sample = np.empty((samples, len(word_list)))
    for s in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(s,)))
        g = draw(n, rng)
        if extension:
            ge = np.eye(total_letters)
            ge[:n, :n] = g
            g = ge
        per_sample[s] = np.concatenate(
            [(_transform_tensor(t, g) - t).ravel() for t in tensors])
    mean = per_sample.mean(axis=0)
    if samples > 1:
        stderr = per_sample.std(axis=0, ddof=1) / np.sqrt(samples)
    else:
        stderr = np.full(len(word_list), np.inf)
    tol_f = float(tol)
    scale = max(1.0, max((float(abs(t).max()) for t in tensors if t.size), default=1.0))
    guard = 4096.0 * np.finfo(float).eps * scale
    residuals = {w: (float(mean[i]), float(stderr[i])) for w, i in index_of.items()}
    passed = all(
        abs(mean[i]) <= max(tol_f, 3.0 * stderr[i], guard) for i in range(len(word_list))
    )
    return InvarianceReport(group, K, Mode.MONTE_CARLO, passed, residuals,
                            seed=seed, samples=samples, extension=extension or None)


def extend_and_check(mom: MomentFunctional, base_n: int, k: int,
                     group_or_schema: "GroupFamily | RelationSchema", **kwargs):
    """Invariance under the extension that fixes the last k letters.

    Accepts a classical group family (exact or Monte Carlo check) or a
    relation schema (certificate check).
    """
    if isinstance(group_or_schema, RelationSchema):
        return quantum_invariance_certificate(
            mom, group_or_schema, base_n,
            kwargs.get("max_order", mom.max_order),
            kwargs.get("degree_bound", 4), extension=k)
    tag = GroupTag(group_or_schema, base_n)
    if group_or_schema in (GroupFamily.SYM, GroupFamily.HYPEROCT):
        return check_invariance_exact(mom, tag, kwargs.get("max_order"), extension=k)
    return check_invariance_mc(mom, tag,
                               max_order=kwargs.get("max_order"),
                               samples=kwargs.get("samples", 10_000),
                               seed=kwargs.get("seed"),
                               tol=kwargs.get("tol", Fraction(0)),
                               extension=k)


# ---------------------------------------------------------------------------
# quantum invariance by algebraic certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordCertificate:
    word: IndexWord
    status: str  # "certified" | "refuted" | "inconclusive"
    certificate: MembershipCertificate | None


@dataclass(frozen=True)
class QuantumInvarianceReport:
    schema: RelationSchema
    n: int
    max_order: int
    degree_bound: int
    items: tuple[WordCertificate, ...]

    @property
    def all_certified(self) -> bool:
        return all(i.status == "certified" for i in self.items)

    @property
    def refuted(self) -> bool:
        return any(i.status == "refuted" for i in self.items)

    def to_json(self) -> dict:
        return {
            "schema": self.schema.value,
            "n": self.n,
            "K": self.max_order,
            "degree_bound": self.degree_bound,
            "all_certified": self.all_certified,
            "refuted": self.refuted,
            "items": [
                {
                    "word": list(i.word),
                    "status": i.status,
                    "certificate": i.certificate.to_json() if i.certificate else None,
                }
                for i in self.items
            ],
        }


def invariance_target(mom: MomentFunctional, schema: RelationSchema, n: int,
                      word: IndexWord, extension: int = 0) -> FormalSum:
    """sum_j mu(j) u(j1,i1)...u(jk,ik) X - mu(i) X with X = P or 1.

    With an extension, letters above n are fixed by the coaction: those
    positions contribute a unit factor and keep their letter in the
    transformed word.
    """
    gens = schema.generator_set(n)
    suffix = (gens.p,) if schema.has_projection else ()
    total = n + extension
    if any(not (1 <= x <= total) for x in word):
        raise ValueError("letters must lie in the extended alphabet")
    free = [t for t, x in enumerate(word) if x <= n]
    terms: dict[tuple, Fraction] = {}
    for choice in itertools.product(range(1, n + 1), repeat=len(free)):
        jw = list(word)
        for t, j in zip(free, choice):
            jw[t] = j
        value = mom.value(tuple(jw))
        if value == 0:
            continue
        mono = (tuple(gens.u(j, word[t]) for t, j in zip(free, choice)) + suffix,)
        terms[mono] = terms.get(mono, Fraction(0)) + value
    base = mom.value(word)
    if base != 0:
        mono = (suffix,)
        terms[mono] = terms.get(mono, Fraction(0)) - base
    return FormalSum(gens, 1, terms)


def quantum_invariance_certificate(mom: MomentFunctional, schema: RelationSchema,
                                   n: int, max_order: int, degree_bound: int,
                                   extension: int = 0) -> QuantumInvarianceReport:
    """Certify the invariance identity word by word, refuting via the
    schema's scalar representations when the bounded search fails."""
    total = n + extension
    if mom.alphabet_size < total:
        raise ValueError("moment table does not cover the coaction alphabet")
    relations = algebra.instantiate_relations(schema, n)
    refuters = algebra.schema_sample_assignments(schema, n)
    items = []
    for word in all_words_up_to(total, max_order):
        target = invariance_target(mom, schema, n, word, extension)
        cert = algebra.ideal_membership(target, relations, degree_bound)
        if cert is not None:
            items.append(WordCertificate(word, "certified", cert))
            continue
        hit = algebra.refute_membership(target, relations, refuters)
        items.append(WordCertificate(word, "refuted" if hit is not None else "inconclusive", None))
    return QuantumInvarianceReport(schema, n, max_order, degree_bound, tuple(items))
