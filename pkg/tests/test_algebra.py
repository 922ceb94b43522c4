import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncprob import ratmat
from ncprob.algebra import (
    FormalSum,
    GeneratorSet,
    RelationSchema,
    assignment_satisfies,
    cubic_projection_witness,
    delta_image,
    eval_representation,
    format_sum,
    ideal_membership,
    instantiate_relations,
    matrix_assignment,
    normalize,
    parse_schema,
    parse_sum,
    permutation_assignment,
    refute_membership,
    schema_sample_assignments,
    star,
    tensor_embed,
    vanishing_target,
    verify_coproduct,
    verify_schema_implication,
    verify_vanishing,
)
from ncprob.partitions import I, I_2, parse_partition, single_block


G1 = GeneratorSet(1)
G2 = GeneratorSet(2)
G2P = GeneratorSet(2, has_projection=True)


# ---------------------------------------------------------------------------
# formal sums
# ---------------------------------------------------------------------------


def test_normalize_examples():
    s = parse_sum(G2, "u(1,1)u(1,2) + 0*u(1,1)")
    assert format_sum(normalize(s)) == "1*u(1,1)u(1,2)"
    z = s - s
    assert z.is_zero() and format_sum(z) == "0"
    assert normalize(normalize(s)) == normalize(s)


def test_star_examples():
    s = parse_sum(G2, "u(1,1)u(1,2)")
    assert format_sum(star(s)) == "1*u(1,2)u(1,1)"
    p = parse_sum(G2P, "P")
    assert star(p) == p
    a = parse_sum(G2, "2*u(1,1)u(2,2) + -1/3*u(2,1)")
    assert star(star(a)) == a
    assert star(a) == Fraction(2) * star(parse_sum(G2, "u(1,1)u(2,2)")) + Fraction(-1, 3) * star(parse_sum(G2, "u(2,1)"))


def test_star_rejects_tensor_degree_two():
    s = parse_sum(G2P, "P (x) P")
    with pytest.raises(ValueError):
        star(s)


def test_grammar_round_trip():
    rng = random.Random(4)
    sums = [
        parse_sum(G2P, "1*u(1,1)u(1,2)P + -1*P"),
        parse_sum(G2P, "3/2*P (x) u(2,1) + -2*1 (x) 1"),
        parse_sum(G2, "u(1,1) + u(2,2) + -1*1"),
    ]
    for s in sums:
        assert parse_sum(s.gens, format_sum(s), s.tensor_degree) == s
    # unicode and hash marks parse to the same sum
    a = parse_sum(G2P, "P ⊗ u(1,1)")
    b = parse_sum(G2P, "P # u(1,1)")
    c = parse_sum(G2P, "P (x) u(1,1)")
    assert a == b == c


def test_tensor_embed_examples():
    psq = parse_sum(G2P, "P P + -1*P")
    left = tensor_embed([psq], "left")[0]
    assert left == parse_sum(G2P, "PP (x) 1 + -1*P (x) 1")
    right = tensor_embed([psq], "right")[0]
    assert right == parse_sum(G2P, "1 (x) PP + -1*1 (x) P")
    # embedding keeps a list linearly independent (disjoint supports)
    rels = instantiate_relations(RelationSchema.P_ORTHOGONAL, 2)
    embedded = tensor_embed(rels, "left")
    assert len({r.canonical_key() for r in embedded}) == len(rels)


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------


def test_magic_n1_instantiation():
    rels = instantiate_relations(RelationSchema.MAGIC, 1)
    expected = {
        parse_sum(G1, "u(1,1)u(1,1) + -1*1").canonical_key(),
        parse_sum(G1, "u(1,1)u(1,1) + -1*u(1,1)").canonical_key(),
    }
    assert {r.canonical_key() for r in rels} == expected


def test_orthogonal_n2_instantiation():
    rels = instantiate_relations(RelationSchema.ORTHOGONAL, 2)
    assert len(rels) == 8
    row12 = parse_sum(G2, "u(1,1)u(2,1) + u(1,2)u(2,2)")
    assert any(r == row12 for r in rels)


def test_p_orthogonal_n2_instantiation():
    rels = instantiate_relations(RelationSchema.P_ORTHOGONAL, 2)
    plain = parse_sum(G2P, "u(1,1)u(2,1)P + u(1,2)u(2,2)P")
    diag = parse_sum(G2P, "u(1,1)u(1,1)P + u(1,2)u(1,2)P + -1*P")
    psq = parse_sum(G2P, "PP + -1*P")
    keys = {r.canonical_key() for r in rels}
    assert plain.canonical_key() in keys
    assert diag.canonical_key() in keys
    assert psq.canonical_key() in keys


def test_relation_lists_star_closed():
    for schema in RelationSchema:
        rels = instantiate_relations(schema, 2)
        keys = {r.canonical_key() for r in rels}
        for r in rels:
            assert star(r).canonical_key() in keys, (schema, format_sum(r))


def test_parse_schema_names():
    assert parse_schema("p-magic") is RelationSchema.P_MAGIC
    assert parse_schema("P_MAGIC") is RelationSchema.P_MAGIC
    with pytest.raises(ValueError):
        parse_schema("weird")


# ---------------------------------------------------------------------------
# ideal membership
# ---------------------------------------------------------------------------


def test_membership_magic_n1():
    target = parse_sum(G1, "u(1,1) + -1*1")
    cert = ideal_membership(target, instantiate_relations(RelationSchema.MAGIC, 1), 2)
    assert cert is not None and cert.validate()
    assert cert.expand() == target


def test_membership_trivial_relation():
    rels = instantiate_relations(RelationSchema.ORTHOGONAL, 2)
    cert = ideal_membership(rels[0], rels, 0)
    assert cert is not None and cert.multiplier_degree == 0


def test_membership_not_found_and_refuted():
    target = parse_sum(G1, "u(1,1) + -1*1")
    only_idem = [parse_sum(G1, "u(1,1)u(1,1) + -1*u(1,1)")]
    assert ideal_membership(target, only_idem, 6) is None
    zero_rep = {G1.u(1, 1): ratmat.mat([[0]])}
    assert refute_membership(target, only_idem, [zero_rep]) is not None


def test_membership_monotone_in_degree():
    gens = G2P
    target = vanishing_target(RelationSchema.P_MAGIC, 2, single_block(1), (1,))
    rels = instantiate_relations(RelationSchema.P_MAGIC, 2)
    found_at = None
    for d in range(6):
        cert = ideal_membership(target, rels, d)
        if cert is not None and found_at is None:
            found_at = d
        if found_at is not None:
            assert cert is not None
            assert cert.multiplier_degree <= d


def test_star_compatibility_of_certificates():
    rels = instantiate_relations(RelationSchema.P_MAGIC, 2)
    target = vanishing_target(RelationSchema.P_MAGIC, 2, single_block(2), (1, 2))
    cert = ideal_membership(target, rels, 4)
    assert cert is not None
    cert_star = ideal_membership(star(target), rels, cert.multiplier_degree)
    assert cert_star is not None
    assert cert_star.multiplier_degree <= cert.multiplier_degree


def test_certificates_sound_under_representations():
    rels = instantiate_relations(RelationSchema.MAGIC, 2)
    target = parse_sum(G2, "u(1,1) + u(1,2) + -1*1")  # row sum
    cert = ideal_membership(target, rels, 4)
    assert cert is not None
    for assign in schema_sample_assignments(RelationSchema.MAGIC, 2):
        assert assignment_satisfies(rels, assign)
        assert ratmat.is_zero(eval_representation(target, assign))


# ---------------------------------------------------------------------------
# representations
# ---------------------------------------------------------------------------


def test_permutation_matrices_satisfy_magic():
    rels = instantiate_relations(RelationSchema.MAGIC, 3)
    for perm in itertools.permutations((1, 2, 3)):
        assign = permutation_assignment(GeneratorSet(3), perm)
        assert assignment_satisfies(rels, assign)


def test_signed_permutations_satisfy_cubic():
    rels = instantiate_relations(RelationSchema.CUBIC, 2)
    for perm in itertools.permutations((1, 2)):
        for signs in itertools.product((1, -1), repeat=2):
            assign = permutation_assignment(G2, perm, signs)
            assert assignment_satisfies(rels, assign)


@pytest.mark.parametrize("schema", list(RelationSchema))
def test_sample_assignments_satisfy_their_schema(schema):
    for n in (1, 2):
        rels = instantiate_relations(schema, n)
        for assign in schema_sample_assignments(schema, n):
            assert assignment_satisfies(rels, assign)


def test_certificates_are_deterministic():
    rels = instantiate_relations(RelationSchema.P_MAGIC, 2)
    target = vanishing_target(RelationSchema.P_MAGIC, 2, single_block(3), (1, 2, 1))
    a = ideal_membership(target, rels, 5)
    b = ideal_membership(target, rels, 5)
    assert a is not None and a.to_json() == b.to_json()


def test_solver_finds_synthesized_memberships():
    # random combinations of relation multiples are recovered within the
    # multiplier budget they were built with
    rng = random.Random(41)
    gens = G2P
    rels = instantiate_relations(RelationSchema.P_MAGIC, 2)
    symbols = list(range(gens.symbol_count))
    for trial in range(12):
        total = FormalSum.zero(gens, 1)
        budget = 0
        for _ in range(rng.randint(1, 3)):
            ridx = rng.randrange(len(rels))
            wl = tuple(rng.choice(symbols) for _ in range(rng.randint(0, 1)))
            wr = tuple(rng.choice(symbols) for _ in range(rng.randint(0, 1)))
            coef = Fraction(rng.choice([1, -1, 2]), rng.choice([1, 2]))
            budget = max(budget, len(wl) + len(wr))
            lw = FormalSum(gens, 1, {(wl,): Fraction(1)})
            rw = FormalSum(gens, 1, {(wr,): Fraction(1)})
            total = total + coef * (lw * rels[ridx] * rw)
        cert = ideal_membership(total, rels, budget)
        assert cert is not None, (trial, format_sum(total))
        assert cert.expand() == total


def test_rational_rotation_satisfies_orthogonal():
    # (3/5, 4/5) rotation: an exactly orthogonal rational matrix
    c, s = Fraction(3, 5), Fraction(4, 5)
    u = [[ratmat.mat([[c]]), ratmat.mat([[-s]])], [ratmat.mat([[s]]), ratmat.mat([[c]])]]
    assign = matrix_assignment(G2, u)
    assert assignment_satisfies(instantiate_relations(RelationSchema.ORTHOGONAL, 2), assign)


def test_eval_representation_tensor_degree():
    psq = parse_sum(G2P, "P (x) P")
    assign = permutation_assignment(G2P, (1, 2))
    value = eval_representation(psq, assign)
    assert value == ratmat.mat([[1]])


def test_representation_dimension_mismatch():
    bad = {G2.u(1, 1): ratmat.mat([[1]]), G2.u(1, 2): ratmat.mat([[1, 0], [0, 1]]),
           G2.u(2, 1): ratmat.mat([[0]]), G2.u(2, 2): ratmat.mat([[1]])}
    with pytest.raises(ValueError):
        eval_representation(parse_sum(G2, "u(1,1)"), bad)


# ---------------------------------------------------------------------------
# coproduct closure, vanishing, quotient facts
# ---------------------------------------------------------------------------


def test_delta_image_shapes():
    s = parse_sum(G2P, "u(1,1)")
    d = delta_image(s)
    assert d == parse_sum(G2P, "u(1,1) (x) u(1,1) + u(1,2) (x) u(2,1)")
    p = parse_sum(G2P, "P")
    assert delta_image(p) == parse_sum(G2P, "P (x) P")
    unit = FormalSum.unit(G2P)
    assert delta_image(unit) == FormalSum.unit(G2P, 2)


def test_coproduct_p_orthogonal_and_bistochastic():
    assert verify_coproduct(RelationSchema.P_ORTHOGONAL, 2, 4).all_certified
    assert verify_coproduct(RelationSchema.P_BISTOCHASTIC, 2, 3).all_certified


@pytest.mark.parametrize("schema", [
    RelationSchema.ORTHOGONAL, RelationSchema.CUBIC, RelationSchema.BISTOCHASTIC,
    RelationSchema.BISTOCHASTIC_PRIME, RelationSchema.MAGIC_PRIME,
])
def test_coproduct_closure_plain_schemas(schema):
    assert verify_coproduct(schema, 2, 4).all_certified


def test_vanishing_examples_p_magic():
    item = verify_vanishing(RelationSchema.P_MAGIC, I, 2, single_block(2), (1, 1), 4)
    assert item.certified
    item = verify_vanishing(RelationSchema.P_MAGIC, I, 2, single_block(2), (1, 2), 4)
    assert item.certified


def test_vanishing_pair_concatenation_degrees():
    # a concatenated instance certifies within the sum of the factor degrees
    pi = parse_partition("1 2|3 4")
    rels = RelationSchema.P_ORTHOGONAL
    d1 = verify_vanishing(rels, I_2, 2, single_block(2), (1, 1), 4).certificate.multiplier_degree
    d2 = verify_vanishing(rels, I_2, 2, single_block(2), (2, 2), 4).certificate.multiplier_degree
    combined = verify_vanishing(rels, I_2, 2, pi, (1, 1, 2, 2), d1 + d2 + 2)
    assert combined.certified
    assert combined.certificate.multiplier_degree <= d1 + d2 + 2


def test_vanishing_family_membership_enforced():
    with pytest.raises(ValueError):
        verify_vanishing(RelationSchema.P_ORTHOGONAL, I_2, 2, single_block(3), (1, 1, 1), 3)


def test_schema_implications_quotient_diagram():
    # the quotient chain onto the permutation-group presentation
    for n in (2, 3):
        assert verify_schema_implication(RelationSchema.MAGIC, RelationSchema.MAGIC_PRIME, n, 4).all_certified
        assert verify_schema_implication(RelationSchema.MAGIC, RelationSchema.BISTOCHASTIC, n, 4).all_certified
        assert verify_schema_implication(RelationSchema.MAGIC_PRIME, RelationSchema.CUBIC, n, 4).all_certified


def test_bistochastic_not_implied_by_magic_prime():
    # all-minus-identity satisfies the primed cubic presentation but has
    # row sums -1, so the bistochastic sum relations are not in its ideal
    gens = G2
    rels = instantiate_relations(RelationSchema.MAGIC_PRIME, 2)
    neg_ident = {gens.u(i, j): ratmat.mat([[-1 if i == j else 0]]) for i in (1, 2) for j in (1, 2)}
    assert assignment_satisfies(rels, neg_ident)
    target = parse_sum(gens, "u(1,1) + u(1,2) + -1*1")
    assert refute_membership(target, rels, [neg_ident]) is not None
    assert ideal_membership(target, rels, 3) is None


# ---------------------------------------------------------------------------
# the projection-cubic power-sum obstruction
# ---------------------------------------------------------------------------


def test_cubic_witness_satisfies_all_relations():
    rels = instantiate_relations(RelationSchema.P_CUBIC, 2)
    for swap in (False, True):
        witness = cubic_projection_witness(swap=swap)
        assert assignment_satisfies(rels, witness)


def test_cubic_power_sum_identities_refuted():
    # the four j-patterns with equal last letters (and their mirror images)
    # are genuinely outside the projection-cubic ideal: the witness kills
    # every relation yet leaves these sums nonzero at every degree bound
    rels = instantiate_relations(RelationSchema.P_CUBIC, 2)
    witnesses = [cubic_projection_witness(), cubic_projection_witness(swap=True)]
    pi4 = single_block(4)
    refuted = []
    for j in itertools.product((1, 2), repeat=4):
        target = vanishing_target(RelationSchema.P_CUBIC, 2, pi4, j)
        if refute_membership(target, rels, witnesses) is not None:
            refuted.append(j)
    assert sorted(refuted) == [
        (1, 1, 1, 1), (1, 1, 2, 2), (1, 2, 1, 1), (1, 2, 2, 2),
        (2, 1, 1, 1), (2, 1, 2, 2), (2, 2, 1, 1), (2, 2, 2, 2),
    ]


def test_cubic_witness_parameter_family():
    rels = instantiate_relations(RelationSchema.P_CUBIC, 2)
    for p, q in [(Fraction(1, 3), Fraction(2)), (Fraction(2, 5), Fraction(-1))]:
        witness = cubic_projection_witness(p=p, q=q)
        assert assignment_satisfies(rels, witness)


# ---------------------------------------------------------------------------
# property-based sanity for formal sums
# ---------------------------------------------------------------------------


@st.composite
def formal_sums(draw):
    gens = G2P
    n_terms = draw(st.integers(min_value=0, max_value=4))
    terms = {}
    for _ in range(n_terms):
        length = draw(st.integers(min_value=0, max_value=3))
        word = tuple(draw(st.integers(min_value=0, max_value=4)) for _ in range(length))
        coef = Fraction(draw(st.integers(min_value=-5, max_value=5)), draw(st.integers(min_value=1, max_value=4)))
        terms[(word,)] = terms.get((word,), Fraction(0)) + coef
    return FormalSum(gens, 1, terms)


@given(formal_sums(), formal_sums())
@settings(max_examples=80, deadline=None)
def test_star_is_an_antihomomorphism(a, b):
    assert star(a * b) == star(b) * star(a)
    assert star(a + b) == star(a) + star(b)
    assert star(star(a)) == a
