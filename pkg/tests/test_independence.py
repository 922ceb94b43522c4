import random
from fractions import Fraction

import pytest

from ncprob.cumulants import CumulantTable, Kind, MomentFunctional, moments_from_cumulants
from ncprob.independence import DistributionClass, LawClass, build_independent_moments, classify_distribution
from ncprob.independence import test_mixed_vanishing as mixed_vanishing_report
from ncprob.partitions import all_words_up_to


def _marginal(kind, K, values):
    return CumulantTable(kind, 1, K, {(1,) * k: v for k, v in values.items() if v})


def test_boolean_centered_alternating_vanishes():
    marg = _marginal(Kind.BOOLEAN, 3, {2: Fraction(1)})
    mom = build_independent_moments([marg, marg])
    assert mom.value((1, 2, 1)) == 0
    assert mom.value((2, 1, 2)) == 0


def test_classical_gaussian_pair_moments():
    g = _marginal(Kind.CLASSICAL, 4, {2: Fraction(1)})
    mom = build_independent_moments([g, g])
    assert mom.value((1, 1, 2, 2)) == 1
    assert mom.value((1, 2, 1, 2)) == 1


def test_free_semicircular_pair_moments():
    s = _marginal(Kind.FREE, 4, {2: Fraction(1)})
    mom = build_independent_moments([s, s])
    assert mom.value((1, 2, 1, 2)) == 0
    assert mom.value((1, 1, 2, 2)) == 1


def test_mixed_kind_marginals_rejected():
    a = _marginal(Kind.FREE, 3, {2: Fraction(1)})
    b = _marginal(Kind.BOOLEAN, 3, {2: Fraction(1)})
    with pytest.raises(ValueError):
        build_independent_moments([a, b])
    c = _marginal(Kind.FREE, 2, {2: Fraction(1)})
    with pytest.raises(ValueError):
        build_independent_moments([a, c])


@pytest.mark.parametrize("kind", list(Kind))
def test_constructive_diagnostic_duality(kind):
    rng = random.Random(5 + hash(kind.value) % 100)
    for _ in range(6):
        K = rng.randint(2, 5)
        margs = [
            _marginal(kind, K, {k: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for k in range(1, K + 1)})
            for _ in range(rng.randint(2, 3))
        ]
        mom = build_independent_moments(margs)
        report = mixed_vanishing_report(mom, kind)
        assert report.passed, report.offenders[:3]


def test_offending_word_detected():
    mom = MomentFunctional(2, 2, {(1, 2): 1})
    report = mixed_vanishing_report(mom, Kind.CLASSICAL)
    assert not report.passed
    assert report.offenders[0] == ((1, 2), Fraction(1))
    assert report.to_json()["offenders"][0] == {"word": [1, 2], "value": "1/1"}


def test_single_variable_passes_vacuously():
    mom = MomentFunctional(1, 4, {(1,): 2, (1, 1): 5, (1, 1, 1): 17})
    for kind in Kind:
        assert mixed_vanishing_report(mom, kind).passed


def test_perturbation_breaks_independence():
    g = _marginal(Kind.CLASSICAL, 4, {2: Fraction(1)})
    mom = build_independent_moments([g, g])
    bumped = dict(mom.table)
    bumped[(1, 2)] = bumped.get((1, 2), Fraction(0)) + Fraction(1, 1000)
    report = mixed_vanishing_report(MomentFunctional(2, 4, bumped), Kind.CLASSICAL)
    assert not report.passed


def test_classification_examples():
    semi = _marginal(Kind.FREE, 4, {2: Fraction(1)})
    assert classify_distribution(semi) == DistributionClass(Kind.FREE, LawClass.CENTERED_CENTRAL)

    bern = _marginal(Kind.BOOLEAN, 4, {1: Fraction(1), 2: Fraction(1)})
    assert classify_distribution(bern) == DistributionClass(Kind.BOOLEAN, LawClass.SHIFTED_CENTRAL)

    quart = _marginal(Kind.CLASSICAL, 4, {4: Fraction(1)})
    assert classify_distribution(quart).law is LawClass.SYMMETRIC

    generic = _marginal(Kind.CLASSICAL, 4, {1: Fraction(1), 3: Fraction(1)})
    assert classify_distribution(generic).law is LawClass.IID_GENERAL
    assert classify_distribution(generic).to_json() == {"kind": "classical", "class": "iid_general"}


def test_classification_most_specific_wins():
    # only order 2 present: centered beats shifted beats symmetric
    t = _marginal(Kind.CLASSICAL, 5, {2: Fraction(7)})
    assert classify_distribution(t).law is LawClass.CENTERED_CENTRAL
    t2 = _marginal(Kind.CLASSICAL, 5, {1: Fraction(1), 2: Fraction(7)})
    assert classify_distribution(t2).law is LawClass.SHIFTED_CENTRAL


def test_classification_scale_invariance():
    rng = random.Random(11)
    for kind in Kind:
        for lam in (Fraction(2), Fraction(-1), Fraction(3, 7)):
            c2 = Fraction(rng.randint(1, 5))
            centered = _marginal(kind, 5, {2: c2})
            scaled = _marginal(kind, 5, {2: c2 * lam ** 2})
            assert classify_distribution(scaled).law is LawClass.CENTERED_CENTRAL
            even = _marginal(kind, 4, {2: c2, 4: Fraction(1)})
            scaled_even = _marginal(kind, 4, {2: c2 * lam ** 2, 4: lam ** 4})
            assert classify_distribution(scaled_even) == classify_distribution(even)


def test_classification_requires_single_variable():
    joint = CumulantTable(Kind.FREE, 2, 2, {(1, 2): Fraction(1)})
    with pytest.raises(ValueError):
        classify_distribution(joint)


def test_classification_with_tolerance():
    # near-zero odd orders inside the tolerance count as vanished
    noisy = _marginal(Kind.CLASSICAL, 4, {2: Fraction(1), 3: Fraction(1, 10 ** 6)})
    assert classify_distribution(noisy).law is LawClass.IID_GENERAL
    assert classify_distribution(noisy, tol=Fraction(1, 1000)).law is LawClass.CENTERED_CENTRAL
    with pytest.raises(ValueError):
        classify_distribution(noisy, tol=Fraction(-1))


def test_mixed_vanishing_with_tolerance():
    mom = MomentFunctional(2, 2, {(1, 2): Fraction(1, 10 ** 6)})
    assert not mixed_vanishing_report(mom, Kind.CLASSICAL).passed
    assert mixed_vanishing_report(mom, Kind.CLASSICAL, Fraction(1, 1000)).passed


def test_float_mode_tables():
    # sampled-mode tables hold floats; the diagnostic runs with a tolerance
    mom = MomentFunctional(2, 2, {(1,): 0.001, (2,): -0.002, (1, 2): 0.0005, (1, 1): 0.97, (2, 2): 1.04})
    report = mixed_vanishing_report(mom, Kind.CLASSICAL, Fraction(1, 100))
    assert report.passed
    strict = mixed_vanishing_report(mom, Kind.CLASSICAL, Fraction(1, 10 ** 7))
    assert not strict.passed


def test_boolean_factorization():
    # mu(x_{i1}^{m1} ... x_{ik}^{mk}) factors over alternating letters
    rng = random.Random(2)
    marg = _marginal(Kind.BOOLEAN, 5, {k: Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for k in range(1, 6)})
    mom = build_independent_moments([marg, marg, marg])
    for pattern in [((1, 2), (2, 1)), ((1, 1), (2, 2)), ((1, 2), (2, 2), (3, 1)), ((2, 1), (1, 3), (2, 1))]:
        word = tuple(letter for letter, power in pattern for _ in range(power))
        if len(word) > 5:
            continue
        product = Fraction(1)
        for letter, power in pattern:
            product *= mom.value((letter,) * power)
        assert mom.value(word) == product, pattern


@pytest.mark.parametrize("kind", list(Kind))
def test_partition_family_support_of_classified_laws(kind):
    # the classification tables, read at desk scale: for an iid family the
    # partition-indexed cumulant products vanish unless the partition lies
    # in the law's family and refines the word's kernel
    from ncprob.cumulants import cumulants_from_moments, eval_pi_scalar
    from ncprob.independence import law_family
    from ncprob.partitions import FamilyTag, enumerate_partitions, in_family, kernel, refines, words

    law_tables = {
        "centered": {2: Fraction(1)},
        "shifted": {1: Fraction(2), 2: Fraction(1)},
        "symmetric": {2: Fraction(1), 4: Fraction(-3)},
        "general": {1: Fraction(1), 2: Fraction(1), 3: Fraction(1), 4: Fraction(1)},
    }
    for values in law_tables.values():
        marg = _marginal(kind, 4, values)
        classified = classify_distribution(marg)
        family = law_family(classified)
        joint = cumulants_from_moments(build_independent_moments([marg, marg]), kind)
        for k in range(1, 5):
            for pi in enumerate_partitions(k, FamilyTag(kind.lattice)):
                for w in words(2, k):
                    value = eval_pi_scalar(joint, pi, w)
                    if not (in_family(pi, family) and refines(pi, kernel(w))):
                        assert value == 0, (values, pi.blocks, w)


@pytest.mark.parametrize("kind", list(Kind))
def test_central_limit_stability_at_order_two(kind):
    # x with only a second cumulant: moments of (x1 + x2)/sqrt(2) from two
    # independent copies reproduce the original moments
    c2 = Fraction(1)
    marg = _marginal(kind, 6, {2: c2})
    single = moments_from_cumulants(marg)
    joint = build_independent_moments([marg, marg])
    for k in range(1, 7):
        total = sum((joint.value(w) for w in all_words_up_to(2, k) if len(w) == k), Fraction(0))
        if k % 2 == 1:
            assert total == 0
        else:
            assert total / Fraction(2) ** (k // 2) == single.value((1,) * k)
