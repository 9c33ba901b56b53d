import random
from fractions import Fraction

import pytest

from cantorgood import catalog
from cantorgood.exactnum import DivisibleGroup, DomainError
from cantorgood.goodness import (
    CertificateError,
    NotFound,
    ValuationCertificate,
    carve,
    check_valuation_certificate,
    compactified_value_sample,
    decide_bratteli_good,
    decide_compactification_good,
    decide_product_good,
    find_nongood_witness,
    goodness_verdict,
    refinement_ratios,
    synthesize_certificate,
)
from cantorgood.space import (
    CellId,
    CompactOpen,
    PAdicHaar,
    ProductCounting,
    Scaled,
    ZWeights,
    mass_of,
    one_point_compactification,
    two_point_by_parity,
)
from cantorgood.values import enumerate_values, subset_witness, value_group

F = Fraction


def cyl(piece: int, word: str = "") -> CellId:
    return CellId(piece, tuple(int(ch) for ch in word))


WHOLE = CompactOpen.of(CellId(1))


# -- carve ---------------------------------------------------------------------


def test_carve_dyadic_five_eighths():
    got = carve(catalog.dyadic_bernoulli(), WHOLE, F(5, 8), 3)
    assert got == CompactOpen.of(cyl(1, "0"), cyl(1, "100"))


def test_carve_zero_is_empty():
    assert carve(catalog.bernoulli_13_23(), WHOLE, 0, 3) == CompactOpen.empty()


def test_carve_not_found_example3():
    region = CompactOpen.of(cyl(1, "1"))
    got = carve(catalog.bernoulli_13_23(), region, F(1, 3), 8)
    assert got == NotFound(8)


def test_carve_rejects_out_of_range_target():
    with pytest.raises(DomainError):
        carve(catalog.dyadic_bernoulli(), WHOLE, F(3, 2), 3)
    with pytest.raises(DomainError):
        carve(catalog.dyadic_bernoulli(), WHOLE, F(-1, 2), 3)


def test_carve_soundness_on_random_targets():
    rng = random.Random(99)
    spec = catalog.dyadic_bernoulli()
    region = CompactOpen.of(cyl(1, "1"))
    region_mass = mass_of(spec, region).value
    for _ in range(40):
        target = F(rng.randint(0, 32), 64)
        if target > region_mass:
            continue
        got = carve(spec, region, target, 6)
        assert not isinstance(got, NotFound)
        assert mass_of(spec, got).value == target
        for cid in got.cells:
            assert cid == cyl(1, "1") or cyl(1, "1").is_ancestor_of(cid)


def test_carve_found_by_subset_fallback():
    # greedy from the top overshoots: 1/4 + 1/4 needs skipping the 1/2 cell
    spec = catalog.dyadic_bernoulli()
    got = carve(spec, WHOLE, F(1, 2), 4)
    assert mass_of(spec, got).value == F(1, 2)


# -- certificates ---------------------------------------------------------------


def test_certificate_example3_checks():
    cert = ValuationCertificate(2, CompactOpen.of(cyl(1, "1")), 1, F(1, 3))
    assert check_valuation_certificate(catalog.bernoulli_13_23(), cert)


def test_certificate_condition_a_fails():
    cert = ValuationCertificate(3, CompactOpen.of(cyl(1, "0")), 1, F(1, 4))
    assert not check_valuation_certificate(catalog.dyadic_bernoulli(), cert)


def test_certificate_condition_c_fails_when_target_is_attained():
    # target equals the mass of a cell in the region
    cert = ValuationCertificate(2, CompactOpen.of(cyl(1, "1")), 1, F(2, 9))
    assert not check_valuation_certificate(catalog.bernoulli_13_23(), cert)


def test_certificate_soundness_against_carve():
    spec = catalog.bernoulli_13_23()
    region = CompactOpen.of(cyl(1, "1"))
    cert = synthesize_certificate(spec, region, F(1, 3))
    assert cert is not None and cert.q == 2 and cert.threshold == 1
    for depth in range(1, 11):
        got = carve(spec, region, F(1, 3), depth, budget=10**9)
        assert got == NotFound(depth)


def test_refinement_ratios_structural():
    assert set(refinement_ratios(catalog.bernoulli_13_23())) == {F(1, 3), F(2, 3)}
    assert set(refinement_ratios(PAdicHaar(5))) == {F(1, 5), F(1, 4)}
    assert refinement_ratios(catalog.cf_example()) is not None


def test_certificate_survives_scaled_union_pieces():
    spec = catalog.punctured_bernoulli_13_23()
    region = CompactOpen.of(CellId(1, (1,)))  # inside piece 1 = (2/3) beta
    target = mass_of(spec, CompactOpen.of(CellId(1, (0,)))).value
    cert = synthesize_certificate(spec, region, target)
    assert cert is not None
    assert check_valuation_certificate(spec, cert)


# -- witness search ---------------------------------------------------------------


def test_search_finds_example3_witness():
    verdict = find_nongood_witness(catalog.bernoulli_13_23(), 4)
    assert verdict.is_not_good
    assert verdict.target == F(1, 3)
    assert verdict.region == CompactOpen.of(cyl(1, "1"))
    assert verdict.certificate is not None and verdict.certificate.q == 2
    assert check_valuation_certificate(catalog.bernoulli_13_23(), verdict.certificate)


def test_search_dyadic_probably_good():
    verdict = find_nongood_witness(catalog.dyadic_bernoulli(), 4)
    assert verdict.kind == "probably_good" and verdict.depth == 4


def test_search_padic_probably_good():
    verdict = find_nongood_witness(PAdicHaar(3), 3, piece_horizon=3)
    assert verdict.kind == "probably_good"


def test_search_punctured_forest_not_good():
    verdict = find_nongood_witness(catalog.punctured_bernoulli_13_23(), 3)
    assert verdict.is_not_good and verdict.certificate is not None


# -- exact deciders ---------------------------------------------------------------


def test_bratteli_family_f3_f4_f5():
    for n, expected in ((3, "good"), (4, "not_good"), (5, "good")):
        lam, x = catalog.fn_eigendata(n)
        verdict = decide_bratteli_good(
            catalog.transpose(catalog.incidence_fn(n)), lam, x
        )
        assert verdict.kind == expected, n


def test_bratteli_family_power_of_two_law():
    good_ns = set()
    for n in range(3, 18):
        lam, x = catalog.fn_eigendata(n)
        verdict = decide_bratteli_good(
            catalog.transpose(catalog.incidence_fn(n)), lam, x
        )
        if verdict.is_good:
            good_ns.add(n)
    assert good_ns == {3, 5, 9, 17}


def test_bratteli_rejects_non_eigendata():
    with pytest.raises(DomainError):
        decide_bratteli_good(
            catalog.transpose(catalog.incidence_fn(3)), 4, (F(1, 3), F(1, 3), F(1, 4))
        )


def test_product_decider_examples():
    dyadic = DivisibleGroup(F(1), frozenset({2}))
    assert decide_product_good(dyadic, ZWeights((F(1),))).is_good
    verdict = decide_product_good(dyadic, ZWeights((F(1), F(3))), inner_total=F(1))
    assert verdict.is_not_good
    assert decide_product_good(dyadic, ZWeights((F(1), F(1, 4)))).is_good


def test_product_decider_witness_fails_on_spec():
    spec = catalog.counting_product(cycle=(F(1), F(3)))
    verdict = goodness_verdict(spec)
    assert verdict.is_not_good
    got = carve(spec, verdict.region, verdict.target, 4)
    assert isinstance(got, NotFound)
    cert = synthesize_certificate(spec, verdict.region, verdict.target)
    assert cert is not None


def test_product_decider_rejects_bad_weight():
    with pytest.raises(DomainError):
        ZWeights((F(0),))


def test_structural_verdicts():
    assert goodness_verdict(catalog.dyadic_bernoulli()).is_good
    assert goodness_verdict(PAdicHaar(7)).is_good
    assert goodness_verdict(catalog.cf_example()).is_good
    assert goodness_verdict(catalog.fn_bratteli(4)).is_good  # on the class subset
    assert goodness_verdict(catalog.example2_forest()).is_good
    assert goodness_verdict(catalog.counting_product()).is_good
    assert goodness_verdict(catalog.bernoulli_13_23()).kind == "unknown"
    assert goodness_verdict(catalog.fn_bratteli(4, catalog.FullDiagram())).is_not_good
    assert goodness_verdict(catalog.fn_bratteli(5, catalog.FullDiagram())).is_good


def test_decider_search_agreement_on_good_specs():
    for spec in (catalog.dyadic_bernoulli(), catalog.example2_forest()):
        assert goodness_verdict(spec).is_good
        for depth in (2, 3, 4):
            assert find_nongood_witness(spec, depth).kind == "probably_good"


# -- compactifications ---------------------------------------------------------------


def test_example2_one_point_good():
    verdict = decide_compactification_good(
        catalog.example2_forest(), one_point_compactification()
    )
    assert verdict.is_good and verdict.new_values == (F(1),)


def test_example2_odd_even_not_good():
    verdict = decide_compactification_good(
        catalog.example2_forest(), two_point_by_parity()
    )
    assert verdict.is_not_good
    assert verdict.target == F(2, 3)
    assert set(verdict.new_values) == {F(2, 3), F(1, 3)}
    # the witness region genuinely defeats carving: 2/3 is outside the group
    got = carve(catalog.example2_forest(), verdict.region, F(2, 3), 6)
    assert isinstance(got, NotFound)


def test_example2_balanced_two_point_good():
    verdict = decide_compactification_good(
        catalog.example2_balanced(), two_point_by_parity()
    )
    assert verdict.is_good and set(verdict.new_values) == {F(1, 2)}


def test_one_point_of_infinite_locally_finite_good():
    verdict = decide_compactification_good(
        catalog.counting_product(), one_point_compactification()
    )
    assert verdict.is_good
    verdict = decide_compactification_good(
        catalog.infinite_bratteli_class(), one_point_compactification()
    )
    assert verdict.is_good


def test_alexandroff_consistency_with_group_membership():
    for spec in (catalog.example2_forest(), catalog.punctured_bernoulli_13_23()):
        base = goodness_verdict(spec)
        if not base.is_good:
            continue
        group = value_group(spec)
        verdict = decide_compactification_good(spec, one_point_compactification())
        assert verdict.is_good == group.contains(F(1))


def test_bratteli_alexandroff_matches_criterion():
    for n in (3, 4, 5, 9, 10):
        spec = catalog.fn_bratteli(n)
        lam, x = catalog.fn_eigendata(n)
        expected = decide_bratteli_good(
            catalog.transpose(catalog.incidence_fn(n)), lam, x
        )
        got = decide_compactification_good(spec, one_point_compactification())
        assert got.kind == expected.kind, n


def test_compactified_sample_balanced_equals_dyadic_plus_one():
    spec = catalog.example2_balanced()
    comp = two_point_by_parity()
    sample = compactified_value_sample(spec, comp, 2, 4)
    base = set(enumerate_values(spec, 2, 4, 1).values)
    cap = F(17, 32)
    assert {v for v in sample if v <= cap} == {v for v in base if v <= cap}
    assert F(1) in sample
    group = value_group(spec)
    assert all(group.contains(v) for v in sample)


def test_compactified_sample_odd_even_leaves_group():
    spec = catalog.example2_forest()
    sample = compactified_value_sample(spec, two_point_by_parity(), 2, 4)
    group = value_group(spec)
    outside = [v for v in sample if not group.contains(v)]
    assert outside and F(2, 3) in sample
