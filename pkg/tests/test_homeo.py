import random
from fractions import Fraction

import pytest

from cantorgood import catalog
from cantorgood.exactnum import (
    INFINITY,
    DivisibleGroup,
    DomainError,
    ExtMass,
    GroupLikeSet,
)
from cantorgood.goodness import goodness_verdict
from cantorgood.homeo import (
    CompactifiedSpace,
    StageFailure,
    back_and_forth,
    build_good_measure,
    gamma_compactification,
    homeo_criterion,
    weak_homeo_constant,
)
from cantorgood.space import (
    CellId,
    CompactOpen,
    PAdicHaar,
    ProductCounting,
    Restricted,
    Scaled,
    mass_of,
    one_point_compactification,
    total_mass,
)
from cantorgood.values import enumerate_values, good_value_set, value_group

F = Fraction


# -- criterion -------------------------------------------------------------------


def test_two_dyadic_forests_homeomorphic():
    verdict = homeo_criterion(catalog.example2_forest(), catalog.example2_balanced())
    assert verdict.is_homeomorphic


def test_different_groups_not_homeomorphic():
    ball = Restricted(PAdicHaar(3), CompactOpen.of(CellId(1)))
    verdict = homeo_criterion(catalog.dyadic_bernoulli(), ball)
    assert verdict.kind == "not_homeomorphic"
    assert "group" in verdict.reason


def test_compact_vs_noncompact_not_homeomorphic():
    verdict = homeo_criterion(catalog.dyadic_bernoulli(), catalog.example2_forest())
    assert verdict.kind == "not_homeomorphic"
    assert "bound" in verdict.reason


def test_infinite_bratteli_vs_alexandroff_not_homeomorphic():
    full = catalog.infinite_bratteli_full()
    omega = CompactifiedSpace(
        catalog.infinite_bratteli_class(), one_point_compactification()
    )
    verdict = homeo_criterion(full, omega)
    assert verdict.kind == "not_homeomorphic"
    assert "defective" in verdict.reason


def test_criterion_symmetric_and_reflexive():
    specs = [
        catalog.example2_forest(),
        catalog.example2_balanced(),
        catalog.dyadic_bernoulli(),
        PAdicHaar(3),
    ]
    for a in specs:
        assert homeo_criterion(a, a).kind in ("homeomorphic",)
        for b in specs:
            assert homeo_criterion(a, b).kind == homeo_criterion(b, a).kind


def test_unknown_when_goodness_undecided():
    verdict = homeo_criterion(
        catalog.bernoulli_13_23(),
        Scaled(F(1), catalog.bernoulli_13_23()),
    )
    assert verdict.kind == "unknown"


# -- weak homeomorphism -------------------------------------------------------------


def test_weak_constant_scaling():
    base = catalog.counting_product()
    tripled = Scaled(F(3), catalog.counting_product())
    # S(base) = (1/3) * S(tripled)
    assert weak_homeo_constant(base, tripled) == F(1, 3)
    assert weak_homeo_constant(tripled, base) == F(3)
    assert weak_homeo_constant(base, base) == F(1)


def test_weak_constant_none_for_different_primes():
    a = catalog.counting_product()
    b = ProductCounting(catalog.equidistributed(3))
    assert weak_homeo_constant(a, b) is None


def test_weak_constant_requires_infinite():
    with pytest.raises(DomainError):
        weak_homeo_constant(catalog.dyadic_bernoulli(), catalog.dyadic_bernoulli())


# -- back and forth -------------------------------------------------------------


def test_back_and_forth_dyadic_forests():
    a, b = catalog.dyadic_forest_a(), catalog.dyadic_forest_b()
    result = back_and_forth(a, b, 4)
    assert [s.mass for s in result.stages] == [F(1, 2), F(1, 4), F(1, 8), F(1, 16)]
    for stage in result.stages:
        assert mass_of(a, stage.source).value == stage.mass
        assert mass_of(b, stage.target).value == stage.mass


def test_back_and_forth_cumulative_mass():
    result = back_and_forth(catalog.dyadic_forest_a(), catalog.dyadic_forest_b(), 6)
    assert result.matched_mass() == F(63, 64)
    cumulative = F(0)
    for stage in result.stages:
        cumulative += stage.mass
    assert cumulative >= 1 - F(1, 2) ** 6


def test_back_and_forth_identical_specs_symmetric():
    spec = catalog.example2_forest()
    result = back_and_forth(spec, catalog.example2_forest(), 5)
    for stage in result.stages:
        assert stage.source == stage.target


def test_back_and_forth_disjoint_regions():
    result = back_and_forth(catalog.dyadic_forest_a(), catalog.dyadic_forest_b(), 6)
    for side in ("source", "target"):
        seen = []
        for stage in result.stages:
            seen.extend(getattr(stage, side).cells)
        CompactOpen(tuple(seen))  # antichain or raises


def test_back_and_forth_obstruction_certificate():
    dyadic = catalog.example2_forest()
    triadic_pieces = catalog.DisjointUnion(
        (),
        catalog.GeometricTail(catalog.equidistributed(3), (F(2, 3),), F(1, 3)),
    )
    with pytest.raises(StageFailure) as info:
        back_and_forth(dyadic, triadic_pieces, 2, max_depth=6, require_criterion=False)
    failure = info.value
    assert failure.stage == 1
    assert failure.certificate is not None and failure.certificate.q == 2
    assert failure.partial is not None and failure.partial.stages == ()


def test_back_and_forth_requires_criterion():
    with pytest.raises(DomainError):
        back_and_forth(catalog.dyadic_bernoulli(), catalog.bernoulli_13_23(), 2)


# -- build_good_measure -------------------------------------------------------------


def test_build_dyadic_unit():
    d = GroupLikeSet(DivisibleGroup(F(1), frozenset({2})), ExtMass.of(1))
    spec = build_good_measure(d)
    assert [c.mass.value for c in spec.pieces(3)] == [F(1, 2), F(1, 4), F(1, 8)]
    assert total_mass(spec).value == 1
    assert good_value_set(spec) == d


def test_build_infinite_uses_counting_product():
    d = GroupLikeSet(DivisibleGroup(F(1), frozenset({5})), INFINITY)
    spec = build_good_measure(d)
    assert isinstance(spec, ProductCounting)
    assert good_value_set(spec) == d


def test_build_third_scale_dyadic():
    d = GroupLikeSet(DivisibleGroup(F(1, 3), frozenset({2})), ExtMass.of(1))
    spec = build_good_measure(d)
    assert total_mass(spec).value == 1
    assert good_value_set(spec) == d
    sample = enumerate_values(spec, 3, 4, 1)
    assert all(d.contains(v) or v == 1 for v in sample.values)


def test_build_rejects_non_dense():
    with pytest.raises(DomainError):
        build_good_measure(
            GroupLikeSet(DivisibleGroup(F(1), frozenset()), ExtMass.of(1))
        )


def test_build_roundtrip_randomized():
    rng = random.Random(20260811)
    primes = [2, 3, 5, 7]
    for _ in range(10):
        scale = F(rng.randint(1, 99), rng.randint(1, 99))
        ps = frozenset(rng.sample(primes, rng.randint(1, 3)))
        if rng.random() < 0.3:
            bound = INFINITY
        else:
            bound = ExtMass.of(F(rng.randint(1, 99), rng.randint(1, 99)))
        d = GroupLikeSet(DivisibleGroup(scale, ps), bound)
        spec = build_good_measure(d)
        assert goodness_verdict(spec).is_good
        assert good_value_set(spec) == d
        assert total_mass(spec) == bound


# -- gamma compactification -------------------------------------------------------------


def test_gamma_two_thirds_not_good():
    report = gamma_compactification(catalog.example2_forest(), F(2, 3))
    assert report.verdict.is_not_good
    assert report.gamma == F(2, 3)
    steps = report.gamma_steps
    assert all(a < b for a, b in zip(steps, steps[1:]))
    assert all(v < F(2, 3) for v in steps)
    spec = catalog.example2_forest()
    regions = report.regions
    for i, region in enumerate(regions):
        expected = steps[i] - (steps[i - 1] if i else 0)
        assert mass_of(spec, region).value == expected
    # carved regions are pairwise disjoint
    CompactOpen(tuple(c for r in regions for c in r.cells))


def test_gamma_half_good_single_step():
    report = gamma_compactification(catalog.example2_forest(), F(1, 2))
    assert report.verdict.is_good
    assert report.gamma_steps == (F(1, 2),)
    assert mass_of(catalog.example2_forest(), report.regions[0]).value == F(1, 2)


def test_gamma_requires_interior_value():
    with pytest.raises(DomainError):
        gamma_compactification(catalog.example2_forest(), F(3, 2))


def test_gamma_on_infinite_space():
    report = gamma_compactification(catalog.counting_product(), F(1, 2))
    assert report.verdict.is_good  # 1/2 lies in the dyadic group
    report = gamma_compactification(
        catalog.counting_product(), F(1, 3), steps=4
    )
    assert report.verdict.is_not_good


# -- value sample monotonicity under compactification (Smu_diff_comp) ----------------


def test_sample_inclusions_along_compactifications():
    from cantorgood.goodness import compactified_value_sample
    from cantorgood.space import two_point_by_parity

    spec = catalog.example2_balanced()
    base = set(enumerate_values(spec, 2, 4, 1).values)
    one_point = set(
        compactified_value_sample(spec, one_point_compactification(), 2, 4)
    )
    two_point = set(
        compactified_value_sample(spec, two_point_by_parity(), 2, 4)
    )
    assert base <= one_point <= two_point
