import itertools
import random
from fractions import Fraction

import pytest

from cantorgood import catalog
from cantorgood.exactnum import DivisibleGroup
from cantorgood.space import (
    BudgetError,
    CellId,
    CompactOpen,
    PAdicHaar,
    Scaled,
    descend_frontier,
    mass_of,
)
from cantorgood.values import (
    class_values,
    enumerate_values,
    good_value_set,
    product_value_closure,
    value_group,
    value_witness,
)

F = Fraction


def brute_force_sums(spec, depth, horizon, bound):
    cells = [
        c
        for piece in spec.pieces(horizon)
        for c in descend_frontier(spec, piece.id, depth)
    ]
    sums = set()
    for r in range(len(cells) + 1):
        for combo in itertools.combinations(cells, r):
            s = sum((c.mass.value for c in combo), start=F(0))
            if s <= bound:
                sums.add(s)
    return sums


def test_enumerate_dyadic_depth2():
    sample = enumerate_values(catalog.dyadic_bernoulli(), 2, 1, 1)
    assert sample.values == (0, F(1, 4), F(1, 2), F(3, 4), 1)


def test_enumerate_13_23_depth2():
    sample = enumerate_values(catalog.bernoulli_13_23(), 2, 1, 1)
    assert sample.values == tuple(F(k, 9) for k in range(10))


def test_enumerate_matches_brute_force():
    for spec in (catalog.bernoulli_13_23(), catalog.example2_forest()):
        expected = brute_force_sums(spec, 2, 3, F(1))
        got = set(enumerate_values(spec, 2, 3, 1).values)
        assert got == expected


def test_enumerate_small_bound_keeps_zero():
    sample = enumerate_values(catalog.dyadic_bernoulli(), 1, 1, F(1, 100))
    assert sample.values == (0,)


def test_enumerate_monotone_in_depth_and_horizon():
    spec = catalog.example2_forest()
    base = set(enumerate_values(spec, 2, 2, 1).values)
    deeper = set(enumerate_values(spec, 3, 2, 1).values)
    wider = set(enumerate_values(spec, 2, 3, 1).values)
    assert base <= deeper and base <= wider


def test_enumerate_budget_error_is_loud():
    with pytest.raises(BudgetError):
        enumerate_values(catalog.dyadic_bernoulli(), 10, 1, 1, budget=100)


def test_witnesses_realize_values_exhaustively():
    spec = catalog.bernoulli_13_23()
    for v in enumerate_values(spec, 3, 1, 1).values:
        w = value_witness(spec, v, 3, 1)
        assert w is not None
        assert mass_of(spec, w).value == v


def test_witness_rejects_off_grid_value():
    assert value_witness(catalog.dyadic_bernoulli(), F(1, 3), 3, 1) is None


def test_value_group_examples():
    assert value_group(PAdicHaar(5)) == DivisibleGroup(F(1), frozenset({5}))
    assert value_group(catalog.bernoulli_13_23()) == DivisibleGroup(
        F(1), frozenset({3})
    )
    g = value_group(catalog.fn_bratteli(4))
    assert g.scale == F(3, 8) and g.primes == frozenset({5})


def test_value_group_combinators():
    assert value_group(Scaled(F(1, 4), catalog.dyadic_bernoulli())) == DivisibleGroup(
        F(1), frozenset({2})
    )
    assert value_group(catalog.example2_forest()) == DivisibleGroup(
        F(1), frozenset({2})
    )
    # |C| = 2, 3, 2, 2, ...: granule 1/12 refined by powers of 2
    assert value_group(catalog.cf_example()) == DivisibleGroup(
        F(1, 3), frozenset({2})
    )
    assert value_group(catalog.counting_product()) == DivisibleGroup(
        F(1), frozenset({2})
    )
    # ratio 3 is not a dyadic divisor: no finite presentation claimed
    assert value_group(catalog.counting_product(cycle=(F(1), F(3)))) is None


def test_every_enumerated_value_in_group():
    for spec in (
        catalog.bernoulli_13_23(),
        catalog.example2_forest(),
        catalog.cf_example(),
        PAdicHaar(3),
    ):
        group = value_group(spec)
        sample = enumerate_values(spec, 3, 4, 2)
        assert all(group.contains(v) for v in sample.values)


def test_good_value_set_examples():
    d = good_value_set(PAdicHaar(5))
    assert d.group == DivisibleGroup(F(1), frozenset({5}))
    assert d.bound.is_infinite and not d.closed
    d = good_value_set(catalog.dyadic_bernoulli())
    assert d.closed and d.bound.value == 1
    assert d.contains(F(1)) and d.contains(F(3, 4))
    d = good_value_set(catalog.cf_example())
    assert not d.closed
    assert d.contains(F(1, 12)) and d.contains(F(5, 24))
    # not exactly decided good: no value set is asserted
    assert good_value_set(catalog.bernoulli_13_23()) is None


def test_group_like_closure_of_good_samples():
    rng = random.Random(3)
    for spec in (catalog.dyadic_bernoulli(), PAdicHaar(3), catalog.cf_example()):
        group = value_group(spec)
        values = enumerate_values(spec, 3, 3, 2).values
        for _ in range(300):
            a, b = rng.choice(values), rng.choice(values)
            if a <= b:
                assert group.contains(b - a)


def test_density_proxy_gaps_shrink():
    spec = catalog.dyadic_bernoulli()
    gaps = [
        enumerate_values(spec, d, 1, 1).max_gap(F(1)) for d in range(1, 5)
    ]
    assert all(g2 <= g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_product_closure_example():
    a = enumerate_values(catalog.dyadic_bernoulli(), 1, 1, 1)
    got = product_value_closure(a, a, 1, 1)
    assert got == (0, F(1, 4), F(1, 2), 1)


def test_product_closure_contains_zero():
    a = enumerate_values(catalog.bernoulli_13_23(), 1, 1, 1)
    assert 0 in product_value_closure(a, a, 1, 1)


def test_product_closure_matches_product_spec():
    # dyadic x dyadic is the fair four-letter Bernoulli measure
    dy = enumerate_values(catalog.dyadic_bernoulli(), 2, 1, 1)
    closure = set(product_value_closure(dy, dy, 4, 1))
    four = catalog.equidistributed(4)
    assert closure == set(enumerate_values(four, 2, 1, 1).values)


def test_class_values_are_subsets_of_full_sample():
    spec = catalog.example2_balanced()
    from cantorgood.space import IndexClass

    odd = set(class_values(spec, IndexClass(2, frozenset({1})), 2, 4, 1))
    full = set(enumerate_values(spec, 2, 4, 1).values)
    assert odd <= full
