"""Built-in measure descriptions used by the scenario runner and tests."""

from __future__ import annotations

from fractions import Fraction

from .space import (
    CF,
    Bernoulli,
    BratteliMode,
    DisjointUnion,
    DistinguishedClass,
    FullDiagram,
    GeometricTail,
    PAdicHaar,
    ProductCounting,
    Scaled,
    StationaryBratteli,
    ZWeights,
    equidistributed,
)

F = Fraction


def dyadic_bernoulli() -> Bernoulli:
    return equidistributed(2)


def bernoulli_13_23() -> Bernoulli:
    return Bernoulli((F(1, 3), F(2, 3)))


def example2_forest() -> DisjointUnion:
    """Countable union of dyadic pieces with masses 1/2, 1/4, 1/8, ..."""
    return DisjointUnion(
        (), GeometricTail(dyadic_bernoulli(), (F(1, 2),), F(1, 2))
    )


def example2_balanced() -> DisjointUnion:
    """The same space with every piece halved: masses 1/4, 1/4, 1/8, 1/8, ...
    Odd/even index classes then split the total mass evenly."""
    return DisjointUnion(
        (), GeometricTail(dyadic_bernoulli(), (F(1, 4), F(1, 4)), F(1, 2))
    )


def punctured_bernoulli_13_23() -> DisjointUnion:
    """The beta(1/3, 2/3) space with the all-zeroes point removed, carved
    into the cylinders [1], [01], [001], ... of masses 2/3, 2/9, 2/27, ..."""
    return DisjointUnion(
        (), GeometricTail(bernoulli_13_23(), (F(2, 3),), F(1, 3))
    )


def incidence_fn(n: int) -> tuple[tuple[int, ...], ...]:
    """The 3x3 incidence matrix family F_N (N >= 3)."""
    if n < 3:
        raise ValueError("the family is defined for N >= 3")
    return ((2, 0, 0), (1, n, 1), (1, 1, n))


def transpose(m: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(row[i] for row in m) for i in range(len(m[0])))


def fn_eigendata(n: int) -> tuple[int, tuple[Fraction, Fraction, Fraction]]:
    """Perron-Frobenius eigenvalue and probability eigenvector of F_N^T."""
    return n + 1, (F(1, n), F(n - 1, 2 * n), F(n - 1, 2 * n))


def fn_bratteli(n: int, mode: BratteliMode | None = None) -> StationaryBratteli:
    lam, x = fn_eigendata(n)
    if mode is None:
        mode = DistinguishedClass(frozenset({1, 2}))
    return StationaryBratteli(transpose(incidence_fn(n)), lam, x, mode)


def infinite_bratteli_full() -> StationaryBratteli:
    """A diagram whose transient block outgrows the eigenvalue: the measure
    is infinite and the defective set is a Cantor set."""
    return StationaryBratteli(
        ((3, 1), (0, 2)), 2, (None, F(1)), FullDiagram()
    )


def infinite_bratteli_class() -> StationaryBratteli:
    """The same measure on the generating open dense subset (all cylinders
    entering the finite-mass vertex): infinite but locally finite."""
    return StationaryBratteli(
        ((3, 1), (0, 2)), 2, (None, F(1)), DistinguishedClass(frozenset({1}))
    )


def cf_example(
    c_sizes: tuple[int, ...] = (2, 3, 2), f_sizes: tuple[int, ...] | None = None
) -> CF:
    """A (C,F) space; by default |C| = 2, 3, 2 with minimal |F| growth."""
    if f_sizes is None:
        fs = [2]
        for c in c_sizes[1:]:
            fs.append(fs[-1] * c + 2)
        f_sizes = tuple(fs)
    return CF(f_sizes, c_sizes)


def counting_product(
    inner=None, cycle: tuple[Fraction, ...] = (F(1),)
) -> ProductCounting:
    if inner is None:
        inner = dyadic_bernoulli()
    return ProductCounting(inner, ZWeights(cycle))


def dyadic_forest_a() -> DisjointUnion:
    """Back-and-forth fixture A: dyadic pieces 1/2, 1/4, 1/8, ..."""
    return example2_forest()


def dyadic_forest_b() -> DisjointUnion:
    """Back-and-forth fixture B: dyadic pieces 1/4, 1/4, 1/4, 1/8, 1/16, ..."""
    quarter = Scaled(F(1, 4), dyadic_bernoulli())
    return DisjointUnion(
        (quarter, quarter, quarter),
        GeometricTail(dyadic_bernoulli(), (F(1, 8),), F(1, 2)),
    )
