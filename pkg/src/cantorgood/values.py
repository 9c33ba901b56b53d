"""Compact-open value sets: exact bounded-depth enumeration for any
description, and closed-form value groups for the structured ones.

Enumeration is a subset-sum dynamic program over a common denominator, so
every reported value is an exact rational realized by an explicit compact
open set.  There is no floating point anywhere; when a value group has no
finite presentation in the representable class, the result is None
(unknown), never an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .exactnum import (
    DivisibleGroup,
    DomainError,
    ExtMass,
    Rational,
    as_rational,
    canonical_group,
    group_sum,
    prime_support,
)
from .space import (
    CF,
    Bernoulli,
    BudgetError,
    Cell,
    CellId,
    CompactOpen,
    DisjointUnion,
    DistinguishedClass,
    FullDiagram,
    MeasureSpec,
    PAdicHaar,
    ProductCounting,
    Restricted,
    Scaled,
    StationaryBratteli,
    descend_frontier,
)

F = Fraction

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class ValueSample:
    """A finite truncation of the value set: all masses of compact open
    sets assembled from depth-`depth` cells of the first `piece_horizon`
    pieces, up to `bound`.  Always contains 0 and is monotone in both
    depth and horizon."""

    values: tuple[Fraction, ...]
    depth: int
    piece_horizon: int
    bound: ExtMass

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(sorted(set(self.values))))
        if not self.values or self.values[0] != 0:
            raise DomainError("a value sample contains 0")

    def contains(self, v: Rational) -> bool:
        return as_rational(v) in set(self.values)

    def max_gap(self, upper: Fraction) -> Fraction:
        """Largest gap between consecutive sample values on [0, upper]."""
        vals = [v for v in self.values if v <= upper]
        if vals[-1] != upper:
            vals.append(upper)
        return max(b - a for a, b in zip(vals, vals[1:]))

    def __str__(self) -> str:
        return "{%s}" % ", ".join(str(v) for v in self.values)


def _frontier_cells(
    spec: MeasureSpec, depth: int, piece_horizon: int, budget: int
) -> list[Cell]:
    cells: list[Cell] = []
    for piece in spec.pieces(piece_horizon):
        if piece.defective:
            continue
        cells.extend(descend_frontier(spec, piece.id, depth, budget=budget))
        if len(cells) > budget:
            raise BudgetError(f"{len(cells)} frontier cells exceed the budget")
    return cells


def _scaled_amounts(
    masses: Iterable[Fraction], bound: Fraction
) -> tuple[list[int], int, int]:
    """Common-denominator integer view: (amounts, scaled bound, denominator)."""
    masses = list(masses)
    den = 1
    for m in masses:
        den = den * m.denominator // math.gcd(den, m.denominator)
    bound_scaled = (bound.numerator * den) // bound.denominator
    amounts = [int(m * den) for m in masses]
    return amounts, bound_scaled, den


def enumerate_values(
    spec: MeasureSpec,
    depth: int,
    piece_horizon: int,
    bound: Rational,
    budget: int = DEFAULT_BUDGET,
) -> ValueSample:
    """The exact set of subset-sums of depth-`depth` cell masses within the
    first `piece_horizon` pieces, filtered to <= bound."""
    if depth < 1 or piece_horizon < 1:
        raise DomainError("depth and horizon are >= 1")
    bound = as_rational(bound)
    if bound <= 0:
        raise DomainError("bound must be positive")
    cells = _frontier_cells(spec, depth, piece_horizon, budget)
    amounts, bound_scaled, den = _scaled_amounts(
        (c.mass.value for c in cells), bound
    )
    if len(amounts) * max(bound_scaled, 1) > budget:
        raise BudgetError(
            "subset-sum state space %d * %d exceeds budget %d"
            % (len(amounts), bound_scaled, budget)
        )
    mask = (1 << (bound_scaled + 1)) - 1
    reachable = 1
    for a in amounts:
        if a <= bound_scaled:
            reachable |= (reachable << a) & mask
    values = tuple(
        F(s, den) for s in range(bound_scaled + 1) if reachable >> s & 1
    )
    return ValueSample(values, depth, piece_horizon, ExtMass.of(bound))


def subset_witness(
    cells: list[Cell], value: Rational, budget: int = DEFAULT_BUDGET
) -> Optional[CompactOpen]:
    """A sub-collection of the given cells whose masses sum to the value
    exactly, or None.  Deterministic: cells are considered in (descending
    mass, ascending address) order and the reconstruction keeps the first
    exact hit (preferring the larger cells)."""
    value = as_rational(value)
    if value < 0:
        return None
    if value == 0:
        return CompactOpen.empty()
    cells = sorted(cells, key=lambda c: (-c.mass.value, c.id))
    amounts, target, den = _scaled_amounts((c.mass.value for c in cells), value)
    if F(value * den).denominator != 1:
        return None
    if len(amounts) * max(target, 1) > budget:
        raise BudgetError("subset-sum reconstruction exceeds the budget")
    mask = (1 << (target + 1)) - 1
    prefix = [1]
    for a in amounts:
        reachable = prefix[-1]
        if a <= target:
            reachable = (reachable | (reachable << a)) & mask
        prefix.append(reachable)
    if not prefix[-1] >> target & 1:
        return None
    chosen: list[CellId] = []
    needed = target
    for i in range(len(amounts) - 1, -1, -1):
        if prefix[i] >> needed & 1:
            continue
        chosen.append(cells[i].id)
        needed -= amounts[i]
    assert needed == 0
    return CompactOpen(tuple(chosen))


def value_witness(
    spec: MeasureSpec,
    value: Rational,
    depth: int,
    piece_horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[CompactOpen]:
    """An explicit compact open set of the given mass assembled from
    depth-`depth` cells, or None."""
    cells = _frontier_cells(spec, depth, piece_horizon, budget)
    return subset_witness(cells, value, budget)


def cf_level_values(
    spec: CF,
    level: int,
    bound: Rational,
    budget: int = DEFAULT_BUDGET,
) -> tuple[Fraction, ...]:
    """Subset sums of the level-`level` cells of a (C,F) space: the value
    truncation of the compact snapshot X_level of the inductive limit.
    Piece n enters at level n, so its level-L cells sit at depth L - n + 1;
    all of them have mass 1/(|C_1|...|C_L|)."""
    if level < 1:
        raise DomainError("level >= 1")
    bound = as_rational(bound)
    cells: list[Cell] = []
    for piece in range(1, level + 1):
        depth = level - piece + 1
        cells.extend(
            descend_frontier(spec, CellId(piece), depth, budget=budget)
        )
    amounts, bound_scaled, den = _scaled_amounts(
        (c.mass.value for c in cells), bound
    )
    if len(amounts) * max(bound_scaled, 1) > budget:
        raise BudgetError("level enumeration exceeds the budget")
    mask = (1 << (bound_scaled + 1)) - 1
    reachable = 1
    for a in amounts:
        if a <= bound_scaled:
            reachable |= (reachable << a) & mask
    return tuple(F(s, den) for s in range(bound_scaled + 1) if reachable >> s & 1)


def class_values(
    spec: MeasureSpec,
    klass,
    depth: int,
    piece_horizon: int,
    bound: Rational,
    budget: int = DEFAULT_BUDGET,
) -> tuple[Fraction, ...]:
    """Subset-sum values using only the pieces of one index class (the
    value truncation of the class's sub-measure)."""
    bound = as_rational(bound)
    cells = [
        c
        for piece in spec.pieces(piece_horizon)
        if not piece.defective and klass.contains(piece.id.piece)
        for c in descend_frontier(spec, piece.id, depth, budget=budget)
    ]
    amounts, bound_scaled, den = _scaled_amounts(
        (c.mass.value for c in cells), bound
    )
    if len(amounts) * max(bound_scaled, 1) > budget:
        raise BudgetError("class enumeration exceeds the budget")
    mask = (1 << (bound_scaled + 1)) - 1
    reachable = 1
    for a in amounts:
        if a <= bound_scaled:
            reachable |= (reachable << a) & mask
    return tuple(F(s, den) for s in range(bound_scaled + 1) if reachable >> s & 1)


# ---------------------------------------------------------------------------
# Closed-form value groups.


def value_group(spec: MeasureSpec) -> Optional[DivisibleGroup]:
    """The exact subgroup of Q generated by the value set, or None when the
    description offers no finite presentation."""
    if isinstance(spec, Bernoulli):
        den = 1
        for w in spec.weights:
            den = den * w.denominator // math.gcd(den, w.denominator)
        return canonical_group(list(spec.weights), den)
    if isinstance(spec, PAdicHaar):
        return DivisibleGroup(F(1), frozenset({spec.p}))
    if isinstance(spec, StationaryBratteli):
        if isinstance(spec.mode, DistinguishedClass):
            gens = [spec.x[v] for v in sorted(spec.mode.vertices)]
        else:
            gens = [xv for xv in spec.x if xv is not None]
        return canonical_group(gens, spec.lam)
    if isinstance(spec, CF):
        prefix_product = math.prod(spec.c_sizes)
        return canonical_group([F(1, prefix_product)], spec.c_sizes[-1])
    if isinstance(spec, Scaled):
        inner = value_group(spec.inner)
        return None if inner is None else inner.scaled_by(spec.factor)
    if isinstance(spec, Restricted):
        from .goodness import goodness_verdict  # cycle: goodness uses values

        if goodness_verdict(spec.inner).is_good:
            return value_group(spec.inner)
        return None
    if isinstance(spec, DisjointUnion):
        parts = [value_group(m) for m in spec.members]
        if spec.tail is not None:
            base = value_group(spec.tail.base)
            if base is None:
                return None
            extra = prime_support(spec.tail.ratio.denominator)
            for j in range(len(spec.tail.factors)):
                parts.append(
                    DivisibleGroup(
                        base.scale * spec.tail.factor(j), base.primes | extra
                    )
                )
        if any(p is None for p in parts):
            return None
        return group_sum(parts)  # type: ignore[arg-type]
    if isinstance(spec, ProductCounting):
        inner = value_group(spec.inner)
        if inner is None:
            return None
        w0 = spec.weights.weight(0)
        if all(inner.is_divisor(w / w0) for w in spec.weights.distinct()):
            return inner.scaled_by(w0)
        return None
    return None


def good_value_set(spec: MeasureSpec):
    """G intersect [0, total mass) for descriptions with an exact Good
    verdict; the bound is attained exactly on compact spaces.  None when
    goodness is not exactly decided (never silently assumed)."""
    from .exactnum import GroupLikeSet
    from .goodness import goodness_verdict

    if not goodness_verdict(spec).is_good:
        return None
    group = value_group(spec)
    if group is None:
        return None
    bound = spec.total_mass()
    return GroupLikeSet(group, bound, closed=spec.compact)


def product_value_closure(
    sample_a: ValueSample,
    sample_b: ValueSample,
    terms: int,
    bound: Rational,
    budget: int = DEFAULT_BUDGET,
) -> tuple[Fraction, ...]:
    """All sums of at most `terms` products a_i * b_i with a_i from the
    first sample and b_i from the second, filtered to <= bound.  This is
    the oracle for value enumeration on product spaces."""
    if terms < 1:
        raise DomainError("terms >= 1")
    bound = as_rational(bound)
    products = sorted(
        {a * b for a in sample_a.values for b in sample_b.values if a * b <= bound}
    )
    sums = {F(0)}
    frontier = {F(0)}
    for _ in range(terms):
        if len(frontier) * len(products) > budget:
            raise BudgetError("product closure exceeds the budget")
        frontier = {
            s + p for s in frontier for p in products if s + p <= bound
        } - sums
        if not frontier:
            break
        sums |= frontier
    return tuple(sorted(sums))
