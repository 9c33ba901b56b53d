"""Exact arithmetic for measure values.

Rationals are ``fractions.Fraction`` throughout: arbitrary precision,
always in lowest terms, positive denominator.  On top of that this module
provides p-adic valuations, masses that may be the distinguished value
infinity, and finitely presented divisible subgroups of the rationals

    G = c * Z[1/p1, ..., 1/pk]   (scale c > 0, finite prime set P)

together with their group-like truncations D = G intersect [0, a).
Only groups of this shape are representable; they are exactly the
subgroups of Q closed under division by a fixed integer, which covers
every value group arising from the structured measure descriptions in
``space``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


class DomainError(ValueError):
    """An argument is outside an operation's domain."""


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer as {prime: multiplicity}."""
    if n <= 0:
        raise DomainError(f"cannot factorize {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_support(n: int) -> frozenset[int]:
    return frozenset(factorize(n))


def vq(q: int, r: RationalLike) -> int:
    """q-adic valuation of a nonzero rational.

    vq(q, r*s) = vq(q, r) + vq(q, s) and, for r + s != 0,
    vq(q, r + s) >= min(vq(q, r), vq(q, s)).
    """
    if not is_prime(q):
        raise DomainError(f"{q} is not prime")
    r = as_rational(r)
    if r == 0:
        raise DomainError("valuation of zero is undefined")
    v = 0
    num = abs(r.numerator)
    while num % q == 0:
        num //= q
        v += 1
    den = r.denominator
    while den % q == 0:
        den //= q
        v -= 1
    return v


def rational_gcd(values: Iterable[RationalLike]) -> Fraction:
    """Greatest common divisor of rationals: gcd of numerators over lcm of
    denominators (of the lowest-terms representatives)."""
    vals = [as_rational(v) for v in values]
    if not vals:
        raise DomainError("gcd of an empty collection")
    num = 0
    den = 1
    for v in vals:
        num = math.gcd(num, abs(v.numerator))
        den = den * v.denominator // math.gcd(den, v.denominator)
    if num == 0:
        raise DomainError("gcd requires a nonzero value")
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# Masses: nonnegative rationals extended with infinity.


@dataclass(frozen=True)
class ExtMass:
    """A measure value: either a finite nonnegative rational or infinity.

    ``finite is None`` marks the infinite mass.  Addition saturates at
    infinity; comparisons place infinity above every finite value.
    """

    finite: Optional[Fraction]

    def __post_init__(self) -> None:
        if self.finite is not None:
            object.__setattr__(self, "finite", as_rational(self.finite))
            if self.finite < 0:
                raise DomainError("masses are nonnegative")

    @staticmethod
    def of(x: RationalLike) -> "ExtMass":
        return ExtMass(as_rational(x))

    @property
    def is_infinite(self) -> bool:
        return self.finite is None

    @property
    def value(self) -> Fraction:
        if self.finite is None:
            raise DomainError("infinite mass has no finite value")
        return self.finite

    def __add__(self, other: Union["ExtMass", RationalLike]) -> "ExtMass":
        other = _coerce_mass(other)
        if self.finite is None or other.finite is None:
            return INFINITY
        return ExtMass(self.finite + other.finite)

    __radd__ = __add__

    def scaled(self, c: RationalLike) -> "ExtMass":
        c = as_rational(c)
        if c <= 0:
            raise DomainError("scale factors are positive")
        if self.finite is None:
            return INFINITY
        return ExtMass(self.finite * c)

    def _key(self) -> tuple:
        return (1,) if self.finite is None else (0, self.finite)

    def __lt__(self, other) -> bool:
        return self._key() < _coerce_mass(other)._key()

    def __le__(self, other) -> bool:
        return self._key() <= _coerce_mass(other)._key()

    def __gt__(self, other) -> bool:
        return self._key() > _coerce_mass(other)._key()

    def __ge__(self, other) -> bool:
        return self._key() >= _coerce_mass(other)._key()

    def __str__(self) -> str:
        return "inf" if self.finite is None else str(self.finite)

    def __repr__(self) -> str:
        return f"ExtMass({self})"


INFINITY = ExtMass(None)


def _coerce_mass(x: Union[ExtMass, RationalLike]) -> ExtMass:
    if isinstance(x, ExtMass):
        return x
    return ExtMass(as_rational(x))


def sum_masses(masses: Iterable[ExtMass]) -> ExtMass:
    total = ExtMass(Fraction(0))
    for m in masses:
        total = total + m
        if total.is_infinite:
            return INFINITY
    return total


# ---------------------------------------------------------------------------
# Divisible subgroups of Q and group-like sets.


@dataclass(frozen=True)
class DivisibleGroup:
    """The subgroup c * Z[1/p : p in primes] of the rationals.

    Canonical form: the scale's numerator and denominator carry no prime
    from ``primes`` (any such factor is a unit of the group and is divided
    out on construction).  Two values denote the same group iff their
    canonical fields are equal.
    """

    scale: Fraction
    primes: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        scale = as_rational(self.scale)
        if scale <= 0:
            raise DomainError("group scale must be positive")
        primes = frozenset(self.primes)
        for p in primes:
            if not is_prime(p):
                raise DomainError(f"{p} is not prime")
        num, den = scale.numerator, scale.denominator
        for p in primes:
            while num % p == 0:
                num //= p
            while den % p == 0:
                den //= p
        object.__setattr__(self, "scale", Fraction(num, den))
        object.__setattr__(self, "primes", primes)

    @property
    def dense(self) -> bool:
        """Dense in R iff division by some prime is available."""
        return bool(self.primes)

    def contains(self, g: RationalLike) -> bool:
        g = as_rational(g)
        if g == 0:
            return True
        q = g / self.scale
        return self._smooth(q.denominator)

    def is_divisor(self, d: RationalLike) -> bool:
        """Whether d > 0 satisfies d*G = G (scale is irrelevant)."""
        d = as_rational(d)
        if d <= 0:
            raise DomainError("divisors are positive")
        return self._smooth(d.numerator) and self._smooth(d.denominator)

    def _smooth(self, n: int) -> bool:
        for p in self.primes:
            while n % p == 0:
                n //= p
        return n == 1

    def scaled_by(self, c: RationalLike) -> "DivisibleGroup":
        c = as_rational(c)
        if c <= 0:
            raise DomainError("scale factors are positive")
        return DivisibleGroup(self.scale * c, self.primes)

    def __str__(self) -> str:
        ring = "Z" if not self.primes else "Z[1/%s]" % ",1/".join(
            str(p) for p in sorted(self.primes)
        )
        if self.scale == 1:
            return ring
        return f"({self.scale})*{ring}"


def canonical_group(generators: Iterable[RationalLike], lam: int) -> DivisibleGroup:
    """Smallest subgroup of Q containing the generators and closed under
    division by ``lam``: gcd of the generators scaled into Z[1/lam]."""
    gens = [as_rational(g) for g in generators]
    if not gens:
        raise DomainError("canonical_group needs at least one generator")
    if any(g <= 0 for g in gens):
        raise DomainError("generators must be positive")
    if lam < 1:
        raise DomainError("lambda must be a positive integer")
    primes = prime_support(lam) if lam > 1 else frozenset()
    return DivisibleGroup(rational_gcd(gens), primes)


def group_member(g: RationalLike, group: DivisibleGroup) -> bool:
    return group.contains(g)


def divisor_member(d: RationalLike, group: DivisibleGroup) -> bool:
    return group.is_divisor(d)


def group_sum(groups: Iterable[DivisibleGroup]) -> DivisibleGroup:
    """The subgroup of Q generated by the union of the given groups:
    gcd of the scales over the union of the prime sets."""
    groups = list(groups)
    if not groups:
        raise DomainError("group_sum of an empty collection")
    primes: frozenset[int] = frozenset()
    for g in groups:
        primes |= g.primes
    return DivisibleGroup(rational_gcd(g.scale for g in groups), primes)


def group_scale_relation(
    g1: DivisibleGroup, g2: DivisibleGroup
) -> Optional[Fraction]:
    """Some c > 0 with G1 = c * G2, if one exists.

    Requires equal prime sets; the returned ratio of canonical scales is
    unique up to Div(G2) and is the canonical representative.
    """
    if g1.primes != g2.primes:
        return None
    return g1.scale / g2.scale


@dataclass(frozen=True)
class GroupLikeSet:
    """D = G intersect [0, bound), optionally with the bound included.

    The closed variant (bound attained) is the value set shape of compact
    spaces, where the total mass is realized by the whole space.
    """

    group: DivisibleGroup
    bound: ExtMass
    closed: bool = False

    def __post_init__(self) -> None:
        bound = _coerce_mass(self.bound)
        object.__setattr__(self, "bound", bound)
        if not bound.is_infinite and bound.value <= 0:
            raise DomainError("group-like bound must be positive")
        if self.closed and bound.is_infinite:
            raise DomainError("only finite bounds can be attained")

    @property
    def dense(self) -> bool:
        return self.group.dense

    def contains(self, g: RationalLike) -> bool:
        g = as_rational(g)
        if g < 0:
            return False
        if self.bound.is_infinite:
            below = True
        else:
            below = g < self.bound.value or (self.closed and g == self.bound.value)
        return below and self.group.contains(g)

    def __str__(self) -> str:
        upper = str(self.bound)
        bracket = "]" if self.closed else ")"
        return f"{self.group} n [0, {upper}{bracket}"


def grouplike_contains(d: GroupLikeSet, g: RationalLike) -> bool:
    return d.contains(g)
