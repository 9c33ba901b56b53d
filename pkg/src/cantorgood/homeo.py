"""Homeomorphism criteria for good measures, the stage-wise back-and-forth
construction of measure-preserving clopen correspondences, realization of
prescribed value sets, and compactification builders.

Two good measures with equal value sets and homeomorphic defective sets are
homeomorphic; the constructive content is the alternating matching loop:
take the next unmatched piece on one side, assemble an exactly equal-mass
region on the other (whole pieces plus one exact carve of the boundary
piece, which group-likeness makes possible), then reverse roles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .exactnum import (
    INFINITY,
    DivisibleGroup,
    DomainError,
    ExtMass,
    GroupLikeSet,
    Rational,
    as_rational,
    group_scale_relation,
)
from .goodness import (
    NotFound,
    ValuationCertificate,
    Verdict,
    carve,
    decide_compactification_good,
    goodness_verdict,
    synthesize_certificate,
)
from .space import (
    ALL_PIECES,
    Bernoulli,
    CarvedClass,
    CompactificationSpec,
    CompactOpen,
    DefectiveDescriptor,
    DisjointUnion,
    GeometricTail,
    MeasureSpec,
    ProductCounting,
    RestClass,
    Scaled,
    ZWeights,
    complement_within,
    one_point_compactification,
)
from .values import DEFAULT_BUDGET, enumerate_values, value_group

F = Fraction


# ---------------------------------------------------------------------------
# Criterion.


@dataclass(frozen=True)
class HomeoVerdict:
    kind: str  # homeomorphic | not_homeomorphic | unknown
    reason: str = ""

    @property
    def is_homeomorphic(self) -> bool:
        return self.kind == "homeomorphic"

    def __str__(self) -> str:
        return f"{self.kind} ({self.reason})" if self.reason else self.kind


@dataclass(frozen=True)
class CompactifiedSpace:
    """A finite-remainder compactification of a measure description, at the
    invariant level: enough structure to compare against other spaces
    (total mass, defective descriptor, value set), without pretending the
    remainder points are refinable cells."""

    inner: MeasureSpec
    comp: CompactificationSpec

    def total_mass(self) -> ExtMass:
        return self.inner.total_mass()

    def _tail_masses(self) -> list[Optional[ExtMass]]:
        from .goodness import _class_tail_mass

        total = self.inner.total_mass()
        tails = [
            _class_tail_mass(self.inner, k, total) for k in self.comp.classes
        ]
        if not total.is_infinite:
            known = sum(
                (t.value for t in tails if t is not None), start=F(0)
            )
            tails = [
                ExtMass(total.value - known) if t is None else t for t in tails
            ]
        else:
            tails = [INFINITY if t is None else t for t in tails]
        return tails

    def defective_descriptor(self) -> DefectiveDescriptor:
        out = self.inner.defective_descriptor()
        added = sum(1 for t in self._tail_masses() if t is None or t.is_infinite)
        if added:
            out = out.union(DefectiveDescriptor(points=added))
        return out

    def goodness(self) -> Verdict:
        return decide_compactification_good(self.inner, self.comp)

    def good_value_set(self) -> Optional[GroupLikeSet]:
        if not self.goodness().is_good:
            return None
        group = value_group(self.inner)
        if group is None:
            return None
        total = self.inner.total_mass()
        return GroupLikeSet(group, total, closed=not total.is_infinite)


SpaceLike = Union[MeasureSpec, CompactifiedSpace]


def _invariants(obj: SpaceLike):
    if isinstance(obj, CompactifiedSpace):
        return obj.goodness(), obj.good_value_set(), obj.defective_descriptor()
    from .values import good_value_set

    return (
        goodness_verdict(obj),
        good_value_set(obj),
        obj.defective_descriptor(),
    )


def homeo_criterion(spec_a: SpaceLike, spec_b: SpaceLike) -> HomeoVerdict:
    """Homeomorphic iff both exactly good with equal value sets (group and
    bound) and equal defective descriptors; NotHomeomorphic as soon as any
    computable invariant differs; Unknown while goodness is undecided."""
    verdict_a, set_a, desc_a = _invariants(spec_a)
    verdict_b, set_b, desc_b = _invariants(spec_b)
    if desc_a != desc_b:
        return HomeoVerdict(
            "not_homeomorphic",
            f"defective sets differ: {desc_a} vs {desc_b}",
        )
    group_a = set_a.group if set_a else _group_of(spec_a)
    group_b = set_b.group if set_b else _group_of(spec_b)
    if group_a is not None and group_b is not None and group_a != group_b:
        return HomeoVerdict(
            "not_homeomorphic", f"value groups differ: {group_a} vs {group_b}"
        )
    if set_a is not None and set_b is not None:
        if (set_a.bound, set_a.closed) != (set_b.bound, set_b.closed):
            return HomeoVerdict(
                "not_homeomorphic",
                f"value-set bounds differ: {set_a} vs {set_b}",
            )
    if verdict_a.is_good and verdict_b.is_good and set_a and set_b:
        return HomeoVerdict(
            "homeomorphic",
            f"both good with value set {set_a} and defective set {desc_a}",
        )
    return HomeoVerdict("unknown", "goodness is not exactly decided on both sides")


def _group_of(obj: SpaceLike) -> Optional[DivisibleGroup]:
    inner = obj.inner if isinstance(obj, CompactifiedSpace) else obj
    return value_group(inner)


def weak_homeo_constant(
    spec_a: SpaceLike, spec_b: SpaceLike
) -> Optional[Fraction]:
    """The constant c with S(first) = c * S(second) for two good infinite
    measures with matching defective sets; the representative is canonical,
    unique up to divisors of the second group.  None when the groups are
    incomparable or goodness is undecided."""
    for obj in (spec_a, spec_b):
        total = obj.total_mass() if isinstance(obj, CompactifiedSpace) else obj.total_mass()
        if not total.is_infinite:
            raise DomainError("weak homeomorphism compares infinite measures")
    verdict_a, set_a, desc_a = _invariants(spec_a)
    verdict_b, set_b, desc_b = _invariants(spec_b)
    if not (verdict_a.is_good and verdict_b.is_good):
        return None
    if desc_a != desc_b or set_a is None or set_b is None:
        return None
    return group_scale_relation(set_a.group, set_b.group)


# ---------------------------------------------------------------------------
# Back-and-forth.


@dataclass(frozen=True)
class Stage:
    source: CompactOpen  # region on the first space
    target: CompactOpen  # region on the second space
    mass: Fraction


@dataclass(frozen=True)
class PartialHomeo:
    stages: tuple[Stage, ...]

    def __post_init__(self) -> None:
        for side in ("source", "target"):
            cells: list = []
            for stage in self.stages:
                cells.extend(getattr(stage, side).cells)
            CompactOpen(tuple(cells))  # raises unless pairwise disjoint
        if any(s.mass <= 0 for s in self.stages):
            raise DomainError("stage masses are positive")

    def matched_mass(self) -> Fraction:
        return sum((s.mass for s in self.stages), start=F(0))


class StageFailure(RuntimeError):
    """A back-and-forth stage could not carve its residual within the depth
    budget.  For genuinely homeomorphic inputs this is an insufficient
    budget; otherwise the attached certificate may prove the obstruction."""

    def __init__(
        self,
        stage: int,
        depth: int,
        target: Fraction,
        region: CompactOpen,
        certificate: Optional[ValuationCertificate] = None,
        partial: Optional[PartialHomeo] = None,
    ) -> None:
        cert = f" (certificate q={certificate.q})" if certificate else ""
        super().__init__(
            f"stage {stage}: no subset of {region} with mass {target} "
            f"within depth {depth}{cert}"
        )
        self.stage = stage
        self.depth = depth
        self.target = target
        self.region = region
        self.certificate = certificate
        self.partial = partial


class _AtomStream:
    """Unconsumed regions of one side: leftovers of partially consumed
    pieces first (FIFO), then whole pieces in enumeration order.  Defective
    root cells are skipped; their matching is descriptor-level."""

    def __init__(self, spec: MeasureSpec) -> None:
        self.spec = spec
        self.leftovers: list[CompactOpen] = []
        self.next_piece = 1

    def next_atom(self) -> Optional[CompactOpen]:
        if self.leftovers:
            return self.leftovers.pop(0)
        count = self.spec.piece_count()
        while count is None or self.next_piece <= count:
            cell = self.spec.root(self.next_piece)
            self.next_piece += 1
            if not cell.defective:
                return CompactOpen.of(cell.id)
        return None

    def push_front(self, region: CompactOpen) -> None:
        if region:
            self.leftovers.insert(0, region)


def _take_mass(
    stream: _AtomStream,
    needed: Fraction,
    stage: int,
    max_depth: int,
    budget: int,
) -> CompactOpen:
    """Assemble a region of exactly the needed mass from the stream: whole
    atoms while they fit, then one exact carve of the boundary atom."""
    parts: list[CompactOpen] = []
    acc = F(0)
    while acc < needed:
        atom = stream.next_atom()
        if atom is None:
            raise StageFailure(stage, 0, needed - acc, CompactOpen.empty())
        atom_mass = stream.spec.mass_of(atom).value
        if acc + atom_mass <= needed:
            parts.append(atom)
            acc += atom_mass
        else:
            residual = needed - acc
            got = carve(stream.spec, atom, residual, max_depth, budget)
            if isinstance(got, NotFound):
                cert = synthesize_certificate(stream.spec, atom, residual)
                raise StageFailure(stage, got.depth, residual, atom, cert)
            stream.push_front(complement_within(stream.spec, atom, got))
            parts.append(got)
            acc = needed
    out = CompactOpen.empty()
    for p in parts:
        out = out.union(p)
    return out


def back_and_forth(
    spec_a: MeasureSpec,
    spec_b: MeasureSpec,
    stages: int,
    max_depth: int = 12,
    budget: int = DEFAULT_BUDGET,
    require_criterion: bool = True,
) -> PartialHomeo:
    """The alternating matching loop: odd stages take the next unmatched
    atom of the first space and carve an equal-mass region in the second;
    even stages reverse the roles.  Every stage's two regions have exactly
    equal mass.  With `require_criterion` off the loop runs anyway (useful
    for demonstrating obstructions); failures raise StageFailure carrying
    the partial correspondence and, when found, a certificate."""
    if stages < 1:
        raise DomainError("stages >= 1")
    if require_criterion:
        verdict = homeo_criterion(spec_a, spec_b)
        if not verdict.is_homeomorphic:
            raise DomainError(
                f"back_and_forth needs homeomorphic inputs ({verdict}); "
                "pass require_criterion=False to override"
            )
    desc_a = spec_a.defective_descriptor()
    desc_b = spec_b.defective_descriptor()
    if desc_a != desc_b:
        raise DomainError(
            f"defective descriptors differ: {desc_a} vs {desc_b}"
        )
    side_a = _AtomStream(spec_a)
    side_b = _AtomStream(spec_b)
    done: list[Stage] = []
    for stage in range(1, stages + 1):
        lead, trail = (side_a, side_b) if stage % 2 == 1 else (side_b, side_a)
        atom = lead.next_atom()
        if atom is None:
            break  # lead side exhausted: finite space fully matched
        mass = lead.spec.mass_of(atom).value
        try:
            matched = _take_mass(trail, mass, stage, max_depth, budget)
        except StageFailure as failure:
            failure.partial = PartialHomeo(tuple(done))
            raise
        pair = (atom, matched) if stage % 2 == 1 else (matched, atom)
        done.append(Stage(pair[0], pair[1], mass))
    return PartialHomeo(tuple(done))


# ---------------------------------------------------------------------------
# Realizing a prescribed value set.


def _greedy_power_expansion(
    amount: Fraction, p: int
) -> tuple[list[int], list[int], int]:
    """Greedy expansion of a positive rational as a sum of powers p**-j,
    each strictly below the running remainder.  The remainder states recur
    (t = remainder * p**j lies in (1, p] with bounded denominator), so the
    exponent stream is preperiodic: returns (prefix exponents, cycle
    exponents, exponent step of one cycle)."""
    exponents: list[int] = []
    seen: dict[Fraction, int] = {}
    states: list[tuple[Fraction, int]] = []
    remainder = amount
    while True:
        j = 0
        while F(1, p) ** j >= remainder:
            j += 1
        while j > 0 and F(1, p) ** (j - 1) < remainder:
            j -= 1
        # now p**-j < remainder <= p**-(j-1)
        t = remainder * F(p) ** j
        if t in seen:
            start = seen[t]
            step = j - states[start][1]
            return exponents[:start], exponents[start:], step
        seen[t] = len(exponents)
        states.append((t, j))
        exponents.append(j)
        remainder = remainder - F(1, p) ** j


def build_good_measure(d: GroupLikeSet) -> MeasureSpec:
    """A measure description whose exact good value set is the given dense
    group-like set.

    Finite bound: pieces of mass scale * p**-j (greedy expansion of the
    bound, p the group's least prime), each a scaled equidistributed
    odometer over q = product of the group's primes, so each piece's value
    set is exactly the group truncated at the piece mass.  Infinite bound:
    the scaled odometer crossed with the counting measure on Z.
    """
    if not d.dense:
        raise DomainError("only dense group-like sets are realizable")
    if d.closed:
        raise DomainError("group-like sets are half-open: D = G n [0, a)")
    group = d.group
    p = min(group.primes)
    q = 1
    for prime in sorted(group.primes):
        q *= prime
    block = Bernoulli(tuple(F(1, q) for _ in range(q)))
    if d.bound.is_infinite:
        return ProductCounting(Scaled(group.scale, block), ZWeights((F(1),)))
    prefix, cycle, step = _greedy_power_expansion(
        d.bound.value / group.scale, p
    )
    members = tuple(
        Scaled(group.scale * F(1, p) ** j, block) for j in prefix
    )
    tail = GeometricTail(
        block,
        tuple(group.scale * F(1, p) ** j for j in cycle),
        F(1, p) ** step,
    )
    return DisjointUnion(members, tail)


# ---------------------------------------------------------------------------
# Compactifications with a prescribed new value.


@dataclass(frozen=True)
class GammaReport:
    comp: CompactificationSpec
    gamma: Fraction
    gamma_steps: tuple[Fraction, ...]
    regions: tuple[CompactOpen, ...]
    verdict: Verdict


def gamma_compactification(
    spec: MeasureSpec,
    gamma: Rational,
    steps: int = 6,
    max_depth: int = 12,
    piece_horizon: int = 6,
    budget: int = DEFAULT_BUDGET,
) -> GammaReport:
    """A two-point-remainder compactification whose first remainder class
    carries exactly the new clopen value gamma: carve disjoint regions of
    masses gamma_1 < gamma_2 < ... -> gamma (gamma_n the largest depth-n
    sample value below gamma, strictly increasing, skipping stalls), so
    that the one-point compactification of their union attains gamma.

    The verdict reports whether the extension stays good: exactly when
    gamma already lies in the value group (otherwise gamma is a new value
    outside the base value set and goodness is lost)."""
    gamma = as_rational(gamma)
    verdict = goodness_verdict(spec)
    if not verdict.is_good:
        raise DomainError("gamma compactification needs an exactly good base")
    total = spec.total_mass()
    if gamma <= 0 or not ExtMass(gamma) < total:
        raise DomainError("gamma must lie strictly between 0 and the total mass")
    pool = _AtomStream(spec)
    gammas: list[Fraction] = []
    regions: list[CompactOpen] = []
    reached = F(0)
    first = enumerate_values(spec, 1, piece_horizon, gamma, budget)
    if gamma in first.values:
        region = _take_mass(pool, gamma, 1, max_depth, budget)
        gammas.append(gamma)
        regions.append(region)
    else:
        for n in range(1, steps + 1):
            sample = enumerate_values(spec, n, piece_horizon, gamma, budget)
            candidates = [v for v in sample.values if reached < v < gamma]
            if not candidates:
                continue
            new_gamma = max(candidates)
            region = _take_mass(pool, new_gamma - reached, n, max_depth, budget)
            gammas.append(new_gamma)
            regions.append(region)
            reached = new_gamma
        if not gammas:
            raise DomainError("no sample values below gamma; raise the depth")
    comp = CompactificationSpec(
        (CarvedClass(tuple(regions), gamma), RestClass())
    )
    return GammaReport(
        comp,
        gamma,
        tuple(gammas),
        tuple(regions),
        decide_compactification_good(spec, comp),
    )
