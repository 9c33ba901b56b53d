"""Goodness: carving clopen sets of prescribed mass, exact deciders for the
structured classes, bounded-depth witness search, and machine-checkable
non-goodness certificates.

A measure is good when every compact open set V contains, for each compact
open U with mass(U) < mass(V), a compact open subset of mass exactly
mass(U).  Exact Good verdicts are only ever issued by the structural
deciders below; exhausting a bounded search caps at ProbablyGood.
NotGood always carries a finite witness, and where possible a single-prime
valuation certificate that rules out every depth at once.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .exactnum import (
    DivisibleGroup,
    DomainError,
    ExtMass,
    Rational,
    as_rational,
    is_prime,
    prime_support,
    rational_gcd,
    vq,
)
from .space import (
    CF,
    ALL_PIECES,
    Bernoulli,
    CarvedClass,
    Cell,
    CellId,
    CompactificationSpec,
    CompactOpen,
    DisjointUnion,
    DistinguishedClass,
    FullDiagram,
    IndexClass,
    MeasureSpec,
    PAdicHaar,
    ProductCounting,
    Restricted,
    RestClass,
    Scaled,
    StationaryBratteli,
    ZWeights,
    descend_frontier,
)
from .values import DEFAULT_BUDGET, enumerate_values, subset_witness

F = Fraction

CERTIFICATE_PRIME_BOUND = 13


class CertificateError(ValueError):
    """The certificate's structural condition cannot be verified for this
    measure description; the certificate is rejected, not judged."""


@dataclass(frozen=True)
class ValuationCertificate:
    """Evidence that no clopen subset of `region` has mass `target`, at any
    depth: every cell of the region has q-valuation >= threshold, every
    refinement ratio has q-valuation >= 0, and the target's q-valuation is
    below the threshold (so no sum of cell masses can reach it)."""

    q: int
    region: CompactOpen
    threshold: int
    target: Fraction

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise DomainError(f"{self.q} is not prime")
        object.__setattr__(self, "target", as_rational(self.target))
        if self.target <= 0:
            raise DomainError("certificate targets are positive")


@dataclass(frozen=True)
class NotFound:
    """A carve exhausted its depth budget without an exact hit."""

    depth: int


@dataclass(frozen=True)
class Verdict:
    kind: str  # good | not_good | probably_good | unknown
    reason: str = ""
    target: Optional[Fraction] = None
    region: Optional[CompactOpen] = None
    certificate: Optional[ValuationCertificate] = None
    depth: Optional[int] = None
    new_values: tuple[Fraction, ...] = ()

    @property
    def is_good(self) -> bool:
        return self.kind == "good"

    @property
    def is_not_good(self) -> bool:
        return self.kind == "not_good"

    @staticmethod
    def good(reason: str, new_values: tuple[Fraction, ...] = ()) -> "Verdict":
        return Verdict("good", reason=reason, new_values=new_values)

    @staticmethod
    def not_good(
        target: Rational,
        region: Optional[CompactOpen],
        certificate: Optional[ValuationCertificate] = None,
        reason: str = "",
        new_values: tuple[Fraction, ...] = (),
    ) -> "Verdict":
        return Verdict(
            "not_good",
            reason=reason,
            target=as_rational(target),
            region=region,
            certificate=certificate,
            new_values=new_values,
        )

    @staticmethod
    def probably_good(depth: int) -> "Verdict":
        return Verdict("probably_good", depth=depth,
                       reason=f"all carve candidates succeeded to depth {depth}")

    @staticmethod
    def unknown(reason: str) -> "Verdict":
        return Verdict("unknown", reason=reason)

    def __str__(self) -> str:
        if self.kind == "good":
            return f"Good ({self.reason})"
        if self.kind == "not_good":
            cert = f", certificate q={self.certificate.q}" if self.certificate else ""
            return f"NotGood (target {self.target} in {self.region}{cert})"
        if self.kind == "probably_good":
            return f"ProbablyGood (depth {self.depth})"
        return f"Unknown ({self.reason})"


# ---------------------------------------------------------------------------
# Carving.


def carve(
    spec: MeasureSpec,
    region: CompactOpen,
    target: Rational,
    max_depth: int,
    budget: int = DEFAULT_BUDGET,
) -> Union[CompactOpen, NotFound]:
    """A compact open subset of `region` with exactly the target mass.

    Deterministic policy: greedy accumulation of the largest available cell
    (ties by ascending address), refining the frontier cell on overshoot;
    if the greedy pass misses, exact subset-sum over the uniform depth-d
    refinement for d = 1..max_depth.  The subset-sum pass is complete: any
    witness with cells at mixed depths <= max_depth flattens to one at
    uniform depth max_depth.
    """
    target = as_rational(target)
    region_mass = spec.mass_of(region)
    if region_mass.is_infinite:
        raise DomainError("carve regions must have finite mass")
    if target < 0 or target > region_mass.value:
        raise DomainError(
            f"target {target} outside [0, {region_mass.value}]"
        )
    if target == 0:
        return CompactOpen.empty()
    if target == region_mass.value:
        return region

    heap: list[tuple[Fraction, CellId, int, Cell]] = []
    for cid in region.cells:
        cell = spec.cell(cid)
        heapq.heappush(heap, (-cell.mass.value, cid, 0, cell))
    chosen: list[CellId] = []
    remaining = target
    while heap and remaining > 0:
        neg_mass, cid, depth, cell = heapq.heappop(heap)
        mass = -neg_mass
        if mass <= remaining:
            chosen.append(cid)
            remaining -= mass
        elif depth < max_depth:
            for kid in spec.children(cell):
                heapq.heappush(heap, (-kid.mass.value, kid.id, depth + 1, kid))
    if remaining == 0:
        return CompactOpen(tuple(chosen))

    for depth in range(1, max_depth + 1):
        cells: list[Cell] = []
        for cid in region.cells:
            cells.extend(descend_frontier(spec, cid, depth, budget=budget))
        witness = subset_witness(cells, target, budget)
        if witness is not None:
            return witness
    return NotFound(max_depth)


# ---------------------------------------------------------------------------
# Valuation certificates.


def refinement_ratios(
    spec: MeasureSpec, region: Optional[CompactOpen] = None
) -> Optional[list[Fraction]]:
    """Every child/parent mass ratio the description can produce, as a
    finite structural set; None for combinators this cannot be read off.
    A region narrows a disjoint union to the pieces it actually touches
    (descendants of a region never leave their piece)."""
    if isinstance(spec, Bernoulli):
        return list(spec.weights)
    if isinstance(spec, PAdicHaar):
        return [F(1, spec.p), F(1, spec.p - 1)]
    if isinstance(spec, StationaryBratteli):
        out = set()
        for v in range(len(spec.matrix)):
            if spec.x[v] is None:
                continue
            for w in range(len(spec.matrix)):
                if spec.matrix[v][w] >= 1 and spec.x[w] is not None:
                    out.add(spec.x[w] / (spec.lam * spec.x[v]))
        return sorted(out)
    if isinstance(spec, CF):
        out = {F(1, 2)}  # new-point count beyond the declared prefix
        for n in range(1, len(spec.f_sizes) + 1):
            if spec._new_points(n) > 1:
                out.add(F(1, spec._new_points(n)))
        for c in spec.c_sizes:
            out.add(F(1, c))
        return sorted(out)
    if isinstance(spec, (Scaled, Restricted, ProductCounting)):
        return refinement_ratios(spec.inner)
    if isinstance(spec, DisjointUnion):
        pieces = (
            None if region is None else {c.piece for c in region.cells}
        )
        out = set()
        for i, m in enumerate(spec.members, start=1):
            if pieces is not None and i not in pieces:
                continue
            ratios = refinement_ratios(m)
            if ratios is None:
                return None
            out.update(ratios)
        tail_needed = spec.tail is not None and (
            pieces is None or any(p > len(spec.members) for p in pieces)
        )
        if tail_needed:
            ratios = refinement_ratios(spec.tail.base)
            if ratios is None:
                return None
            out.update(ratios)
        return sorted(out)
    return None


def check_valuation_certificate(
    spec: MeasureSpec, cert: ValuationCertificate
) -> bool:
    """True iff the certificate's three conditions hold, in which case no
    clopen subset of the region attains the target at any depth (every
    descendant mass keeps q-valuation >= threshold, and the ultrametric sum
    inequality pins every subset mass above the target's valuation)."""
    ratios = refinement_ratios(spec, cert.region)
    if ratios is None:
        raise CertificateError(
            "refinement ratios are not structurally enumerable for "
            f"{type(spec).__name__}"
        )
    for cid in cert.region.cells:
        mass = spec.cell(cid).mass
        if mass.is_infinite or vq(cert.q, mass.value) < cert.threshold:
            return False
    if any(vq(cert.q, r) < 0 for r in ratios):
        return False
    return vq(cert.q, cert.target) < cert.threshold


def synthesize_certificate(
    spec: MeasureSpec,
    region: CompactOpen,
    target: Rational,
    prime_bound: int = CERTIFICATE_PRIME_BOUND,
) -> Optional[ValuationCertificate]:
    """Scan small primes for a valuation obstruction to (region, target)."""
    target = as_rational(target)
    if target <= 0:
        return None
    masses = []
    for cid in region.cells:
        mass = spec.cell(cid).mass
        if mass.is_infinite:
            return None
        masses.append(mass.value)
    for q in range(2, prime_bound + 1):
        if not is_prime(q):
            continue
        k = min(vq(q, m) for m in masses)
        cert = ValuationCertificate(q, region, k, target)
        try:
            if check_valuation_certificate(spec, cert):
                return cert
        except CertificateError:
            return None
    return None


# ---------------------------------------------------------------------------
# Bounded-depth witness search.


def find_nongood_witness(
    spec: MeasureSpec,
    depth: int,
    piece_horizon: int = 6,
    budget: int = DEFAULT_BUDGET,
) -> Verdict:
    """Search candidate (region, target) pairs for a goodness failure.

    Candidates are ordered pairs (V, U) of single cells in breadth-first
    order (pieces up to the horizon, depth up to min(depth, 2)), with
    target = mass(U) < mass(V).  A candidate with a valid synthesized
    certificate is NotGood outright (the certificate rules out every
    depth); otherwise the carve gets a depth budget of depth + 4 plus the
    bit length of the mass ratio, a failed carve without a certificate
    leaves the search Unknown, and if every carve lands the verdict is
    ProbablyGood at this depth.
    """
    if depth < 1:
        raise DomainError("depth >= 1")
    candidate_depth = min(depth, 2)
    cells: list[Cell] = []
    for piece in spec.pieces(piece_horizon):
        if piece.defective:
            continue
        frontier = [piece]
        for _ in range(candidate_depth):
            cells.extend(frontier)
            frontier = [
                k for c in frontier for k in spec.children(c) if not k.defective
            ]
        cells.extend(frontier)
    cells.sort(key=lambda c: (c.id.depth, c.id))

    unresolved = None
    seen: set[tuple[CellId, Fraction]] = set()
    for big in cells:
        for small in cells:
            t = small.mass.value
            if not 0 < t < big.mass.value:
                continue
            if (big.id, t) in seen:
                continue
            seen.add((big.id, t))
            region = CompactOpen.of(big.id)
            cert = synthesize_certificate(spec, region, t)
            if cert is not None:
                # conclusive at every depth: no carve attempt needed
                return Verdict.not_good(
                    t,
                    region,
                    cert,
                    reason=f"no subset of {region} attains {t} "
                    f"(q={cert.q} valuation obstruction)",
                )
            # cross-piece targets can sit many levels below the region
            ratio = big.mass.value / t
            extra = (ratio.numerator // ratio.denominator).bit_length()
            got = carve(spec, region, t, depth + 4 + extra, budget)
            if isinstance(got, NotFound) and unresolved is None:
                unresolved = (region, t, got.depth)
    if unresolved is not None:
        region, t, d = unresolved
        return Verdict.unknown(
            f"carve of {t} inside {region} failed to depth {d} "
            "but no certificate was found"
        )
    return Verdict.probably_good(depth)


# ---------------------------------------------------------------------------
# Exact deciders.


def decide_bratteli_good(
    matrix: tuple[tuple[int, ...], ...],
    lam: int,
    x: tuple[Fraction, ...],
    alpha: Optional[frozenset[int]] = None,
) -> Verdict:
    """Goodness of the diagram measure on the full path space and on the
    one-point compactification of the distinguished-class subset (the two
    agree): Good iff some power lam**R carries the transient entry x_1 into
    the group generated by the class entries.

    The distinguished class defaults to all vertices but the first; exactly
    one transient vertex is required.
    """
    n = len(matrix)
    if alpha is None:
        alpha = frozenset(range(1, n))
    spec = StationaryBratteli(matrix, lam, tuple(x), DistinguishedClass(alpha))
    outside = [v for v in range(n) if v not in alpha]
    if len(outside) != 1:
        return Verdict.unknown(
            "criterion requires exactly one vertex outside the class"
        )
    x1 = spec.x[outside[0]]
    h = rational_gcd(spec.x[v] for v in sorted(alpha))
    ratio = x1 / h
    lam_primes = prime_support(lam) if lam > 1 else frozenset()
    den_primes = prime_support(ratio.denominator) if ratio.denominator > 1 else frozenset()
    if den_primes <= lam_primes:
        r = 0
        den = ratio.denominator
        power = 1
        while power % den != 0:
            power *= lam
            r += 1
        return Verdict.good(
            f"lam^{r} * x_1 = {lam**r * x1} lies in H = ({h})Z; the verdict "
            "covers both the full path space and the one-point "
            "compactification of the class subset"
        )
    missing = sorted(den_primes - lam_primes)
    return Verdict.not_good(
        x1,
        None,
        reason=f"x_1/h = {ratio} has denominator prime(s) {missing} that no "
        f"power of lam = {lam} cancels",
    )


def decide_product_good(
    group: DivisibleGroup,
    weights: ZWeights,
    inner_total: Optional[Fraction] = None,
) -> Verdict:
    """Product with a weighted counting measure on Z is good iff all weight
    ratios are divisors of the base value group (then C = weight(0) works).

    A failing ratio yields an explicit witness: a value contributed by one
    weight that no clopen subset of another weight's piece can attain,
    because the transported value leaves the group.  When the base space's
    total mass is supplied the witness target is shrunk to fit its region.
    """
    w0 = weights.weight(0)
    order = [0]
    for k in range(1, len(weights.cycle) + 1):
        order.extend([k, -k])
    order.extend(i for i, _ in weights.overrides if i not in order)
    for z in order:
        w = weights.weight(z)
        ratio = w / w0
        if group.is_divisor(ratio):
            continue
        # pick the direction whose transported target has a denominator
        # prime outside the group: target_weight/region_weight must have a
        # non-smooth denominator, which one of the two orientations does
        if not group.is_divisor(F(ratio.numerator)):
            region_piece, region_weight, target_weight = _spiral_piece(z), w, w0
        else:
            region_piece, region_weight, target_weight = 1, w0, w
        granule = group.scale
        if group.primes and inner_total is not None:
            p = min(group.primes)
            while target_weight * granule >= region_weight * inner_total:
                granule /= p
        return Verdict.not_good(
            target_weight * granule,
            CompactOpen.of(CellId(region_piece)),
            reason=f"weight ratio {w}/{w0} is not a divisor of {group}: "
            f"value {target_weight * granule} cannot be carved from the "
            f"weight-{region_weight} piece",
        )
    return Verdict.good(f"every weight ratio divides {group} (C = {w0})")


def _spiral_piece(z: int) -> int:
    return 2 * z if z > 0 else 1 - 2 * z


def goodness_verdict(spec: MeasureSpec) -> Verdict:
    """The structural exact decider: Good/NotGood where the theory covers
    the description, Unknown otherwise (search separately for witnesses)."""
    if isinstance(spec, Bernoulli):
        if len(set(spec.weights)) == 1:
            return Verdict.good("equidistributed Bernoulli is Haar")
        return Verdict.unknown("unequal Bernoulli weights have no structural decider")
    if isinstance(spec, PAdicHaar):
        return Verdict.good("Haar measure on the p-adics")
    if isinstance(spec, CF):
        return Verdict.good("(C,F) measures are products of equidistributions")
    if isinstance(spec, StationaryBratteli):
        if isinstance(spec.mode, DistinguishedClass):
            return Verdict.good(
                "invariant measures are good on the distinguished-class subset"
            )
        n = len(spec.matrix)
        if all(xv is not None for xv in spec.x):
            alpha = frozenset(range(1, n))
            try:
                StationaryBratteli(
                    spec.matrix, spec.lam, spec.x, DistinguishedClass(alpha)
                )
            except DomainError:
                return Verdict.unknown(
                    "full-diagram goodness is only decided for a single "
                    "transient vertex"
                )
            inner = decide_bratteli_good(spec.matrix, spec.lam, spec.x, alpha)
            return inner
        return Verdict.unknown("full diagrams of infinite measures undecided")
    if isinstance(spec, Scaled):
        inner = goodness_verdict(spec.inner)
        if inner.is_not_good:
            return _scale_witness(inner, spec.factor)
        return inner
    if isinstance(spec, Restricted):
        inner = goodness_verdict(spec.inner)
        if inner.is_good:
            return Verdict.good("restriction of a good measure")
        return Verdict.unknown(
            "restrictions are only structurally decided over good measures"
        )
    if isinstance(spec, DisjointUnion):
        parts = [goodness_verdict(m) for m in spec.members]
        if spec.tail is not None:
            first_tail = goodness_verdict(spec.tail.base)
            if first_tail.is_not_good:
                first_tail = _scale_witness(first_tail, spec.tail.factor(0))
            parts.append(first_tail)
        for i, part in enumerate(parts):
            if part.is_not_good:
                return _lift_witness(part, i + 1)
        if all(p.is_good for p in parts):
            return Verdict.good("disjoint union of good pieces (partition basis)")
        return Verdict.unknown("some union piece is undecided")
    if isinstance(spec, ProductCounting):
        from .values import value_group

        inner = goodness_verdict(spec.inner)
        if not inner.is_good:
            return Verdict.unknown("product base is not exactly good")
        group = value_group(spec.inner)
        if group is None:
            return Verdict.unknown("product base has no exact value group")
        return decide_product_good(
            group, spec.weights, inner_total=spec.inner.total_mass().value
        )
    return Verdict.unknown(f"no structural decider for {type(spec).__name__}")


def _shift_region(
    region: Optional[CompactOpen], piece: int
) -> Optional[CompactOpen]:
    if region is None:
        return None
    return CompactOpen(
        tuple(CellId(piece, c.path) for c in region.cells)
    )


def _scale_witness(verdict: Verdict, factor: Fraction) -> Verdict:
    """Transport a NotGood witness through mass scaling: the target scales;
    a valuation certificate's threshold shifts by vq(q, factor) (all three
    conditions shift uniformly)."""
    cert = verdict.certificate
    if cert is not None:
        shift = vq(cert.q, factor)
        cert = ValuationCertificate(
            cert.q, cert.region, cert.threshold + shift, cert.target * factor
        )
    return Verdict.not_good(
        verdict.target * factor,
        verdict.region,
        cert,
        reason=verdict.reason,
        new_values=verdict.new_values,
    )


def _lift_witness(verdict: Verdict, piece: int) -> Verdict:
    """Re-address a piece-local NotGood witness inside a disjoint union."""
    cert = verdict.certificate
    if cert is not None:
        cert = ValuationCertificate(
            cert.q,
            _shift_region(cert.region, piece),
            cert.threshold,
            cert.target,
        )
    return Verdict.not_good(
        verdict.target,
        _shift_region(verdict.region, piece),
        cert,
        reason=f"piece {piece} is not good: {verdict.reason}",
    )


# ---------------------------------------------------------------------------
# Compactifications.


def _class_tail_mass(
    spec: MeasureSpec, klass, total: ExtMass
) -> Optional[ExtMass]:
    if isinstance(klass, IndexClass):
        return spec.tail_mass(klass)
    if isinstance(klass, CarvedClass):
        return ExtMass.of(klass.limit)
    if isinstance(klass, RestClass):
        return None  # resolved by the caller against the total
    raise DomainError(f"unsupported tail class {klass!r}")


def decide_compactification_good(
    spec: MeasureSpec, comp: CompactificationSpec
) -> Verdict:
    """Goodness of the extension to the finite-remainder compactification.

    The extension preserves the value set iff every finite tail-class mass
    already lies in the value group (for one added point on a probability
    space this is the classical 1-in-G criterion; for an infinite locally
    finite measure and one added point it holds vacuously, every new clopen
    set having infinite mass).
    """
    if spec.piece_count() is not None:
        raise DomainError("compactification applies to non-compact spaces")
    base = goodness_verdict(spec)
    if base.is_not_good:
        return Verdict.not_good(
            base.target,
            base.region,
            base.certificate,
            reason="extensions of a non-good measure are never good",
        )
    if not base.is_good:
        return Verdict.unknown("base goodness is not exactly decided")
    from .values import value_group

    group = value_group(spec)
    if group is None:
        return Verdict.unknown("no exact value group for the base measure")
    total = spec.total_mass()

    tails: list[Optional[ExtMass]] = [
        _class_tail_mass(spec, klass, total) for klass in comp.classes
    ]
    if any(
        t is None and not isinstance(k, RestClass)
        for t, k in zip(tails, comp.classes)
    ):
        return Verdict.unknown("a tail class mass has no exact closed form")
    if not total.is_infinite:
        known = sum(
            (t.value for t in tails if t is not None), start=F(0)
        )
        tails = [
            ExtMass(total.value - known) if t is None else t for t in tails
        ]
    new_values = tuple(
        sorted({t.value for t in tails if t is not None and not t.is_infinite})
    )

    if total.is_infinite and spec.defective_descriptor().is_empty and comp.k == 1:
        return Verdict.good(
            "locally finite infinite measures are good on the one-point "
            "compactification: every new clopen set has infinite mass",
            new_values=(),
        )
    for klass, t in zip(comp.classes, tails):
        if t is None or t.is_infinite:
            continue
        if not group.contains(t.value):
            target = t.value
            if not total.is_infinite and target == total.value:
                # the whole compactified space attains this value; the
                # carveable failures are its complements total - gamma
                target = total.value - spec.root(1).mass.value
            region = _region_above(spec, target)
            return Verdict.not_good(
                target,
                region,
                reason=f"new clopen value {t.value} lies outside {group}",
                new_values=new_values,
            )
    if total.is_infinite and not spec.defective_descriptor().is_empty:
        return Verdict.unknown("base measure is not locally finite")
    return Verdict.good(
        "every finite tail class mass lies in the value group",
        new_values=new_values,
    )


def _region_above(spec: MeasureSpec, threshold: Fraction) -> CompactOpen:
    """A compact open union of leading pieces with mass exceeding the
    threshold (a genuine non-goodness witness region when the threshold is
    a new value outside the group: no subset anywhere has that mass)."""
    acc = F(0)
    cids = []
    i = 1
    while acc <= threshold:
        cell = spec.root(i)
        if not cell.mass.is_infinite:
            acc += cell.mass.value
        cids.append(cell.id)
        i += 1
    return CompactOpen(tuple(cids))


def compactified_value_sample(
    spec: MeasureSpec,
    comp: CompactificationSpec,
    depth: int,
    piece_horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> tuple[Fraction, ...]:
    """Value truncation of a finite measure extended to the compactified
    space: base values plus, for every nonempty set I of remainder points,
    the masses sum(tails over I) - (a value inside I's classes) + (a value
    outside), clipped to [0, total].  Exact by construction."""
    from itertools import combinations

    from .values import class_values

    total = spec.total_mass()
    if total.is_infinite:
        raise DomainError("sampling compactified values needs a finite total")
    if not all(isinstance(k, IndexClass) for k in comp.classes):
        raise DomainError("sampling needs index tail classes")
    bound = total.value
    tails = []
    for klass in comp.classes:
        t = spec.tail_mass(klass)
        if t is None or t.is_infinite:
            raise DomainError("tail class mass has no finite closed form")
        tails.append(t.value)
    per_class = [
        class_values(spec, klass, depth, piece_horizon, bound, budget)
        for klass in comp.classes
    ]
    out = set(
        enumerate_values(spec, depth, piece_horizon, bound, budget).values
    )
    idx = range(len(comp.classes))
    for r in range(1, len(comp.classes) + 1):
        for chosen in combinations(idx, r):
            t_sum = sum(tails[i] for i in chosen)
            inside = _sums(per_class, chosen, bound)
            outside = _sums(per_class, [i for i in idx if i not in chosen], bound)
            for a in inside:
                for b in outside:
                    v = t_sum - a + b
                    if 0 <= v <= bound:
                        out.add(v)
    return tuple(sorted(out))


def _sums(per_class, chosen, bound) -> set[Fraction]:
    acc = {F(0)}
    for i in chosen:
        acc = {s + v for s in acc for v in per_class[i] if s + v <= bound}
    return acc
