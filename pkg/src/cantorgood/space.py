"""Lazily refinable weighted forests over (locally) compact Cantor sets.

A measure description is a forest: a (finite or infinite) sequence of
compact root pieces, each of which refines deterministically into finitely
many children whose masses sum exactly to the parent's.  All arithmetic is
exact.  Cells are addressed by (piece index, child path); piece enumeration
order is part of the description, so every downstream computation is
reproducible from the cell addresses it reports.

Infinite-measure descriptions declare their piece-mass tails (eventually
geometric), which is what makes tail sums exact.  Defective cells (every
neighbourhood of infinite mass) are never refined into finite parts here;
the finite carving of Prop-style decompositions is exposed through the
piece enumeration of the complementary structure instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from .exactnum import (
    INFINITY,
    DomainError,
    ExtMass,
    Rational,
    as_rational,
    is_prime,
    sum_masses,
)

F = Fraction


# ---------------------------------------------------------------------------
# Cell addressing.


@dataclass(frozen=True, order=True)
class CellId:
    """Address of a compact open cylinder: root piece index (1-based) and
    the sequence of child indices leading down from it."""

    piece: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.piece < 1:
            raise DomainError("piece indices are 1-based")
        if any(i < 0 for i in self.path):
            raise DomainError("path entries are nonnegative")

    def child(self, i: int) -> "CellId":
        return CellId(self.piece, self.path + (i,))

    @property
    def depth(self) -> int:
        return len(self.path)

    def is_ancestor_of(self, other: "CellId") -> bool:
        return (
            self.piece == other.piece
            and len(self.path) < len(other.path)
            and other.path[: len(self.path)] == self.path
        )

    def __str__(self) -> str:
        return f"{self.piece}:" + ".".join(str(i) for i in self.path)

    @staticmethod
    def parse(text: str) -> "CellId":
        piece_part, _, path_part = text.partition(":")
        path = tuple(int(t) for t in path_part.split(".") if t != "")
        return CellId(int(piece_part), path)


@dataclass(frozen=True)
class Cell:
    id: CellId
    mass: ExtMass
    defective: bool = False

    def __post_init__(self) -> None:
        if self.defective and not self.mass.is_infinite:
            raise DomainError("defective cells have infinite mass")


@dataclass(frozen=True)
class CompactOpen:
    """A finite antichain of cell addresses; the represented set is the
    disjoint union of the addressed cylinders."""

    cells: tuple[CellId, ...]

    def __post_init__(self) -> None:
        cells = tuple(sorted(set(self.cells)))
        object.__setattr__(self, "cells", cells)
        for a, b in zip(cells, cells[1:]):
            if a.is_ancestor_of(b):
                raise DomainError(f"not an antichain: {a} contains {b}")

    @staticmethod
    def of(*cells: CellId) -> "CompactOpen":
        return CompactOpen(tuple(cells))

    @staticmethod
    def empty() -> "CompactOpen":
        return CompactOpen(())

    def __bool__(self) -> bool:
        return bool(self.cells)

    def union(self, other: "CompactOpen") -> "CompactOpen":
        return CompactOpen(self.cells + other.cells)

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self.cells) + "}"


# ---------------------------------------------------------------------------
# Defective-set taxonomy.


@dataclass(frozen=True)
class DefectiveDescriptor:
    """Canonical form of the finite taxonomy Empty | FinitePoints(n) |
    CantorSet | finite unions thereof.  Finitely many points merge by
    count; disjoint Cantor sets merge into one (their union is again a
    Cantor set).  Equality of canonical forms is the homeomorphism test at
    this taxonomy level."""

    points: int = 0
    cantor: bool = False

    def __post_init__(self) -> None:
        if self.points < 0:
            raise DomainError("point counts are nonnegative")

    @property
    def is_empty(self) -> bool:
        return self.points == 0 and not self.cantor

    def union(self, other: "DefectiveDescriptor") -> "DefectiveDescriptor":
        return DefectiveDescriptor(
            self.points + other.points, self.cantor or other.cantor
        )

    def __str__(self) -> str:
        if self.is_empty:
            return "Empty"
        parts = []
        if self.cantor:
            parts.append("CantorSet")
        if self.points:
            parts.append(f"FinitePoints({self.points})")
        return " + ".join(parts)


EMPTY_DESCRIPTOR = DefectiveDescriptor()
CANTOR_DESCRIPTOR = DefectiveDescriptor(cantor=True)


def finite_points(n: int) -> DefectiveDescriptor:
    if n < 1:
        raise DomainError("finite_points needs n >= 1")
    return DefectiveDescriptor(points=n)


# ---------------------------------------------------------------------------
# Piece-class descriptors (arguments of tail sums and compactifications).


@dataclass(frozen=True)
class IndexClass:
    """Piece indices i (1-based) with i mod modulus in residues."""

    modulus: int
    residues: frozenset[int]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise DomainError("modulus must be >= 1")
        residues = frozenset(r % self.modulus for r in self.residues)
        if not residues:
            raise DomainError("empty residue class")
        object.__setattr__(self, "residues", residues)

    def contains(self, index: int) -> bool:
        return index % self.modulus in self.residues

    def __str__(self) -> str:
        if self.modulus == 1:
            return "all"
        rs = ",".join(str(r) for r in sorted(self.residues))
        return f"{{i = {rs} mod {self.modulus}}}"


ALL_PIECES = IndexClass(1, frozenset({0}))


@dataclass(frozen=True)
class ExplicitIndices:
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(sorted(set(self.indices)))
        if not idx or idx[0] < 1:
            raise DomainError("piece indices are 1-based and nonempty")
        object.__setattr__(self, "indices", idx)

    def contains(self, index: int) -> bool:
        return index in self.indices

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"


PieceClass = Union[IndexClass, ExplicitIndices]


# ---------------------------------------------------------------------------
# Finite-remainder compactification descriptors.  Each tail class becomes one
# remainder point; the classes partition the pieces.


@dataclass(frozen=True)
class CarvedClass:
    """A tail class assembled by carving: an explicit prefix of disjoint
    regions whose masses increase to a certified limit (the construction
    continues the pattern; only the limit enters mass computations)."""

    regions: tuple["CompactOpen", ...]
    limit: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "limit", as_rational(self.limit))
        if self.limit < 0:
            raise DomainError("carved limits are nonnegative")


@dataclass(frozen=True)
class RestClass:
    """Everything not claimed by the other classes of the partition."""


TailClass = Union[IndexClass, CarvedClass, RestClass]


@dataclass(frozen=True)
class CompactificationSpec:
    """A finite-remainder compactification: k >= 1 tail classes, one added
    point each.  Index classes must partition the piece indices; a carved
    class is paired with the rest class."""

    classes: tuple[TailClass, ...]

    def __post_init__(self) -> None:
        if not self.classes:
            raise DomainError("a compactification has at least one class")
        index_classes = [c for c in self.classes if isinstance(c, IndexClass)]
        rest = [c for c in self.classes if isinstance(c, RestClass)]
        if len(rest) > 1:
            raise DomainError("at most one rest class")
        if len(index_classes) == len(self.classes):
            mod = math.lcm(*(c.modulus for c in index_classes))
            for i in range(1, mod + 1):
                hits = sum(1 for c in index_classes if c.contains(i))
                if hits != 1:
                    raise DomainError(
                        f"piece index {i} is covered {hits} times"
                    )
        elif not rest:
            raise DomainError("carved classes need an explicit rest class")

    @property
    def k(self) -> int:
        return len(self.classes)


def one_point_compactification() -> CompactificationSpec:
    return CompactificationSpec((ALL_PIECES,))


def two_point_by_parity() -> CompactificationSpec:
    """Odd-index pieces first (the class containing piece 1), then even."""
    return CompactificationSpec(
        (IndexClass(2, frozenset({1})), IndexClass(2, frozenset({0})))
    )


# ---------------------------------------------------------------------------
# Measure descriptions.


class MeasureSpec:
    """Base contract: deterministic pieces and refinement, exact masses."""

    def piece_count(self) -> Optional[int]:
        """Number of root pieces, or None when countably infinite."""
        raise NotImplementedError

    def root(self, piece: int) -> Cell:
        raise NotImplementedError

    def children(self, cell: Cell) -> list[Cell]:
        raise NotImplementedError

    def total_mass(self) -> ExtMass:
        raise NotImplementedError

    def defective_descriptor(self) -> DefectiveDescriptor:
        return EMPTY_DESCRIPTOR

    def tail_mass(self, klass: PieceClass) -> Optional[ExtMass]:
        """Exact sum of the piece masses in the class, or None (unknown)."""
        if isinstance(klass, ExplicitIndices):
            return sum_masses(self.root(i).mass for i in self._clip(klass.indices))
        return self._class_mass(klass)

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        n = self.piece_count()
        if n is not None:
            return sum_masses(
                self.root(i).mass for i in range(1, n + 1) if klass.contains(i)
            )
        return None

    def _clip(self, indices: Sequence[int]) -> list[int]:
        n = self.piece_count()
        if n is None:
            return list(indices)
        return [i for i in indices if i <= n]

    @property
    def compact(self) -> bool:
        n = self.piece_count()
        return n is not None and n == 1 and not self.root(1).mass.is_infinite

    # -- shared walking machinery ------------------------------------------

    def cell(self, cid: CellId) -> Cell:
        n = self.piece_count()
        if n is not None and cid.piece > n:
            raise DomainError(f"piece {cid.piece} does not exist")
        cell = self.root(cid.piece)
        for step in cid.path:
            kids = self.children(cell)
            if step >= len(kids):
                raise DomainError(f"no child {step} under {cell.id}")
            cell = kids[step]
        return cell

    def pieces(self, count: int) -> list[Cell]:
        if count < 1:
            raise DomainError("piece count must be >= 1")
        n = self.piece_count()
        upto = count if n is None else min(count, n)
        return [self.root(i) for i in range(1, upto + 1)]

    def refine(self, cid: CellId) -> list[Cell]:
        cell = self.cell(cid)
        if cell.defective:
            raise DomainError(
                "defective cells are not refined; enumerate the "
                "complementary structure's pieces instead"
            )
        return self.children(cell)

    def mass_of(self, u: CompactOpen) -> ExtMass:
        return sum_masses(self.cell(c).mass for c in u.cells)


def _positive(x: Rational, what: str) -> Fraction:
    x = as_rational(x)
    if x <= 0:
        raise DomainError(f"{what} must be positive")
    return x


# -- Bernoulli ---------------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli(MeasureSpec):
    """Product measure on a one-sided shift space with the given letter
    weights; compact, probability."""

    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        ws = tuple(_positive(w, "Bernoulli weight") for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if len(ws) < 2:
            raise DomainError("need at least two letters")
        if sum(ws) != 1:
            raise DomainError("Bernoulli weights must sum to 1")

    def piece_count(self) -> Optional[int]:
        return 1

    def root(self, piece: int) -> Cell:
        if piece != 1:
            raise DomainError("Bernoulli space is a single compact piece")
        return Cell(CellId(1), ExtMass.of(1))

    def children(self, cell: Cell) -> list[Cell]:
        m = cell.mass.value
        return [
            Cell(cell.id.child(i), ExtMass(m * w)) for i, w in enumerate(self.weights)
        ]

    def total_mass(self) -> ExtMass:
        return ExtMass.of(1)


def equidistributed(k: int) -> Bernoulli:
    """The fair k-letter Bernoulli measure (a k-adic odometer's Haar side)."""
    if k < 2:
        raise DomainError("need k >= 2")
    return Bernoulli(tuple(F(1, k) for _ in range(k)))


# -- p-adic Haar ---------------------------------------------------------------


@dataclass(frozen=True)
class PAdicHaar(MeasureSpec):
    """Haar measure on the p-adic numbers, presented as a forest of balls:
    piece 1 is the unit ball, piece n >= 2 the n-th norm shell."""

    p: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise DomainError(f"{self.p} is not prime")

    def piece_count(self) -> Optional[int]:
        return None

    def root(self, piece: int) -> Cell:
        if piece == 1:
            return Cell(CellId(1), ExtMass.of(1))
        mass = F(self.p - 1) * F(self.p) ** (piece - 2)
        return Cell(CellId(piece), ExtMass(mass))

    def children(self, cell: Cell) -> list[Cell]:
        p = self.p
        if cell.id.piece >= 2 and cell.id.depth == 0:
            # a shell splits into its p-1 maximal balls
            m = cell.mass.value / (p - 1)
            return [Cell(cell.id.child(i), ExtMass(m)) for i in range(p - 1)]
        m = cell.mass.value / p
        return [Cell(cell.id.child(i), ExtMass(m)) for i in range(p)]

    def total_mass(self) -> ExtMass:
        return INFINITY

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        # shell masses grow geometrically: any infinite class diverges
        return INFINITY


# -- stationary Bratteli diagrams ---------------------------------------------


@dataclass(frozen=True)
class FullDiagram:
    def __str__(self) -> str:
        return "full"


@dataclass(frozen=True)
class DistinguishedClass:
    """Vertices (0-based) of the absorbing class whose entering cylinders
    enumerate the generating open dense subset."""

    vertices: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        if not self.vertices:
            raise DomainError("distinguished class is nonempty")

    def __str__(self) -> str:
        return "class{" + ",".join(str(v) for v in sorted(self.vertices)) + "}"


BratteliMode = Union[FullDiagram, DistinguishedClass]


@dataclass(frozen=True)
class StationaryBratteli(MeasureSpec):
    """Invariant measure on a stationary diagram's path space, given by the
    matrix A (transpose of the incidence matrix), an eigenvalue lam and the
    eigenvector x:  a level-n cylinder ending at vertex v has mass
    x_v * lam**-n, and refines into A[v][w] children at each vertex w.

    x entries may be None: those vertices carry infinite mass (defective
    roots).  The eigen-identity lam*x = A*x is enforced exactly on the
    supported rows, which therefore may not reach unsupported vertices.
    """

    matrix: tuple[tuple[int, ...], ...]
    lam: int
    x: tuple[Optional[Fraction], ...]
    mode: BratteliMode = field(default_factory=FullDiagram)

    def __post_init__(self) -> None:
        a = tuple(tuple(int(e) for e in row) for row in self.matrix)
        object.__setattr__(self, "matrix", a)
        n = len(a)
        if n == 0 or any(len(row) != n for row in a):
            raise DomainError("matrix must be square and nonempty")
        if any(e < 0 for row in a for e in row):
            raise DomainError("matrix entries are nonnegative")
        if self.lam < 1:
            raise DomainError("lambda must be a positive integer")
        x = tuple(
            None if xv is None else _positive(xv, "eigenvector entry")
            for xv in self.x
        )
        object.__setattr__(self, "x", x)
        if len(x) != n:
            raise DomainError("eigenvector length must match the matrix")
        supported = [v for v in range(n) if x[v] is not None]
        if not supported:
            raise DomainError("at least one vertex must carry finite mass")
        for v in supported:
            acc = F(0)
            for w in range(n):
                if a[v][w] == 0:
                    continue
                if x[w] is None:
                    raise DomainError(
                        f"finite vertex {v} refines into infinite vertex {w}"
                    )
                acc += a[v][w] * x[w]
            if acc != self.lam * x[v]:
                raise DomainError("lam*x = A*x fails on row %d" % v)
        for v in range(n):
            if x[v] is None and not any(
                a[v][w] >= 1 and x[w] is None for w in range(n)
            ):
                raise DomainError(
                    f"infinite vertex {v} has no infinite continuation"
                )
        if isinstance(self.mode, DistinguishedClass):
            alpha = self.mode.vertices
            if not alpha <= set(range(n)):
                raise DomainError("class vertices out of range")
            if any(x[v] is None for v in alpha):
                raise DomainError("class vertices must carry finite mass")
            for v in alpha:
                for w in range(n):
                    if a[v][w] >= 1 and w not in alpha:
                        raise DomainError("distinguished class must be absorbing")

    # -- helpers ---------------------------------------------------------

    @property
    def _n(self) -> int:
        return len(self.matrix)

    def _supported(self, v: int) -> bool:
        return self.x[v] is not None

    def _child_slots(self, v: int) -> list[int]:
        """Vertex of each child of a vertex-v cell, in child order."""
        slots = []
        for w in range(self._n):
            slots.extend([w] * self.matrix[v][w])
        return slots

    def _cell_vertex_level(self, cid: CellId) -> tuple[int, int]:
        v, level = self._root_vertex_level(cid.piece)
        for step in cid.path:
            slots = self._child_slots(v)
            if step >= len(slots):
                raise DomainError(f"no child {step} under vertex {v}")
            v = slots[step]
            level += 1
        return v, level

    def _root_vertex_level(self, piece: int) -> tuple[int, int]:
        if isinstance(self.mode, FullDiagram):
            if piece > self._n:
                raise DomainError(f"piece {piece} does not exist")
            return piece - 1, 0
        level, _chain, v = self._entry(piece)
        return v, level

    # entering-cylinder enumeration for the distinguished-class mode:
    # entry level ascending, then vertex chain lexicographic, then edge
    # combination index (mixed radix over the chain's edge multiplicities).

    def _entries(self) -> Iterator[tuple[int, tuple[int, ...], int]]:
        alpha = self.mode.vertices  # type: ignore[union-attr]
        outside = [v for v in range(self._n) if v not in alpha]
        for v in sorted(alpha):
            yield (0, (v,), v)
        level = 1
        while True:
            produced = False
            for prefix in itertools.product(sorted(outside), repeat=level):
                ok = all(
                    self.matrix[a][b] >= 1 for a, b in zip(prefix, prefix[1:])
                )
                if not ok:
                    continue
                for v in sorted(alpha):
                    if self.matrix[prefix[-1]][v] < 1:
                        continue
                    chain = prefix + (v,)
                    copies = math.prod(
                        self.matrix[a][b] for a, b in zip(chain, chain[1:])
                    )
                    for _ in range(copies):
                        produced = True
                        yield (level, chain, v)
            if not produced:
                # a level-(l+1) entering chain has a level-l entering chain
                # as suffix, so an empty level ends the enumeration
                return
            level += 1

    def _entry(self, piece: int) -> tuple[int, tuple[int, ...], int]:
        for i, entry in enumerate(self._entries(), start=1):
            if i == piece:
                return entry
        raise DomainError(f"piece {piece} does not exist")

    # -- MeasureSpec interface -------------------------------------------

    def piece_count(self) -> Optional[int]:
        if isinstance(self.mode, FullDiagram):
            return self._n
        alpha = self.mode.vertices
        outside = [v for v in range(self._n) if v not in alpha]
        # infinitely many entering cylinders iff the outside subgraph has a
        # cycle from which the class is reachable
        reach = {
            u: {w for w in outside if self.matrix[u][w] >= 1} for u in outside
        }
        changed = True
        while changed:
            changed = False
            for u in outside:
                grown = set(reach[u])
                for w in reach[u]:
                    grown |= reach[w]
                if grown != reach[u]:
                    reach[u] = grown
                    changed = True
        hits_alpha = {
            u
            for u in outside
            if any(self.matrix[u][v] >= 1 for v in alpha)
        }
        for u in outside:
            on_cycle = u in reach[u]
            if on_cycle and (u in hits_alpha or reach[u] & hits_alpha):
                return None
        return sum(1 for _ in self._entries())

    def root(self, piece: int) -> Cell:
        v, level = self._root_vertex_level(piece)
        cid = CellId(piece)
        if not self._supported(v):
            return Cell(cid, INFINITY, defective=True)
        mass = self.x[v] / F(self.lam) ** level
        return Cell(cid, ExtMass(mass))

    def children(self, cell: Cell) -> list[Cell]:
        if cell.defective:
            raise DomainError("defective cells are not refined")
        v, level = self._cell_vertex_level(cell.id)
        out = []
        for i, w in enumerate(self._child_slots(v)):
            cid = cell.id.child(i)
            if self._supported(w):
                mass = self.x[w] / F(self.lam) ** (level + 1)
                out.append(Cell(cid, ExtMass(mass)))
            else:
                out.append(Cell(cid, INFINITY, defective=True))
        return out

    def total_mass(self) -> ExtMass:
        if isinstance(self.mode, FullDiagram):
            if any(xv is None for xv in self.x):
                return INFINITY
            return ExtMass(sum(self.x))
        return self._distinguished_total()

    def _distinguished_total(self) -> ExtMass:
        alpha = sorted(self.mode.vertices)  # type: ignore[union-attr]
        outside = [v for v in range(self._n) if v not in alpha]
        base = sum(self.x[v] for v in alpha)
        if not outside:
            return ExtMass(base)
        # level sums: 1^T (M/lam)^(l-1) B x_alpha / lam over l >= 1, where M
        # is the outside block and B the outside->alpha block.  The series
        # converges iff (I - M/lam) is inverse-positive (an M-matrix test).
        m = [[F(self.matrix[u][w], self.lam) for w in outside] for u in outside]
        b = [
            sum(F(self.matrix[u][v]) * (self.x[v] or F(0)) for v in alpha)
            / self.lam
            for u in outside
        ]
        inv = _inverse_of_i_minus(m)
        if inv is None:
            return INFINITY
        total = base
        for i in range(len(outside)):
            for j in range(len(outside)):
                total += inv[i][j] * b[j]
        return ExtMass(total)

    def defective_descriptor(self) -> DefectiveDescriptor:
        if isinstance(self.mode, DistinguishedClass):
            return EMPTY_DESCRIPTOR
        bad = [v for v in range(self._n) if self.x[v] is None]
        if not bad:
            return EMPTY_DESCRIPTOR
        degrees = [
            sum(self.matrix[v][w] for w in bad) for v in bad
        ]
        if any(d >= 2 for d in degrees):
            return CANTOR_DESCRIPTOR
        return finite_points(len(bad))

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        if klass.modulus == 1 and isinstance(self.mode, DistinguishedClass):
            return self.total_mass()
        return super()._class_mass(klass)


def _inverse_of_i_minus(m: list[list[Fraction]]) -> Optional[list[list[Fraction]]]:
    """(I - M)^-1 by exact Gaussian elimination, or None unless the inverse
    exists and is entrywise nonnegative (iff the Neumann series converges)."""
    n = len(m)
    a = [
        [(F(1) if i == j else F(0)) - m[i][j] for j in range(n)]
        + [F(1) if k == i else F(0) for k in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [e / pv for e in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [e - factor * c for e, c in zip(a[r], a[col])]
    inv = [row[n:] for row in a]
    if any(e < 0 for row in inv for e in row):
        return None
    return inv


# -- (C,F)-construction --------------------------------------------------------


@dataclass(frozen=True)
class CF(MeasureSpec):
    """Inductive-limit space of the (C,F)-construction, described at the
    cardinality level: piece n is the part of X_n new over X_{n-1}, carrying
    |F_n| - |F_{n-1}|*|C_n| point cylinders of mass 1/(|C_1|...|C_n|) each.
    Beyond the declared prefix the sizes continue with |C| constant and
    minimal |F| growth, so the total mass is an exact geometric sum."""

    f_sizes: tuple[int, ...]
    c_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        fs = tuple(int(v) for v in self.f_sizes)
        cs = tuple(int(v) for v in self.c_sizes)
        object.__setattr__(self, "f_sizes", fs)
        object.__setattr__(self, "c_sizes", cs)
        if not fs or len(fs) != len(cs):
            raise DomainError("need matching nonempty size sequences")
        if any(c < 2 for c in cs):
            raise DomainError("|C_n| > 1 is required")
        if fs[0] < 1:
            raise DomainError("|F_1| >= 1 is required")
        for n in range(1, len(fs)):
            if fs[n] < fs[n - 1] * cs[n] + 2:
                raise DomainError(
                    "containment needs |F_%d| >= |F_%d|*|C_%d| + 2"
                    % (n + 1, n, n + 1)
                )

    def _c(self, n: int) -> int:
        """|C_n| for n >= 1 (constant beyond the declared prefix)."""
        return self.c_sizes[n - 1] if n <= len(self.c_sizes) else self.c_sizes[-1]

    def _f(self, n: int) -> int:
        if n <= len(self.f_sizes):
            return self.f_sizes[n - 1]
        return self._f(n - 1) * self._c(n) + 2

    def _prod_c(self, n: int) -> int:
        return math.prod(self._c(k) for k in range(1, n + 1))

    def _new_points(self, n: int) -> int:
        if n == 1:
            return self._f(1)
        return self._f(n) - self._f(n - 1) * self._c(n)

    def piece_count(self) -> Optional[int]:
        return None

    def root(self, piece: int) -> Cell:
        mass = F(self._new_points(piece), self._prod_c(piece))
        return Cell(CellId(piece), ExtMass(mass))

    def children(self, cell: Cell) -> list[Cell]:
        n = cell.id.piece
        if cell.id.depth == 0:
            k = self._new_points(n)
            m = cell.mass.value / k
            return [Cell(cell.id.child(i), ExtMass(m)) for i in range(k)]
        level = n + cell.id.depth - 1
        c = self._c(level + 1)
        m = cell.mass.value / c
        return [Cell(cell.id.child(i), ExtMass(m)) for i in range(c)]

    def total_mass(self) -> ExtMass:
        k = len(self.f_sizes)
        c_inf = self.c_sizes[-1]
        # lim |F_n| / prod = declared end value + 2 * sum of later 1/prod
        end = F(self._f(k), self._prod_c(k))
        tail = F(2, self._prod_c(k)) * F(1, c_inf - 1)
        return ExtMass(end + tail)

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        k = len(self.f_sizes)
        head = sum_masses(
            self.root(i).mass for i in range(1, k + 1) if klass.contains(i)
        )
        # beyond the prefix the piece masses are 2/prod_c(n): geometric
        c_inf = F(self.c_sizes[-1])
        start = F(2, self._prod_c(k + 1))
        acc = F(0)
        for r in range(klass.modulus):
            idx = k + 1 + r
            if not klass.contains(idx):
                continue
            first = start / c_inf**r
            acc += first / (1 - c_inf**-klass.modulus)
        return head + ExtMass(acc)


# -- wrappers -------------------------------------------------------------------


@dataclass(frozen=True)
class Scaled(MeasureSpec):
    """The measure factor * inner on the same space."""

    factor: Fraction
    inner: MeasureSpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor", _positive(self.factor, "scale factor"))

    def piece_count(self) -> Optional[int]:
        return self.inner.piece_count()

    def root(self, piece: int) -> Cell:
        c = self.inner.root(piece)
        return Cell(c.id, c.mass.scaled(self.factor), c.defective)

    def children(self, cell: Cell) -> list[Cell]:
        inner_cell = Cell(cell.id, cell.mass.scaled(1 / self.factor), cell.defective)
        kids = self.inner.children(inner_cell)
        return [Cell(k.id, k.mass.scaled(self.factor), k.defective) for k in kids]

    def total_mass(self) -> ExtMass:
        return self.inner.total_mass().scaled(self.factor)

    def defective_descriptor(self) -> DefectiveDescriptor:
        return self.inner.defective_descriptor()

    def tail_mass(self, klass: PieceClass) -> Optional[ExtMass]:
        t = self.inner.tail_mass(klass)
        return None if t is None else t.scaled(self.factor)


@dataclass(frozen=True)
class Restricted(MeasureSpec):
    """The measure restricted to a compact open subset of the inner space;
    piece i re-roots the i-th cell of the subset (in address order)."""

    inner: MeasureSpec
    within: CompactOpen

    def __post_init__(self) -> None:
        if not self.within.cells:
            raise DomainError("restriction to the empty set")
        for cid in self.within.cells:
            if self.inner.cell(cid).mass.is_infinite:
                raise DomainError("restriction cells must have finite mass")

    def _inner_id(self, cid: CellId) -> CellId:
        base = self.within.cells[cid.piece - 1]
        return CellId(base.piece, base.path + cid.path)

    def piece_count(self) -> Optional[int]:
        return len(self.within.cells)

    def root(self, piece: int) -> Cell:
        if not 1 <= piece <= len(self.within.cells):
            raise DomainError(f"piece {piece} does not exist")
        inner_cell = self.inner.cell(self.within.cells[piece - 1])
        return Cell(CellId(piece), inner_cell.mass)

    def children(self, cell: Cell) -> list[Cell]:
        inner_cell = Cell(self._inner_id(cell.id), cell.mass, cell.defective)
        inner_kids = self.inner.children(inner_cell)
        return [
            Cell(cell.id.child(i), k.mass, k.defective)
            for i, k in enumerate(inner_kids)
        ]

    def total_mass(self) -> ExtMass:
        return self.inner.mass_of(self.within)


@dataclass(frozen=True)
class GeometricTail:
    """Pieces factor[j mod P] * ratio**(j div P) * base for j = 0, 1, ..."""

    base: MeasureSpec
    factors: tuple[Fraction, ...]
    ratio: Fraction

    def __post_init__(self) -> None:
        fs = tuple(_positive(f, "tail factor") for f in self.factors)
        object.__setattr__(self, "factors", fs)
        object.__setattr__(self, "ratio", _positive(self.ratio, "tail ratio"))
        if not fs:
            raise DomainError("tail needs at least one factor")
        if not _compact_unit(self.base):
            raise DomainError("tail base must be a compact single-piece spec")

    def factor(self, j: int) -> Fraction:
        p = len(self.factors)
        return self.factors[j % p] * self.ratio ** (j // p)

    def spec(self, j: int) -> MeasureSpec:
        return Scaled(self.factor(j), self.base)

    def sum_over(self, klass: IndexClass, offset: int) -> ExtMass:
        """Exact sum of factor(j) * base_total over tail positions j whose
        1-based piece index offset + 1 + j lies in the class."""
        base_total = self.base.total_mass().value
        p = len(self.factors)
        big = p * klass.modulus // math.gcd(p, klass.modulus)
        ratio_big = self.ratio ** (big // p)
        acc = F(0)
        hit = False
        for s in range(big):
            if not klass.contains(offset + 1 + s):
                continue
            hit = True
            if self.ratio >= 1:
                return INFINITY
            acc += self.factor(s) / (1 - ratio_big)
        if not hit:
            return ExtMass(F(0))
        return ExtMass(acc * base_total)

    def total(self) -> ExtMass:
        return self.sum_over(ALL_PIECES, 0)


def _compact_unit(spec: MeasureSpec) -> bool:
    return spec.piece_count() == 1 and not spec.root(1).mass.is_infinite


@dataclass(frozen=True)
class DisjointUnion(MeasureSpec):
    """Countable disjoint union: a declared prefix of compact single-piece
    members followed by an optional geometric tail."""

    members: tuple[MeasureSpec, ...]
    tail: Optional[GeometricTail] = None

    def __post_init__(self) -> None:
        for m in self.members:
            if not _compact_unit(m):
                raise DomainError("union members must be compact single-piece specs")
        if not self.members and self.tail is None:
            raise DomainError("empty disjoint union")

    def _piece_spec(self, piece: int) -> MeasureSpec:
        k = len(self.members)
        if piece <= k:
            return self.members[piece - 1]
        if self.tail is None:
            raise DomainError(f"piece {piece} does not exist")
        return self.tail.spec(piece - k - 1)

    def piece_count(self) -> Optional[int]:
        return None if self.tail is not None else len(self.members)

    def root(self, piece: int) -> Cell:
        if piece < 1:
            raise DomainError("piece indices are 1-based")
        sub = self._piece_spec(piece)
        return Cell(CellId(piece), sub.root(1).mass)

    def children(self, cell: Cell) -> list[Cell]:
        sub = self._piece_spec(cell.id.piece)
        inner = Cell(CellId(1, cell.id.path), cell.mass, cell.defective)
        kids = sub.children(inner)
        return [
            Cell(cell.id.child(i), k.mass, k.defective) for i, k in enumerate(kids)
        ]

    def total_mass(self) -> ExtMass:
        head = sum_masses(m.total_mass() for m in self.members)
        if self.tail is None:
            return head
        return head + self.tail.total()

    def defective_descriptor(self) -> DefectiveDescriptor:
        out = EMPTY_DESCRIPTOR
        for m in self.members:
            out = out.union(m.defective_descriptor())
        return out

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        k = len(self.members)
        head = sum_masses(
            self.members[i - 1].total_mass()
            for i in range(1, k + 1)
            if klass.contains(i)
        )
        if self.tail is None:
            return head
        return head + self.tail.sum_over(klass, k)


@dataclass(frozen=True)
class ZWeights:
    """A positive weight for every integer: periodic cycle values with
    finitely many per-integer overrides."""

    cycle: tuple[Fraction, ...]
    overrides: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        cyc = tuple(_positive(w, "weight") for w in self.cycle)
        object.__setattr__(self, "cycle", cyc)
        if not cyc:
            raise DomainError("weight cycle is nonempty")
        ov = tuple(
            sorted((int(i), _positive(w, "weight")) for i, w in self.overrides)
        )
        object.__setattr__(self, "overrides", ov)
        if len({i for i, _ in ov}) != len(ov):
            raise DomainError("duplicate weight override")

    def weight(self, z: int) -> Fraction:
        for i, w in self.overrides:
            if i == z:
                return w
        return self.cycle[z % len(self.cycle)]

    def distinct(self) -> list[Fraction]:
        return sorted(set(self.cycle) | {w for _, w in self.overrides})


ALL_ONES = ZWeights((F(1),))


def spiral_integer(piece: int) -> int:
    """Piece index (1-based) to integer: 1,2,3,4,5,... -> 0,1,-1,2,-2,..."""
    if piece < 1:
        raise DomainError("piece indices are 1-based")
    return piece // 2 if piece % 2 == 0 else -(piece // 2)


@dataclass(frozen=True)
class ProductCounting(MeasureSpec):
    """inner x (weighted counting measure on Z): piece n is a copy of the
    compact inner space over the integer spiral_integer(n), scaled by its
    weight.  Always an infinite, locally finite measure."""

    inner: MeasureSpec
    weights: ZWeights = field(default_factory=lambda: ALL_ONES)

    def __post_init__(self) -> None:
        if not _compact_unit(self.inner):
            raise DomainError("product base must be a compact single-piece spec")

    def _piece_spec(self, piece: int) -> MeasureSpec:
        w = self.weights.weight(spiral_integer(piece))
        return Scaled(w, self.inner)

    def piece_count(self) -> Optional[int]:
        return None

    def root(self, piece: int) -> Cell:
        return Cell(CellId(piece), self._piece_spec(piece).root(1).mass)

    def children(self, cell: Cell) -> list[Cell]:
        sub = self._piece_spec(cell.id.piece)
        inner = Cell(CellId(1, cell.id.path), cell.mass, cell.defective)
        kids = sub.children(inner)
        return [
            Cell(cell.id.child(i), k.mass, k.defective) for i, k in enumerate(kids)
        ]

    def total_mass(self) -> ExtMass:
        return INFINITY

    def _class_mass(self, klass: IndexClass) -> Optional[ExtMass]:
        # periodic positive weights: every infinite index class diverges
        return INFINITY


# ---------------------------------------------------------------------------
# Module-level operation surface.


def pieces(spec: MeasureSpec, count: int) -> list[Cell]:
    return spec.pieces(count)


def refine(spec: MeasureSpec, cell: CellId) -> list[Cell]:
    return spec.refine(cell)


def mass_of(spec: MeasureSpec, u: CompactOpen) -> ExtMass:
    return spec.mass_of(u)


def tail_mass(spec: MeasureSpec, klass: PieceClass) -> Optional[ExtMass]:
    return spec.tail_mass(klass)


def total_mass(spec: MeasureSpec) -> ExtMass:
    return spec.total_mass()


def defective_descriptor(spec: MeasureSpec) -> DefectiveDescriptor:
    return spec.defective_descriptor()


def descend_frontier(
    spec: MeasureSpec, cid: CellId, depth: int, budget: Optional[int] = None
) -> list[Cell]:
    """All depth-`depth` descendants of a cell (finite ones only; defective
    branches are skipped, their finite content is not reachable by refine)."""
    cell = spec.cell(cid)
    if cell.defective:
        return []
    frontier = [cell]
    for _ in range(depth):
        nxt: list[Cell] = []
        for c in frontier:
            for k in spec.children(c):
                if not k.defective:
                    nxt.append(k)
            if budget is not None and len(nxt) > budget:
                raise BudgetError(
                    f"frontier under {cid} exceeds budget {budget}"
                )
        frontier = nxt
    return frontier


def complement_within(
    spec: MeasureSpec, region: CompactOpen, sub: CompactOpen
) -> CompactOpen:
    """region minus sub, as an antichain; sub's cells must descend from
    (or equal) region's cells."""
    region_cells = set(region.cells)
    for s in sub.cells:
        if s not in region_cells and not any(
            r.is_ancestor_of(s) for r in region.cells
        ):
            raise DomainError(f"{s} does not lie inside the region")
    out: list[CellId] = []

    def walk(cell_id: CellId) -> None:
        inside = [s for s in sub.cells if s == cell_id or cell_id.is_ancestor_of(s)]
        if not inside:
            out.append(cell_id)
            return
        if cell_id in inside:
            return
        for kid in spec.refine(cell_id):
            walk(kid.id)

    for r in region.cells:
        walk(r)
    return CompactOpen(tuple(out))


class BudgetError(RuntimeError):
    """A declared enumeration budget was exceeded (never silent truncation)."""
