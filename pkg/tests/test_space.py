from fractions import Fraction

import pytest

from cantorgood import catalog
from cantorgood.exactnum import INFINITY, DomainError, ExtMass
from cantorgood.space import (
    ALL_PIECES,
    CANTOR_DESCRIPTOR,
    EMPTY_DESCRIPTOR,
    CellId,
    CompactOpen,
    DisjointUnion,
    DistinguishedClass,
    ExplicitIndices,
    FullDiagram,
    GeometricTail,
    IndexClass,
    PAdicHaar,
    ProductCounting,
    Restricted,
    Scaled,
    StationaryBratteli,
    Bernoulli,
    complement_within,
    defective_descriptor,
    descend_frontier,
    finite_points,
    mass_of,
    pieces,
    refine,
    tail_mass,
    total_mass,
)

F = Fraction
ODD = IndexClass(2, frozenset({1}))
EVEN = IndexClass(2, frozenset({0}))


def cyl(piece: int, word: str = "") -> CellId:
    return CellId(piece, tuple(int(ch) for ch in word))


# -- pieces -------------------------------------------------------------------


def test_pieces_example2_forest():
    cells = pieces(catalog.example2_forest(), 3)
    assert [c.mass.value for c in cells] == [F(1, 2), F(1, 4), F(1, 8)]


def test_pieces_padic_unit_ball():
    cells = pieces(PAdicHaar(3), 1)
    assert len(cells) == 1 and cells[0].mass.value == 1


def test_pieces_bernoulli_single_root():
    cells = pieces(catalog.bernoulli_13_23(), 5)
    assert len(cells) == 1 and cells[0].mass.value == 1


# -- refine -------------------------------------------------------------------


def test_refine_bernoulli_root():
    kids = refine(catalog.bernoulli_13_23(), cyl(1))
    assert [k.mass.value for k in kids] == [F(1, 3), F(2, 3)]


def test_refine_bratteli_vertex_cell():
    spec = catalog.fn_bratteli(3, FullDiagram())
    # root piece 2 sits at vertex 1 with mass x_2 = 1/3
    root = spec.root(2)
    assert root.mass.value == F(1, 3)
    kids = refine(spec, root.id)
    assert sum(k.mass.value for k in kids) == F(1, 3)
    # A = F_3^T has row (0, 3, 1) at vertex 1: four children
    assert len(kids) == 4


def test_refine_padic_unit_ball():
    kids = refine(PAdicHaar(5), cyl(1))
    assert [k.mass.value for k in kids] == [F(1, 5)] * 5


def test_refine_unknown_cell_rejected():
    with pytest.raises(DomainError):
        refine(catalog.dyadic_bernoulli(), CellId(1, (7,)))
    with pytest.raises(DomainError):
        refine(catalog.dyadic_bernoulli(), CellId(2))


# -- mass_of ------------------------------------------------------------------


def test_mass_of_bernoulli_antichain():
    spec = catalog.bernoulli_13_23()
    u = CompactOpen.of(cyl(1, "0"), cyl(1, "10"))
    assert mass_of(spec, u).value == F(5, 9)


def test_mass_of_empty_is_zero():
    assert mass_of(catalog.dyadic_bernoulli(), CompactOpen.empty()).value == 0


def test_mass_of_forest_pieces():
    spec = catalog.example2_forest()
    u = CompactOpen.of(cyl(1), cyl(2))
    assert mass_of(spec, u).value == F(3, 4)


def test_mass_of_refinement_invariance():
    spec = catalog.bernoulli_13_23()
    u = CompactOpen.of(cyl(1, "0"), cyl(1, "10"))
    refined = CompactOpen.of(cyl(1, "00"), cyl(1, "01"), cyl(1, "10"))
    assert mass_of(spec, u) == mass_of(spec, refined)


def test_compact_open_antichain_enforced():
    with pytest.raises(DomainError):
        CompactOpen.of(cyl(1, "0"), cyl(1, "01"))


# -- tail_mass ----------------------------------------------------------------


def test_tail_mass_example2():
    spec = catalog.example2_forest()
    assert tail_mass(spec, ODD).value == F(2, 3)
    assert tail_mass(spec, ALL_PIECES).value == 1
    assert tail_mass(spec, EVEN).value == F(1, 3)


def test_tail_mass_balanced_split():
    spec = catalog.example2_balanced()
    assert tail_mass(spec, ODD).value == F(1, 2)
    assert tail_mass(spec, EVEN).value == F(1, 2)


def test_tail_mass_explicit_indices():
    spec = catalog.example2_forest()
    assert tail_mass(spec, ExplicitIndices((1, 3))).value == F(1, 2) + F(1, 8)


def test_tail_mass_divergent_classes():
    assert tail_mass(PAdicHaar(5), ODD).is_infinite
    assert tail_mass(catalog.counting_product(), ALL_PIECES).is_infinite


def test_tail_mass_bratteli_all_is_total():
    spec = catalog.fn_bratteli(4)
    assert tail_mass(spec, ALL_PIECES).value == 1
    assert tail_mass(spec, ODD) is None


# -- total_mass ---------------------------------------------------------------


def test_total_mass_examples():
    assert total_mass(catalog.bernoulli_13_23()).value == 1
    assert total_mass(catalog.counting_product()).is_infinite
    assert total_mass(Scaled(F(1, 4), catalog.dyadic_bernoulli())).value == F(1, 4)
    assert total_mass(PAdicHaar(3)).is_infinite
    assert total_mass(catalog.infinite_bratteli_full()).is_infinite
    assert total_mass(catalog.infinite_bratteli_class()).is_infinite


def test_total_mass_cf():
    spec = catalog.cf_example()
    # declared prefix accounts for |F_3|/12, the tail adds 2/(12*(2-1))
    assert total_mass(spec).value == F(spec.f_sizes[-1], 12) + F(2, 12)


# -- defective descriptors ------------------------------------------------------


def test_descriptor_examples():
    assert defective_descriptor(catalog.counting_product()) == EMPTY_DESCRIPTOR
    assert defective_descriptor(catalog.infinite_bratteli_full()) == CANTOR_DESCRIPTOR
    assert defective_descriptor(catalog.bernoulli_13_23()) == EMPTY_DESCRIPTOR
    assert defective_descriptor(catalog.infinite_bratteli_class()) == EMPTY_DESCRIPTOR


def test_descriptor_single_defective_path():
    spec = StationaryBratteli(((1, 1), (0, 2)), 2, (None, F(1)), FullDiagram())
    assert defective_descriptor(spec) == finite_points(1)


def test_descriptor_union_merges():
    assert finite_points(2).union(finite_points(3)) == finite_points(5)
    assert CANTOR_DESCRIPTOR.union(CANTOR_DESCRIPTOR) == CANTOR_DESCRIPTOR
    assert str(finite_points(1).union(CANTOR_DESCRIPTOR)) == "CantorSet + FinitePoints(1)"


# -- structural validation -------------------------------------------------------


def test_bernoulli_validation():
    with pytest.raises(DomainError):
        Bernoulli((F(1, 2), F(1, 3)))
    with pytest.raises(DomainError):
        Bernoulli((F(1),))


def test_bratteli_eigen_identity_enforced():
    with pytest.raises(DomainError):
        StationaryBratteli(
            catalog.transpose(catalog.incidence_fn(3)),
            4,
            (F(1, 3), F(1, 3), F(1, 4)),
        )


def test_bratteli_class_must_be_absorbing():
    with pytest.raises(DomainError):
        catalog.fn_bratteli(3, DistinguishedClass(frozenset({0})))


def test_bratteli_defective_refine_rejected():
    spec = catalog.infinite_bratteli_full()
    root = spec.root(1)
    assert root.defective
    with pytest.raises(DomainError):
        refine(spec, root.id)


def test_defective_vertex_needs_continuation():
    with pytest.raises(DomainError):
        StationaryBratteli(((0, 2), (0, 2)), 2, (None, F(1)), FullDiagram())


# -- mass conservation property ---------------------------------------------------


def builtin_specs():
    return [
        catalog.dyadic_bernoulli(),
        catalog.bernoulli_13_23(),
        catalog.example2_forest(),
        catalog.example2_balanced(),
        catalog.punctured_bernoulli_13_23(),
        PAdicHaar(3),
        catalog.fn_bratteli(3),
        catalog.fn_bratteli(4, FullDiagram()),
        catalog.cf_example(),
        catalog.counting_product(),
        catalog.infinite_bratteli_class(),
        Scaled(F(3, 7), catalog.dyadic_bernoulli()),
        Restricted(catalog.bernoulli_13_23(), CompactOpen.of(cyl(1, "1"))),
    ]


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: type(s).__name__)
def test_mass_conservation_to_depth_5(spec):
    for piece in pieces(spec, 3):
        if piece.defective:
            continue
        frontier = [piece]
        for _ in range(5):
            nxt = []
            for cell in frontier:
                kids = spec.children(cell)
                finite = [k for k in kids if not k.defective]
                if not cell.mass.is_infinite:
                    assert sum(k.mass.value for k in kids) == cell.mass.value
                    assert all(k.mass.value > 0 for k in kids)
                nxt.extend(finite[:2])  # keep the walk tractable
            frontier = nxt


def test_pieces_and_refine_deterministic():
    spec = catalog.example2_forest()
    a = [(c.id, c.mass) for c in pieces(spec, 6)]
    b = [(c.id, c.mass) for c in pieces(spec, 6)]
    assert a == b
    ka = [(c.id, c.mass) for c in refine(spec, cyl(3))]
    kb = [(c.id, c.mass) for c in refine(spec, cyl(3))]
    assert ka == kb


def test_bratteli_distinguished_pieces_order_and_mass():
    spec = catalog.fn_bratteli(3)
    cells = pieces(spec, 8)
    # level 0: the two class vertices; level 1: chains through vertex 0
    assert [c.mass.value for c in cells[:2]] == [F(1, 3), F(1, 3)]
    assert all(c.mass.value == F(1, 12) for c in cells[2:4])
    assert all(c.mass.value > 0 for c in cells)


def test_restricted_reroots_cells():
    spec = Restricted(catalog.bernoulli_13_23(), CompactOpen.of(cyl(1, "1")))
    assert total_mass(spec).value == F(2, 3)
    kids = refine(spec, cyl(1))
    assert [k.mass.value for k in kids] == [F(2, 9), F(4, 9)]


def test_descend_frontier_and_complement():
    spec = catalog.dyadic_bernoulli()
    frontier = descend_frontier(spec, cyl(1), 3)
    assert len(frontier) == 8
    assert sum(c.mass.value for c in frontier) == 1
    region = CompactOpen.of(cyl(1))
    sub = CompactOpen.of(cyl(1, "0"), cyl(1, "100"))
    rest = complement_within(spec, region, sub)
    assert mass_of(spec, rest).value == 1 - F(5, 8)
    assert not set(rest.cells) & set(sub.cells)


def test_product_counting_pieces():
    spec = catalog.counting_product(cycle=(F(1), F(3)))
    # spiral 0, 1, -1, 2, -2 with cycle (1, 3): weight(z) = cycle[z mod 2]
    assert [c.mass.value for c in pieces(spec, 5)] == [1, 3, 3, 1, 1]


def test_cell_parse_roundtrip():
    c = CellId(2, (1, 0, 4))
    assert CellId.parse(str(c)) == c
    assert CellId.parse("3:") == CellId(3)
