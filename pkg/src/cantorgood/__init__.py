"""Exact arithmetic for full non-atomic measures on compact and locally
compact Cantor sets: compact-open value sets, goodness deciders and
certificates, homeomorphism criteria and measure-preserving clopen
correspondences, and finite-remainder compactifications."""

from .exactnum import (
    INFINITY,
    DivisibleGroup,
    DomainError,
    ExtMass,
    GroupLikeSet,
    Rational,
    canonical_group,
    divisor_member,
    group_member,
    group_scale_relation,
    grouplike_contains,
    vq,
)
from .goodness import (
    NotFound,
    ValuationCertificate,
    Verdict,
    carve,
    check_valuation_certificate,
    decide_bratteli_good,
    decide_compactification_good,
    decide_product_good,
    find_nongood_witness,
    goodness_verdict,
    synthesize_certificate,
)
from .homeo import (
    CompactifiedSpace,
    GammaReport,
    PartialHomeo,
    Stage,
    StageFailure,
    back_and_forth,
    build_good_measure,
    gamma_compactification,
    homeo_criterion,
    weak_homeo_constant,
)
from .space import (
    CF,
    Bernoulli,
    BudgetError,
    CarvedClass,
    Cell,
    CellId,
    CompactificationSpec,
    CompactOpen,
    DefectiveDescriptor,
    DisjointUnion,
    DistinguishedClass,
    ExplicitIndices,
    FullDiagram,
    GeometricTail,
    IndexClass,
    MeasureSpec,
    PAdicHaar,
    ProductCounting,
    Restricted,
    RestClass,
    Scaled,
    StationaryBratteli,
    ZWeights,
    defective_descriptor,
    equidistributed,
    mass_of,
    one_point_compactification,
    pieces,
    refine,
    tail_mass,
    total_mass,
    two_point_by_parity,
)
from .specfile import SpecFormatError
from .values import (
    ValueSample,
    enumerate_values,
    good_value_set,
    product_value_closure,
    value_group,
    value_witness,
)

__version__ = "0.1.0"
