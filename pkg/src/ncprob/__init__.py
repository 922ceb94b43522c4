"""Set-partition combinatorics, moment-cumulant transforms, independence
diagnostics, distributional-symmetry checks, and a bounded ideal-membership
engine for the algebras behind classical, free, and boolean exchangeability."""

from .partitions import (
    BlockConstraint,
    FamilyTag,
    Lattice,
    SetPartition,
    concatenate,
    enumerate_partitions,
    format_partition,
    in_family,
    kernel,
    parse_family,
    parse_partition,
    refines,
)
from .cumulants import (
    BArg,
    BFunctionalSeq,
    CumulantTable,
    Kind,
    MomentFunctional,
    cumulants_from_moments,
    eval_pi_blocks,
    eval_pi_nested,
    eval_pi_scalar,
    lattice_moment,
    load_table,
    moment_by_partition_sum,
    moments_from_cumulants,
)
from .independence import (
    DistributionClass,
    IndependenceReport,
    LawClass,
    build_independent_moments,
    classify_distribution,
    law_family,
    test_mixed_vanishing,
)
from .symmetry import (
    GroupFamily,
    GroupTag,
    InvarianceReport,
    check_invariance_exact,
    check_invariance_mc,
    coaction_expand,
    extend_and_check,
    quantum_invariance_certificate,
)
from .algebra import (
    FormalSum,
    GeneratorSet,
    MembershipCertificate,
    RelationSchema,
    delta_image,
    eval_representation,
    format_sum,
    ideal_membership,
    instantiate_relations,
    normalize,
    parse_sum,
    refute_membership,
    star,
    tensor_embed,
    verify_coproduct,
    verify_schema_implication,
    verify_vanishing,
)

__version__ = "0.1.0"
