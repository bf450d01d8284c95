"""Finite symmetry groups, their actions and linear representations, and
certificates that a latent table respects a chosen product decomposition."""

from .actions import (
    ActionError,
    ArityMismatchError,
    CompatibilityError,
    FiniteAction,
    IdentityAxiomError,
    ProductStructure,
    is_disentangled_action,
    is_free,
    is_transitive,
    orbits,
    product_action,
    product_structure,
    search_product_structure,
    validate_action,
)
from .certify import (
    CertificationReport,
    CertifyError,
    FittedLinearAction,
    IllDefinedError,
    InducedAction,
    MetricScores,
    RankDeficientError,
    SizeMismatchError,
    WellDefinedness,
    certify,
    check_well_defined,
    default_generators,
    explicitness_score,
    fit_linear_action,
    given_linear_action,
    induce_action_on_image,
    metric_scores,
    sensitivity_matrix,
    verify_equivariance,
)
from .groups import (
    DecompositionError,
    DirectProductDecomposition,
    FiniteGroup,
    GroupTableError,
    NoIdentityError,
    NotASubgroupError,
    NotAssociativeError,
    NotInvertibleError,
    SizeGuardExceededError,
    Subgroup,
    all_subgroups,
    closure,
    conjugacy_classes,
    cube_rotation_group,
    cyclic_group,
    decomposition_from_subgroups,
    direct_product,
    embedded_subgroups,
    find_direct_decompositions,
    is_abelian,
    subgroup,
    subgroup_group,
    validate_group,
)
from .reps import (
    CharacterTable,
    DisentanglementCertificate,
    GroupMismatchError,
    HomomorphismError,
    IdentityNotMappedError,
    LinearRepresentation,
    NonAbelianError,
    RepresentationError,
    SubspaceDecomposition,
    character,
    direct_sum,
    fixed_subspace_projector,
    homomorphism_residual,
    is_disentangled_representation,
    isotypic_decomposition,
    restrict,
    tensor_product,
    validate_representation,
)
from .world import (
    GridWorldSpec,
    Observation,
    WorldError,
    WorldState,
    ZeroScaleError,
    all_states,
    apply_world_action,
    canonical_action_matrices,
    canonical_complex_table,
    canonical_embedding,
    canonical_embedding_real,
    canonical_linear_action,
    canonical_table,
    coordinate_embedding,
    coordinate_table,
    export_dataset,
    generator_elements,
    render,
    state_at,
    state_index,
    world_group,
    world_product_structure,
)

__version__ = "0.1.0"
