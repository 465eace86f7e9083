"""Explicit hard instances for the regularity lemma and tools to audit them."""

__version__ = "0.1.0"

from .auditor import (
    NicenessReport,
    PairVerdict,
    RefinementReport,
    bounds_calculator,
    canonical_witness_search,
    exhaustive_pair_check,
    lower_bound_demo,
    niceness_audit,
    refinement_check,
)
from .bipartitions import (
    Bipartition,
    BipartitionSequence,
    MassProfile,
    biased_lemma_oracle,
    generate_balanced,
    is_balanced,
    split_mass_count,
)
from .graph import (
    DensityValue,
    Equipartition,
    LevelWeightedGraph,
    VertexSet,
    activation_sum,
    check_equipartition,
    density,
)
from .sampler import SampledGraph, deviation_audit, sample_graph
from .tower import (
    ConstructionParams,
    PartitionTower,
    activation,
    build_instance,
    build_tower,
    eq1_check,
    half_density_check,
    tower_sizes,
)

__all__ = [
    "__version__",
    "NicenessReport",
    "PairVerdict",
    "RefinementReport",
    "bounds_calculator",
    "canonical_witness_search",
    "exhaustive_pair_check",
    "lower_bound_demo",
    "niceness_audit",
    "refinement_check",
    "Bipartition",
    "BipartitionSequence",
    "MassProfile",
    "biased_lemma_oracle",
    "generate_balanced",
    "is_balanced",
    "split_mass_count",
    "DensityValue",
    "Equipartition",
    "LevelWeightedGraph",
    "VertexSet",
    "activation_sum",
    "check_equipartition",
    "density",
    "SampledGraph",
    "deviation_audit",
    "sample_graph",
    "ConstructionParams",
    "PartitionTower",
    "activation",
    "build_instance",
    "build_tower",
    "eq1_check",
    "half_density_check",
    "tower_sizes",
]
