"""Prototype-based global semantic description of CNN-style feature vectors.

Build one semantic prototype per category from the members a linear head
classifies correctly, then describe any feature vector relative to a
prototype as a compact signature whose two halves sum back to the semantic
value and the prototypical distance.
"""

__version__ = "0.1.0"

from .analysis import (
    ClusterReport,
    ContinuityReport,
    KMeansResult,
    OrganizationPoint,
    RankingEntry,
    adjusted_mutual_info,
    adjusted_rand_index,
    cluster_eval_sweep,
    cluster_metrics,
    continuity_counterexample,
    contingency_table,
    homogeneity_completeness_v,
    kmeans,
    map_gamma,
    map_rho,
    rank_members,
    rank_signatures,
    verify_continuity_bound,
)
from .descriptor import (
    ReductionConfig,
    Signature,
    Taxonomy,
    angle_grid,
    describe_abstract_prototype,
    describe_category,
    describe_object,
    plan_grid,
    recover_prototypical_distance,
    recover_semantic_value,
    reduce_vector,
    signature_l1,
)
from .estimator import GlobalSemanticDescriptor
from .interchange import (
    FeatureSet,
    FormatError,
    HeadParams,
    read_feature_set,
    read_head,
    read_prototypes,
    read_signatures,
    write_feature_set,
    write_head,
    write_prototypes,
    write_signatures,
)
from .prototype import (
    NoTypicalMembersError,
    PrototypeStore,
    SemanticPrototype,
    build_prototype,
    build_store,
    classify,
    object_distance,
    predict_categories,
    prototypical_distance,
    select_typical,
    semantic_value,
    typicality_score,
)
from .synth import fit_linear_head, make_gaussian_features
from .verify import SuiteResult, run_property_suites

__all__ = [
    "ClusterReport",
    "ContinuityReport",
    "FeatureSet",
    "FormatError",
    "GlobalSemanticDescriptor",
    "HeadParams",
    "KMeansResult",
    "NoTypicalMembersError",
    "OrganizationPoint",
    "PrototypeStore",
    "RankingEntry",
    "ReductionConfig",
    "SemanticPrototype",
    "Signature",
    "SuiteResult",
    "Taxonomy",
    "adjusted_mutual_info",
    "adjusted_rand_index",
    "angle_grid",
    "build_prototype",
    "build_store",
    "classify",
    "cluster_eval_sweep",
    "cluster_metrics",
    "contingency_table",
    "continuity_counterexample",
    "describe_abstract_prototype",
    "describe_category",
    "describe_object",
    "fit_linear_head",
    "homogeneity_completeness_v",
    "kmeans",
    "make_gaussian_features",
    "map_gamma",
    "map_rho",
    "object_distance",
    "plan_grid",
    "predict_categories",
    "prototypical_distance",
    "rank_members",
    "rank_signatures",
    "read_feature_set",
    "read_head",
    "read_prototypes",
    "read_signatures",
    "recover_prototypical_distance",
    "recover_semantic_value",
    "reduce_vector",
    "run_property_suites",
    "select_typical",
    "semantic_value",
    "signature_l1",
    "typicality_score",
    "verify_continuity_bound",
    "write_feature_set",
    "write_head",
    "write_prototypes",
    "write_signatures",
]
