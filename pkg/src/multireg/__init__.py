"""Multi-instance rigid point-cloud registration by correspondence clustering."""

__version__ = "0.1.0"

from .clustering import ClusterState, agglomerate, group_distance
from .compatibility import build_matrix, pairwise_score
from .extraction import ExtractionConfig, extract
from .geometry import (
    Correspondence,
    CorrespondenceSet,
    DegenerateInput,
    InstanceHypothesis,
    RigidTransform,
    alignment_error,
    alignment_errors,
    solve_rigid,
)
from .metrics import (
    DatasetScore,
    EmptyDataset,
    HitCriteria,
    SampleScore,
    estimate_outlier_ratio,
    rotation_error,
    score_dataset,
    score_sample,
    translation_error,
)
from .pipeline import (
    InsufficientInput,
    PipelineConfig,
    RegistrationResult,
    downsample,
    register,
    upsample,
)
from .refinement import (
    OUTLIER,
    LabeledCorrespondences,
    RefinementConfig,
    alpha_schedule,
    estimate_hypotheses,
    merge_duplicates,
    reassign,
    refine,
)
from .synthetic import (
    GroundTruth,
    SceneSpec,
    SeparationInfeasible,
    generate_scene,
    generate_source,
    random_rotation,
)

__all__ = [
    "__version__",
    "OUTLIER",
    "Correspondence",
    "CorrespondenceSet",
    "RigidTransform",
    "InstanceHypothesis",
    "DegenerateInput",
    "solve_rigid",
    "alignment_error",
    "alignment_errors",
    "pairwise_score",
    "build_matrix",
    "group_distance",
    "agglomerate",
    "ClusterState",
    "RefinementConfig",
    "LabeledCorrespondences",
    "alpha_schedule",
    "estimate_hypotheses",
    "merge_duplicates",
    "reassign",
    "refine",
    "ExtractionConfig",
    "extract",
    "InsufficientInput",
    "PipelineConfig",
    "RegistrationResult",
    "downsample",
    "upsample",
    "register",
    "SceneSpec",
    "GroundTruth",
    "SeparationInfeasible",
    "random_rotation",
    "generate_source",
    "generate_scene",
    "HitCriteria",
    "SampleScore",
    "DatasetScore",
    "EmptyDataset",
    "rotation_error",
    "translation_error",
    "score_sample",
    "score_dataset",
    "estimate_outlier_ratio",
]
