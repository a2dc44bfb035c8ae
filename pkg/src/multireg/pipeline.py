"""End-to-end multi-instance registration.

Stage order: optional random downsampling to a working set, distance
invariance matrix, agglomerative clustering, recursive refinement,
ranked extraction, then labeling of the full input against the
extracted poses (with an optional single re-solve of each pose from its
full-set inliers). Deterministic for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .clustering import agglomerate
from .compatibility import build_matrix
from .extraction import ExtractionConfig, extract
from .geometry import (
    CorrespondenceSet,
    DegenerateInput,
    InstanceHypothesis,
    solve_rigid,
)
from .refinement import (
    OUTLIER,
    LabeledCorrespondences,
    RefinementConfig,
    reassign,
    refine,
)

__all__ = [
    "InsufficientInput",
    "PipelineConfig",
    "RunStats",
    "RegistrationResult",
    "downsample",
    "upsample",
    "register",
]


class InsufficientInput(ValueError):
    """Raised when fewer than 3 correspondences are supplied."""


@dataclass(frozen=True)
class PipelineConfig:
    """Full configuration of one registration run."""

    min_dist_thresh: float = 0.2
    refinement: RefinementConfig = field(default_factory=RefinementConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    downsample_size: int = 1024
    rng_seed: int = 0
    # Skip the down/upsample stages entirely (full set goes through
    # clustering; final labeling is unchanged).
    enable_sampling: bool = True
    # Re-solve each extracted pose once from its full-set inliers.
    resolve_final: bool = True

    def __post_init__(self):
        if self.downsample_size < 10:
            raise ValueError("downsample_size must be at least 10")
        if not 0.0 <= self.min_dist_thresh < 1.0:
            raise ValueError("min_dist_thresh must lie in [0, 1)")


@dataclass(frozen=True)
class RunStats:
    n_input: int
    n_working: int
    refine_iterations: int


@dataclass
class RegistrationResult:
    """Ranked instance poses plus per-correspondence labels over the input.

    ``labels[i]`` indexes ``instances`` or is OUTLIER; every labeled
    correspondence has minimal alignment error under its own instance
    and that error is within the inlier threshold. ``timings`` holds
    per-stage wall-clock seconds.
    """

    instances: list[InstanceHypothesis]
    labels: np.ndarray
    timings: dict[str, float]
    stats: RunStats
    matrix: np.ndarray | None = None


def downsample(
    correspondences: CorrespondenceSet, size: int, seed: int
) -> tuple[CorrespondenceSet, np.ndarray]:
    """Uniform sample without replacement down to ``size`` items.

    Returns the subset and the map from subset positions to original
    indices. Inputs at or below ``size`` pass through identically. The
    sampled indices are kept in ascending order, preserving the input's
    relative ordering.
    """
    n = len(correspondences)
    if size < 1:
        raise ValueError("size must be positive")
    if n <= size:
        return correspondences, np.arange(n, dtype=np.intp)
    rng = np.random.default_rng(seed)
    index_map = np.sort(rng.choice(n, size=size, replace=False)).astype(np.intp)
    return correspondences.subset(index_map), index_map


def upsample(
    hypotheses: list[InstanceHypothesis],
    full: CorrespondenceSet,
    cfg: PipelineConfig,
) -> LabeledCorrespondences:
    """Label the full set against already-extracted poses.

    Pure re-assignment: each correspondence goes to the pose with the
    smallest alignment error if that error is within the inlier
    threshold, else OUTLIER. Poses are not re-estimated here.
    """
    return reassign(hypotheses, full, cfg.refinement)


def _resolve_from_inliers(
    labeled: LabeledCorrespondences,
    full: CorrespondenceSet,
    cfg: PipelineConfig,
) -> LabeledCorrespondences:
    """One re-solve of each pose from its full-set inliers, then re-label."""
    resolved = []
    for hypothesis in labeled.hypotheses:
        members = hypothesis.inlier_indices
        if members.size >= 3:
            try:
                transform = solve_rigid(full, members)
            except DegenerateInput:
                transform = hypothesis.transform
        else:
            transform = hypothesis.transform
        resolved.append(InstanceHypothesis(transform, members))
    return reassign(resolved, full, cfg.refinement)


def _rank_instances(labeled: LabeledCorrespondences) -> tuple[list[InstanceHypothesis], np.ndarray]:
    """Sort instances by inlier count (stable) and remap labels to match."""
    order = sorted(
        range(len(labeled.hypotheses)),
        key=lambda k: -labeled.hypotheses[k].inlier_count,
    )
    instances = [labeled.hypotheses[k] for k in order]
    remap = np.full(len(labeled.hypotheses) + 1, OUTLIER, dtype=np.intp)
    for new_id, old_id in enumerate(order):
        remap[old_id] = new_id
    labels = remap[labeled.labels]  # OUTLIER(-1) hits the sentinel slot
    return instances, labels


def register(
    correspondences: CorrespondenceSet,
    cfg: PipelineConfig | None = None,
    keep_matrix: bool = False,
) -> RegistrationResult:
    """Recover every instance pose present in the correspondences.

    Raises InsufficientInput for fewer than 3 correspondences; all other
    degenerate situations resolve to an empty instance list with every
    correspondence labeled OUTLIER.
    """
    cfg = cfg or PipelineConfig()
    n = len(correspondences)
    if n < 3:
        raise InsufficientInput(f"need at least 3 correspondences, got {n}")

    timings: dict[str, float] = {}
    clock = time.perf_counter

    start = clock()
    if cfg.enable_sampling:
        working, _ = downsample(correspondences, cfg.downsample_size, cfg.rng_seed)
    else:
        working = correspondences
    timings["downsample"] = clock() - start

    start = clock()
    matrix = build_matrix(working)
    timings["matrix"] = clock() - start

    start = clock()
    clusters = agglomerate(matrix, cfg.min_dist_thresh)
    timings["cluster"] = clock() - start

    start = clock()
    refined = refine(clusters, working, cfg.refinement)
    timings["refine"] = clock() - start

    start = clock()
    selected = extract(refined.hypotheses, cfg.extraction)
    timings["extract"] = clock() - start

    start = clock()
    labeled = upsample(selected, correspondences, cfg)
    if cfg.resolve_final and labeled.hypotheses:
        labeled = _resolve_from_inliers(labeled, correspondences, cfg)
    instances, labels = _rank_instances(labeled)
    timings["upsample"] = clock() - start

    return RegistrationResult(
        instances=instances,
        labels=labels,
        timings=timings,
        stats=RunStats(
            n_input=n,
            n_working=len(working),
            refine_iterations=refined.iterations,
        ),
        matrix=matrix if keep_matrix else None,
    )
