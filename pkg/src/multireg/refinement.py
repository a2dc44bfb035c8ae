"""Recursive refinement of the initial clustering.

Each round estimates a pose from every cluster that is large enough,
merges duplicated poses whose inlier sets overlap strongly, then
re-assigns every correspondence to the pose with the smallest alignment
error (or marks it an outlier). The size threshold grows geometrically
between rounds to tighten outlier rejection; the loop stops at a label
fixed point or after ``max_iterations``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterState
from .geometry import (
    CorrespondenceSet,
    DegenerateInput,
    InstanceHypothesis,
    alignment_errors,
    solve_rigid,
)

__all__ = [
    "OUTLIER",
    "RefinementConfig",
    "LabeledCorrespondences",
    "alpha_schedule",
    "estimate_hypotheses",
    "merge_duplicates",
    "reassign",
    "refine",
]

logger = logging.getLogger(__name__)

# Label value for correspondences not explained by any instance.
OUTLIER = -1


@dataclass(frozen=True)
class RefinementConfig:
    """Knobs for the refinement loop.

    ``inlier_thresh`` bounds the squared alignment error of an inlier.
    """

    inlier_thresh: float = 0.3
    alpha0: int = 3
    theta: float = 3.0
    iou_merge_thresh: float = 0.8
    max_iterations: int = 10

    def __post_init__(self):
        if self.inlier_thresh <= 0 or self.alpha0 <= 0 or self.theta <= 0:
            raise ValueError("inlier_thresh, alpha0 and theta must be positive")
        if not 0.0 < self.iou_merge_thresh <= 1.0:
            raise ValueError("iou_merge_thresh must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class LabeledCorrespondences:
    """Per-correspondence instance labels plus the hypotheses they refer to.

    ``labels[i]`` is an index into ``hypotheses`` or ``OUTLIER``. Every
    labeled correspondence has alignment error at most ``inlier_thresh``
    under its own hypothesis and no smaller error under any other.
    """

    labels: np.ndarray
    hypotheses: list[InstanceHypothesis] = field(default_factory=list)
    iterations: int = 0


def alpha_schedule(n: int, count: int, cfg: RefinementConfig) -> int:
    """Minimum-cluster-size threshold for refinement round ``n`` (1-based).

    Grows as alpha0 * theta^(n-1), capped at round(count / 100) with
    half away from zero, and floored at 3 because a rigid transform
    needs at least 3 points.
    """
    if n < 1 or count < 1:
        raise ValueError("iteration index and correspondence count must be >= 1")
    cap = int(math.floor(count / 100.0 + 0.5))
    # Flooring the geometric term keeps the strict "size > alpha" test
    # unchanged for integer cluster sizes.
    growth = int(math.floor(cfg.alpha0 * cfg.theta ** (n - 1)))
    return max(min(growth, cap), 3)


def _member_groups(state) -> list[np.ndarray]:
    """Cluster member arrays from either a ClusterState or a labeling."""
    if isinstance(state, ClusterState):
        return state.member_lists()
    if isinstance(state, LabeledCorrespondences):
        return [
            np.flatnonzero(state.labels == instance)
            for instance in range(len(state.hypotheses))
        ]
    raise TypeError(f"unsupported cluster source: {type(state).__name__}")


def estimate_hypotheses(
    state,
    correspondences: CorrespondenceSet,
    alpha: int,
    cfg: RefinementConfig,
) -> list[InstanceHypothesis]:
    """Fit a pose to every cluster with strictly more than ``alpha`` members.

    Each surviving hypothesis carries the inlier set {i : error_i <=
    inlier_thresh} computed over the whole correspondence set. Clusters
    whose pose solve is degenerate are skipped with a log entry.
    """
    hypotheses: list[InstanceHypothesis] = []
    for members in _member_groups(state):
        if members.size <= alpha:
            continue
        try:
            transform = solve_rigid(correspondences, members)
        except DegenerateInput as exc:
            logger.warning("skipping degenerate cluster of %d members: %s", members.size, exc)
            continue
        errors = alignment_errors(transform, correspondences)
        inliers = np.flatnonzero(errors <= cfg.inlier_thresh)
        hypotheses.append(InstanceHypothesis(transform, inliers))
    return hypotheses


def merge_duplicates(
    hypotheses: list[InstanceHypothesis],
    correspondences: CorrespondenceSet,
    cfg: RefinementConfig,
) -> list[InstanceHypothesis]:
    """Drop near-duplicate poses by inlier-set IOU.

    Pairs are scanned in (ascending i, ascending j) order; the first
    pair whose intersection-over-union reaches ``iou_merge_thresh``
    loses its lower-inlier-count member (ties drop the later one), and
    the scan restarts until a full pass finds no qualifying pair.
    """
    n = len(correspondences)
    survivors = list(hypotheses)
    masks = [h.inlier_mask(n) for h in survivors]

    changed = True
    while changed and len(survivors) > 1:
        changed = False
        for i in range(len(survivors)):
            for j in range(i + 1, len(survivors)):
                union = np.logical_or(masks[i], masks[j]).sum()
                if union == 0:
                    continue
                inter = np.logical_and(masks[i], masks[j]).sum()
                if inter / union >= cfg.iou_merge_thresh:
                    drop = j if survivors[i].inlier_count >= survivors[j].inlier_count else i
                    survivors.pop(drop)
                    masks.pop(drop)
                    changed = True
                    break
            if changed:
                break
    return survivors


def reassign(
    hypotheses: list[InstanceHypothesis],
    correspondences: CorrespondenceSet,
    cfg: RefinementConfig,
) -> LabeledCorrespondences:
    """Label every correspondence with its minimum-error hypothesis.

    A correspondence whose smallest squared error exceeds
    ``inlier_thresh`` becomes an outlier; error ties go to the lower
    hypothesis index. Hypothesis inlier sets are rebuilt from the new
    labels, so they end up disjoint.
    """
    n = len(correspondences)
    if not hypotheses:
        return LabeledCorrespondences(labels=np.full(n, OUTLIER, dtype=np.intp))

    errors = np.stack([alignment_errors(h.transform, correspondences) for h in hypotheses])
    best = errors.argmin(axis=0)
    best_error = errors[best, np.arange(n)]
    labels = np.where(best_error <= cfg.inlier_thresh, best, OUTLIER)

    rebuilt = [
        InstanceHypothesis(h.transform, np.flatnonzero(labels == k))
        for k, h in enumerate(hypotheses)
    ]
    return LabeledCorrespondences(labels=labels, hypotheses=rebuilt)


def refine(
    initial: ClusterState,
    correspondences: CorrespondenceSet,
    cfg: RefinementConfig | None = None,
) -> LabeledCorrespondences:
    """Iterate estimate -> merge -> reassign until the labels stabilize.

    Convergence means two consecutive rounds produce identical label
    arrays; ``max_iterations`` caps the loop regardless. An empty
    hypothesis list is a valid all-outlier result.
    """
    cfg = cfg or RefinementConfig()
    n = len(correspondences)
    state: ClusterState | LabeledCorrespondences = initial
    previous: np.ndarray | None = None
    labeled = LabeledCorrespondences(labels=np.full(n, OUTLIER, dtype=np.intp))

    for iteration in range(1, cfg.max_iterations + 1):
        alpha = alpha_schedule(iteration, n, cfg)
        hypotheses = estimate_hypotheses(state, correspondences, alpha, cfg)
        hypotheses = merge_duplicates(hypotheses, correspondences, cfg)
        labeled = reassign(hypotheses, correspondences, cfg)
        labeled.iterations = iteration
        if previous is not None and np.array_equal(labeled.labels, previous):
            break
        previous = labeled.labels
        state = labeled
    return labeled
