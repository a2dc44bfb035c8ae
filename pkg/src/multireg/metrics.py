"""Hit-based evaluation of predicted instance poses.

A prediction "hits" a ground-truth instance when its rotation geodesic
error and its translation error (displacement of the transformed model
centroid) both pass the criteria. Predictions are matched one-to-one to
ground truth greedily in ranked order; dataset metrics are the plain
means of the per-sample recall, precision and F1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import CorrespondenceSet, InstanceHypothesis, RigidTransform
from .refinement import OUTLIER
from .synthetic import GroundTruth

__all__ = [
    "EmptyDataset",
    "HitCriteria",
    "SampleScore",
    "DatasetScore",
    "rotation_error",
    "translation_error",
    "score_sample",
    "score_dataset",
    "estimate_outlier_ratio",
]


class EmptyDataset(ValueError):
    """Raised when aggregating an empty collection of sample scores."""


@dataclass(frozen=True)
class HitCriteria:
    """Error bounds for counting a predicted pose as a hit."""

    max_rotation_error: float = math.radians(15.0)
    max_translation_error: float = 0.1

    def __post_init__(self):
        if self.max_rotation_error <= 0 or self.max_translation_error <= 0:
            raise ValueError("hit criteria must be positive")


@dataclass(frozen=True)
class SampleScore:
    """Hit statistics of a single scene."""

    hits: int
    num_gt: int
    num_pred: int
    recall: float
    precision: float
    f1: float


class DatasetScore(NamedTuple):
    mhr: float
    mhp: float
    mhf1: float


def rotation_error(a: RigidTransform, b: RigidTransform) -> float:
    """Geodesic angle between two rotations, in radians within [0, pi]."""
    cos = (np.trace(a.rotation.T @ b.rotation) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def translation_error(
    a: RigidTransform,
    b: RigidTransform,
    model_centroid: np.ndarray | None = None,
) -> float:
    """Displacement between the two transforms' images of the model centroid.

    Measuring at the centroid avoids coupling rotation error into the
    translation term when the model is not at the origin. Generated
    models are centroid-centered, so the default reduces to
    ``|t_a - t_b|``.
    """
    point = np.zeros(3) if model_centroid is None else np.asarray(model_centroid, float)
    return float(np.linalg.norm(a.apply(point) - b.apply(point)))


def _transform_of(entry) -> RigidTransform:
    return entry.transform if isinstance(entry, InstanceHypothesis) else entry


def score_sample(
    pred: Sequence[InstanceHypothesis | RigidTransform],
    truth: GroundTruth | Sequence[RigidTransform],
    crit: HitCriteria | None = None,
    model_centroid: np.ndarray | None = None,
) -> SampleScore:
    """Greedy one-to-one matching of ranked predictions to ground truth.

    Each prediction, in the given (ranked) order, claims the still
    unmatched ground-truth pose with the smallest rotation error among
    those passing both criteria; predictions that claim nothing are
    false positives.
    """
    crit = crit or HitCriteria()
    gt_transforms = truth.transforms if isinstance(truth, GroundTruth) else list(truth)
    predictions = [_transform_of(p) for p in pred]

    matched = np.zeros(len(gt_transforms), dtype=bool)
    hits = 0
    for prediction in predictions:
        best_err = np.inf
        best_gt = -1
        for g, gt in enumerate(gt_transforms):
            if matched[g]:
                continue
            rot_err = rotation_error(prediction, gt)
            if rot_err > crit.max_rotation_error:
                continue
            if translation_error(prediction, gt, model_centroid) > crit.max_translation_error:
                continue
            if rot_err < best_err:
                best_err = rot_err
                best_gt = g
        if best_gt >= 0:
            matched[best_gt] = True
            hits += 1

    num_gt = len(gt_transforms)
    num_pred = len(predictions)
    recall = hits / num_gt if num_gt else 0.0
    precision = hits / num_pred if num_pred else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SampleScore(
        hits=hits, num_gt=num_gt, num_pred=num_pred,
        recall=recall, precision=precision, f1=f1,
    )


def score_dataset(samples: Sequence[SampleScore]) -> DatasetScore:
    """Arithmetic means over per-sample recall/precision/F1."""
    if not samples:
        raise EmptyDataset("no sample scores to aggregate")
    return DatasetScore(
        mhr=float(np.mean([s.recall for s in samples])),
        mhp=float(np.mean([s.precision for s in samples])),
        mhf1=float(np.mean([s.f1 for s in samples])),
    )


def estimate_outlier_ratio(correspondences: CorrespondenceSet, truth: GroundTruth) -> float:
    """Fraction of correspondences whose true label is OUTLIER."""
    labels = np.asarray(truth.labels)
    if labels.size != len(correspondences):
        raise ValueError("truth labels do not match the correspondence set")
    if labels.size == 0:
        return 0.0
    return float(np.mean(labels == OUTLIER))
