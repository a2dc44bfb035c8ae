"""Synthetic multi-instance scenes with ground truth.

A procedural source model (random points on a small composite of box
and sphere surfaces, unit bounding-box diagonal, centered on its
centroid) is placed K times in a workspace box with uniformly random
poses. Inlier correspondences pair every model point with its noisy
transformed image; outlier correspondences pair random model points
with clutter: 30% land on rigidly-placed copies of a second procedural
shape (distractor objects), the rest are uniform in the workspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CorrespondenceSet, RigidTransform
from .refinement import OUTLIER

__all__ = [
    "SceneSpec",
    "GroundTruth",
    "SeparationInfeasible",
    "random_rotation",
    "generate_source",
    "generate_scene",
]

# Share of outliers whose targets come from structured clutter.
_CLUTTER_FRACTION = 0.3
_MAX_REJECTIONS = 10_000


class SeparationInfeasible(RuntimeError):
    """Raised when instance placements cannot satisfy the separation."""


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic scene."""

    num_points_per_instance: int = 256
    num_instances: int = 1
    outlier_ratio: float = 0.0
    noise_sigma: float = 0.01
    workspace_extent: float = 5.0
    min_instance_separation: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.num_instances < 1:
            raise ValueError("num_instances must be at least 1")
        if not 0.0 <= self.outlier_ratio < 1.0:
            raise ValueError("outlier_ratio must lie in [0, 1)")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.num_points_per_instance < 4:
            raise ValueError("num_points_per_instance must be at least 4")
        if self.workspace_extent <= 0.0 or self.min_instance_separation < 0.0:
            raise ValueError("workspace geometry must be positive")


@dataclass
class GroundTruth:
    """True instance poses and the true label of every correspondence."""

    transforms: list[RigidTransform]
    labels: np.ndarray


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation matrix drawn uniformly over rotations (unit-quaternion method)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _sphere_surface(rng, n, center, radius):
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return center + radius * directions


def _box_surface(rng, n, center, half_extent):
    points = rng.uniform(-half_extent, half_extent, size=(n, 3))
    faces = rng.integers(0, 6, size=n)
    axes = faces // 2
    signs = np.where(faces % 2 == 0, 1.0, -1.0)
    points[np.arange(n), axes] = signs * half_extent
    return center + points


def _composite_shape(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random points on 2-3 box/sphere surfaces, centered, unit bbox diagonal."""
    num_parts = int(rng.integers(2, 4))
    counts = np.full(num_parts, n // num_parts)
    counts[: n % num_parts] += 1
    parts = []
    for count in counts:
        center = rng.uniform(-0.6, 0.6, size=3)
        size = rng.uniform(0.25, 0.6)
        if rng.random() < 0.5:
            parts.append(_sphere_surface(rng, count, center, size))
        else:
            parts.append(_box_surface(rng, count, center, size))
    points = np.vstack(parts)
    points -= points.mean(axis=0)
    diagonal = np.linalg.norm(points.max(axis=0) - points.min(axis=0))
    points /= diagonal
    return points


def generate_source(spec: SceneSpec) -> np.ndarray:
    """Source model points for ``spec`` (deterministic per seed)."""
    return _composite_shape(np.random.default_rng(spec.seed), spec.num_points_per_instance)


def _draw_transforms(rng, spec: SceneSpec, centroid: np.ndarray) -> list[RigidTransform]:
    transforms: list[RigidTransform] = []
    centers: list[np.ndarray] = []
    rejections = 0
    while len(transforms) < spec.num_instances:
        rotation = random_rotation(rng)
        translation = rng.uniform(-spec.workspace_extent, spec.workspace_extent, size=3)
        transform = RigidTransform(rotation, translation)
        center = transform.apply(centroid)
        if any(
            np.linalg.norm(center - other) < spec.min_instance_separation
            for other in centers
        ):
            rejections += 1
            if rejections > _MAX_REJECTIONS:
                raise SeparationInfeasible(
                    f"could not place {spec.num_instances} instances at separation "
                    f"{spec.min_instance_separation} in extent {spec.workspace_extent}"
                )
            continue
        transforms.append(transform)
        centers.append(center)
    return transforms


def _clutter_targets(rng, spec: SceneSpec, n_clutter: int) -> np.ndarray:
    """Targets on rigidly-placed distractor copies of a second shape.

    The clutter budget is spread over enough placements that one
    distractor region collects at most a quarter of an instance's
    correspondence count; a single concentrated blob would otherwise act
    as a universal inlier attractor at the default inlier threshold.
    """
    if n_clutter == 0:
        return np.empty((0, 3))
    shape = _composite_shape(rng, spec.num_points_per_instance)
    per_placement = max(spec.num_points_per_instance // 4, 1)
    n_placements = -(-n_clutter // per_placement)  # ceil division
    placed = np.empty((n_placements, spec.num_points_per_instance, 3))
    for p in range(n_placements):
        placement = RigidTransform(
            random_rotation(rng),
            rng.uniform(-spec.workspace_extent, spec.workspace_extent, size=3),
        )
        placed[p] = placement.apply(shape)
    which = rng.integers(0, n_placements, size=n_clutter)
    point = rng.integers(0, spec.num_points_per_instance, size=n_clutter)
    return placed[which, point]


def generate_scene(spec: SceneSpec) -> tuple[CorrespondenceSet, GroundTruth]:
    """One synthetic scene: shuffled correspondences plus ground truth.

    The realized outlier fraction matches ``spec.outlier_ratio`` up to
    rounding of the outlier count.
    """
    rng = np.random.default_rng(spec.seed)
    model = _composite_shape(rng, spec.num_points_per_instance)
    n_points = spec.num_points_per_instance

    transforms = _draw_transforms(rng, spec, model.mean(axis=0))

    sources = []
    targets = []
    labels = []
    for k, transform in enumerate(transforms):
        noisy = transform.apply(model) + rng.normal(scale=spec.noise_sigma, size=model.shape)
        sources.append(model)
        targets.append(noisy)
        labels.append(np.full(n_points, k, dtype=np.intp))

    n_inliers = n_points * spec.num_instances
    n_outliers = int(round(spec.outlier_ratio / (1.0 - spec.outlier_ratio) * n_inliers))
    if n_outliers:
        n_clutter = int(round(_CLUTTER_FRACTION * n_outliers))
        outlier_targets = np.vstack(
            [
                _clutter_targets(rng, spec, n_clutter),
                rng.uniform(
                    -spec.workspace_extent,
                    spec.workspace_extent,
                    size=(n_outliers - n_clutter, 3),
                ),
            ]
        )
        sources.append(model[rng.integers(0, n_points, size=n_outliers)])
        targets.append(outlier_targets)
        labels.append(np.full(n_outliers, OUTLIER, dtype=np.intp))

    source = np.vstack(sources)
    target = np.vstack(targets)
    label = np.concatenate(labels)
    order = rng.permutation(source.shape[0])
    correspondences = CorrespondenceSet(source[order], target[order])
    return correspondences, GroundTruth(transforms=transforms, labels=label[order])
