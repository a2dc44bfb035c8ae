"""Rigid-transform primitives shared by the whole pipeline.

Points are plain ``(3,)`` float64 arrays and point sets are ``(N, 3)``
arrays; the containers below only add validation and indexing sugar on
top. The least-squares pose solver is the classic SVD (Kabsch) solution
of the orthogonal Procrustes problem with the reflection fix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateInput",
    "Correspondence",
    "CorrespondenceSet",
    "RigidTransform",
    "InstanceHypothesis",
    "solve_rigid",
    "alignment_error",
    "alignment_errors",
]


class DegenerateInput(ValueError):
    """Raised when a point selection cannot determine a rigid transform."""


def _as_point_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if ndim == 1 and arr.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {arr.shape}")
    if ndim == 2 and (arr.ndim != 2 or arr.shape[1] != 3):
        raise ValueError(f"{name} must have shape (N, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Correspondence:
    """One hypothesized match between a source point and a target point."""

    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source", _as_point_array(self.source, "source", 1))
        object.__setattr__(self, "target", _as_point_array(self.target, "target", 1))


class CorrespondenceSet:
    """Ordered, immutable collection of correspondences.

    Indices into the set are identities: every later pipeline stage
    (clustering, labeling, inlier sets) refers back to positions here.
    """

    __slots__ = ("source", "target")

    def __init__(self, source, target):
        src = _as_point_array(source, "source", 2)
        tgt = _as_point_array(target, "target", 2)
        if src.shape != tgt.shape:
            raise ValueError(
                f"source and target must match, got {src.shape} vs {tgt.shape}"
            )
        self.source = src
        self.target = tgt

    @classmethod
    def from_pairs(cls, pairs) -> "CorrespondenceSet":
        """Build from an iterable of Correspondence (or (src, tgt) tuples)."""
        sources = []
        targets = []
        for pair in pairs:
            if isinstance(pair, Correspondence):
                sources.append(pair.source)
                targets.append(pair.target)
            else:
                src, tgt = pair
                sources.append(np.asarray(src, dtype=np.float64))
                targets.append(np.asarray(tgt, dtype=np.float64))
        if not sources:
            return cls(np.empty((0, 3)), np.empty((0, 3)))
        return cls(np.stack(sources), np.stack(targets))

    def __len__(self) -> int:
        return self.source.shape[0]

    def __getitem__(self, index: int) -> Correspondence:
        return Correspondence(self.source[index], self.target[index])

    def subset(self, indices) -> "CorrespondenceSet":
        idx = np.asarray(indices, dtype=np.intp)
        return CorrespondenceSet(self.source[idx], self.target[idx])


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid motion: x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    # Orthonormality / det(+1) tolerance for accepting a rotation matrix.
    _TOL = 1e-9

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64)
        tr = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rot.shape}")
        if tr.shape != (3,):
            raise ValueError(f"translation must have 3 entries, got {tr.shape}")
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(tr))):
            raise ValueError("transform entries must be finite")
        if not np.allclose(rot.T @ rot, np.eye(3), atol=self._TOL, rtol=0.0):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > self._TOL:
            raise ValueError("rotation must have determinant +1")
        rot = rot.copy()
        tr = tr.copy()
        rot.flags.writeable = False
        tr.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point or an (N, 3) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """Transform equal to applying ``inner`` first, then this one."""
        return RigidTransform(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -(self.rotation.T @ self.translation))


@dataclass(frozen=True, eq=False)
class InstanceHypothesis:
    """Candidate pose for one model instance plus its supporting indices."""

    transform: RigidTransform
    inlier_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.intp))

    def __post_init__(self):
        idx = np.unique(np.asarray(self.inlier_indices, dtype=np.intp))
        idx.flags.writeable = False
        object.__setattr__(self, "inlier_indices", idx)

    @property
    def inlier_count(self) -> int:
        return int(self.inlier_indices.size)

    def inlier_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        mask[self.inlier_indices] = True
        return mask


def solve_rigid(correspondences: CorrespondenceSet, indices=None) -> RigidTransform:
    """Least-squares rigid transform over the indexed correspondence pairs.

    Minimizes the sum of squared residuals ||target - (R @ source + t)||^2
    via SVD of the centered cross-covariance. A negative-determinant
    candidate (reflection) is corrected by flipping the singular vector
    paired with the smallest singular value.

    Raises
    ------
    DegenerateInput
        If fewer than 3 pairs are selected, or the selected source points
        are collinear/coincident (centered covariance rank below 2).
    """
    if indices is None:
        src = correspondences.source
        tgt = correspondences.target
    else:
        idx = np.asarray(indices, dtype=np.intp)
        src = correspondences.source[idx]
        tgt = correspondences.target[idx]

    if src.shape[0] < 3:
        raise DegenerateInput(f"need at least 3 correspondences, got {src.shape[0]}")

    centroid_src = src.mean(axis=0)
    centroid_tgt = tgt.mean(axis=0)
    src_c = src - centroid_src
    tgt_c = tgt - centroid_tgt

    # Collinear/coincident source points leave the rotation under-determined.
    spread = np.linalg.svd(src_c, compute_uv=False)
    if spread[1] <= max(spread[0], 1.0) * 1e-12:
        raise DegenerateInput("source points are collinear or coincident")

    cov = src_c.T @ tgt_c
    u, _, vt = np.linalg.svd(cov)
    rot = vt.T @ u.T
    if np.linalg.det(rot) < 0.0:
        vt[-1, :] *= -1.0
        rot = vt.T @ u.T
    translation = centroid_tgt - rot @ centroid_src
    return RigidTransform(rot, translation)


def alignment_errors(transform: RigidTransform, correspondences: CorrespondenceSet) -> np.ndarray:
    """Squared residual ||target - (R @ source + t)||^2 for every pair."""
    residual = correspondences.target - transform.apply(correspondences.source)
    return np.einsum("ij,ij->i", residual, residual)


def alignment_error(transform: RigidTransform, c: Correspondence) -> float:
    """Squared residual of a single correspondence under ``transform``."""
    residual = c.target - transform.apply(c.source)
    return float(residual @ residual)
