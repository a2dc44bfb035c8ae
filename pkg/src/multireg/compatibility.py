"""Distance-invariance scoring between correspondence pairs.

Rigid motion preserves pairwise distances, so two correspondences that
belong to the same instance must show (near-)equal source-side and
target-side distances. Each pair gets the squared ratio score
``min(d/d', d'/d)**2``; stacking all pairs yields a symmetric matrix
whose columns act as per-correspondence feature vectors for clustering.
"""

from __future__ import annotations

import numpy as np

from .geometry import Correspondence, CorrespondenceSet

__all__ = ["pairwise_score", "build_matrix", "compatibility_vector"]


def pairwise_score(a: Correspondence, b: Correspondence) -> float:
    """Distance-ratio score in [0, 1] for two correspondences.

    Degenerate distances: two coincident pairs (both distances zero)
    score 1.0 by convention; a zero paired with a nonzero distance
    scores 0.0.
    """
    d = float(np.linalg.norm(a.source - b.source))
    dp = float(np.linalg.norm(a.target - b.target))
    if d == 0.0 and dp == 0.0:
        return 1.0
    if d == 0.0 or dp == 0.0:
        return 0.0
    s = min(d / dp, dp / d)
    return s * s


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    # Direct differences, not the dot-product trick: the latter loses
    # precision for near-coincident points and breaks the 1e-9
    # rigid-motion invariance of the final matrix.
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def build_matrix(correspondences: CorrespondenceSet) -> np.ndarray:
    """Dense N x N matrix of pairwise scores, float64.

    Symmetric with unit diagonal; the upper triangle is mirrored so
    symmetry holds bit-exactly. Intended for the downsampled working set
    (N <= ~2048); memory grows as N^2.
    """
    n = len(correspondences)
    if n < 1:
        raise ValueError("need at least one correspondence")
    d = _pairwise_distances(correspondences.source)
    dp = _pairwise_distances(correspondences.target)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.minimum(d / dp, dp / d)
    both_zero = (d == 0.0) & (dp == 0.0)
    one_zero = (d == 0.0) ^ (dp == 0.0)
    ratio[both_zero] = 1.0
    ratio[one_zero] = 0.0

    matrix = ratio * ratio
    np.fill_diagonal(matrix, 1.0)
    upper = np.triu_indices(n, k=1)
    matrix[(upper[1], upper[0])] = matrix[upper]
    return matrix


def compatibility_vector(matrix: np.ndarray, index: int) -> np.ndarray:
    """Column of the matrix serving as the feature of one correspondence."""
    return matrix[:, index].copy()
