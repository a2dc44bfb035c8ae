"""Bottom-up clustering of correspondences by feature-vector similarity.

Every correspondence starts as its own group whose representation is its
compatibility vector. The two closest groups (Tanimoto distance between
representations) merge repeatedly; a merged group's representation is
the elementwise minimum of its parents'. Merging stops once the smallest
inter-group distance exceeds the threshold.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

__all__ = ["group_distance", "agglomerate", "Cluster", "ClusterState"]

logger = logging.getLogger(__name__)


def group_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Tanimoto distance 1 - <p,q> / (|p|^2 + |q|^2 - <p,q>).

    Lies in [0, 1] for vectors with entries in [0, 1]; 0 iff p == q.
    Two zero vectors are treated as maximally distant (guard for the
    0/0 case, which valid compatibility vectors never hit).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    dot = float(p @ q)
    denom = float(p @ p) + float(q @ q) - dot
    if denom <= 0.0:
        return 1.0
    return 1.0 - dot / denom


@dataclass
class Cluster:
    """One group of correspondence indices plus its representation vector."""

    members: list[int]
    representation: np.ndarray


@dataclass
class ClusterState:
    """Partition of correspondence indices produced by agglomeration.

    ``assignments[i]`` is the group id of correspondence ``i``; group ids
    are the smallest member index of each group. ``merge_log`` records
    (surviving id, absorbed id, distance) per executed merge, in order.
    """

    assignments: np.ndarray
    groups: dict[int, Cluster]
    merge_log: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def active_count(self) -> int:
        return len(self.groups)

    def member_lists(self) -> list[np.ndarray]:
        """Member index arrays in ascending group-id order."""
        return [
            np.asarray(self.groups[gid].members, dtype=np.intp)
            for gid in sorted(self.groups)
        ]


def agglomerate(matrix: np.ndarray, min_dist_thresh: float = 0.2) -> ClusterState:
    """Merge groups of correspondences while the closest pair is within
    ``min_dist_thresh``.

    Ties on the minimal distance resolve to the lexicographically
    smallest (low id, high id) pair, and the surviving group keeps the
    smaller id, so the result is a deterministic function of the matrix.
    The full inter-group distance matrix is maintained and one row is
    recomputed per merge: O(N^2) per merge worst case, fine at N <= ~2048.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"matrix must be square, got {matrix.shape}")

    # Row g of `reps` is group g's representation; rows of a symmetric
    # matrix equal its columns, so initialization is a plain copy.
    reps = matrix.copy()
    sq_norms = np.einsum("ij,ij->i", reps, reps)

    dots = reps @ reps.T
    denom = sq_norms[:, None] + sq_norms[None, :] - dots
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = 1.0 - dots / denom
    dist[denom <= 0.0] = 1.0
    np.fill_diagonal(dist, np.inf)

    alive = np.ones(n, dtype=bool)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    merge_log: list[tuple[int, int, float]] = []

    while n > 1:
        flat = int(np.argmin(dist))
        keep, drop = divmod(flat, n)
        smallest = dist[keep, drop]
        if not smallest <= min_dist_thresh:
            break
        # Row-major argmin lands on the upper triangle first, so
        # keep < drop and the pair is the lexicographic minimum.
        merge_log.append((keep, drop, float(smallest)))
        members[keep].extend(members.pop(drop))
        reps[keep] = np.minimum(reps[keep], reps[drop])
        sq_norms[keep] = reps[keep] @ reps[keep]
        alive[drop] = False
        dist[drop, :] = np.inf
        dist[:, drop] = np.inf

        row_dots = reps @ reps[keep]
        row_denom = sq_norms + sq_norms[keep] - row_dots
        with np.errstate(divide="ignore", invalid="ignore"):
            row = 1.0 - row_dots / row_denom
        row[row_denom <= 0.0] = 1.0
        row[~alive] = np.inf
        row[keep] = np.inf
        dist[keep, :] = row
        dist[:, keep] = row

    assignments = np.empty(n, dtype=np.intp)
    groups: dict[int, Cluster] = {}
    for gid, idx_list in members.items():
        idx_list.sort()
        assignments[idx_list] = gid
        groups[gid] = Cluster(members=idx_list, representation=reps[gid].copy())
    logger.debug("agglomerate: %d -> %d groups (%d merges)", n, len(groups), len(merge_log))
    return ClusterState(assignments=assignments, groups=groups, merge_log=merge_log)
