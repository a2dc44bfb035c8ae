"""Final instance selection from refined hypotheses.

Hypotheses are ranked by inlier count; the ranked list is truncated at
the first entry whose count drops to ``gamma_thresh`` times the top
count or below. Entries that never exceed ``min_cluster_size`` inliers
are discarded before ranking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import InstanceHypothesis

__all__ = ["ExtractionConfig", "extract"]


@dataclass(frozen=True)
class ExtractionConfig:
    min_cluster_size: int = 10
    gamma_thresh: float = 0.5

    def __post_init__(self):
        if self.min_cluster_size < 3:
            raise ValueError("min_cluster_size must be at least 3")
        if not 0.0 < self.gamma_thresh <= 1.0:
            raise ValueError("gamma_thresh must lie in (0, 1]")


def extract(
    hypotheses: list[InstanceHypothesis],
    cfg: ExtractionConfig | None = None,
) -> list[InstanceHypothesis]:
    """Ranked prefix of hypotheses surviving the size and drop-off tests.

    Sort is descending by inlier count with ties kept in input order.
    The cut is a prefix rule: the first ratio at or below
    ``gamma_thresh`` terminates the list, and the top entry always
    survives the ratio test (its ratio is 1 by definition).
    """
    cfg = cfg or ExtractionConfig()
    sized = [h for h in hypotheses if h.inlier_count > cfg.min_cluster_size]
    if not sized:
        return []
    ranked = sorted(sized, key=lambda h: -h.inlier_count)
    top = ranked[0].inlier_count
    kept = [ranked[0]]
    for candidate in ranked[1:]:
        if candidate.inlier_count / top <= cfg.gamma_thresh:
            break
        kept.append(candidate)
    return kept
