"""Plain-text file formats: correspondences, ground-truth poses, results.

All formats carry a versioned header and serialize decimals with enough
digits to round-trip (9 significant digits for correspondence data, 17
for ground-truth transforms; result files are JSON with full-precision
floats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import CorrespondenceSet, RigidTransform
from .pipeline import PipelineConfig, RegistrationResult

__all__ = [
    "CORR_HEADER",
    "TRUTH_HEADER",
    "RESULT_FORMAT",
    "MalformedFileError",
    "LoadedResult",
    "write_correspondences",
    "read_correspondences",
    "write_truth",
    "read_truth",
    "write_result",
    "read_result",
    "config_to_dict",
]

CORR_HEADER = "# multireg-corr v1"
TRUTH_HEADER = "# multireg-truth v1"
RESULT_FORMAT = "multireg-result v1"


class MalformedFileError(ValueError):
    """Raised when an input file does not follow its format."""


def write_correspondences(path, correspondences: CorrespondenceSet, labels=None) -> None:
    """Write a 6-column correspondence file, 7-column when labels are given."""
    path = Path(path)
    lines = [CORR_HEADER]
    src = correspondences.source
    tgt = correspondences.target
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (len(correspondences),):
            raise ValueError("labels must have one entry per correspondence")
    for i in range(len(correspondences)):
        cols = [f"{v:.9g}" for v in (*src[i], *tgt[i])]
        if labels is not None:
            cols.append(str(int(labels[i])))
        lines.append(" ".join(cols))
    path.write_text("\n".join(lines) + "\n")


def read_correspondences(path) -> tuple[CorrespondenceSet, np.ndarray | None]:
    """Parse a correspondence file; returns (set, labels-or-None)."""
    path = Path(path)
    raw = path.read_text().splitlines()
    if not raw or raw[0].strip() != CORR_HEADER:
        raise MalformedFileError(f"{path}: missing '{CORR_HEADER}' header line")

    width = None
    sources, targets, labels = [], [], []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split()
        if width is None:
            width = len(tokens)
            if width not in (6, 7):
                raise MalformedFileError(
                    f"{path}:{lineno}: expected 6 or 7 columns, got {width}"
                )
        elif len(tokens) != width:
            raise MalformedFileError(
                f"{path}:{lineno}: expected {width} columns, got {len(tokens)}"
            )
        try:
            values = [float(tok) for tok in tokens[:6]]
        except ValueError:
            raise MalformedFileError(f"{path}:{lineno}: non-numeric value") from None
        if not all(np.isfinite(values)):
            raise MalformedFileError(f"{path}:{lineno}: non-finite value")
        if width == 7:
            try:
                labels.append(int(tokens[6]))
            except ValueError:
                raise MalformedFileError(f"{path}:{lineno}: non-integer label") from None
        sources.append(values[:3])
        targets.append(values[3:])

    if not sources:
        raise MalformedFileError(f"{path}: no correspondence records")
    correspondences = CorrespondenceSet(np.array(sources), np.array(targets))
    return correspondences, (np.array(labels, dtype=np.intp) if width == 7 else None)


def write_truth(path, transforms: list[RigidTransform]) -> None:
    """Write ground-truth poses, one line of 12 reals per instance."""
    path = Path(path)
    lines = [TRUTH_HEADER]
    for transform in transforms:
        values = [*transform.rotation.reshape(-1), *transform.translation]
        lines.append(" ".join(f"{v:.17g}" for v in values))
    path.write_text("\n".join(lines) + "\n")


def read_truth(path) -> list[RigidTransform]:
    path = Path(path)
    raw = path.read_text().splitlines()
    if not raw or raw[0].strip() != TRUTH_HEADER:
        raise MalformedFileError(f"{path}: missing '{TRUTH_HEADER}' header line")
    transforms = []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 12:
            raise MalformedFileError(f"{path}:{lineno}: expected 12 values, got {len(tokens)}")
        try:
            values = np.array([float(tok) for tok in tokens])
        except ValueError:
            raise MalformedFileError(f"{path}:{lineno}: non-numeric value") from None
        try:
            transforms.append(RigidTransform(values[:9].reshape(3, 3), values[9:]))
        except ValueError as exc:
            raise MalformedFileError(f"{path}:{lineno}: invalid transform: {exc}") from None
    return transforms


def config_to_dict(cfg: PipelineConfig) -> dict:
    return {
        "min_dist_thresh": cfg.min_dist_thresh,
        "inlier_thresh": cfg.refinement.inlier_thresh,
        "alpha0": cfg.refinement.alpha0,
        "theta": cfg.refinement.theta,
        "iou_merge_thresh": cfg.refinement.iou_merge_thresh,
        "max_iterations": cfg.refinement.max_iterations,
        "min_cluster_size": cfg.extraction.min_cluster_size,
        "gamma_thresh": cfg.extraction.gamma_thresh,
        "downsample_size": cfg.downsample_size,
        "enable_sampling": cfg.enable_sampling,
        "resolve_final": cfg.resolve_final,
    }


@dataclass
class LoadedResult:
    """Result file contents after validation."""

    transforms: list[RigidTransform]
    inlier_counts: list[int]
    labels: np.ndarray
    timings_ms: dict[str, float] | None
    config: dict
    seed: int
    stats: dict


def write_result(
    path,
    result: RegistrationResult,
    cfg: PipelineConfig,
    include_timings: bool = True,
) -> None:
    """Serialize a registration result as JSON."""
    payload = {
        "format": RESULT_FORMAT,
        "instances": [
            {
                "rotation": [float(v) for v in h.transform.rotation.reshape(-1)],
                "translation": [float(v) for v in h.transform.translation],
                "inlier_count": h.inlier_count,
            }
            for h in result.instances
        ],
        "labels": [int(v) for v in result.labels],
        "config": config_to_dict(cfg),
        "seed": cfg.rng_seed,
        "stats": {
            "n_input": result.stats.n_input,
            "n_working": result.stats.n_working,
            "refine_iterations": result.stats.refine_iterations,
        },
    }
    if include_timings:
        payload["timings_ms"] = {k: v * 1000.0 for k, v in result.timings.items()}
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def read_result(path) -> LoadedResult:
    """Parse and validate a result file (rotations must reconstruct)."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != RESULT_FORMAT:
        raise MalformedFileError(f"{path}: not a '{RESULT_FORMAT}' file")
    transforms = []
    counts = []
    try:
        for entry in payload["instances"]:
            rotation = np.array(entry["rotation"], dtype=np.float64).reshape(3, 3)
            translation = np.array(entry["translation"], dtype=np.float64)
            transforms.append(RigidTransform(rotation, translation))
            counts.append(int(entry["inlier_count"]))
        labels = np.array(payload["labels"], dtype=np.intp)
        return LoadedResult(
            transforms=transforms,
            inlier_counts=counts,
            labels=labels,
            timings_ms=payload.get("timings_ms"),
            config=payload.get("config", {}),
            seed=int(payload.get("seed", 0)),
            stats=payload.get("stats", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{path}: invalid result payload: {exc}") from None
