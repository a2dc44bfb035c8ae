"""Request/response models of the registration service."""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..extraction import ExtractionConfig
from ..pipeline import PipelineConfig
from ..refinement import RefinementConfig


class PipelineOptions(BaseModel):
    """Pipeline knobs; unset fields fall back to the library defaults."""

    min_dist_thresh: float = 0.2
    inlier_thresh: float = 0.3
    alpha0: int = 3
    theta: float = 3.0
    iou_merge_thresh: float = 0.8
    max_iterations: int = 10
    min_cluster_size: int = 10
    gamma_thresh: float = 0.5
    downsample_size: int = 1024
    enable_sampling: bool = True
    resolve_final: bool = True
    seed: int = 0

    def to_config(self) -> PipelineConfig:
        return PipelineConfig(
            min_dist_thresh=self.min_dist_thresh,
            refinement=RefinementConfig(
                inlier_thresh=self.inlier_thresh,
                alpha0=self.alpha0,
                theta=self.theta,
                iou_merge_thresh=self.iou_merge_thresh,
                max_iterations=self.max_iterations,
            ),
            extraction=ExtractionConfig(
                min_cluster_size=self.min_cluster_size,
                gamma_thresh=self.gamma_thresh,
            ),
            downsample_size=self.downsample_size,
            rng_seed=self.seed,
            enable_sampling=self.enable_sampling,
            resolve_final=self.resolve_final,
        )


def _check_points(points: list[list[float]], name: str) -> list[list[float]]:
    # Finiteness is checked by the domain layer (the correspondence
    # container), which the endpoint maps to 400; echoing a NaN back in
    # a 422 body would not serialize as strict JSON.
    for row in points:
        if len(row) != 3:
            raise ValueError(f"{name} rows must have exactly 3 coordinates")
    return points


class RegisterRequest(BaseModel):
    source: list[list[float]] = Field(description="source points, one [x,y,z] per row")
    target: list[list[float]] = Field(description="matched target points, same length")
    config: PipelineOptions = Field(default_factory=PipelineOptions)

    @field_validator("source", "target")
    @classmethod
    def _validate_points(cls, value, info):
        return _check_points(value, info.field_name)


class TransformPayload(BaseModel):
    rotation: list[float] = Field(description="row-major 3x3 rotation, 9 values")
    translation: list[float] = Field(description="3 values")

    @field_validator("rotation")
    @classmethod
    def _validate_rotation(cls, value):
        if len(value) != 9:
            raise ValueError("rotation must have 9 row-major entries")
        return value

    @field_validator("translation")
    @classmethod
    def _validate_translation(cls, value):
        if len(value) != 3:
            raise ValueError("translation must have 3 entries")
        return value


class InstancePayload(TransformPayload):
    inlier_count: int


class RunStatsPayload(BaseModel):
    n_input: int
    n_working: int
    refine_iterations: int


class RegisterResponse(BaseModel):
    instances: list[InstancePayload]
    labels: list[int]
    timings_ms: dict[str, float]
    stats: RunStatsPayload


class SceneRequest(BaseModel):
    num_points_per_instance: int = 256
    num_instances: int = 1
    outlier_ratio: float = 0.0
    noise_sigma: float = 0.01
    workspace_extent: float = 5.0
    min_instance_separation: float = 1.5
    seed: int = 0


class SceneResponse(BaseModel):
    source: list[list[float]]
    target: list[list[float]]
    labels: list[int]
    transforms: list[TransformPayload]


class EvaluateRequest(BaseModel):
    predicted: list[TransformPayload] = Field(description="ranked predictions")
    truth: list[TransformPayload]
    max_rotation_error_deg: float = 15.0
    max_translation_error: float = 0.1


class EvaluateResponse(BaseModel):
    hits: int
    num_gt: int
    num_pred: int
    recall: float
    precision: float
    f1: float


class HealthResponse(BaseModel):
    status: str
    version: str
