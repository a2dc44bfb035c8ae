"""FastAPI application exposing registration, scene generation and scoring."""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..geometry import CorrespondenceSet, RigidTransform
from ..metrics import HitCriteria, score_sample
from ..pipeline import InsufficientInput, RegistrationResult, register
from ..synthetic import SceneSpec, SeparationInfeasible, generate_scene
from .schemas import (
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    InstancePayload,
    RegisterRequest,
    RegisterResponse,
    RunStatsPayload,
    SceneRequest,
    SceneResponse,
    TransformPayload,
)


def _transform_payload(transform: RigidTransform) -> TransformPayload:
    return TransformPayload(
        rotation=[float(v) for v in transform.rotation.reshape(-1)],
        translation=[float(v) for v in transform.translation],
    )


def _payload_transform(payload: TransformPayload) -> RigidTransform:
    try:
        return RigidTransform(
            np.array(payload.rotation, dtype=np.float64).reshape(3, 3),
            np.array(payload.translation, dtype=np.float64),
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _register_response(result: RegistrationResult) -> RegisterResponse:
    return RegisterResponse(
        instances=[
            InstancePayload(
                rotation=[float(v) for v in h.transform.rotation.reshape(-1)],
                translation=[float(v) for v in h.transform.translation],
                inlier_count=h.inlier_count,
            )
            for h in result.instances
        ],
        labels=[int(v) for v in result.labels],
        timings_ms={k: v * 1000.0 for k, v in result.timings.items()},
        stats=RunStatsPayload(
            n_input=result.stats.n_input,
            n_working=result.stats.n_working,
            refine_iterations=result.stats.refine_iterations,
        ),
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="multireg",
        description="Multi-instance rigid point-cloud registration service",
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/register", response_model=RegisterResponse)
    def register_endpoint(request: RegisterRequest) -> RegisterResponse:
        if len(request.source) != len(request.target):
            raise HTTPException(
                status_code=400, detail="source and target must have equal length"
            )
        try:
            correspondences = CorrespondenceSet(
                np.array(request.source, dtype=np.float64).reshape(-1, 3),
                np.array(request.target, dtype=np.float64).reshape(-1, 3),
            )
            result = register(correspondences, request.config.to_config())
        except (InsufficientInput, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return _register_response(result)

    @app.post("/scenes", response_model=SceneResponse)
    def scenes_endpoint(request: SceneRequest) -> SceneResponse:
        try:
            spec = SceneSpec(**request.model_dump())
            correspondences, truth = generate_scene(spec)
        except (ValueError, SeparationInfeasible) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return SceneResponse(
            source=correspondences.source.tolist(),
            target=correspondences.target.tolist(),
            labels=[int(v) for v in truth.labels],
            transforms=[_transform_payload(t) for t in truth.transforms],
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate_endpoint(request: EvaluateRequest) -> EvaluateResponse:
        crit = HitCriteria(
            max_rotation_error=math.radians(request.max_rotation_error_deg),
            max_translation_error=request.max_translation_error,
        )
        predicted = [_payload_transform(p) for p in request.predicted]
        truth = [_payload_transform(t) for t in request.truth]
        sample = score_sample(predicted, truth, crit)
        return EvaluateResponse(
            hits=sample.hits,
            num_gt=sample.num_gt,
            num_pred=sample.num_pred,
            recall=sample.recall,
            precision=sample.precision,
            f1=sample.f1,
        )

    return app


app = create_app()
