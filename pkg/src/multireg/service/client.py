"""Thin HTTP client used by ``multireg register --server``."""

from __future__ import annotations

import json
from pathlib import Path

import httpx

from ..fileio import RESULT_FORMAT, config_to_dict
from ..geometry import CorrespondenceSet
from ..pipeline import PipelineConfig

__all__ = ["register_remote", "write_remote_result"]


def register_remote(
    base_url: str,
    correspondences: CorrespondenceSet,
    cfg: PipelineConfig,
    client: httpx.Client | None = None,
) -> dict:
    """POST the correspondences to a running service; returns the response body."""
    body = {
        "source": correspondences.source.tolist(),
        "target": correspondences.target.tolist(),
        "config": {**config_to_dict(cfg), "seed": cfg.rng_seed},
    }
    own_client = client is None
    if own_client:
        client = httpx.Client(base_url=base_url, timeout=600.0)
    try:
        response = client.post("/register", json=body)
        response.raise_for_status()
        return response.json()
    finally:
        if own_client:
            client.close()


def write_remote_result(path, response: dict, cfg: PipelineConfig, include_timings: bool) -> None:
    """Write a service response in the same format as a local result file."""
    payload = {
        "format": RESULT_FORMAT,
        "instances": response["instances"],
        "labels": response["labels"],
        "config": config_to_dict(cfg),
        "seed": cfg.rng_seed,
        "stats": response["stats"],
    }
    if include_timings:
        payload["timings_ms"] = response["timings_ms"]
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")
