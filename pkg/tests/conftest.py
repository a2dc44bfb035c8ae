"""Shared builders for the test suite."""

import numpy as np
import pytest

from multireg import CorrespondenceSet, RigidTransform
from multireg.synthetic import random_rotation


def make_transform(seed: int, translation_scale: float = 2.0) -> RigidTransform:
    """Random rigid transform, deterministic per seed."""
    rng = np.random.default_rng(seed)
    return RigidTransform(
        random_rotation(rng),
        rng.uniform(-translation_scale, translation_scale, size=3),
    )


def make_cloud(seed: int, n: int = 64, scale: float = 1.0) -> np.ndarray:
    """Random full-rank point cloud."""
    return np.random.default_rng(seed).uniform(-scale, scale, size=(n, 3))


def exact_inliers(transform: RigidTransform, points: np.ndarray) -> CorrespondenceSet:
    """Correspondence set whose targets are the exact transformed sources."""
    return CorrespondenceSet(points, transform.apply(points))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance pass/fail lines after capture ends."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
