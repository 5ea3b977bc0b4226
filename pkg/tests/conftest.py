"""Shared fixtures for tests."""
from __future__ import annotations

import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from sgraphs.config import PipelineConfig, SimulatorConfig
from sgraphs.geometry import Pose
from sgraphs.sim import FloorPlan, Rect, World


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for test outputs."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def pipeline_config() -> PipelineConfig:
    """Default configuration."""
    return PipelineConfig()


@pytest.fixture
def quiet_sim() -> SimulatorConfig:
    """Noise-free simulator with a light scanner."""
    return SimulatorConfig(range_sigma=0.0, sigma_t=0.0, sigma_rot_deg=0.0, h_rays=180, v_rays=9)


@pytest.fixture
def box_world() -> World:
    """A single closed 4 x 4 m room."""
    return World(floors=[FloorPlan(floor_id=0, rooms=[Rect(x_min=0, y_min=0, x_max=4, y_max=4)])])


@pytest.fixture
def room_center_pose() -> Pose:
    return Pose.from_xyz_yaw(2.0, 2.0, 1.0, 0.0)


def wall_points(axis: int, offset: float, span: tuple[float, float], z: tuple[float, float] = (0.0, 2.5),
                step: float = 0.1) -> np.ndarray:
    """Grid of points on the vertical wall ``coord[axis] == offset``."""
    s = np.arange(span[0], span[1] + 1e-9, step)
    h = np.arange(z[0], z[1] + 1e-9, step)
    a, b = np.meshgrid(s, h, indexing="ij")
    pts = np.zeros((a.size, 3))
    pts[:, axis] = offset
    pts[:, 1 - axis] = a.ravel()
    pts[:, 2] = b.ravel()
    return pts


@pytest.fixture
def wall_grid():
    return wall_points
