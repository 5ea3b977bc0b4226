from __future__ import annotations

import logging

import numpy as np

from ..config import SimulatorConfig
from ..errors import PoseInWall
from ..geometry import Pose
from .world import World, in_free_space

logger = logging.getLogger(__name__)


def ray_directions(cfg: SimulatorConfig) -> np.ndarray:
    """Unit sensor-frame directions, elevation-major; the first ray of the middle ring points along +x."""
    azimuth = 2 * np.pi * np.arange(cfg.h_rays) / cfg.h_rays
    if cfg.v_rays == 1:
        elevation = np.zeros(1)
    else:
        elevation = np.deg2rad(np.linspace(-cfg.v_fov_deg, cfg.v_fov_deg, cfg.v_rays))
    el, az = np.meshgrid(elevation, azimuth, indexing="ij")
    return np.column_stack(
        [(np.cos(el) * np.cos(az)).ravel(), (np.cos(el) * np.sin(az)).ravel(), np.sin(el).ravel()]
    )


def first_hits(origin: np.ndarray, directions: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """Distance along each ray to the nearest box, ``inf`` on a miss (slab test)."""
    if len(boxes) == 0:
        return np.full(len(directions), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t0 = (boxes[None, :, :3] - origin) * inv[:, None, :]
        t1 = (boxes[None, :, 3:] - origin) * inv[:, None, :]
        # rays parallel to a slab: inside it spans everything, outside it nothing
        parallel = directions[:, None, :] == 0
        inside = (boxes[None, :, :3] <= origin) & (origin <= boxes[None, :, 3:])
        lo = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t0, t1))
        hi = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t0, t1))
    near = lo.max(axis=2)
    far = hi.min(axis=2)
    hit = (near <= far) & (near > 0)
    return np.where(hit, near, np.inf).min(axis=1)


def raycast_scan(
    world: World,
    pose: Pose,
    cfg: SimulatorConfig | None = None,
    *,
    rng: np.random.Generator | None = None,
    boxes: np.ndarray | None = None,
) -> np.ndarray:
    """Sensor-frame LiDAR scan taken at ``pose``; rays beyond ``max_range`` are dropped."""
    cfg = cfg or SimulatorConfig()
    boxes = world.boxes() if boxes is None else boxes
    if not in_free_space(world, pose.translation, boxes):
        raise PoseInWall(f"sensor pose {np.round(pose.translation, 3).tolist()} is not in free space")
    rng = rng or np.random.default_rng(0)

    dirs = ray_directions(cfg)
    ranges = first_hits(pose.translation, dirs @ pose.R.T, boxes)
    keep = ranges <= cfg.max_range
    ranges = ranges[keep]
    if cfg.range_sigma > 0:
        ranges = ranges + rng.normal(0.0, cfg.range_sigma, size=len(ranges))
    return dirs[keep] * ranges[:, None]
