"""Waypoint-driven planar robot with noisy odometry and a raycast LiDAR."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..config import SimulatorConfig
from ..errors import DataError, PoseInWall, WaypointInWall
from ..geometry import Pose
from .raycast import raycast_scan
from .world import World, _load_mapping, in_free_space

logger = logging.getLogger(__name__)


class Waypoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x: float
    y: float
    floor: int = 0


class OdometryBias(BaseModel):
    """Extra translation injected into the odometry increment arriving at ``frame``."""

    model_config = ConfigDict(extra="forbid")

    frame: int = Field(ge=1)
    x: float = 0.0
    y: float = 0.0


class WaypointPlan(BaseModel):
    model_config = ConfigDict(extra="forbid")

    yaw_deg: float = 0.0
    points: list[Waypoint] = Field(min_length=1)
    biases: list[OdometryBias] = Field(default_factory=list)


@dataclass
class ScanFrame:
    timestamp: float
    gt: Pose
    odom: Pose
    cloud: np.ndarray


def load_waypoints(path: str | Path) -> WaypointPlan:
    path = Path(path)
    try:
        return WaypointPlan.model_validate(_load_mapping(path))
    except ValidationError as exc:
        raise DataError(f"{path}: invalid waypoints: {exc}") from exc


def _position(world: World, wp: Waypoint, cfg: SimulatorConfig) -> np.ndarray:
    return np.array([wp.x, wp.y, world.floor(wp.floor).z_base + cfg.sensor_height])


def interpolate_path(world: World, plan: WaypointPlan, cfg: SimulatorConfig) -> list[np.ndarray]:
    """Positions every ``cfg.step`` metres along the polyline; a floor change is a teleport."""
    boxes = world.boxes()
    anchors = [_position(world, wp, cfg) for wp in plan.points]
    for wp, pos in zip(plan.points, anchors):
        if not in_free_space(world, pos, boxes):
            raise WaypointInWall(f"waypoint ({wp.x}, {wp.y}) on floor {wp.floor} is not in free space")

    path = [anchors[0]]
    carry = 0.0
    legs = zip(plan.points, plan.points[1:], anchors, anchors[1:])
    for wa, wb, prev, nxt in legs:
        if wa.floor != wb.floor:
            path.append(nxt)
            carry = 0.0
            continue
        seg = nxt[:2] - prev[:2]
        length = float(np.linalg.norm(seg))
        if length == 0:
            continue
        n_check = int(np.ceil(length / (world.wall_thickness / 2))) + 1
        for f in np.linspace(0.0, 1.0, n_check):
            point = prev + (nxt - prev) * f
            if not in_free_space(world, point, boxes):
                raise WaypointInWall(f"path crosses a wall near {np.round(point, 3).tolist()}")
        s = cfg.step - carry
        while s <= length + 1e-9:
            pos = prev + np.append(seg * (s / length), 0.0)
            path.append(pos)
            s += cfg.step
        carry = length - (s - cfg.step)
    return path


def _noisy_increment(inc: Pose, rng: np.random.Generator, cfg: SimulatorConfig) -> Pose:
    dx, dy = rng.normal(0.0, cfg.sigma_t, size=2)
    dyaw = rng.normal(0.0, np.deg2rad(cfg.sigma_rot_deg))
    return inc @ Pose.from_xyz_yaw(dx, dy, 0.0, dyaw)


def simulate_trajectory(
    world: World,
    plan: WaypointPlan,
    cfg: SimulatorConfig | None = None,
    *,
    seed: int = 0,
) -> list[ScanFrame]:
    """Ground-truth poses, cumulatively drifting odometry and one scan per pose.

    Odometry noise comes from one stream seeded by ``seed``; frame ``i``'s scan
    uses its own stream derived from ``(seed, i)``.
    """
    cfg = cfg or SimulatorConfig()
    boxes = world.boxes()
    yaw = np.deg2rad(plan.yaw_deg)
    gt = [Pose.from_xyz_yaw(p[0], p[1], p[2], yaw) for p in interpolate_path(world, plan, cfg)]
    biases = {b.frame: b for b in plan.biases}

    if cfg.sigma_t == 0 and cfg.sigma_rot_deg == 0 and not biases:
        odom = list(gt)
    else:
        odom_rng = np.random.default_rng([seed, 0])
        odom = [gt[0]]
        for i in range(1, len(gt)):
            step = _noisy_increment(gt[i - 1].between(gt[i]), odom_rng, cfg)
            if i in biases:
                step = Pose.translation_only(biases[i].x, biases[i].y, 0.0) @ step
                logger.info("odometry bias (%.2f, %.2f) injected at frame %d", biases[i].x, biases[i].y, i)
            odom.append(odom[-1] @ step)

    frames: list[ScanFrame] = []
    for i, pose in enumerate(gt):
        try:
            cloud = raycast_scan(world, pose, cfg, rng=np.random.default_rng([seed, 1, i]), boxes=boxes)
        except PoseInWall as exc:
            raise WaypointInWall(str(exc)) from exc
        frames.append(ScanFrame(round(i * cfg.step / cfg.speed, 6), pose, odom[i], cloud))
    logger.info("simulated %d frames over %d waypoints", len(frames), len(plan.points))
    return frames
