from __future__ import annotations

import numpy as np

from ..config import InformationConfig


def odometry_information(cfg: InformationConfig, frames: int = 1) -> np.ndarray:
    """6x6 information of ``frames`` chained noisy increments, (rotation, translation) order."""
    n = max(int(frames), 1)
    sigma_rot = max(np.sqrt(n) * np.deg2rad(cfg.odom_sigma_rot_deg), cfg.sigma_floor_rot)
    sigma_t = max(np.sqrt(n) * cfg.odom_sigma_t, cfg.sigma_floor_t)
    return np.diag([sigma_rot**-2] * 3 + [sigma_t**-2] * 3)


def anchor_information(cfg: InformationConfig) -> np.ndarray:
    return np.eye(6) * cfg.anchor
