from __future__ import annotations

import numpy as np

from ..config import PrefilterConfig


def range_filter(points: np.ndarray, range_min: float, range_max: float) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(pts, axis=1)
    return pts[(r >= range_min) & (r <= range_max)]


def voxel_downsample(points: np.ndarray, voxel: float) -> np.ndarray:
    """One point per occupied voxel, at the centroid of its members.

    Output is ordered by voxel index, so it depends only on the input set
    and order.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return pts
    keys = np.floor(pts / voxel).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    sums = np.zeros((len(counts), 3))
    np.add.at(sums, inverse, pts)
    return sums / counts[:, None]


def prefilter(cloud: np.ndarray, cfg: PrefilterConfig | None = None) -> np.ndarray:
    cfg = cfg or PrefilterConfig()
    return voxel_downsample(range_filter(cloud, cfg.range_min, cfg.range_max), cfg.voxel)
