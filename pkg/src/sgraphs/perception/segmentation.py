"""Sequential RANSAC plane extraction on a single keyframe cloud."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..config import SegmentationConfig
from ..geometry import Frame, PlaneCategory, PlaneCoeffs, fit_plane

logger = logging.getLogger(__name__)


@dataclass
class SegmentedPlane:
    """A plane found in one scan, oriented so the sensor is on its positive side."""

    coeffs: PlaneCoeffs
    inliers: np.ndarray
    points: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.inliers)

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


def classify_plane(coeffs: PlaneCoeffs) -> PlaneCategory:
    ax, ay, az = np.abs(coeffs.normal)
    if max(ax, ay) >= az:
        return PlaneCategory.X_VERTICAL if ax >= ay else PlaneCategory.Y_VERTICAL
    return PlaneCategory.HORIZONTAL


def _ransac(pts: np.ndarray, iterations: int, threshold: float, rng: np.random.Generator) -> np.ndarray:
    """Inlier mask of the best three-point hypothesis."""
    samples = rng.integers(0, len(pts), size=(iterations, 3))
    a, b, c = pts[samples[:, 0]], pts[samples[:, 1]], pts[samples[:, 2]]
    normals = np.cross(b - a, c - a)
    norms = np.linalg.norm(normals, axis=1)
    valid = norms > 1e-9
    if not np.any(valid):
        return np.zeros(len(pts), dtype=bool)
    normals = normals[valid] / norms[valid, None]
    offsets = -np.einsum("ij,ij->i", normals, a[valid])
    dist = np.abs(pts @ normals.T + offsets)
    counts = (dist < threshold).sum(axis=0)
    return dist[:, int(np.argmax(counts))] < threshold


def _refine(pts: np.ndarray, mask: np.ndarray, threshold: float) -> tuple[PlaneCoeffs, np.ndarray]:
    plane = fit_plane(pts[mask])
    for _ in range(2):
        mask = np.abs(plane.signed_distance(pts)) < threshold
        if mask.sum() < 3:
            break
        plane = fit_plane(pts[mask])
    mask = np.abs(plane.signed_distance(pts)) < threshold
    return plane, mask


def segment_planes(
    cloud: np.ndarray,
    cfg: SegmentationConfig | None = None,
    *,
    seed: int = 0,
) -> list[SegmentedPlane]:
    cfg = cfg or SegmentationConfig()
    pts = np.asarray(cloud, dtype=float).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    remaining = np.arange(len(pts))
    planes: list[SegmentedPlane] = []

    while len(planes) < cfg.max_planes and len(remaining) >= max(cfg.min_inliers, 3):
        sub = pts[remaining]
        mask = _ransac(sub, cfg.ransac_iterations, cfg.ransac_threshold, rng)
        if mask.sum() < cfg.min_inliers:
            break
        plane, mask = _refine(sub, mask, cfg.ransac_threshold)
        if mask.sum() < cfg.min_inliers:
            break
        if plane.d < 0.0:
            plane = plane.flipped()
        plane = PlaneCoeffs(plane.normal, plane.d, Frame.SENSOR)
        planes.append(SegmentedPlane(plane, remaining[mask], sub[mask]))
        remaining = remaining[~mask]

    logger.debug("segmented %d planes from %d points", len(planes), len(pts))
    return planes
