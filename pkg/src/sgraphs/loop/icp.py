"""Point-to-plane ICP between two sensor-frame clouds."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..config import LoopClosureConfig
from ..errors import InsufficientOverlap
from ..geometry import Pose

logger = logging.getLogger(__name__)


@dataclass
class IcpResult:
    pose: Pose
    fitness: float
    correspondences: int
    overlap: float
    iterations: int
    history: list[float] = field(default_factory=list)


@dataclass
class PlanarTarget:
    """Target cloud with per-point normals; non-planar neighbourhoods are masked out."""

    points: np.ndarray
    normals: np.ndarray
    tree: cKDTree | None

    @classmethod
    def build(cls, points: np.ndarray, neighbors: int, max_variation: float) -> PlanarTarget:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        k = min(neighbors, len(pts))
        if k < 3:
            return cls(np.zeros((0, 3)), np.zeros((0, 3)), None)
        _, idx = cKDTree(pts).query(pts, k=k)
        nbhd = pts[idx]
        centered = nbhd - nbhd.mean(axis=1, keepdims=True)
        cov = np.einsum("nki,nkj->nij", centered, centered) / k
        evals, evecs = np.linalg.eigh(cov)
        variation = evals[:, 0] / np.maximum(evals.sum(axis=1), 1e-12)
        keep = variation <= max_variation
        normals = evecs[:, :, 0][keep]
        return cls(pts[keep], normals, cKDTree(pts[keep]) if keep.any() else None)

    def __len__(self) -> int:
        return len(self.points)


def _correspond(target: PlanarTarget, moved: np.ndarray, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    if target.tree is None:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    dist, idx = target.tree.query(moved, k=1, distance_upper_bound=cutoff)
    src = np.flatnonzero(np.isfinite(dist))
    return src, idx[src]


def _residuals(target: PlanarTarget, moved: np.ndarray, src: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", moved[src] - target.points[tgt], target.normals[tgt])


def register(
    source: np.ndarray,
    target: np.ndarray | PlanarTarget,
    init: Pose | None = None,
    cfg: LoopClosureConfig | None = None,
) -> IcpResult:
    """Refine ``init`` so that ``pose.transform(source)`` lands on ``target``."""
    cfg = cfg or LoopClosureConfig()
    src_pts = np.asarray(source, dtype=float).reshape(-1, 3)
    tgt = target if isinstance(target, PlanarTarget) else PlanarTarget.build(
        target, cfg.normal_neighbors, cfg.max_surface_variation
    )
    pose = init or Pose.identity()
    if len(src_pts) == 0 or len(tgt) == 0:
        raise InsufficientOverlap("empty cloud")

    moved = pose.transform(src_pts)
    s, t = _correspond(tgt, moved, cfg.correspondence_cutoff)
    fitness = float(np.mean(_residuals(tgt, moved, s, t) ** 2)) if len(s) else np.inf
    history = [fitness]
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        if len(s) < 6:
            break
        p = moved[s]
        n = tgt.normals[t]
        r = _residuals(tgt, moved, s, t)
        J = np.hstack([np.cross(p, n), n])
        delta, *_ = np.linalg.lstsq(J.T @ J, -J.T @ r, rcond=None)
        candidate = Pose.exp(delta) @ pose
        moved_c = candidate.transform(src_pts)
        s_c, t_c = _correspond(tgt, moved_c, cfg.correspondence_cutoff)
        if len(s_c) == 0:
            break
        fit_c = float(np.mean(_residuals(tgt, moved_c, s_c, t_c) ** 2))
        if fit_c > fitness:
            break
        pose, moved, s, t, fitness = candidate, moved_c, s_c, t_c, fit_c
        history.append(fitness)
        logger.debug("icp iter %d fitness %.3e corr %d", iterations, fitness, len(s))
        if float(np.linalg.norm(delta)) < 1e-9:
            break

    if len(s) < cfg.min_correspondences:
        raise InsufficientOverlap(f"only {len(s)} correspondences (need {cfg.min_correspondences})")
    return IcpResult(pose, fitness, len(s), len(s) / len(src_pts), iterations, history)


def scan_match(
    source: np.ndarray,
    target: np.ndarray,
    init: Pose | None = None,
    cfg: LoopClosureConfig | None = None,
) -> tuple[Pose, float]:
    result = register(source, target, init, cfg)
    return result.pose, result.fitness
