"""Trajectory and map accuracy metrics."""
from __future__ import annotations

import logging

import numpy as np
from scipy.spatial import cKDTree

from ..errors import EmptyCloud, NoOverlap
from ..io import Trajectory

logger = logging.getLogger(__name__)


def associate(estimate: Trajectory, reference: Trajectory, max_dt: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (estimate, reference) whose timestamps are within ``max_dt``; nearest reference wins."""
    if len(estimate) == 0 or len(reference) == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    t_ref = np.asarray(reference.timestamps)
    order = np.argsort(t_ref, kind="stable")
    sorted_ref = t_ref[order]
    t_est = np.asarray(estimate.timestamps)
    pos = np.searchsorted(sorted_ref, t_est)
    lo = np.clip(pos - 1, 0, len(sorted_ref) - 1)
    hi = np.clip(pos, 0, len(sorted_ref) - 1)
    pick = np.where(np.abs(sorted_ref[hi] - t_est) < np.abs(sorted_ref[lo] - t_est), hi, lo)
    ok = np.abs(sorted_ref[pick] - t_est) <= max_dt
    return np.flatnonzero(ok), order[pick[ok]]


def align_rigid(source: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation and translation minimising ``sum ||target - (R source + t)||^2`` (no scale)."""
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    cov = (target - mu_t).T @ (source - mu_s) / len(source)
    U, _, Vt = np.linalg.svd(cov)
    D = np.eye(3)
    D[2, 2] = np.sign(np.linalg.det(U) * np.linalg.det(Vt)) or 1.0
    R = U @ D @ Vt
    return R, mu_t - R @ mu_s


def ate_residuals(estimate: Trajectory, reference: Trajectory, max_dt: float = 0.01) -> np.ndarray:
    ei, ri = associate(estimate, reference, max_dt)
    if len(ei) == 0:
        raise NoOverlap("no estimate timestamp has a reference pose within tolerance")
    est = estimate.positions[ei]
    ref = reference.positions[ri]
    R, t = align_rigid(est, ref)
    return ref - (est @ R.T + t)


def compute_ate(estimate: Trajectory, reference: Trajectory, max_dt: float = 0.01) -> float:
    """Translation RMSE after the best rigid alignment of the estimate onto the reference."""
    res = ate_residuals(estimate, reference, max_dt)
    return float(np.sqrt(np.mean(np.sum(res**2, axis=1))))


def compute_map_rmse(estimated_map: np.ndarray, ground_truth_map: np.ndarray) -> float:
    """RMSE of each estimated point's distance to its nearest ground-truth point."""
    est = np.asarray(estimated_map, dtype=float).reshape(-1, 3)
    gt = np.asarray(ground_truth_map, dtype=float).reshape(-1, 3)
    if len(est) == 0 or len(gt) == 0:
        raise EmptyCloud("map RMSE needs two non-empty clouds")
    dist, _ = cKDTree(gt).query(est, k=1)
    return float(np.sqrt(np.mean(dist**2)))
