from __future__ import annotations

import logging

import numpy as np

from ..config import PipelineConfig
from ..errors import UnknownKeyframe
from ..geometry import PlaneCoeffs, plane_to_map
from ..graph import FactorGraph, KeyframeVar, PlaneVar, PosePlaneFactor, VariableId, VarKind
from .segmentation import SegmentedPlane, classify_plane

logger = logging.getLogger(__name__)


def support_sample(points: np.ndarray, limit: int) -> np.ndarray:
    """Evenly strided subset of at most ``limit`` points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) <= limit:
        return pts.copy()
    idx = np.linspace(0, len(pts) - 1, limit).round().astype(int)
    return pts[idx]


def find_matching_plane(
    graph: FactorGraph,
    plane: PlaneCoeffs,
    floor_id: int,
    tolerance: float,
) -> VariableId | None:
    """Closest same-category, same-floor, same-facing plane within ``tolerance``."""
    category = classify_plane(plane)
    best: VariableId | None = None
    best_dist = tolerance
    for vid, var in graph.items_of_kind(VarKind.PLANE):
        assert isinstance(var, PlaneVar)
        if var.category != category or var.floor_id != floor_id:
            continue
        if float(var.coeffs[:3] @ plane.normal) <= 0.0:
            continue
        dist = float(np.linalg.norm(var.coeffs - plane.vector))
        if dist < best_dist:
            best, best_dist = vid, dist
    return best


def plane_information(inliers: int, cfg: PipelineConfig) -> np.ndarray:
    info = cfg.information
    return np.eye(4) * min(info.plane_per_inlier * inliers, info.plane_cap)


def associate_and_map_plane(
    graph: FactorGraph,
    keyframe_id: VariableId,
    observed: SegmentedPlane,
    cfg: PipelineConfig | None = None,
) -> VariableId:
    cfg = cfg or PipelineConfig()
    kf = graph.variables.get(keyframe_id)
    if not isinstance(kf, KeyframeVar):
        raise UnknownKeyframe(f"no keyframe {keyframe_id}")

    with graph.lock:
        plane_map = plane_to_map(kf.pose, observed.coeffs, canonical=False)
        match = find_matching_plane(graph, plane_map, kf.floor_id, cfg.association.plane_match_tol)
        if match is None:
            match = graph.add_variable(PlaneVar(plane_map.vector, classify_plane(plane_map), kf.floor_id))
            logger.debug("new plane %s %s", match, plane_map)
        pv = graph.variables[match]
        assert isinstance(pv, PlaneVar)
        pv.support[keyframe_id.index] = support_sample(observed.points, cfg.segmentation.support_samples)
        graph.add_factor(
            PosePlaneFactor(
                keyframe_id,
                match,
                observed.coeffs,
                plane_information(observed.count, cfg),
                observed.count,
            )
        )
    return match
