"""Room segmentation from free-space clusters and opposed wall pairs."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..config import RoomConfig
from ..freespace import Cluster
from ..geometry import PlaneCategory, PlaneCoeffs
from ..graph import VariableId, check_opposed, plane_midpoint
from .views import PlaneView

logger = logging.getLogger(__name__)

AXIS_NAMES = ("x", "y")


@dataclass
class RoomCandidate:
    """Room hypothesis for one cluster; pairs are ordered (low side, high side)."""

    finite: bool
    center: np.ndarray
    x_pair: tuple[VariableId, VariableId] | None
    y_pair: tuple[VariableId, VariableId] | None
    cluster_id: int
    cluster_centroid: np.ndarray
    floor_id: int = 0

    @property
    def axis(self) -> str | None:
        if self.finite:
            return None
        return "x" if self.x_pair is not None else "y"

    @property
    def plane_ids(self) -> list[VariableId]:
        return [p for pair in (self.x_pair, self.y_pair) if pair is not None for p in pair]


def compute_room_center_finite(
    x_pair: tuple[PlaneCoeffs, PlaneCoeffs],
    y_pair: tuple[PlaneCoeffs, PlaneCoeffs],
    max_angle_deg: float = 25.0,
) -> np.ndarray:
    check_opposed(*x_pair, max_angle_deg=max_angle_deg)
    check_opposed(*y_pair, max_angle_deg=max_angle_deg)
    return np.array(
        [
            plane_midpoint(x_pair[0].vector, x_pair[1].vector, 0),
            plane_midpoint(y_pair[0].vector, y_pair[1].vector, 1),
        ]
    )


def compute_room_center_infinite(
    pair: tuple[PlaneCoeffs, PlaneCoeffs],
    axis: str,
    cluster_centroid: np.ndarray,
    max_angle_deg: float = 25.0,
) -> np.ndarray:
    """Pair midpoint on ``axis``; the other coordinate comes from the cluster centroid."""
    check_opposed(*pair, max_angle_deg=max_angle_deg)
    k = AXIS_NAMES.index(axis)
    center = np.asarray(cluster_centroid, dtype=float)[:2].copy()
    center[k] = plane_midpoint(pair[0].vector, pair[1].vector, k)
    return center


def facing_each_other(a: PlaneCoeffs, b: PlaneCoeffs, max_angle_deg: float) -> bool:
    if float(a.normal @ b.normal) >= -np.cos(np.deg2rad(max_angle_deg)):
        return False
    return float(b.signed_distance(a.closest_point)[0]) > 0.0 and float(a.signed_distance(b.closest_point)[0]) > 0.0


def candidate_planes_for_cluster(
    cluster: Cluster,
    planes: list[PlaneView],
    cfg: RoomConfig | None = None,
    *,
    latest_keyframe: int | None = None,
) -> list[VariableId]:
    """Vertical planes seen in the recent keyframe window with enough support near the cluster.

    A support point is near a vertex when it lies within the vertex's clearance
    plus ``vertex_point_tol``.
    """
    cfg = cfg or RoomConfig()
    if len(cluster) == 0 or not planes:
        return []
    if latest_keyframe is None:
        latest_keyframe = max(p.last_seen for p in planes)
    first = latest_keyframe - cfg.recent_keyframe_window + 1
    reach = cluster.clearance + cfg.vertex_point_tol

    out: list[VariableId] = []
    for plane in planes:
        if plane.category == PlaneCategory.HORIZONTAL or plane.last_seen < first:
            continue
        pts = plane.points_since(first)
        if len(pts) < cfg.min_close_points:
            continue
        dist = cdist(pts[:, :2], cluster.positions)
        close = np.count_nonzero(np.any(dist <= reach[None, :], axis=1))
        if close >= cfg.min_close_points:
            out.append(plane.id)
    return out


def _best_pair(
    planes: list[PlaneView],
    axis: int,
    centroid: np.ndarray,
    cfg: RoomConfig,
) -> tuple[PlaneView, PlaneView] | None:
    best: tuple[PlaneView, PlaneView] | None = None
    best_width = -1.0
    for a, b in itertools.combinations(planes, 2):
        if not facing_each_other(a.coeffs, b.coeffs, cfg.opposed_angle_deg):
            continue
        if a.side_distance_2d(centroid) <= 0.0 or b.side_distance_2d(centroid) <= 0.0:
            continue
        width = abs(float(a.closest_point[axis] - b.closest_point[axis]))
        if not cfg.min_side <= width <= cfg.max_side:
            continue
        if width > best_width:
            lo, hi = (a, b) if a.closest_point[axis] <= b.closest_point[axis] else (b, a)
            best, best_width = (lo, hi), width
    return best


def detect_rooms(
    clusters: list[Cluster],
    planes: list[PlaneView],
    cfg: RoomConfig | None = None,
    *,
    floor_id: int = 0,
    latest_keyframe: int | None = None,
) -> list[RoomCandidate]:
    cfg = cfg or RoomConfig()
    by_id = {p.id: p for p in planes}
    out: list[RoomCandidate] = []
    for cluster_id, cluster in enumerate(clusters):
        ids = candidate_planes_for_cluster(cluster, planes, cfg, latest_keyframe=latest_keyframe)
        centroid = cluster.centroid
        xs = [by_id[i] for i in ids if by_id[i].category == PlaneCategory.X_VERTICAL and by_id[i].floor_id == floor_id]
        ys = [by_id[i] for i in ids if by_id[i].category == PlaneCategory.Y_VERTICAL and by_id[i].floor_id == floor_id]
        x_pair = _best_pair(xs, 0, centroid, cfg)
        y_pair = _best_pair(ys, 1, centroid, cfg)

        if x_pair is not None and y_pair is not None:
            center = compute_room_center_finite(
                (x_pair[0].coeffs, x_pair[1].coeffs),
                (y_pair[0].coeffs, y_pair[1].coeffs),
                cfg.opposed_angle_deg,
            )
            out.append(
                RoomCandidate(
                    True,
                    center,
                    (x_pair[0].id, x_pair[1].id),
                    (y_pair[0].id, y_pair[1].id),
                    cluster_id,
                    centroid,
                    floor_id,
                )
            )
        elif x_pair is not None or y_pair is not None:
            axis = "x" if x_pair is not None else "y"
            pair = x_pair if x_pair is not None else y_pair
            assert pair is not None
            center = compute_room_center_infinite(
                (pair[0].coeffs, pair[1].coeffs), axis, centroid, cfg.opposed_angle_deg
            )
            ids_pair = (pair[0].id, pair[1].id)
            out.append(
                RoomCandidate(
                    False,
                    center,
                    ids_pair if axis == "x" else None,
                    ids_pair if axis == "y" else None,
                    cluster_id,
                    centroid,
                    floor_id,
                )
            )
    logger.debug("detected %d room candidates from %d clusters", len(out), len(clusters))
    return out
