from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import PlaneCategory, PlaneCoeffs
from ..graph import FactorGraph, KeyframeVar, PlaneVar, VariableId, VarKind


@dataclass
class PlaneView:
    """Read-only copy of a mapped plane with its support points in the map frame."""

    id: VariableId
    coeffs: PlaneCoeffs
    category: PlaneCategory
    floor_id: int
    points: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def keyframes(self) -> list[int]:
        return sorted(self.points)

    @property
    def last_seen(self) -> int:
        return max(self.points) if self.points else -1

    @property
    def closest_point(self) -> np.ndarray:
        return self.coeffs.closest_point

    def points_since(self, first_keyframe: int) -> np.ndarray:
        chunks = [pts for kf, pts in sorted(self.points.items()) if kf >= first_keyframe]
        return np.vstack(chunks) if chunks else np.zeros((0, 3))

    def side_distance_2d(self, xy: np.ndarray) -> float:
        n = self.coeffs.normal
        return float(n[0] * xy[0] + n[1] * xy[1] + self.coeffs.d)


def mapped_planes(graph: FactorGraph) -> list[PlaneView]:
    """Snapshot of every plane, support samples moved into the map by the current keyframe estimates."""
    views: list[PlaneView] = []
    with graph.lock:
        for vid, var in graph.items_of_kind(VarKind.PLANE):
            assert isinstance(var, PlaneVar)
            points: dict[int, np.ndarray] = {}
            for kf_index, local in var.support.items():
                kf = graph.variables.get(VariableId(VarKind.KEYFRAME, kf_index))
                if isinstance(kf, KeyframeVar):
                    points[kf_index] = kf.pose.transform(local)
            views.append(PlaneView(vid, var.plane, var.category, var.floor_id, points))
    return views
