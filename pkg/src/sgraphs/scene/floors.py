from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..config import PipelineConfig
from ..errors import InsufficientWalls
from ..geometry import PlaneCategory, Pose
from ..graph import FactorGraph, FloorRoomFactor, FloorVar, RoomVar, VariableId, VarKind
from .views import PlaneView

logger = logging.getLogger(__name__)


@dataclass
class FloorEstimate:
    floor_id: int
    center: np.ndarray
    reference_z: float
    variable: VariableId | None = None
    reanchored: bool = False


def detect_floor_change(keyframe_pose: Pose, floors: dict[int, float], cfg: PipelineConfig | None = None) -> int:
    """Floor id for the keyframe height; unknown heights allocate a new id in ``floors``."""
    cfg = cfg or PipelineConfig()
    z = float(keyframe_pose.translation[2])
    best: int | None = None
    best_dz = cfg.floors.floor_height_tol
    for fid, ref in sorted(floors.items()):
        dz = abs(z - ref)
        if dz <= best_dz:
            best, best_dz = fid, dz
    if best is not None:
        return best
    new_id = max(floors, default=-1) + 1
    floors[new_id] = z
    logger.info("new floor %d at z=%.2f", new_id, z)
    return new_id


_WALLS = (PlaneCategory.X_VERTICAL, PlaneCategory.Y_VERTICAL)


def floor_center(planes: list[PlaneView], floor_id: int) -> np.ndarray:
    """Midpoint of the extreme x-wall and y-wall closest points on this floor."""
    center = np.zeros(2)
    for k, category in enumerate(_WALLS):
        coords = [float(p.closest_point[k]) for p in planes if p.category == category and p.floor_id == floor_id]
        if not coords:
            raise InsufficientWalls(f"floor {floor_id} has no {category.value} walls")
        center[k] = 0.5 * (min(coords) + max(coords))
    return center


def find_floor(graph: FactorGraph, floor_id: int) -> VariableId | None:
    for vid, var in graph.items_of_kind(VarKind.FLOOR):
        assert isinstance(var, FloorVar)
        if var.floor_id == floor_id:
            return vid
    return None


def update_floor(
    graph: FactorGraph,
    planes: list[PlaneView],
    current_floor_id: int,
    cfg: PipelineConfig | None = None,
    *,
    reference_z: float = 0.0,
) -> FloorEstimate:
    cfg = cfg or PipelineConfig()
    center = floor_center(planes, current_floor_id)
    reanchored = False
    with graph.lock:
        fid = find_floor(graph, current_floor_id)
        if fid is None:
            fid = graph.add_variable(FloorVar(center, current_floor_id, reference_z))
            logger.info("new floor node %s at (%.2f, %.2f)", fid, *center)
        floor = graph.variables[fid]
        assert isinstance(floor, FloorVar)
        assert floor.anchor is not None

        linked = {graph.factors[f].keys[1] for f in graph.factors_of(fid) if isinstance(graph.factors[f], FloorRoomFactor)}
        if float(np.linalg.norm(center - floor.anchor)) > cfg.floors.reanchor_distance:
            floor.position = center.copy()
            floor.anchor = center.copy()
            for f in graph.factors_of(fid):
                factor = graph.factors[f]
                if isinstance(factor, FloorRoomFactor):
                    room = graph.variables[factor.room]
                    assert isinstance(room, RoomVar)
                    factor.delta = room.position - floor.position
            reanchored = True
            logger.info("floor %s re-anchored to (%.2f, %.2f)", fid, *center)

        info = np.eye(2) * cfg.information.floor_room
        for rid, room in graph.items_of_kind(VarKind.ROOM):
            assert isinstance(room, RoomVar)
            if room.floor_id == current_floor_id and rid not in linked:
                graph.add_factor(FloorRoomFactor(fid, rid, room.position - floor.position, info))
                linked.add(rid)
        floor.room_ids = [rid for rid in graph.ids_of_kind(VarKind.ROOM) if rid in linked]
        floor.plane_ids = [p.id for p in planes if p.floor_id == current_floor_id and p.category in _WALLS]
        return FloorEstimate(current_floor_id, floor.position.copy(), floor.reference_z, fid, reanchored)
