from __future__ import annotations

from .factors import (
    FACTOR_TYPES,
    AnyFactor,
    Factor,
    FloorRoomFactor,
    LoopFactor,
    OdometryFactor,
    PoseAnchorFactor,
    PosePlaneFactor,
    RoomPlanePairFactor,
    RoomPriorFactor,
    check_opposed,
    plane_midpoint,
    residual_floor_room,
    residual_odometry,
    residual_pose_plane,
    residual_room_plane_pair,
)
from .graph import FactorGraph
from .optimizer import OptReport, linear_system, optimize, total_cost
from .serialization import dumps_graph, graph_from_dict, graph_to_dict, load_graph, loads_graph, save_graph
from .variables import FactorId, FloorVar, KeyframeVar, PlaneVar, RoomVar, Variable, VariableId, VarKind

__all__ = [
    "FACTOR_TYPES",
    "AnyFactor",
    "Factor",
    "FactorGraph",
    "FactorId",
    "FloorRoomFactor",
    "FloorVar",
    "KeyframeVar",
    "LoopFactor",
    "OdometryFactor",
    "OptReport",
    "PlaneVar",
    "PoseAnchorFactor",
    "PosePlaneFactor",
    "RoomPlanePairFactor",
    "RoomPriorFactor",
    "RoomVar",
    "VarKind",
    "Variable",
    "VariableId",
    "check_opposed",
    "dumps_graph",
    "graph_from_dict",
    "graph_to_dict",
    "linear_system",
    "load_graph",
    "loads_graph",
    "optimize",
    "plane_midpoint",
    "residual_floor_room",
    "residual_odometry",
    "residual_pose_plane",
    "residual_room_plane_pair",
    "save_graph",
    "total_cost",
]
