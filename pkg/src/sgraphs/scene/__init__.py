from __future__ import annotations

from .association import associate_room, find_matching_room, merge_planes, remap_candidate, resolve_plane
from .floors import FloorEstimate, detect_floor_change, find_floor, floor_center, update_floor
from .rooms import (
    RoomCandidate,
    candidate_planes_for_cluster,
    compute_room_center_finite,
    compute_room_center_infinite,
    detect_rooms,
    facing_each_other,
)
from .views import PlaneView, mapped_planes

__all__ = [
    "FloorEstimate",
    "PlaneView",
    "RoomCandidate",
    "associate_room",
    "candidate_planes_for_cluster",
    "compute_room_center_finite",
    "compute_room_center_infinite",
    "detect_floor_change",
    "detect_rooms",
    "facing_each_other",
    "find_floor",
    "find_matching_room",
    "floor_center",
    "mapped_planes",
    "merge_planes",
    "remap_candidate",
    "resolve_plane",
    "update_floor",
]
