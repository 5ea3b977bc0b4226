from __future__ import annotations

from .dataset import Dataset, read_dataset, write_dataset
from .raycast import first_hits, ray_directions, raycast_scan
from .scenarios import SCENARIOS, get_scenario
from .trajectory import OdometryBias, ScanFrame, Waypoint, WaypointPlan, load_waypoints, simulate_trajectory
from .world import Door, FloorPlan, Rect, World, in_free_space, load_world, sample_world_surfaces, wall_boxes

__all__ = [
    "SCENARIOS",
    "Dataset",
    "Door",
    "FloorPlan",
    "OdometryBias",
    "Rect",
    "ScanFrame",
    "Waypoint",
    "WaypointPlan",
    "World",
    "first_hits",
    "get_scenario",
    "in_free_space",
    "load_waypoints",
    "load_world",
    "ray_directions",
    "raycast_scan",
    "read_dataset",
    "sample_world_surfaces",
    "simulate_trajectory",
    "wall_boxes",
    "write_dataset",
]
