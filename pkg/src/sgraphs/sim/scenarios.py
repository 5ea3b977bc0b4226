"""Bundled worlds with matching waypoint plans."""
from __future__ import annotations

from collections.abc import Callable

from ..config import SimulatorConfig
from .trajectory import OdometryBias, Waypoint, WaypointPlan
from .world import Door, FloorPlan, Rect, World

Scenario = tuple[World, WaypointPlan]


def _world(cfg: SimulatorConfig | None, floors: list[FloorPlan]) -> World:
    cfg = cfg or SimulatorConfig()
    return World(floors=floors, wall_height=cfg.wall_height, wall_thickness=cfg.wall_thickness)


def _plan(points: list[tuple[float, float] | tuple[float, float, int]], **kwargs) -> WaypointPlan:
    wps = [Waypoint(x=p[0], y=p[1], floor=p[2] if len(p) > 2 else 0) for p in points]
    return WaypointPlan(points=wps, **kwargs)


def four_room_loop(cfg: SimulatorConfig | None = None) -> Scenario:
    """2x2 block of 5 x 4 m rooms joined by doors; the robot circles back to its start."""
    plan = FloorPlan(
        floor_id=0,
        rooms=[
            Rect(x_min=0, y_min=0, x_max=5, y_max=4),
            Rect(x_min=5, y_min=0, x_max=10, y_max=4),
            Rect(x_min=0, y_min=4, x_max=5, y_max=8),
            Rect(x_min=5, y_min=4, x_max=10, y_max=8),
        ],
        doors=[Door(x=5, y=2), Door(x=7.5, y=4), Door(x=5, y=6), Door(x=2.5, y=4)],
    )
    path = [(2.5, 2.0), (5.0, 2.0), (7.5, 2.0), (7.5, 4.0), (7.5, 6.0), (5.0, 6.0), (2.5, 6.0), (2.5, 4.0),
            (2.5, 2.0), (3.5, 2.0)]
    return _world(cfg, [plan]), _plan(path)


def corridor(cfg: SimulatorConfig | None = None) -> Scenario:
    """A 20 m long, 3 m wide corridor walked end to end."""
    plan = FloorPlan(floor_id=0, corridors=[Rect(x_min=0, y_min=0, x_max=20, y_max=3)])
    return _world(cfg, [plan]), _plan([(1.0, 1.5), (19.0, 1.5)])


def two_floor(cfg: SimulatorConfig | None = None) -> Scenario:
    """Two stacked 6 x 5 m rooms 3 m apart; the robot teleports upstairs halfway."""
    rooms = [Rect(x_min=0, y_min=0, x_max=6, y_max=5)]
    floors = [FloorPlan(floor_id=0, z_base=0.0, rooms=rooms), FloorPlan(floor_id=1, z_base=3.0, rooms=rooms)]
    path = [(1.5, 1.5, 0), (4.5, 1.5, 0), (4.5, 3.5, 0), (1.5, 3.5, 0),
            (1.5, 1.5, 1), (4.5, 1.5, 1), (4.5, 3.5, 1), (1.5, 3.5, 1)]
    return _world(cfg, floors), _plan(path)


def duplicate_wall(cfg: SimulatorConfig | None = None, *, bias: float = 0.3) -> Scenario:
    """Single 6 x 5 m room, two laps, with a sideways odometry jump during the second lap."""
    plan = FloorPlan(floor_id=0, rooms=[Rect(x_min=0, y_min=0, x_max=6, y_max=5)])
    lap = [(1.5, 1.5), (4.5, 1.5), (4.5, 3.5), (1.5, 3.5), (1.5, 1.5)]
    return _world(cfg, [plan]), _plan(lap + lap[1:], biases=[OdometryBias(frame=60, x=bias)])


SCENARIOS: dict[str, Callable[..., Scenario]] = {
    "four-room": four_room_loop,
    "corridor": corridor,
    "two-floor": two_floor,
    "duplicate-wall": duplicate_wall,
}


def get_scenario(name: str, cfg: SimulatorConfig | None = None) -> Scenario:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return SCENARIOS[name](cfg)
