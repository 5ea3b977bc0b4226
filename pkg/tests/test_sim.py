"""Tests for the world model, raycasting, trajectory simulation and dataset files."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from sgraphs.config import SimulatorConfig
from sgraphs.errors import BadDataset, ConfigError, DataError, IoError, PoseInWall, WaypointInWall
from sgraphs.geometry import Pose
from sgraphs.io import write_text_atomic
from sgraphs.sim import (
    SCENARIOS,
    Door,
    FloorPlan,
    OdometryBias,
    Rect,
    Waypoint,
    WaypointPlan,
    World,
    get_scenario,
    in_free_space,
    load_waypoints,
    load_world,
    ray_directions,
    raycast_scan,
    read_dataset,
    sample_world_surfaces,
    simulate_trajectory,
    wall_boxes,
    write_dataset,
)
from sgraphs.sim.dataset import GT_FILE, ODOM_FILE, SCAN_DIR, WORLD_FILE, scan_name
from sgraphs.sim.trajectory import interpolate_path


def two_rooms(door: bool = True) -> World:
    doors = [Door(x=4, y=2)] if door else []
    plan = FloorPlan(rooms=[Rect(x_min=0, y_min=0, x_max=4, y_max=4), Rect(x_min=4, y_min=0, x_max=8, y_max=4)],
                     doors=doors)
    return World(floors=[plan])


def corridor_world() -> World:
    return World(floors=[FloorPlan(corridors=[Rect(x_min=0, y_min=0, x_max=20, y_max=3)])])


def plan_of(*points, **kwargs) -> WaypointPlan:
    return WaypointPlan(points=[Waypoint(x=x, y=y) for x, y in points], **kwargs)


@pytest.mark.unit
class TestWorld:
    """Tests for world validation and wall extrusion."""

    def test_degenerate_rect(self):
        """Rectangles need positive area."""
        with pytest.raises(ValidationError):
            Rect(x_min=1, y_min=0, x_max=1, y_max=2)

    def test_door_must_sit_on_wall(self):
        """Doors in the middle of a room are rejected."""
        with pytest.raises(ValidationError):
            FloorPlan(rooms=[Rect(x_min=0, y_min=0, x_max=4, y_max=4)], doors=[Door(x=2, y=2)])

    def test_duplicate_floor_ids(self):
        """Floor ids are unique."""
        with pytest.raises(ValidationError):
            World(floors=[FloorPlan(floor_id=0), FloorPlan(floor_id=0, z_base=3.0)])

    def test_unknown_floor(self):
        """Asking for a missing floor is a data error."""
        with pytest.raises(DataError):
            World().floor(3)

    def test_shared_wall_deduplicated(self):
        """Adjacent rooms share one wall: five walls plus two slabs."""
        assert len(wall_boxes(two_rooms(door=False))) == 7

    def test_door_splits_wall(self):
        """A door cuts the shared wall in two."""
        assert len(wall_boxes(two_rooms(door=True))) == 8

    def test_wall_extrusion(self, box_world):
        """Walls are centred on the rectangle edge with the declared thickness."""
        boxes = wall_boxes(box_world)
        x_walls = boxes[np.isclose(boxes[:, 3] - boxes[:, 0], 0.1) & np.isclose(boxes[:, 0], 3.95)]
        assert len(x_walls) == 1
        assert np.allclose(x_walls[0], [3.95, -0.05, 0.0, 4.05, 4.05, 2.5])

    @pytest.mark.parametrize(
        ("point", "free"),
        [((2.0, 2.0, 1.0), True), ((4.0, 1.0, 1.0), False), ((4.0, 2.0, 1.0), True), ((9.0, 2.0, 1.0), False),
         ((2.0, 2.0, 4.0), False)],
    )
    def test_in_free_space(self, point, free):
        """Room interiors and door gaps are free; walls and the outside are not."""
        assert in_free_space(two_rooms(), np.array(point)) is free

    def test_floor_at(self):
        """Heights map onto the floor whose storey contains them."""
        world, _ = get_scenario("two-floor")
        assert world.floor_at(1.0).floor_id == 0
        assert world.floor_at(4.0).floor_id == 1
        assert world.floor_at(10.0) is None

    def test_surfaces_lie_on_boxes(self, box_world):
        """Every ground-truth point sits on the boundary of some box."""
        pts = sample_world_surfaces(box_world, spacing=0.2)
        boxes = box_world.boxes()
        lo, hi = boxes[None, :, :3], boxes[None, :, 3:]
        inside = np.all((pts[:, None, :] >= lo - 1e-9) & (pts[:, None, :] <= hi + 1e-9), axis=2)
        on_face = np.any(np.isclose(pts[:, None, :], lo) | np.isclose(pts[:, None, :], hi), axis=2)
        assert np.all(np.any(inside & on_face, axis=1))

    def test_surfaces_include_floor_and_ceiling(self, box_world):
        """The floor top and ceiling underside are sampled."""
        pts = sample_world_surfaces(box_world, spacing=0.2)
        assert np.any(np.isclose(pts[:, 2], 0.0))
        assert np.any(np.isclose(pts[:, 2], 2.5))
        assert not np.any(np.isclose(pts[:, 2], -0.1))

    def test_surface_spacing_must_be_positive(self, box_world):
        """A zero spacing is a configuration error."""
        with pytest.raises(ConfigError):
            sample_world_surfaces(box_world, spacing=0.0)

    def test_load_world_yaml(self, temp_dir):
        """Worlds load from YAML."""
        path = write_text_atomic(
            temp_dir / "world.yaml",
            "wall_height: 3.0\nfloors:\n  - floor_id: 0\n    rooms:\n      - {x_min: 0, y_min: 0, x_max: 4, y_max: 4}\n",
        )
        world = load_world(path)
        assert world.wall_height == 3.0
        assert world.floor(0).rooms[0].center == (2.0, 2.0)

    @pytest.mark.parametrize("text", ["floors: [\n", "- 1\n- 2\n", "floors:\n  - rooms: [{x_min: 1}]\n"])
    def test_load_world_invalid(self, temp_dir, text):
        """Broken YAML, non-mappings and invalid fields are data errors."""
        path = write_text_atomic(temp_dir / "world.yaml", text)
        with pytest.raises(DataError):
            load_world(path)

    def test_json_round_trip(self, box_world):
        """The JSON form validates back into the same world."""
        assert World.model_validate_json(box_world.to_json()) == box_world


@pytest.mark.unit
class TestRaycast:
    """Tests for the simulated LiDAR."""

    def test_ray_layout(self):
        """Rays are elevation-major and the middle ring starts along +x."""
        cfg = SimulatorConfig(h_rays=8, v_rays=3)
        dirs = ray_directions(cfg)
        assert dirs.shape == (24, 3)
        assert np.allclose(dirs[8], [1.0, 0.0, 0.0])
        assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)

    def test_hit_along_x(self, box_world, room_center_pose):
        """From the room centre a level +x ray hits the wall face at 2 - thickness/2."""
        cfg = SimulatorConfig(h_rays=4, v_rays=1, range_sigma=0.0)
        cloud = raycast_scan(box_world, room_center_pose, cfg)
        assert len(cloud) == 4
        assert np.allclose(cloud[0], [1.95, 0.0, 0.0])

    def test_hit_with_noise(self, box_world, room_center_pose):
        """Range noise stays within a few sigma."""
        cfg = SimulatorConfig(h_rays=4, v_rays=1, range_sigma=0.01)
        cloud = raycast_scan(box_world, room_center_pose, cfg, rng=np.random.default_rng(1))
        assert abs(cloud[0, 0] - 1.95) < 0.05

    def test_open_door_beyond_range(self, room_center_pose):
        """A ray leaving through a door with nothing in range returns no point."""
        world = World(floors=[FloorPlan(rooms=[Rect(x_min=0, y_min=0, x_max=4, y_max=4)], doors=[Door(x=4, y=2)])])
        cfg = SimulatorConfig(h_rays=4, v_rays=1, range_sigma=0.0, max_range=3.0)
        cloud = raycast_scan(world, room_center_pose, cfg)
        assert len(cloud) == 3
        assert not np.any(cloud[:, 0] > 1.0)

    def test_rotated_pose(self, box_world):
        """Points come back in the sensor frame."""
        cfg = SimulatorConfig(h_rays=4, v_rays=1, range_sigma=0.0)
        pose = Pose.from_xyz_yaw(1.0, 2.0, 1.0, np.pi / 2)
        cloud = raycast_scan(box_world, pose, cfg)
        assert np.allclose(cloud[0], [1.95, 0.0, 0.0], atol=1e-9)
        assert np.allclose(cloud[2], [-1.95, 0.0, 0.0], atol=1e-9)

    def test_deterministic(self, box_world, room_center_pose):
        """The same seed gives a bit-identical cloud."""
        cfg = SimulatorConfig(h_rays=36, v_rays=4)
        a = raycast_scan(box_world, room_center_pose, cfg, rng=np.random.default_rng(5))
        b = raycast_scan(box_world, room_center_pose, cfg, rng=np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_pose_in_wall(self, box_world):
        """Sensors inside a wall or outside the world are rejected."""
        with pytest.raises(PoseInWall):
            raycast_scan(box_world, Pose.translation_only(4.0, 2.0, 1.0))
        with pytest.raises(PoseInWall):
            raycast_scan(box_world, Pose.translation_only(7.0, 2.0, 1.0))


@pytest.mark.unit
class TestTrajectory:
    """Tests for waypoint interpolation and odometry."""

    def test_interpolation_spacing(self, quiet_sim):
        """Samples are one step apart along the path."""
        path = interpolate_path(corridor_world(), plan_of((1, 1.5), (3, 1.5), (3, 2.5)), quiet_sim)
        steps = np.linalg.norm(np.diff(np.array(path), axis=0), axis=1)
        assert len(path) == 16
        assert np.allclose(steps, quiet_sim.step)
        assert np.allclose(path[-1], [3.0, 2.5, 1.0])

    def test_waypoint_outside(self, quiet_sim):
        """Waypoints outside every region are rejected."""
        with pytest.raises(WaypointInWall):
            simulate_trajectory(corridor_world(), plan_of((1, 1.5), (25, 1.5)), quiet_sim)

    def test_path_through_wall(self, quiet_sim):
        """A leg crossing a wall without a door is rejected."""
        with pytest.raises(WaypointInWall):
            interpolate_path(two_rooms(door=False), plan_of((2, 2), (6, 2)), quiet_sim)

    def test_path_through_door(self, quiet_sim):
        """The same leg through a door is fine."""
        assert len(interpolate_path(two_rooms(door=True), plan_of((2, 2), (6, 2)), quiet_sim)) == 21

    def test_floor_change_teleports(self, quiet_sim):
        """Changing floor jumps straight to the next waypoint."""
        world, plan = get_scenario("two-floor")
        path = interpolate_path(world, plan, quiet_sim)
        z = np.array([p[2] for p in path])
        assert set(np.round(z, 9)) == {1.0, 4.0}
        jump = int(np.flatnonzero(np.diff(z))[0])
        assert np.allclose(path[jump + 1], [1.5, 1.5, 4.0])

    def test_zero_noise_odometry_is_ground_truth(self, box_world, quiet_sim):
        """Without noise odometry equals ground truth exactly."""
        frames = simulate_trajectory(box_world, plan_of((1, 1), (3, 1), (3, 3)), quiet_sim)
        for f in frames:
            assert np.array_equal(f.odom.rotation, f.gt.rotation)
            assert np.array_equal(f.odom.translation, f.gt.translation)

    def test_timestamps(self, box_world, quiet_sim):
        """Frames are step / speed seconds apart."""
        frames = simulate_trajectory(box_world, plan_of((1, 1), (2, 1)), quiet_sim)
        assert [f.timestamp for f in frames] == [0.0, 0.4, 0.8, 1.2, 1.6, 2.0]

    def test_heading_is_constant(self, box_world, quiet_sim):
        """The robot keeps the plan yaw."""
        frames = simulate_trajectory(box_world, plan_of((1, 1), (3, 1), yaw_deg=90.0), quiet_sim)
        assert all(f.gt.yaw == pytest.approx(np.pi / 2) for f in frames)

    def test_drift_is_seeded_noise_sum(self):
        """Terminal drift on a straight run equals the sum of the drawn increments."""
        cfg = SimulatorConfig(h_rays=8, v_rays=1, sigma_t=0.01, sigma_rot_deg=0.0)
        frames = simulate_trajectory(corridor_world(), plan_of((1, 1.5), (11, 1.5)), cfg, seed=4)
        assert len(frames) == 51

        rng = np.random.default_rng([4, 0])
        total = np.zeros(2)
        for _ in range(len(frames) - 1):
            total += rng.normal(0.0, 0.01, size=2)
            rng.normal(0.0, 0.0)
        drift = frames[-1].odom.translation - frames[-1].gt.translation
        assert np.linalg.norm(drift) > 0
        assert np.allclose(drift[:2], total, atol=1e-12)

    def test_seeded_runs_match(self, box_world):
        """The same seed gives the same frames."""
        cfg = SimulatorConfig(h_rays=36, v_rays=4)
        a = simulate_trajectory(box_world, plan_of((1, 1), (3, 3)), cfg, seed=9)
        b = simulate_trajectory(box_world, plan_of((1, 1), (3, 3)), cfg, seed=9)
        assert all(np.array_equal(x.cloud, y.cloud) for x, y in zip(a, b))
        assert all(np.array_equal(x.odom.translation, y.odom.translation) for x, y in zip(a, b))

    def test_bias_shifts_odometry(self, box_world, quiet_sim):
        """An injected bias offsets every later odometry pose."""
        plan = plan_of((1, 1), (3, 1), biases=[OdometryBias(frame=3, x=0.5)])
        frames = simulate_trajectory(box_world, plan, quiet_sim)
        offsets = [f.odom.translation[0] - f.gt.translation[0] for f in frames]
        assert np.allclose(offsets[:3], 0.0)
        assert np.allclose(offsets[3:], 0.5)

    def test_load_waypoints(self, temp_dir):
        """Waypoint files carry points, yaw and biases."""
        path = write_text_atomic(
            temp_dir / "wp.yaml", "yaw_deg: 10\npoints:\n  - {x: 1, y: 2}\n  - {x: 3, y: 2, floor: 1}\n"
            "biases:\n  - {frame: 4, x: 0.2}\n"
        )
        plan = load_waypoints(path)
        assert plan.points[1].floor == 1
        assert plan.biases[0].frame == 4

    def test_load_waypoints_empty(self, temp_dir):
        """A plan needs at least one point."""
        path = write_text_atomic(temp_dir / "wp.yaml", "points: []\n")
        with pytest.raises(DataError):
            load_waypoints(path)


def small_frames(box_world, quiet_sim, n_points=3):
    points = [(1.0 + 0.2 * i, 1.0) for i in range(n_points)]
    return simulate_trajectory(box_world, plan_of(*points), quiet_sim)


@pytest.mark.unit
class TestDataset:
    """Tests for dataset directories."""

    def test_layout(self, temp_dir, box_world, quiet_sim):
        """Three frames give three scans, both trajectories and the world."""
        root = write_dataset(small_frames(box_world, quiet_sim), temp_dir / "ds", box_world)
        assert sorted(p.name for p in (root / SCAN_DIR).iterdir()) == [scan_name(i) for i in range(3)]
        for name in (WORLD_FILE, GT_FILE, ODOM_FILE):
            assert (root / name).is_file()
        assert len((root / GT_FILE).read_text().splitlines()) == 3

    def test_round_trip(self, temp_dir, box_world, quiet_sim):
        """Reading back gives the same trajectories, clouds and world."""
        frames = small_frames(box_world, quiet_sim)
        data = read_dataset(write_dataset(frames, temp_dir / "ds", box_world))
        assert data.world == box_world
        assert data.gt.timestamps == [f.timestamp for f in frames]
        for a, b in zip(frames, data.frames):
            assert np.array_equal(a.gt.translation, b.gt.translation)
            assert np.array_equal(a.odom.rotation, b.odom.rotation)
            assert np.array_equal(a.cloud, b.cloud)

    def test_empty(self, temp_dir):
        """An empty frame list is a valid, empty dataset."""
        root = write_dataset([], temp_dir / "ds")
        assert (root / GT_FILE).read_text() == ""
        assert len(read_dataset(root)) == 0

    def test_missing_directory(self, temp_dir):
        """A directory that does not exist is a bad dataset."""
        with pytest.raises(BadDataset):
            read_dataset(temp_dir / "nope")

    def test_missing_scans_directory(self, temp_dir, box_world, quiet_sim):
        """Removing scans/ makes the dataset unreadable."""
        root = write_dataset(small_frames(box_world, quiet_sim), temp_dir / "ds", box_world)
        for p in (root / SCAN_DIR).iterdir():
            p.unlink()
        (root / SCAN_DIR).rmdir()
        with pytest.raises(BadDataset, match="scans"):
            read_dataset(root)

    def test_missing_scan(self, temp_dir, box_world, quiet_sim):
        """Every pose needs its scan."""
        root = write_dataset(small_frames(box_world, quiet_sim), temp_dir / "ds", box_world)
        (root / SCAN_DIR / scan_name(1)).unlink()
        with pytest.raises(BadDataset, match=scan_name(1)):
            read_dataset(root)

    def test_trajectory_mismatch(self, temp_dir, box_world, quiet_sim):
        """gt and odom must have the same timestamps."""
        root = write_dataset(small_frames(box_world, quiet_sim), temp_dir / "ds", box_world)
        lines = (root / ODOM_FILE).read_text().splitlines()
        (root / ODOM_FILE).write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(BadDataset):
            read_dataset(root)

    def test_bad_world(self, temp_dir, box_world, quiet_sim):
        """A corrupt world file is a bad dataset."""
        root = write_dataset(small_frames(box_world, quiet_sim), temp_dir / "ds", box_world)
        (root / WORLD_FILE).write_text("{")
        with pytest.raises(BadDataset):
            read_dataset(root)

    def test_unwritable_target(self, temp_dir):
        """Datasets cannot be written under a regular file."""
        blocker = temp_dir / "file"
        blocker.write_text("x")
        with pytest.raises(IoError):
            write_dataset([], blocker / "ds")


@pytest.mark.unit
class TestScenarios:
    """Tests for the bundled worlds."""

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_paths_are_walkable(self, name, quiet_sim):
        """Every bundled plan stays in free space."""
        world, plan = get_scenario(name)
        assert len(interpolate_path(world, plan, quiet_sim)) > 10

    def test_unknown(self):
        """Unknown scenario names raise."""
        with pytest.raises(KeyError):
            get_scenario("castle")

    def test_four_room_loop_closes(self, quiet_sim):
        """The four-room walk ends near where it started."""
        world, plan = get_scenario("four-room")
        path = interpolate_path(world, plan, quiet_sim)
        assert np.linalg.norm(path[-1][:2] - path[0][:2]) <= 1.0 + 1e-9
        assert len(world.floor(0).rooms) == 4

    def test_shipped_world_files(self):
        """The world files under config/worlds describe the four-room scenario."""
        root = Path(__file__).resolve().parents[1] / "config" / "worlds"
        world, plan = get_scenario("four-room")
        assert load_world(root / "four_room.yaml") == world
        assert load_waypoints(root / "four_room_waypoints.yaml") == plan
