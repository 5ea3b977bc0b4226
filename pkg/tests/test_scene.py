"""Tests for room detection, room association and the floor layer."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgraphs.config import RoomConfig
from sgraphs.errors import InsufficientWalls, NotOpposed, UnknownVariable
from sgraphs.freespace import Cluster
from sgraphs.geometry import PlaneCategory, PlaneCoeffs, Pose
from sgraphs.graph import (
    FactorGraph,
    FloorRoomFactor,
    FloorVar,
    KeyframeVar,
    PlaneVar,
    PosePlaneFactor,
    RoomPriorFactor,
    RoomVar,
    VariableId,
    VarKind,
)
from sgraphs.scene import (
    PlaneView,
    RoomCandidate,
    associate_room,
    candidate_planes_for_cluster,
    compute_room_center_finite,
    compute_room_center_infinite,
    detect_floor_change,
    detect_rooms,
    facing_each_other,
    floor_center,
    mapped_planes,
    update_floor,
)

CATEGORY = {0: PlaneCategory.X_VERTICAL, 1: PlaneCategory.Y_VERTICAL}


def wall_view(index: int, axis: int, offset: float, facing: float, span=(0.0, 6.0), keyframe: int = 5,
              floor_id: int = 0) -> PlaneView:
    """Vertical wall ``coord[axis] == offset`` whose normal points along ``facing`` (+1 or -1)."""
    normal = np.zeros(3)
    normal[axis] = facing
    s = np.arange(span[0], span[1] + 1e-9, 0.1)
    pts = []
    for z in (0.5, 1.0, 1.5):
        row = np.zeros((len(s), 3))
        row[:, axis] = offset
        row[:, 1 - axis] = s
        row[:, 2] = z
        pts.append(row)
    coeffs = PlaneCoeffs(normal, -facing * offset)
    return PlaneView(VariableId(VarKind.PLANE, index), coeffs, CATEGORY[axis], floor_id, {keyframe: np.vstack(pts)})


def room_walls(x=(0.0, 4.0), y=(0.0, 6.0)) -> list[PlaneView]:
    return [
        wall_view(0, 0, x[0], 1.0, span=y),
        wall_view(1, 0, x[1], -1.0, span=y),
        wall_view(2, 1, y[0], 1.0, span=x),
        wall_view(3, 1, y[1], -1.0, span=x),
    ]


def interior_cluster(x=(0.0, 4.0), y=(0.0, 6.0), step: float = 0.5) -> Cluster:
    xs = np.arange(x[0] + 1.0, x[1] - 1.0 + 1e-9, step)
    ys = np.arange(y[0] + 1.0, y[1] - 1.0 + 1e-9, step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pos = np.column_stack([gx.ravel(), gy.ravel()])
    clearance = np.minimum.reduce([pos[:, 0] - x[0], x[1] - pos[:, 0], pos[:, 1] - y[0], y[1] - pos[:, 1]])
    return Cluster(np.arange(len(pos)), pos, clearance)


def corridor_cluster() -> Cluster:
    gx, gy = np.meshgrid([1.1, 2.1, 3.1], [4.5, 5.5, 6.5], indexing="ij")
    pos = np.column_stack([gx.ravel(), gy.ravel()])
    return Cluster(np.arange(9), pos, np.ones(9))


def x_plane(d_sign: float, offset: float) -> PlaneCoeffs:
    return PlaneCoeffs([d_sign, 0, 0], -d_sign * offset)


def y_plane(d_sign: float, offset: float) -> PlaneCoeffs:
    return PlaneCoeffs([0, d_sign, 0], -d_sign * offset)


@pytest.mark.unit
class TestCandidatePlanes:
    """Tests for picking the walls that bound a free-space cluster."""

    def test_all_four_walls(self):
        """A cluster inside a mapped room sees all four walls."""
        ids = candidate_planes_for_cluster(interior_cluster(), room_walls())
        assert ids == [VariableId(VarKind.PLANE, i) for i in range(4)]

    def test_far_wall_excluded(self):
        """A wall of another room 10 m away is not a candidate."""
        planes = [*room_walls(), wall_view(4, 0, 14.0, -1.0)]
        assert VariableId(VarKind.PLANE, 4) not in candidate_planes_for_cluster(interior_cluster(), planes)

    def test_empty_cluster(self):
        """An empty cluster has no candidates."""
        empty = Cluster(np.zeros(0, dtype=int), np.zeros((0, 2)), np.zeros(0))
        assert candidate_planes_for_cluster(empty, room_walls()) == []

    def test_stale_walls_excluded(self):
        """Walls not seen in the recent keyframe window are skipped."""
        planes = room_walls()
        planes[0] = wall_view(0, 0, 0.0, 1.0, keyframe=1)
        ids = candidate_planes_for_cluster(interior_cluster(), planes, RoomConfig(recent_keyframe_window=3))
        assert VariableId(VarKind.PLANE, 0) not in ids
        assert len(ids) == 3

    def test_horizontal_planes_ignored(self):
        """Floors and ceilings never bound a room."""
        floor = PlaneView(VariableId(VarKind.PLANE, 9), PlaneCoeffs([0, 0, 1], 0.0), PlaneCategory.HORIZONTAL, 0,
                          {5: np.column_stack([np.full(50, 2.0), np.linspace(1, 5, 50), np.zeros(50)])})
        assert VariableId(VarKind.PLANE, 9) not in candidate_planes_for_cluster(interior_cluster(), [*room_walls(), floor])


@pytest.mark.unit
class TestDetectRooms:
    """Tests for turning clusters and walls into room candidates."""

    def test_finite_room(self):
        """Four walls around the cluster make a finite room at their centre."""
        rooms = detect_rooms([interior_cluster()], room_walls())
        assert len(rooms) == 1
        room = rooms[0]
        assert room.finite
        assert np.allclose(room.center, [2.0, 3.0])
        assert room.x_pair == (VariableId(VarKind.PLANE, 0), VariableId(VarKind.PLANE, 1))
        assert room.y_pair == (VariableId(VarKind.PLANE, 2), VariableId(VarKind.PLANE, 3))

    def test_corridor(self):
        """Only the x walls give an infinite room along x."""
        walls = [wall_view(0, 0, 0.0, 1.0, span=(0, 10)), wall_view(1, 0, 4.0, -1.0, span=(0, 10))]
        rooms = detect_rooms([corridor_cluster()], walls)
        assert len(rooms) == 1
        assert not rooms[0].finite
        assert rooms[0].axis == "x"
        assert np.allclose(rooms[0].center, [2.0, 5.5])

    def test_single_wall(self):
        """One wall is not a room."""
        assert detect_rooms([interior_cluster()], [wall_view(0, 0, 0.0, 1.0)]) == []

    def test_too_narrow(self):
        """Pairs closer than min_side are ignored."""
        rooms = detect_rooms([interior_cluster()], room_walls(), RoomConfig(min_side=5.0))
        assert len(rooms) == 1
        assert not rooms[0].finite
        assert rooms[0].axis == "y"

    def test_other_floor(self):
        """Walls of another floor are not used."""
        assert detect_rooms([interior_cluster()], room_walls(), floor_id=1) == []

    def test_facing_each_other(self):
        """Walls must face each other, not away."""
        assert facing_each_other(x_plane(1, 0), x_plane(-1, 4), 25.0)
        assert not facing_each_other(x_plane(-1, 0), x_plane(1, 4), 25.0)
        assert not facing_each_other(x_plane(1, 0), x_plane(1, 4), 25.0)


@pytest.mark.unit
class TestRoomCenters:
    """Tests for the room centre rules."""

    def test_finite_symmetry(self):
        """Walls at x=0,4 and y=0,6 centre the room at (2, 3)."""
        c = compute_room_center_finite((x_plane(1, 0), x_plane(-1, 4)), (y_plane(1, 0), y_plane(-1, 6)))
        assert np.allclose(c, [2.0, 3.0])

    def test_finite_shift(self):
        """Shifting the x walls by 1 moves the centre by 1."""
        c = compute_room_center_finite((x_plane(1, 1), x_plane(-1, 5)), (y_plane(1, 0), y_plane(-1, 6)))
        assert np.allclose(c, [3.0, 3.0])

    def test_finite_requires_opposed(self):
        """Same-facing walls raise."""
        with pytest.raises(NotOpposed):
            compute_room_center_finite((x_plane(1, 0), x_plane(1, 4)), (y_plane(1, 0), y_plane(-1, 6)))

    @settings(max_examples=1000, deadline=None)
    @given(
        st.floats(-50, 50), st.floats(0.5, 30), st.floats(-50, 50), st.floats(0.5, 30),
    )
    def test_finite_rectangle(self, x0, w, y0, h):
        """Any axis-aligned rectangle is centred at the mean of its corners."""
        x1, y1 = x0 + w, y0 + h
        c = compute_room_center_finite((x_plane(1, x0), x_plane(-1, x1)), (y_plane(1, y0), y_plane(-1, y1)))
        corners = np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]])
        assert np.allclose(c, corners.mean(axis=0), atol=1e-9)

    @pytest.mark.parametrize(
        ("pair", "axis", "centroid", "expected"),
        [
            ((x_plane(1, 0), x_plane(-1, 4)), "x", (1.7, 8.2), (2.0, 8.2)),
            ((y_plane(1, 0), y_plane(-1, 2)), "y", (9.9, 1.3), (9.9, 1.0)),
            ((x_plane(1, 0), x_plane(-1, 4)), "x", (2.0, -3.0), (2.0, -3.0)),
        ],
    )
    def test_infinite(self, pair, axis, centroid, expected):
        """The pair fixes one coordinate and the cluster the other."""
        assert np.allclose(compute_room_center_infinite(pair, axis, np.array(centroid)), expected)


def mapped_room_graph(duplicate_offset: float | None = None) -> FactorGraph:
    """One keyframe observing four walls (and optionally a near copy of the x=4 wall)."""
    g = FactorGraph()
    kf = g.add_variable(KeyframeVar(Pose.identity(), 0.0))
    coeffs = [x_plane(1, 0), x_plane(-1, 4), y_plane(1, 0), y_plane(-1, 6)]
    if duplicate_offset is not None:
        coeffs.append(x_plane(-1, 4 + duplicate_offset))
    for c in coeffs:
        category = PlaneCategory.X_VERTICAL if abs(c.normal[0]) > 0.5 else PlaneCategory.Y_VERTICAL
        pid = g.add_variable(PlaneVar(c.vector, category))
        g.add_factor(PosePlaneFactor(kf, pid, c))
    return g


def candidate(x_pair=(0, 1), y_pair=(2, 3), center=(2.0, 3.0), centroid=(2.0, 3.0)) -> RoomCandidate:
    def ids(pair):
        return None if pair is None else tuple(VariableId(VarKind.PLANE, i) for i in pair)

    return RoomCandidate(x_pair is not None and y_pair is not None, np.array(center), ids(x_pair), ids(y_pair), 0,
                         np.array(centroid))


@pytest.mark.unit
class TestAssociateRoom:
    """Tests for room data association and plane merging."""

    def test_first_detection(self):
        """A new room is created with its pair factors."""
        g = mapped_room_graph()
        rid, merged = associate_room(g, candidate())
        assert merged == []
        assert g.counts()["room"] == 1
        assert len(g.factors_of(rid)) == 2

    def test_redetection(self):
        """The same walls again map onto the same room."""
        g = mapped_room_graph()
        first, _ = associate_room(g, candidate())
        second, merged = associate_room(g, candidate(center=(2.1, 3.0)))
        assert first == second
        assert merged == []
        assert g.counts()["room"] == 1

    def test_duplicate_wall_merged(self):
        """A wall mapped twice 0.1 m apart is merged, keeping every observation."""
        g = mapped_room_graph(duplicate_offset=0.1)
        associate_room(g, candidate())
        pose_plane_before = len(g.factors_of_type(PosePlaneFactor))
        total_before = len(g.factors)

        rid, merged = associate_room(g, candidate(x_pair=(0, 4), center=(2.05, 3.0)))

        assert merged == [VariableId(VarKind.PLANE, 4)]
        assert g.counts()["plane"] == 4
        assert len(g.factors_of_type(PosePlaneFactor)) == pose_plane_before
        assert len(g.factors) == total_before
        assert g.get(rid).x_planes == (VariableId(VarKind.PLANE, 0), VariableId(VarKind.PLANE, 1))
        assert len(g.factors_of(VariableId(VarKind.PLANE, 1))) == 3

    def test_far_planes_not_merged(self):
        """Walls further apart than merge_tol stay separate."""
        g = mapped_room_graph(duplicate_offset=1.5)
        associate_room(g, candidate())
        _, merged = associate_room(g, candidate(x_pair=(0, 4), center=(2.75, 3.0)))
        assert merged == []
        assert g.counts()["plane"] == 5

    def test_infinite_room_gets_prior(self):
        """Infinite rooms carry a weak prior on their free coordinate."""
        g = mapped_room_graph()
        rid, _ = associate_room(g, candidate(y_pair=None, center=(2.0, 4.0), centroid=(2.0, 4.0)))
        room = g.get(rid)
        assert not room.finite
        assert room.axis == "x"
        priors = [f for _, f in g.factors_of_type(RoomPriorFactor)]
        assert len(priors) == 1
        assert priors[0].axis == "y"
        assert priors[0].measurement == pytest.approx(4.0)

    def test_infinite_prior_follows_centroid(self):
        """Re-detecting an infinite room moves its prior to the new centroid."""
        g = mapped_room_graph()
        associate_room(g, candidate(y_pair=None, center=(2.0, 4.0), centroid=(2.0, 4.0)))
        associate_room(g, candidate(y_pair=None, center=(2.0, 4.5), centroid=(2.0, 4.5)))
        priors = [f for _, f in g.factors_of_type(RoomPriorFactor)]
        assert len(priors) == 1
        assert priors[0].measurement == pytest.approx(4.5)

    def test_upgrade_to_finite(self):
        """A finite detection upgrades the infinite room in place."""
        g = mapped_room_graph()
        rid, _ = associate_room(g, candidate(y_pair=None, center=(2.0, 3.5), centroid=(2.0, 3.5)))
        again, _ = associate_room(g, candidate())
        room = g.get(again)
        assert again == rid
        assert room.finite
        assert room.y_planes == (VariableId(VarKind.PLANE, 2), VariableId(VarKind.PLANE, 3))
        assert g.factors_of_type(RoomPriorFactor) == []

    def test_candidates_after_merge_are_remapped(self):
        """A later candidate of the same snapshot naming a merged plane uses its survivor."""
        g = mapped_room_graph(duplicate_offset=0.1)
        associate_room(g, candidate())
        merges: dict[VariableId, VariableId] = {}
        _, merged = associate_room(g, candidate(x_pair=(0, 4), center=(2.05, 3.0)), merges=merges)
        assert merged == [VariableId(VarKind.PLANE, 4)]
        assert merges == {VariableId(VarKind.PLANE, 4): VariableId(VarKind.PLANE, 1)}

        rid, merged = associate_room(
            g, candidate(x_pair=(0, 4), y_pair=None, center=(2.05, 20.0), centroid=(2.0, 20.0)), merges=merges
        )

        assert merged == []
        assert g.counts()["room"] == 2
        assert g.get(rid).x_planes == (VariableId(VarKind.PLANE, 0), VariableId(VarKind.PLANE, 1))
        assert len(g.factors_of(rid)) == 2

    def test_stale_candidate_leaves_graph_untouched(self):
        """Without the merge map a candidate naming a removed plane is refused before any change."""
        g = mapped_room_graph(duplicate_offset=0.1)
        associate_room(g, candidate())
        associate_room(g, candidate(x_pair=(0, 4), center=(2.05, 3.0)))
        counts, factors = g.counts(), len(g.factors)

        with pytest.raises(UnknownVariable):
            associate_room(g, candidate(x_pair=(0, 4), y_pair=None, center=(2.05, 20.0), centroid=(2.0, 20.0)))

        assert g.counts() == counts
        assert len(g.factors) == factors


def floor_walls(xs=(0.0, 20.0), ys=(0.0, 10.0)) -> list[PlaneView]:
    out = [wall_view(i, 0, x, 1.0 if i == 0 else -1.0, span=ys) for i, x in enumerate(xs)]
    out += [wall_view(len(xs) + i, 1, y, 1.0 if i == 0 else -1.0, span=xs) for i, y in enumerate(ys)]
    return out


@pytest.mark.unit
class TestFloors:
    """Tests for the floor layer."""

    def test_floor_center(self):
        """The floor sits midway between the outermost walls."""
        assert np.allclose(floor_center(floor_walls(), 0), [10.0, 5.0])

    def test_missing_walls(self):
        """A single x wall is not enough."""
        with pytest.raises(InsufficientWalls):
            floor_center([wall_view(0, 0, 0.0, 1.0)], 0)

    def test_update_links_rooms(self):
        """Rooms on the floor get one floor-room factor each."""
        g = FactorGraph()
        g.add_variable(RoomVar(np.array([3.0, 4.0]), True))
        g.add_variable(RoomVar(np.array([9.0, 4.0]), True, floor_id=1))
        est = update_floor(g, floor_walls(), 0)
        assert np.allclose(est.center, [10.0, 5.0])
        links = g.factors_of_type(FloorRoomFactor)
        assert len(links) == 1
        assert np.allclose(links[0][1].delta, [-7.0, -1.0])
        update_floor(g, floor_walls(), 0)
        assert len(g.factors_of_type(FloorRoomFactor)) == 1

    def test_update_records_members(self):
        """The floor node lists the rooms and walls on its floor."""
        g = FactorGraph()
        near = g.add_variable(RoomVar(np.array([3.0, 4.0]), True))
        g.add_variable(RoomVar(np.array([9.0, 4.0]), True, floor_id=1))
        upstairs = wall_view(9, 0, 5.0, 1.0, floor_id=1)
        est = update_floor(g, [*floor_walls(), upstairs], 0)
        floor = g.get(est.variable)
        assert floor.room_ids == [near]
        assert floor.plane_ids == [VariableId(VarKind.PLANE, i) for i in range(4)]
        later = g.add_variable(RoomVar(np.array([15.0, 4.0]), True))
        update_floor(g, floor_walls(), 0)
        assert floor.room_ids == [near, later]

    def test_merge_updates_floor_walls(self):
        """Merging a duplicate wall leaves only the survivor in the floor's wall list."""
        g = mapped_room_graph(duplicate_offset=0.1)
        walls = g.ids_of_kind(VarKind.PLANE)
        fid = g.add_variable(FloorVar(np.array([2.0, 3.0]), plane_ids=list(walls)))
        associate_room(g, candidate())
        associate_room(g, candidate(x_pair=(0, 4), center=(2.05, 3.0)))
        assert g.get(fid).plane_ids == walls[:4]

    def test_reanchor(self):
        """A farther wall moves the floor centre and refreshes the links."""
        g = FactorGraph()
        g.add_variable(RoomVar(np.array([3.0, 4.0]), True))
        update_floor(g, floor_walls(), 0)
        est = update_floor(g, floor_walls(xs=(0.0, 30.0)), 0)
        assert est.reanchored
        assert np.allclose(est.center, [15.0, 5.0])
        [(_, link)] = g.factors_of_type(FloorRoomFactor)
        assert np.allclose(link.delta, [-12.0, -1.0])

    def test_small_change_keeps_anchor(self):
        """Changes below the re-anchor distance leave the floor in place."""
        g = FactorGraph()
        update_floor(g, floor_walls(), 0)
        est = update_floor(g, floor_walls(xs=(0.0, 20.4)), 0)
        assert not est.reanchored
        assert np.allclose(est.center, [10.0, 5.0])

    @pytest.mark.parametrize(("z", "expected"), [(0.4, 0), (3.2, 1)])
    def test_detect_floor_change(self, z, expected):
        """Heights near a known floor reuse it, others open a new one."""
        floors = {0: 0.0}
        assert detect_floor_change(Pose.translation_only(0, 0, z), floors) == expected

    def test_return_to_first_floor(self):
        """Coming back down finds floor 0 again."""
        floors = {0: 0.0}
        assert detect_floor_change(Pose.translation_only(0, 0, 3.2), floors) == 1
        assert floors == {0: 0.0, 1: 3.2}
        assert detect_floor_change(Pose.translation_only(0, 0, 0.1), floors) == 0


@pytest.mark.unit
class TestMappedPlanes:
    """Tests for the plane snapshot used by room segmentation."""

    def test_support_moves_with_keyframe(self):
        """Support points follow the current keyframe estimate."""
        g = FactorGraph()
        kf = g.add_variable(KeyframeVar(Pose.translation_only(1.0, 0, 0), 0.0))
        plane = PlaneVar([1, 0, 0, -2.0], PlaneCategory.X_VERTICAL)
        plane.support[kf.index] = np.array([[1.0, 0.0, 1.0]])
        g.add_variable(plane)
        (view,) = mapped_planes(g)
        assert np.allclose(view.points[kf.index], [[2.0, 0.0, 1.0]])
        assert view.last_seen == kf.index
