"""Factor types of the situational graph with analytic Jacobians.

Every factor exposes ``residual(values)`` and ``jacobians(values)`` where
``values`` are the variable objects named by ``keys`` in order. Jacobians
are taken with respect to each variable's ``retract`` increment: keyframes
use (rotation vector, translation) with R <- R Exp(w), t <- t + v; planes,
rooms and floors are additive.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import ClassVar, Union

import numpy as np

from ..errors import NotOpposed
from ..geometry import PlaneCoeffs, Pose, right_jacobian_inv, skew
from .variables import KeyframeVar, PlaneVar, RoomVar, VariableId, VarKind

AXES = {"x": 0, "y": 1}


def _as_information(info, dim: int) -> np.ndarray:
    m = np.atleast_2d(np.asarray(info, dtype=float))
    if m.shape == (1, 1) and dim > 1:
        m = np.eye(dim) * m[0, 0]
    if m.shape != (dim, dim):
        raise ValueError(f"information must be {dim}x{dim}, got {m.shape}")
    return m


class Factor:
    """Shared machinery; concrete factors are dataclasses listing KEY_FIELDS."""

    TYPE: ClassVar[str]
    KEY_FIELDS: ClassVar[tuple[str, ...]]
    KINDS: ClassVar[tuple[VarKind, ...]]
    DIM: ClassVar[int]
    information: np.ndarray

    @property
    def keys(self) -> tuple[VariableId, ...]:
        return tuple(getattr(self, name) for name in self.KEY_FIELDS)

    @cached_property
    def whitener(self) -> np.ndarray:
        """Upper-triangular W with W^T W equal to the information matrix."""
        return np.linalg.cholesky(self.information).T

    def rekeyed(self, old: VariableId, new: VariableId) -> Factor:
        changes = {name: new for name in self.KEY_FIELDS if getattr(self, name) == old}
        return replace(self, **changes) if changes else self

    def residual(self, values) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def jacobians(self, values) -> list[np.ndarray]:  # pragma: no cover - abstract
        raise NotImplementedError


def _relative_error(measurement: Pose, xa: Pose, xb: Pose) -> tuple[Pose, np.ndarray]:
    err = measurement.inverse().compose(xa.between(xb))
    return err, err.log()


def residual_odometry(f: OdometryFactor, x_a: Pose, x_b: Pose) -> np.ndarray:
    """log(measurement^-1 (x_a^-1 x_b)) as (rotation, translation)."""
    return _relative_error(f.measurement, x_a, x_b)[1]


def _relative_jacobians(measurement: Pose, xa: Pose, xb: Pose) -> list[np.ndarray]:
    _, e = _relative_error(measurement, xa, xb)
    Rm_T = measurement.R.T
    Ra_T = xa.R.T
    R_rel = Ra_T @ xb.R
    u = Ra_T @ (xb.translation - xa.translation)
    Jr_inv = right_jacobian_inv(e[:3])

    Ja = np.zeros((6, 6))
    Ja[:3, :3] = -Jr_inv @ R_rel.T
    Ja[3:, :3] = Rm_T @ skew(u)
    Ja[3:, 3:] = -Rm_T @ Ra_T

    Jb = np.zeros((6, 6))
    Jb[:3, :3] = Jr_inv
    Jb[3:, 3:] = Rm_T @ Ra_T
    return [Ja, Jb]


@dataclass(eq=False)
class OdometryFactor(Factor):
    a: VariableId
    b: VariableId
    measurement: Pose
    information: np.ndarray = field(default_factory=lambda: np.eye(6))

    TYPE: ClassVar[str] = "odometry"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("a", "b")
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.KEYFRAME, VarKind.KEYFRAME)
    DIM: ClassVar[int] = 6

    def __post_init__(self) -> None:
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        return residual_odometry(self, values[0].pose, values[1].pose)

    def jacobians(self, values) -> list[np.ndarray]:
        return _relative_jacobians(self.measurement, values[0].pose, values[1].pose)


@dataclass(eq=False)
class LoopFactor(OdometryFactor):
    """Scan-matched relative pose between non-consecutive keyframes."""

    fitness: float = 0.0

    TYPE: ClassVar[str] = "loop"


@dataclass(eq=False)
class PoseAnchorFactor(Factor):
    key: VariableId
    prior: Pose = field(default_factory=Pose.identity)
    information: np.ndarray = field(default_factory=lambda: np.eye(6) * 1e6)

    TYPE: ClassVar[str] = "anchor"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("key",)
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.KEYFRAME,)
    DIM: ClassVar[int] = 6

    def __post_init__(self) -> None:
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        x: Pose = values[0].pose
        rot = self.prior.between(Pose(x.rotation, np.zeros(3))).rotation_vector()
        return np.concatenate([rot, x.translation - self.prior.translation])

    def jacobians(self, values) -> list[np.ndarray]:
        e = self.residual(values)
        J = np.zeros((6, 6))
        J[:3, :3] = right_jacobian_inv(e[:3])
        J[3:, 3:] = np.eye(3)
        return [J]


def _predicted_local(x: Pose, coeffs: np.ndarray) -> tuple[np.ndarray, float]:
    n = coeffs[:3]
    return x.R.T @ n, float(coeffs[3] + n @ x.translation)


def _observation_sign(n_local: np.ndarray, observed: PlaneCoeffs) -> float:
    return -1.0 if float(n_local @ observed.normal) < 0.0 else 1.0


def residual_pose_plane(f: PosePlaneFactor, x: Pose, plane_map) -> np.ndarray:
    """Predicted minus observed local plane, prediction sign-aligned to the observation."""
    coeffs = plane_map.vector if isinstance(plane_map, PlaneCoeffs) else np.asarray(plane_map, dtype=float)
    n_local, d_local = _predicted_local(x, coeffs)
    s = _observation_sign(n_local, f.observed)
    return np.append(s * n_local - f.observed.normal, s * d_local - f.observed.d)


@dataclass(eq=False)
class PosePlaneFactor(Factor):
    keyframe: VariableId
    plane: VariableId
    observed: PlaneCoeffs
    information: np.ndarray = field(default_factory=lambda: np.eye(4))
    inliers: int = 0

    TYPE: ClassVar[str] = "pose_plane"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("keyframe", "plane")
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.KEYFRAME, VarKind.PLANE)
    DIM: ClassVar[int] = 4

    def __post_init__(self) -> None:
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        kf: KeyframeVar = values[0]
        pl: PlaneVar = values[1]
        return residual_pose_plane(self, kf.pose, pl.coeffs)

    def jacobians(self, values) -> list[np.ndarray]:
        x: Pose = values[0].pose
        coeffs: np.ndarray = values[1].coeffs
        n = coeffs[:3]
        n_local, _ = _predicted_local(x, coeffs)
        s = _observation_sign(n_local, self.observed)

        J_pose = np.zeros((4, 6))
        J_pose[:3, :3] = s * skew(n_local)
        J_pose[3, 3:] = s * n

        J_plane = np.zeros((4, 4))
        J_plane[:3, :3] = s * x.R.T
        J_plane[3, :3] = s * x.translation
        J_plane[3, 3] = s
        return [J_pose, J_plane]


def plane_midpoint(coeffs_a: np.ndarray, coeffs_b: np.ndarray, axis: int) -> float:
    """Mean of the two planes' closest points (c = -d n) along ``axis``."""
    return -0.5 * (coeffs_a[3] * coeffs_a[axis] + coeffs_b[3] * coeffs_b[axis])


def check_opposed(a: PlaneCoeffs, b: PlaneCoeffs, max_angle_deg: float = 25.0) -> None:
    if float(a.normal @ b.normal) >= -np.cos(np.deg2rad(max_angle_deg)):
        raise NotOpposed(f"planes {a} and {b} are not anti-parallel within {max_angle_deg} deg")


def residual_room_plane_pair(f: RoomPlanePairFactor, rho: np.ndarray, plane_a, plane_b) -> float:
    """rho[axis] minus the midpoint of the pair's closest points on that axis."""
    pa = plane_a if isinstance(plane_a, PlaneCoeffs) else PlaneCoeffs.from_vector(plane_a)
    pb = plane_b if isinstance(plane_b, PlaneCoeffs) else PlaneCoeffs.from_vector(plane_b)
    check_opposed(pa, pb)
    k = AXES[f.axis]
    return float(np.asarray(rho, dtype=float)[k] - plane_midpoint(pa.vector, pb.vector, k))


@dataclass(eq=False)
class RoomPlanePairFactor(Factor):
    room: VariableId
    plane_a: VariableId
    plane_b: VariableId
    axis: str
    information: np.ndarray = field(default_factory=lambda: np.eye(1))

    TYPE: ClassVar[str] = "room_plane_pair"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("room", "plane_a", "plane_b")
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.ROOM, VarKind.PLANE, VarKind.PLANE)
    DIM: ClassVar[int] = 1

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        room: RoomVar = values[0]
        k = AXES[self.axis]
        return np.array([room.position[k] - plane_midpoint(values[1].coeffs, values[2].coeffs, k)])

    def jacobians(self, values) -> list[np.ndarray]:
        k = AXES[self.axis]
        J_room = np.zeros((1, 2))
        J_room[0, k] = 1.0
        out = [J_room]
        for pl in values[1:]:
            J = np.zeros((1, 4))
            J[0, k] = 0.5 * pl.coeffs[3]
            J[0, 3] = 0.5 * pl.coeffs[k]
            out.append(J)
        return out


@dataclass(eq=False)
class RoomPriorFactor(Factor):
    """Weak prior on the free coordinate of an infinite room."""

    room: VariableId
    axis: str
    measurement: float
    information: np.ndarray = field(default_factory=lambda: np.eye(1) * 1e-2)

    TYPE: ClassVar[str] = "room_prior"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("room",)
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.ROOM,)
    DIM: ClassVar[int] = 1

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        self.measurement = float(self.measurement)
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        return np.array([values[0].position[AXES[self.axis]] - self.measurement])

    def jacobians(self, values) -> list[np.ndarray]:
        J = np.zeros((1, 2))
        J[0, AXES[self.axis]] = 1.0
        return [J]


def residual_floor_room(f: FloorRoomFactor, phi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return (np.asarray(rho, dtype=float) - np.asarray(phi, dtype=float)) - f.delta


@dataclass(eq=False)
class FloorRoomFactor(Factor):
    floor: VariableId
    room: VariableId
    delta: np.ndarray
    information: np.ndarray = field(default_factory=lambda: np.eye(2) * 0.1)

    TYPE: ClassVar[str] = "floor_room"
    KEY_FIELDS: ClassVar[tuple[str, ...]] = ("floor", "room")
    KINDS: ClassVar[tuple[VarKind, ...]] = (VarKind.FLOOR, VarKind.ROOM)
    DIM: ClassVar[int] = 2

    def __post_init__(self) -> None:
        self.delta = np.asarray(self.delta, dtype=float).reshape(2).copy()
        self.information = _as_information(self.information, self.DIM)

    def residual(self, values) -> np.ndarray:
        return residual_floor_room(self, values[0].position, values[1].position)

    def jacobians(self, values) -> list[np.ndarray]:
        return [-np.eye(2), np.eye(2)]


AnyFactor = Union[
    OdometryFactor,
    LoopFactor,
    PoseAnchorFactor,
    PosePlaneFactor,
    RoomPlanePairFactor,
    RoomPriorFactor,
    FloorRoomFactor,
]

FACTOR_TYPES: dict[str, type[Factor]] = {
    cls.TYPE: cls
    for cls in (
        OdometryFactor,
        LoopFactor,
        PoseAnchorFactor,
        PosePlaneFactor,
        RoomPlanePairFactor,
        RoomPriorFactor,
        FloorRoomFactor,
    )
}
