from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

from ..geometry import Frame, PlaneCategory, PlaneCoeffs, Pose


class VarKind(str, Enum):
    KEYFRAME = "keyframe"
    PLANE = "plane"
    ROOM = "room"
    FLOOR = "floor"


class VariableId(NamedTuple):
    kind: VarKind
    index: int

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> VariableId:
        kind, _, index = text.partition(":")
        return cls(VarKind(kind), int(index))


class FactorId(NamedTuple):
    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> FactorId:
        kind, _, index = text.partition(":")
        return cls(kind, int(index))


@dataclass(eq=False)
class KeyframeVar:
    """Robot keyframe pose in the map frame."""

    pose: Pose
    timestamp: float
    floor_id: int = 0
    cloud: np.ndarray | None = field(default=None, repr=False)

    KIND = VarKind.KEYFRAME
    DIM = 6

    def get_state(self) -> Pose:
        return self.pose

    def set_state(self, state: Pose) -> None:
        self.pose = state

    def retract(self, delta: np.ndarray) -> None:
        self.pose = self.pose.retract(delta)


@dataclass(eq=False)
class PlaneVar:
    """Map-frame plane landmark, over-parameterized by its four coefficients.

    ``support`` keeps a sample of inlier points per observing keyframe index,
    in that keyframe's sensor frame.
    """

    coeffs: np.ndarray
    category: PlaneCategory
    floor_id: int = 0
    support: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    KIND = VarKind.PLANE
    DIM = 4

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(4).copy()
        self.category = PlaneCategory(self.category)

    @property
    def plane(self) -> PlaneCoeffs:
        return PlaneCoeffs.from_vector(self.coeffs, Frame.MAP)

    def get_state(self) -> np.ndarray:
        return self.coeffs.copy()

    def set_state(self, state: np.ndarray) -> None:
        self.coeffs = np.array(state, dtype=float)

    def retract(self, delta: np.ndarray) -> None:
        v = self.coeffs + np.asarray(delta, dtype=float)
        self.coeffs = v / np.linalg.norm(v[:3])


@dataclass(eq=False)
class RoomVar:
    """2D room center.

    Finite rooms own an x pair and a y pair of opposed walls; infinite rooms
    own a single pair and ``axis`` names the coordinate that pair constrains.
    """

    position: np.ndarray
    finite: bool
    floor_id: int = 0
    axis: str | None = None
    x_planes: tuple[VariableId, VariableId] | None = None
    y_planes: tuple[VariableId, VariableId] | None = None

    KIND = VarKind.ROOM
    DIM = 2

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float).reshape(2).copy()

    @property
    def plane_ids(self) -> list[VariableId]:
        ids: list[VariableId] = []
        for pair in (self.x_planes, self.y_planes):
            if pair is not None:
                ids.extend(pair)
        return ids

    def get_state(self) -> np.ndarray:
        return self.position.copy()

    def set_state(self, state: np.ndarray) -> None:
        self.position = np.array(state, dtype=float)

    def retract(self, delta: np.ndarray) -> None:
        self.position = self.position + np.asarray(delta, dtype=float)


@dataclass(eq=False)
class FloorVar:
    """2D floor center; ``room_ids`` and ``plane_ids`` list the rooms and walls on this floor."""

    position: np.ndarray
    floor_id: int = 0
    reference_z: float = 0.0
    anchor: np.ndarray | None = None
    room_ids: list[VariableId] = field(default_factory=list)
    plane_ids: list[VariableId] = field(default_factory=list)

    KIND = VarKind.FLOOR
    DIM = 2

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float).reshape(2).copy()
        if self.anchor is None:
            self.anchor = self.position.copy()

    def get_state(self) -> np.ndarray:
        return self.position.copy()

    def set_state(self, state: np.ndarray) -> None:
        self.position = np.array(state, dtype=float)

    def retract(self, delta: np.ndarray) -> None:
        self.position = self.position + np.asarray(delta, dtype=float)


Variable = Union[KeyframeVar, PlaneVar, RoomVar, FloorVar]
