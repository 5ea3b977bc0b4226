"""Infinite planes in Hessian normal form: n . p + d = 0 with |n| = 1."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .se3 import Pose


class Frame(str, Enum):
    MAP = "M"
    SENSOR = "L"


@dataclass(frozen=True, eq=False)
class PlaneCoeffs:
    normal: np.ndarray
    d: float
    frame: Frame = Frame.MAP

    def __post_init__(self) -> None:
        n = np.asarray(self.normal, dtype=float).reshape(3)
        norm = float(np.linalg.norm(n))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("plane normal must be finite and non-zero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "d", float(self.d) / norm)
        object.__setattr__(self, "frame", Frame(self.frame))

    @classmethod
    def from_vector(cls, v: np.ndarray, frame: Frame = Frame.MAP) -> PlaneCoeffs:
        v = np.asarray(v, dtype=float)
        return cls(v[:3], float(v[3]), frame)

    @classmethod
    def from_stored(cls, v, frame: Frame = Frame.MAP) -> PlaneCoeffs:
        """Rebuild serialized coefficients as-is, skipping renormalization."""
        v = np.asarray(v, dtype=float).reshape(4)
        plane = object.__new__(cls)
        object.__setattr__(plane, "normal", v[:3].copy())
        object.__setattr__(plane, "d", float(v[3]))
        object.__setattr__(plane, "frame", Frame(frame))
        return plane

    @property
    def vector(self) -> np.ndarray:
        return np.append(self.normal, self.d)

    @property
    def closest_point(self) -> np.ndarray:
        return -self.d * self.normal

    def flipped(self) -> PlaneCoeffs:
        return PlaneCoeffs(-self.normal, -self.d, self.frame)

    def canonical(self) -> PlaneCoeffs:
        # argmax returns the first maximum, which gives the x > y > z tie preference
        axis = int(np.argmax(np.abs(self.normal)))
        return self.flipped() if self.normal[axis] < 0.0 else self

    def aligned_to(self, reference: PlaneCoeffs) -> PlaneCoeffs:
        return self.flipped() if float(self.normal @ reference.normal) < 0.0 else self

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, 3) @ self.normal + self.d

    def distance_to(self, other: PlaneCoeffs) -> float:
        """l2 norm of the coefficient difference after sign alignment."""
        return float(np.linalg.norm(other.aligned_to(self).vector - self.vector))

    def allclose(self, other: PlaneCoeffs, atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.vector, other.vector, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        n = ", ".join(f"{v:.4f}" for v in self.normal)
        return f"PlaneCoeffs(n=[{n}], d={self.d:.4f}, frame={self.frame.value})"


def plane_to_map(pose: Pose, local: PlaneCoeffs, *, canonical: bool = True) -> PlaneCoeffs:
    """Express a sensor-frame plane in the map frame; ``pose`` is map-from-sensor."""
    n_map = pose.R @ local.normal
    out = PlaneCoeffs(n_map, local.d - float(n_map @ pose.translation), Frame.MAP)
    return out.canonical() if canonical else out


def plane_to_local(pose: Pose, plane: PlaneCoeffs, *, canonical: bool = True) -> PlaneCoeffs:
    n_local = pose.R.T @ plane.normal
    out = PlaneCoeffs(n_local, plane.d + float(plane.normal @ pose.translation), Frame.SENSOR)
    return out.canonical() if canonical else out


def fit_plane(points: np.ndarray) -> PlaneCoeffs:
    """Least-squares plane through ``points``: centroid plus smallest singular vector."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 3:
        raise ValueError("at least three points are needed to fit a plane")
    centroid = pts.mean(axis=0)
    _, _, vh = np.linalg.svd(pts - centroid, full_matrices=False)
    normal = vh[-1]
    return PlaneCoeffs(normal, -float(normal @ centroid), Frame.SENSOR)


class PlaneCategory(str, Enum):
    X_VERTICAL = "x_vertical"
    Y_VERTICAL = "y_vertical"
    HORIZONTAL = "horizontal"

    @property
    def axis(self) -> int | None:
        return {PlaneCategory.X_VERTICAL: 0, PlaneCategory.Y_VERTICAL: 1}.get(self)
