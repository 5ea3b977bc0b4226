"""Rigid transforms in SE(3).

Rotations are stored as unit quaternions in (w, x, y, z) order; scipy's
``Rotation`` does the exponential/logarithm work. The tangent used by the
optimizer is the decoupled pair (rotation vector, translation).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.transform import Rotation


def skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def right_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    """Inverse right Jacobian of SO(3) at rotation vector ``phi``."""
    theta = float(np.linalg.norm(phi))
    K = skew(phi)
    if theta < 1e-6:
        return np.eye(3) + 0.5 * K + (K @ K) / 12.0
    coeff = 1.0 / theta**2 - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return np.eye(3) + 0.5 * K + coeff * (K @ K)


def _wxyz_to_rotation(q: np.ndarray) -> Rotation:
    return Rotation.from_quat([q[1], q[2], q[3], q[0]])


def _rotation_to_wxyz(r: Rotation) -> np.ndarray:
    x, y, z, w = r.as_quat()
    return np.array([w, x, y, z])


@dataclass(frozen=True, eq=False)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.rotation, dtype=float).reshape(4)
        norm = np.linalg.norm(q)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("quaternion must be finite and non-zero")
        if q[0] < 0.0:
            q = -q
        object.__setattr__(self, "rotation", q / norm)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3).copy())

    # construction -------------------------------------------------------

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))

    @classmethod
    def from_rotation(cls, rotation: Rotation, translation=(0.0, 0.0, 0.0)) -> Pose:
        return cls(_rotation_to_wxyz(rotation), np.asarray(translation, dtype=float))

    @classmethod
    def from_matrix(cls, R: np.ndarray, t=(0.0, 0.0, 0.0)) -> Pose:
        return cls.from_rotation(Rotation.from_matrix(R), t)

    @classmethod
    def from_xyz_yaw(cls, x: float, y: float, z: float = 0.0, yaw: float = 0.0) -> Pose:
        return cls.from_rotation(Rotation.from_euler("z", yaw), (x, y, z))

    @classmethod
    def translation_only(cls, x: float, y: float, z: float) -> Pose:
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.array([x, y, z], dtype=float))

    @classmethod
    def from_stored(cls, rotation, translation) -> Pose:
        """Rebuild a pose from serialized values without renormalizing (bit-exact)."""
        pose = object.__new__(cls)
        object.__setattr__(pose, "rotation", np.asarray(rotation, dtype=float).reshape(4).copy())
        object.__setattr__(pose, "translation", np.asarray(translation, dtype=float).reshape(3).copy())
        return pose

    @classmethod
    def exp(cls, xi: np.ndarray) -> Pose:
        """Pose from a decoupled tangent vector (rotation vector, translation)."""
        xi = np.asarray(xi, dtype=float)
        return cls.from_rotation(Rotation.from_rotvec(xi[:3]), xi[3:6])

    # views --------------------------------------------------------------

    @cached_property
    def R(self) -> np.ndarray:
        return _wxyz_to_rotation(self.rotation).as_matrix()

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.translation
        return T

    @property
    def yaw(self) -> float:
        return float(np.arctan2(self.R[1, 0], self.R[0, 0]))

    def rotation_vector(self) -> np.ndarray:
        return _wxyz_to_rotation(self.rotation).as_rotvec()

    def rotation_angle(self) -> float:
        return float(np.linalg.norm(self.rotation_vector()))

    # algebra ------------------------------------------------------------

    def compose(self, other: Pose) -> Pose:
        r = _wxyz_to_rotation(self.rotation) * _wxyz_to_rotation(other.rotation)
        return Pose(_rotation_to_wxyz(r), self.R @ other.translation + self.translation)

    def __matmul__(self, other: Pose) -> Pose:
        return self.compose(other)

    def inverse(self) -> Pose:
        r = _wxyz_to_rotation(self.rotation).inv()
        return Pose(_rotation_to_wxyz(r), -(self.R.T @ self.translation))

    def between(self, other: Pose) -> Pose:
        return self.inverse().compose(other)

    def log(self) -> np.ndarray:
        return np.concatenate([self.rotation_vector(), self.translation])

    def retract(self, delta: np.ndarray) -> Pose:
        """Apply a local increment: R <- R Exp(w), t <- t + v."""
        delta = np.asarray(delta, dtype=float)
        r = _wxyz_to_rotation(self.rotation) * Rotation.from_rotvec(delta[:3])
        return Pose(_rotation_to_wxyz(r), self.translation + delta[3:6])

    def transform(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return pts @ self.R.T + self.translation

    def allclose(self, other: Pose, atol: float = 1e-9) -> bool:
        d = self.between(other)
        return d.rotation_angle() <= atol and float(np.linalg.norm(d.translation)) <= atol

    def __repr__(self) -> str:
        t = ", ".join(f"{v:.4f}" for v in self.translation)
        q = ", ".join(f"{v:.4f}" for v in self.rotation)
        return f"Pose(q=[{q}], t=[{t}])"


def pose_compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def pose_between(a: Pose, b: Pose) -> Pose:
    return a.between(b)
