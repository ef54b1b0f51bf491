"""SE(3)/SO(3) types and Lie-group operations.

Conventions:
    - A ``Pose`` maps points from its source frame to its target frame via
      ``p_target = R @ p_source + t``.
    - A twist is a plain length-6 array ``(rho, phi)``: translational part
      first (meters), rotational part second (radians).
    - Rotations are 3x3 orthonormal matrices with determinant +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class AngleNearPi(ValueError):
    """Rotation angle is within 1e-6 of pi, where the matrix log is ill-conditioned."""


class GimbalLock(ValueError):
    """Pitch is within 1e-6 of +/-pi/2, where roll and yaw are not separable."""


# Below this rotation angle, closed-form sin/cos ratios are replaced by
# 4th-order Taylor expansions to avoid catastrophic cancellation.
SMALL_ANGLE = 1e-4

# Compositions between polar re-orthonormalizations of the rotation block.
_REORTHO_PERIOD = 100


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 skew-symmetric matrix such that skew(v) @ w == cross(v, w)."""
    v = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation about a (not necessarily unit) axis by ``angle`` radians."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        return np.eye(3)
    return so3_exp(axis / n * angle)


def so3_exp(phi: np.ndarray) -> np.ndarray:
    """Rodrigues formula with a small-angle series fallback."""
    phi = np.asarray(phi, dtype=float)
    theta = float(np.linalg.norm(phi))
    w = skew(phi)
    w2 = w @ w
    if theta < SMALL_ANGLE:
        # 4th-order Taylor in theta; coefficients of W and W^2.
        a = 1.0 - theta**2 / 6.0 + theta**4 / 120.0
        b = 0.5 - theta**2 / 24.0 + theta**4 / 720.0
    else:
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / theta**2
    return np.eye(3) + a * w + b * w2


def so3_log(rotation: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix.

    Raises AngleNearPi when the angle is within 1e-6 of pi.
    """
    rotation = np.asarray(rotation, dtype=float)
    trace = float(np.trace(rotation))
    cos_theta = min(1.0, max(-1.0, 0.5 * (trace - 1.0)))
    theta = math.acos(cos_theta)
    if theta > math.pi - 1e-6:
        raise AngleNearPi(f"rotation angle {theta} is within 1e-6 of pi")
    axial = 0.5 * np.array(
        [
            rotation[2, 1] - rotation[1, 2],
            rotation[0, 2] - rotation[2, 0],
            rotation[1, 0] - rotation[0, 1],
        ]
    )
    if theta < SMALL_ANGLE:
        # axial = sin(theta)/theta * phi; invert the sinc series.
        return axial * (1.0 + theta**2 / 6.0 + 7.0 * theta**4 / 360.0)
    return axial * (theta / math.sin(theta))


def _so3_left_jacobian(phi: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(phi))
    w = skew(phi)
    w2 = w @ w
    if theta < SMALL_ANGLE:
        a = 0.5 - theta**2 / 24.0 + theta**4 / 720.0
        b = 1.0 / 6.0 - theta**2 / 120.0 + theta**4 / 5040.0
    else:
        a = (1.0 - math.cos(theta)) / theta**2
        b = (theta - math.sin(theta)) / theta**3
    return np.eye(3) + a * w + b * w2


def _so3_left_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(phi))
    w = skew(phi)
    w2 = w @ w
    if theta < SMALL_ANGLE:
        b = 1.0 / 12.0 + theta**2 / 720.0 + theta**4 / 30240.0
    else:
        b = (1.0 / theta**2) * (1.0 - theta * math.sin(theta) / (2.0 * (1.0 - math.cos(theta))))
    return np.eye(3) - 0.5 * w + b * w2


def orthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix by polar decomposition."""
    u, _, vt = np.linalg.svd(rotation)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u = u.copy()
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: rotation (3x3) plus translation (3,), both immutable.

    ``generation`` counts compositions since the last re-orthonormalization;
    compose() renormalizes the rotation every ``_REORTHO_PERIOD`` compositions
    to bound numeric drift.
    """

    rotation: np.ndarray
    translation: np.ndarray
    generation: int = field(default=0, repr=False, compare=False)

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def compose(self, other: "Pose") -> "Pose":
        """This pose applied after ``other`` (matrix product self @ other)."""
        r = self.rotation @ other.rotation
        t = self.rotation @ other.translation + self.translation
        gen = max(self.generation, other.generation) + 1
        if gen >= _REORTHO_PERIOD:
            r = orthonormalize(r)
            gen = 0
        return Pose(r, t, gen)

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -(rt @ self.translation), self.generation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one (3,) point or a stack (..., 3) of points."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=float)
        return Pose(m[:3, :3], m[:3, 3])

    def flat12(self) -> list:
        """Row-major 3x4 serialization used by every file format."""
        return [float(x) for x in self.matrix()[:3, :].reshape(-1)]

    @staticmethod
    def from_flat12(values) -> "Pose":
        m = np.asarray(values, dtype=float).reshape(3, 4)
        return Pose(m[:, :3], m[:, 3])

    def is_valid(self, tol: float = 1e-9) -> bool:
        r = self.rotation
        return (
            np.abs(r @ r.T - np.eye(3)).max() < tol
            and abs(np.linalg.det(r) - 1.0) < tol
        )


def compose(a: Pose, b: Pose) -> Pose:
    """Apply ``b`` then ``a``."""
    return a.compose(b)


def exp(xi: np.ndarray) -> Pose:
    """Closed-form SE(3) exponential of a twist (rho, phi)."""
    xi = np.asarray(xi, dtype=float).reshape(6)
    rho, phi = xi[:3], xi[3:]
    r = so3_exp(phi)
    t = _so3_left_jacobian(phi) @ rho
    return Pose(r, t)


def log(pose: Pose) -> np.ndarray:
    """Twist (rho, phi) with exp(log(T)) == T; rotation angle must be < pi."""
    phi = so3_log(pose.rotation)
    rho = _so3_left_jacobian_inv(phi) @ pose.translation
    return np.concatenate([rho, phi])


def circle_dot(h: np.ndarray) -> np.ndarray:
    """4x6 operator of a homogeneous point h = (u, eta).

    For any twist eps: exp(eps^) @ h ~= h + circle_dot(h) @ eps to first order.
    """
    h = np.asarray(h, dtype=float).reshape(4)
    u, eta = h[:3], h[3]
    out = np.zeros((4, 6))
    out[:3, :3] = eta * np.eye(3)
    out[:3, 3:] = -skew(u)
    return out


def rpy_error(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Roll-pitch-yaw decomposition of truth^T @ estimate.

    Uses the Rz(yaw) @ Ry(pitch) @ Rx(roll) convention. Raises GimbalLock
    when pitch is within 1e-6 of +/-pi/2.
    """
    e = np.asarray(truth, dtype=float).T @ np.asarray(estimate, dtype=float)
    sin_pitch = -e[2, 0]
    sin_pitch = min(1.0, max(-1.0, sin_pitch))
    pitch = math.asin(sin_pitch)
    if abs(abs(pitch) - math.pi / 2.0) < 1e-6:
        raise GimbalLock(f"pitch {pitch} is within 1e-6 of +/-pi/2")
    roll = math.atan2(e[2, 1], e[2, 2])
    yaw = math.atan2(e[1, 0], e[0, 0])
    return np.array([roll, pitch, yaw])
