"""Rectified stereo sensor model: projection, back-projection, Jacobian, frustum.

Sensor space is (u, v, d): left-image pixel coordinates plus disparity
d = u_left - u_right. Left and right share intrinsics and a horizontal
baseline, so the measurement of a camera-frame point p = (x, y, z) is

    u = fu * x / z + cu
    v = fv * y / z + cv
    d = fu * b / z
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BehindCamera(ValueError):
    """Point has non-positive depth; projection is undefined."""


class DisparityTooSmall(ValueError):
    """Disparity at or below d_min; depth is unbounded."""


_Z_EPS = 1e-6
DEFAULT_D_MIN = 0.5


@dataclass(frozen=True)
class StereoIntrinsics:
    fu: float
    fv: float
    cu: float
    cv: float
    baseline: float
    width: int
    height: int
    z_near: float = 0.1

    def __post_init__(self) -> None:
        problems = []
        for name in ("fu", "fv", "baseline"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0")
        for name in ("width", "height"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "f_u": self.fu,
            "f_v": self.fv,
            "c_u": self.cu,
            "c_v": self.cv,
            "b": self.baseline,
            "width": self.width,
            "height": self.height,
            "z_near": self.z_near,
        }

    @staticmethod
    def from_dict(d: dict) -> "StereoIntrinsics":
        return StereoIntrinsics(
            fu=float(d["f_u"]),
            fv=float(d["f_v"]),
            cu=float(d["c_u"]),
            cv=float(d["c_v"]),
            baseline=float(d["b"]),
            width=int(d["width"]),
            height=int(d["height"]),
            z_near=float(d.get("z_near", 0.1)),
        )


@dataclass(frozen=True)
class StereoObservation:
    u: float
    v: float
    d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.d])


def project(k: StereoIntrinsics, p: np.ndarray) -> StereoObservation:
    p = np.asarray(p, dtype=float)
    z = p[2]
    if z <= _Z_EPS:
        raise BehindCamera(f"z = {z} <= {_Z_EPS}")
    return StereoObservation(
        u=k.fu * p[0] / z + k.cu,
        v=k.fv * p[1] / z + k.cv,
        d=k.fu * k.baseline / z,
    )


def project_many(k: StereoIntrinsics, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(n, 3) points -> ((n, 3) observations, (n,) validity). Invalid rows are NaN."""
    points = np.asarray(points, dtype=float)
    z = points[..., 2]
    ok = z > _Z_EPS
    zs = np.where(ok, z, 1.0)
    obs = np.stack(
        [
            k.fu * points[..., 0] / zs + k.cu,
            k.fv * points[..., 1] / zs + k.cv,
            k.fu * k.baseline / zs,
        ],
        axis=-1,
    )
    obs[~ok] = np.nan
    return obs, ok


def backproject(k: StereoIntrinsics, obs: StereoObservation, d_min: float = DEFAULT_D_MIN) -> np.ndarray:
    if obs.d <= d_min:
        raise DisparityTooSmall(f"d = {obs.d} <= {d_min}")
    z = k.fu * k.baseline / obs.d
    return np.array(
        [
            (obs.u - k.cu) * z / k.fu,
            (obs.v - k.cv) * z / k.fv,
            z,
        ]
    )


def backproject_many(k: StereoIntrinsics, obs: np.ndarray, d_min: float = DEFAULT_D_MIN) -> tuple[np.ndarray, np.ndarray]:
    """(n, 3) observations (u, v, d) -> ((n, 3) points, (n,) validity)."""
    obs = np.asarray(obs, dtype=float)
    d = obs[..., 2]
    ok = d > d_min
    ds = np.where(ok, d, 1.0)
    z = k.fu * k.baseline / ds
    pts = np.stack(
        [
            (obs[..., 0] - k.cu) * z / k.fu,
            (obs[..., 1] - k.cv) * z / k.fv,
            z,
        ],
        axis=-1,
    )
    pts[~ok] = np.nan
    return pts, ok


def projection_jacobian(k: StereoIntrinsics, p: np.ndarray) -> np.ndarray:
    """Analytic d(u, v, d)/d(x, y, z) at a camera-frame point."""
    p = np.asarray(p, dtype=float)
    x, y, z = p
    if z <= _Z_EPS:
        raise BehindCamera(f"z = {z} <= {_Z_EPS}")
    return np.array(
        [
            [k.fu / z, 0.0, -k.fu * x / z**2],
            [0.0, k.fv / z, -k.fv * y / z**2],
            [0.0, 0.0, -k.fu * k.baseline / z**2],
        ]
    )


def in_frustum(k: StereoIntrinsics, p: np.ndarray) -> bool:
    """True iff z > z_near and both left/right projections land in-bounds.

    Image bounds are half-open: [0, width) x [0, height).
    """
    p = np.asarray(p, dtype=float)
    z = p[2]
    if z <= k.z_near:
        return False
    u = k.fu * p[0] / z + k.cu
    v = k.fv * p[1] / z + k.cv
    d = k.fu * k.baseline / z
    u_right = u - d
    return 0.0 <= u < k.width and 0.0 <= v < k.height and 0.0 <= u_right < k.width


def in_frustum_many(k: StereoIntrinsics, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    z = points[..., 2]
    ok = z > k.z_near
    zs = np.where(ok, z, 1.0)
    u = k.fu * points[..., 0] / zs + k.cu
    v = k.fv * points[..., 1] / zs + k.cv
    d = k.fu * k.baseline / zs
    ur = u - d
    return ok & (u >= 0) & (u < k.width) & (v >= 0) & (v < k.height) & (ur >= 0) & (ur < k.width)
