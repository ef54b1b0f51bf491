"""Synthetic multimotion scenes with full ground truth.

Stands in for a physical camera rig and feature-tracking front-end: rigid
bodies (boxes) move through scripted SE(3) trajectories, a scripted camera
observes them, and every body point visible in the stereo frustum emits a
noisy (u, v, d) observation. Output is a tracklet set plus the complete
ground truth (camera trajectory, body trajectories, tracklet-to-body map).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .se3 import Pose, axis_angle
from .stereo import DEFAULT_D_MIN, StereoIntrinsics, in_frustum_many, project_many
from .tracklets import Tracklet

BACKGROUND_ID = 0

MOTION_KINDS = ("swing", "rotate", "orbit", "static")


class ConfigInvalid(ValueError):
    """Scene configuration failed validation; message lists the offending fields."""


@dataclass(frozen=True)
class MotionScript:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BodyConfig:
    kind: str
    params: dict
    n_points: int
    extent: tuple  # box dimensions (meters)


@dataclass(frozen=True)
class SceneConfig:
    frames: int
    intrinsics: StereoIntrinsics
    camera: MotionScript
    bodies: tuple  # BodyConfig, index 0 is the static background
    noise_sigma: float = 0.5
    dropout: float = 0.0
    gap_limit: int = 2
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.frames < 2:
            problems.append("frames: must be >= 2")
        if not self.bodies:
            problems.append("bodies: need at least the static background")
        if self.noise_sigma < 0:
            problems.append("noise_sigma: must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            problems.append("dropout: must be in [0, 1)")
        if self.gap_limit < 1:
            problems.append("gap_limit: must be >= 1")
        if self.camera.kind not in MOTION_KINDS:
            problems.append(f"camera.kind: unknown kind {self.camera.kind!r}")
        for i, body in enumerate(self.bodies):
            if body.kind not in MOTION_KINDS:
                problems.append(f"bodies[{i}].kind: unknown kind {body.kind!r}")
            if body.n_points < 1:
                problems.append(f"bodies[{i}].n_points: must be >= 1")
            if len(body.extent) != 3 or min(body.extent) <= 0:
                problems.append(f"bodies[{i}].extent: need 3 positive dimensions")
        if problems:
            raise ConfigInvalid("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "intrinsics": self.intrinsics.to_dict(),
            "camera": {"kind": self.camera.kind, "params": self.camera.params},
            "bodies": [
                {
                    "kind": b.kind,
                    "params": b.params,
                    "n_points": b.n_points,
                    "extent": list(b.extent),
                }
                for b in self.bodies
            ],
            "noise_sigma": self.noise_sigma,
            "dropout": self.dropout,
            "gap_limit": self.gap_limit,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneConfig":
        cfg = SceneConfig(
            frames=int(d["frames"]),
            intrinsics=StereoIntrinsics.from_dict(d["intrinsics"]),
            camera=MotionScript(d["camera"]["kind"], dict(d["camera"].get("params", {}))),
            bodies=tuple(
                BodyConfig(
                    kind=b["kind"],
                    params=dict(b.get("params", {})),
                    n_points=int(b["n_points"]),
                    extent=tuple(float(x) for x in b["extent"]),
                )
                for b in d["bodies"]
            ),
            noise_sigma=float(d.get("noise_sigma", 0.5)),
            dropout=float(d.get("dropout", 0.0)),
            gap_limit=int(d.get("gap_limit", 2)),
            seed=int(d.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    @staticmethod
    def from_json(path) -> "SceneConfig":
        with open(path) as fh:
            return SceneConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class RigidBody:
    id: int
    points: np.ndarray      # (n, 3) surface points, body frame
    trajectory: tuple       # per-frame Pose, body-to-world


@dataclass(frozen=True)
class SceneTruth:
    camera: tuple           # per-frame Pose, world-to-camera
    bodies: tuple           # RigidBody, id 0 = static background
    assignment: dict        # tracklet id -> body id

    @property
    def frames(self) -> int:
        return len(self.camera)

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "camera": [p.flat12() for p in self.camera],
            "bodies": [
                {
                    "id": b.id,
                    "trajectory": [p.flat12() for p in b.trajectory],
                    "points": [[float(x) for x in row] for row in b.points],
                }
                for b in self.bodies
            ],
            "assignment": {str(t): int(b) for t, b in sorted(self.assignment.items())},
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneTruth":
        return SceneTruth(
            camera=tuple(Pose.from_flat12(p) for p in d["camera"]),
            bodies=tuple(
                RigidBody(
                    id=int(b["id"]),
                    points=np.asarray(b["points"], dtype=float),
                    trajectory=tuple(Pose.from_flat12(p) for p in b["trajectory"]),
                )
                for b in d["bodies"]
            ),
            assignment={int(t): int(b) for t, b in d["assignment"].items()},
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def load(path) -> "SceneTruth":
        with open(path) as fh:
            return SceneTruth.from_dict(json.load(fh))


def look_at(eye: np.ndarray, target: np.ndarray, up=(0.0, 0.0, 1.0)) -> Pose:
    """World-to-camera pose: optical axis +z toward target, image y downward."""
    eye = np.asarray(eye, dtype=float)
    z = np.asarray(target, dtype=float) - eye
    z = z / np.linalg.norm(z)
    x = np.cross(z, np.asarray(up, dtype=float))
    nx = np.linalg.norm(x)
    if nx < 1e-12:
        raise ConfigInvalid("camera optical axis parallel to up vector")
    x = x / nx
    y = np.cross(z, x)
    cam_to_world = Pose(np.column_stack([x, y, z]), eye)
    return cam_to_world.inverse()


def scripted_motions(kind: str, params: dict, frames: int) -> list:
    """Smooth SE(3) sequences for the supported motion archetypes.

    swing:  pendulum about a pivot line; theta(k) = amplitude * sin(2 pi k / period + phase)
    rotate: constant angular velocity about an axis through a center point
    orbit:  circle of given radius about a center, facing the center (world-to-camera)
    static: constant pose
    """
    if kind == "static":
        pose = Pose(np.eye(3), np.asarray(params.get("position", (0.0, 0.0, 0.0)), dtype=float))
        return [pose] * frames
    if kind == "rotate":
        center = np.asarray(params.get("center", (0.0, 0.0, 0.0)), dtype=float)
        axis = np.asarray(params.get("axis", (0.0, 0.0, 1.0)), dtype=float)
        omega = float(params.get("omega", 0.0))
        phase = float(params.get("phase", 0.0))
        out = []
        for k in range(frames):
            r = axis_angle(axis, omega * k + phase)
            out.append(Pose(r, center))
        return out
    if kind == "swing":
        pivot = np.asarray(params.get("pivot", (0.0, 0.0, 1.0)), dtype=float)
        axis = np.asarray(params.get("axis", (0.0, 0.0, 1.0)), dtype=float)
        rest = np.asarray(params.get("rest", (0.0, 0.0, 0.0)), dtype=float)
        amplitude = float(params.get("amplitude", 0.0))
        period = float(params.get("period", frames))
        phase = float(params.get("phase", 0.0))
        out = []
        for k in range(frames):
            theta = amplitude * math.sin(2.0 * math.pi * k / period + phase)
            r = axis_angle(axis, theta)
            out.append(Pose(r, pivot + r @ (rest - pivot)))
        return out
    if kind == "orbit":
        center = np.asarray(params.get("center", (0.0, 0.0, 0.0)), dtype=float)
        radius = float(params.get("radius", 4.0))
        height = float(params.get("height", 0.0))
        rate = float(params.get("rate", 0.0))
        phase = float(params.get("phase", 0.0))
        out = []
        for k in range(frames):
            a = rate * k + phase
            eye = center + np.array([radius * math.cos(a), radius * math.sin(a), height])
            out.append(look_at(eye, center))
        return out
    raise ConfigInvalid(f"kind: unknown motion kind {kind!r}")


def sample_box_surface(rng: np.random.Generator, n: int, extent: Sequence[float]) -> np.ndarray:
    """Uniform-by-area samples on the surface of an axis-aligned box at the origin."""
    ex, ey, ez = (float(e) / 2.0 for e in extent)
    areas = np.array([ey * ez, ey * ez, ex * ez, ex * ez, ex * ey, ex * ey])
    faces = rng.choice(6, size=n, p=areas / areas.sum())
    uvs = rng.uniform(-1.0, 1.0, size=(n, 2))
    pts = np.empty((n, 3))
    for i, (f, (a, b)) in enumerate(zip(faces, uvs)):
        if f < 2:
            pts[i] = [ex if f == 0 else -ex, a * ey, b * ez]
        elif f < 4:
            pts[i] = [a * ex, ey if f == 2 else -ey, b * ez]
        else:
            pts[i] = [a * ex, b * ey, ez if f == 4 else -ez]
    return pts


def _segments(visible: np.ndarray, gap_limit: int) -> list:
    """Split a per-frame visibility vector into tracklet segments.

    A segment survives interior gaps shorter than gap_limit frames and is
    terminated (never resumed) once a gap reaches gap_limit.
    """
    frames = np.nonzero(visible)[0]
    if len(frames) == 0:
        return []
    segments = []
    start = prev = frames[0]
    for k in frames[1:]:
        if k - prev - 1 >= gap_limit:
            segments.append((start, prev))
            start = k
        prev = k
    segments.append((start, prev))
    return segments


def generate_scene(config: SceneConfig, seed: int | None = None) -> tuple:
    """Deterministic scene synthesis: (tracklets, truth) for a fixed seed."""
    config.validate()
    if seed is None:
        seed = config.seed
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    k_intr = config.intrinsics
    frames = config.frames

    camera = scripted_motions(config.camera.kind, config.camera.params, frames)

    bodies = []
    for bid, body_cfg in enumerate(config.bodies):
        points = sample_box_surface(rng, body_cfg.n_points, body_cfg.extent)
        trajectory = tuple(scripted_motions(body_cfg.kind, body_cfg.params, frames))
        bodies.append(RigidBody(bid, points, trajectory))

    # Per body point: (frames, 3) noisy observations with NaN where unseen.
    per_point_obs = [
        np.full((frames, 3), np.nan) for b in bodies for _ in range(len(b.points))
    ]
    point_owner = [b.id for b in bodies for _ in range(len(b.points))]
    offsets = np.cumsum([0] + [len(b.points) for b in bodies])

    for k in range(frames):
        w2c = camera[k]
        for b in bodies:
            world = b.trajectory[k].apply(b.points)
            cam = w2c.apply(world)
            vis = in_frustum_many(k_intr, cam)
            if config.dropout > 0.0:
                drop = rng.random(len(cam)) < config.dropout
                vis = vis & ~drop
            idx = np.nonzero(vis)[0]
            if len(idx) == 0:
                continue
            obs, _ = project_many(k_intr, cam[idx])
            if config.noise_sigma > 0.0:
                obs = obs + rng.normal(0.0, config.noise_sigma, size=obs.shape)
            ok = obs[:, 2] > DEFAULT_D_MIN
            for j, row in zip(idx[ok], obs[ok]):
                per_point_obs[offsets[b.id] + j][k] = row

    tracklets = []
    assignment = {}
    tid = 0
    for p_idx, obs_grid in enumerate(per_point_obs):
        visible = ~np.isnan(obs_grid[:, 0])
        for start, end in _segments(visible, config.gap_limit):
            rows = [
                None if np.isnan(obs_grid[k, 0]) else list(obs_grid[k])
                for k in range(start, end + 1)
            ]
            tracklets.append(Tracklet.build(tid, int(start), rows, k_intr))
            assignment[tid] = point_owner[p_idx]
            tid += 1

    truth = SceneTruth(camera=tuple(camera), bodies=tuple(bodies), assignment=assignment)
    return tracklets, truth


def true_hypothesis(truth: SceneTruth, body_id: int, start: int = 0) -> list:
    """Camera-egomotion hypothesis a body would induce if it were static.

    Entry k is the transform taking that body's camera-frame points at frame
    ``start`` to their camera-frame location at frame ``start + k``.
    """
    body = truth.bodies[body_id]
    base = (truth.camera[start] @ body.trajectory[start]).inverse()
    return [
        (truth.camera[k] @ body.trajectory[k]) @ base
        for k in range(start, truth.frames)
    ]
