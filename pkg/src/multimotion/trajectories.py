"""Egocentric and geocentric trajectories from per-label egomotion hypotheses.

A label's hypothesis is the camera trajectory that would explain its
tracklets if they were static. Inverting it gives the label's egocentric
motion; picking a static label gives the geocentric camera trajectory; and
conjugating through the camera trajectory and a per-label center of motion
gives each body's geocentric trajectory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .labeling import Label, Labeling, residual_vector
from .se3 import Pose
from .tracklets import TrackletArrays

EGOCENTRIC = "egocentric"
GEOCENTRIC = "geocentric"


@dataclass(frozen=True)
class MotionTrajectory:
    label_id: int
    kind: str                   # EGOCENTRIC or GEOCENTRIC
    poses: tuple                # per-frame Pose | None
    center: np.ndarray | None = None  # center of motion, geocentric only

    @property
    def coverage(self) -> float:
        return sum(p is not None for p in self.poses) / len(self.poses)

    def positions(self) -> np.ndarray:
        """(K, 3) translations with NaN rows on gap frames."""
        out = np.full((len(self.poses), 3), np.nan)
        for k, p in enumerate(self.poses):
            if p is not None:
                out[k] = p.translation
        return out


def egocentric(label: Label) -> MotionTrajectory:
    """Per-frame inverse of the label's egomotion hypothesis."""
    return MotionTrajectory(
        label_id=label.id,
        kind=EGOCENTRIC,
        poses=tuple(None if p is None else p.inverse() for p in label.poses),
    )


def select_static_label(labeling: Labeling, arrs: TrackletArrays | None = None) -> int:
    """Largest-support label; ties by lowest mean residual, then lowest id."""
    if not labeling.labels:
        raise ValueError("labeling has no labels")
    best = None
    for label in labeling.labels:
        size = len(label.support)
        mean_res = 0.0
        if arrs is not None and label.support:
            rho = residual_vector(arrs, label)
            rows = arrs.rows(label.support)
            finite = rho[rows][np.isfinite(rho[rows])]
            mean_res = float(finite.mean()) if len(finite) else np.inf
        key = (-size, mean_res, label.id)
        if best is None or key < best[0]:
            best = (key, label.id)
    return best[1]


def camera_trajectory(labeling: Labeling, static_id: int) -> MotionTrajectory:
    """The static label's hypothesis, taken as the geocentric camera motion."""
    label = labeling.by_id[static_id]
    return MotionTrajectory(label_id=static_id, kind=GEOCENTRIC, poses=tuple(label.poses))


def center_of_motion(label: Label, arrs: TrackletArrays) -> np.ndarray:
    """Negated centroid of support points transported into the label's first frame.

    Each tracklet contributes its back-projection at its first observed
    frame among the label's covered frames, mapped back through the
    hypothesis chain.
    """
    if not label.support:
        raise ValueError(f"label {label.id} has no support")
    covered = label.covered
    total = np.zeros(3)
    count = 0
    for tid in sorted(label.support):
        row = arrs.index[tid]
        for f in covered:
            if arrs.mask[row, f]:
                total += label.poses[f].inverse().apply(arrs.points[row, f])
                count += 1
                break
    if count == 0:
        raise ValueError(f"label {label.id} support never observed on covered frames")
    return -total / count


def geocentric(label: Label, camera: MotionTrajectory, center: np.ndarray) -> MotionTrajectory:
    """Body motion relative to its first frame, expressed about its center of motion.

    Frames missing from either the label's hypothesis or the camera
    trajectory are gaps in the output.
    """
    anchor = Pose(np.eye(3), np.asarray(center, dtype=float))
    anchor_inv = anchor.inverse()
    out = []
    for body_pose, cam_pose in zip(label.poses, camera.poses):
        if body_pose is None or cam_pose is None:
            out.append(None)
        else:
            out.append(anchor @ body_pose.inverse() @ cam_pose @ anchor_inv)
    return MotionTrajectory(
        label_id=label.id, kind=GEOCENTRIC, poses=tuple(out), center=np.asarray(center)
    )


def write_trajectories_csv(path, trajectories: Sequence[MotionTrajectory]) -> None:
    """One row per (motion, frame): frame, 12 pose numbers or blanks, kind, label id."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["frame"]
            + [f"m{r}{c}" for r in range(3) for c in range(4)]
            + ["kind", "label_id"]
        )
        for traj in trajectories:
            for k, pose in enumerate(traj.poses):
                cells = [""] * 12 if pose is None else [repr(x) for x in pose.flat12()]
                writer.writerow([k] + cells + [traj.kind, traj.label_id])
