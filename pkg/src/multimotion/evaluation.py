"""Metrics against simulator ground truth: calibration, drift, rotation errors.

Window dumps are compared per motion after a rigid frame calibration
estimated from the first frames of each trajectory, mirroring how an
external ground-truth rig with an arbitrary frame offset would be used.
Truth trajectories are re-expressed in the same anchored form the pipeline
outputs: relative to the window's first frame, with bodies conjugated
about a center of motion computed from their true point clouds.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .ransac import rigid_align
from .se3 import GimbalLock, Pose, rpy_error
from .simulator import SceneTruth
from .trajectories import GEOCENTRIC, MotionTrajectory


class InsufficientOverlap(ValueError):
    """Too few shared non-gap frames to calibrate the frame offset."""


@dataclass(frozen=True)
class WindowSchedule:
    window: int
    stride: int = 1

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError("window must be >= 2 frames")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def starts(self, sequence_frames: int) -> list:
        if self.window > sequence_frames:
            raise ValueError(
                f"window {self.window} exceeds sequence length {sequence_frames}"
            )
        return list(range(0, sequence_frames - self.window + 1, self.stride))


def calibrate_frames(estimated: MotionTrajectory, truth: MotionTrajectory,
                     n_frames: int = 25) -> Pose:
    """Closed-form rigid alignment of the first shared trajectory positions.

    Returns the Pose A minimizing sum ||truth_k - A(est_k)||^2 over the
    first ``n_frames`` frames covered by both trajectories.
    """
    shared = [
        k
        for k, (a, b) in enumerate(zip(estimated.poses, truth.poses))
        if a is not None and b is not None
    ]
    if len(shared) < n_frames:
        raise InsufficientOverlap(
            f"{len(shared)} shared frames < {n_frames} needed for calibration"
        )
    use = shared[:n_frames]
    src = np.array([estimated.poses[k].translation for k in use])
    dst = np.array([truth.poses[k].translation for k in use])
    return rigid_align(src, dst)


def true_camera_trajectory(truth: SceneTruth, start: int, frames: int) -> MotionTrajectory:
    """Camera motion relative to the window's first frame."""
    base = truth.camera[start].inverse()
    poses = tuple(truth.camera[start + k] @ base for k in range(frames))
    return MotionTrajectory(label_id=-1, kind=GEOCENTRIC, poses=poses)


def true_body_trajectory(truth: SceneTruth, body_id: int, start: int, frames: int) -> MotionTrajectory:
    """Body motion in the estimate's convention, about the true-point centroid."""
    body = truth.bodies[body_id]
    cam0 = truth.camera[start]
    center = -np.mean((cam0 @ body.trajectory[start]).apply(body.points), axis=0)
    anchor = Pose(np.eye(3), center)
    anchor_inv = anchor.inverse()
    hyp0 = (cam0 @ body.trajectory[start]).inverse()
    cam_base = cam0.inverse()
    poses = []
    for k in range(frames):
        hyp = (truth.camera[start + k] @ body.trajectory[start + k]) @ hyp0
        cam = truth.camera[start + k] @ cam_base
        poses.append(anchor @ hyp.inverse() @ cam @ anchor_inv)
    return MotionTrajectory(label_id=body_id, kind=GEOCENTRIC, poses=tuple(poses), center=center)


@dataclass
class MotionErrors:
    body_id: int
    label_id: int
    coverage: float
    frames: list = field(default_factory=list)
    translational: list = field(default_factory=list)   # (ex, ey, ez) meters
    rotational_deg: list = field(default_factory=list)  # (roll, pitch, yaw) degrees

    @property
    def max_rotational_deg(self) -> float:
        finite = [abs(x) for row in self.rotational_deg for x in row if math.isfinite(x)]
        return max(finite) if finite else math.nan

    @property
    def max_translational(self) -> float:
        norms = [math.hypot(*row) for row in self.translational]
        return max(norms) if norms else math.nan

    def to_dict(self) -> dict:
        return {
            "body_id": self.body_id,
            "label_id": self.label_id,
            "coverage": self.coverage,
            "frames": self.frames,
            "translational": self.translational,
            "rotational_deg": self.rotational_deg,
            "max_translational_m": self.max_translational,
            "max_rotational_deg": self.max_rotational_deg,
        }


@dataclass
class WindowReport:
    start: int
    n_labels: int
    model_count_correct: bool
    camera_coverage: float
    camera_max_drift_m: float | None
    camera_drift_pct: float | None
    motions: list

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "n_labels": self.n_labels,
            "model_count_correct": self.model_count_correct,
            "camera_coverage": self.camera_coverage,
            "camera_max_drift_m": self.camera_max_drift_m,
            "camera_drift_pct": self.camera_drift_pct,
            "motions": [m.to_dict() for m in self.motions],
        }


@dataclass
class ErrorReport:
    windows: list
    model_count_fraction: float
    baseline_model_count_fraction: float | None
    camera_max_drift_m: float | None
    camera_drift_pct: float | None
    mean_coverage: dict

    def to_dict(self) -> dict:
        return {
            "windows": [w.to_dict() for w in self.windows],
            "model_count_fraction": self.model_count_fraction,
            "baseline_model_count_fraction": self.baseline_model_count_fraction,
            "camera_max_drift_m": self.camera_max_drift_m,
            "camera_drift_pct": self.camera_drift_pct,
            "mean_coverage": {str(k): v for k, v in sorted(self.mean_coverage.items())},
        }


def _poses_from(records) -> tuple:
    return tuple(None if p is None else Pose.from_flat12(p) for p in records)


def associate_labels(labels: list, truth: SceneTruth) -> dict:
    """label id -> body id by majority vote over the true tracklet assignment.

    Ties break toward the body with the larger overlap count, then lower id.
    """
    out = {}
    for rec in labels:
        votes = Counter(truth.assignment[int(t)] for t in rec["support"])
        if votes:
            body, _ = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            out[rec["id"]] = body
    return out


def _evaluate_window(dump: dict, truth: SceneTruth, n_calib: int) -> WindowReport:
    start = int(dump["window_start"])
    frames = int(dump["frames"])
    n_true = len(truth.bodies)
    if dump.get("status") != "ok":
        return WindowReport(
            start=start,
            n_labels=0,
            model_count_correct=False,
            camera_coverage=0.0,
            camera_max_drift_m=None,
            camera_drift_pct=None,
            motions=[
                MotionErrors(body_id=b.id, label_id=-1, coverage=0.0)
                for b in truth.bodies
            ],
        )

    labels = dump["labels"]
    association = associate_labels(labels, truth)
    static_id = dump["static_label"]

    est_cam = MotionTrajectory(
        label_id=static_id,
        kind=GEOCENTRIC,
        poses=_poses_from(next(l["poses"] for l in labels if l["id"] == static_id)),
    )
    true_cam = true_camera_trajectory(truth, start, frames)
    cam_cov = est_cam.coverage
    cam_drift = cam_pct = None
    try:
        cal = calibrate_frames(est_cam, true_cam, n_calib)
        drifts = [
            float(np.linalg.norm(true_cam.poses[k].translation - cal.apply(p.translation)))
            for k, p in enumerate(est_cam.poses)
            if p is not None
        ]
        cam_drift = max(drifts)
        tpos = np.array([p.translation for p in true_cam.poses])
        path = float(np.sum(np.linalg.norm(np.diff(tpos, axis=0), axis=1)))
        cam_pct = 100.0 * cam_drift / path if path > 1e-12 else None
    except InsufficientOverlap:
        pass

    # best label per body: largest overlap with the body's true tracklets
    best_for_body: dict = {}
    for rec in labels:
        body = association.get(rec["id"])
        if body is None:
            continue
        overlap = sum(1 for t in rec["support"] if truth.assignment[int(t)] == body)
        key = (-overlap, rec["id"])
        if body not in best_for_body or key < best_for_body[body][0]:
            best_for_body[body] = (key, rec)

    motions = []
    for body in truth.bodies:
        if body.id not in best_for_body:
            motions.append(MotionErrors(body_id=body.id, label_id=-1, coverage=0.0))
            continue
        rec = best_for_body[body.id][1]
        label_poses = _poses_from(rec["poses"])
        center = np.asarray(rec["center"], dtype=float)
        anchor = Pose(np.eye(3), center)
        anchor_inv = anchor.inverse()
        est_poses = []
        for lp, cp in zip(label_poses, est_cam.poses):
            if lp is None or cp is None:
                est_poses.append(None)
            else:
                est_poses.append(anchor @ lp.inverse() @ cp @ anchor_inv)
        est = MotionTrajectory(rec["id"], GEOCENTRIC, tuple(est_poses), center)
        tru = true_body_trajectory(truth, body.id, start, frames)
        entry = MotionErrors(body_id=body.id, label_id=rec["id"], coverage=est.coverage)
        try:
            cal = calibrate_frames(est, tru, n_calib)
        except InsufficientOverlap:
            motions.append(entry)
            continue
        for k, p in enumerate(est.poses):
            if p is None:
                continue
            aligned = cal @ p
            terr = tru.poses[k].translation - aligned.translation
            try:
                rerr = np.degrees(rpy_error(aligned.rotation, tru.poses[k].rotation))
            except GimbalLock:
                rerr = np.full(3, np.nan)
            entry.frames.append(k)
            entry.translational.append([float(x) for x in terr])
            entry.rotational_deg.append([float(x) for x in rerr])
        motions.append(entry)

    return WindowReport(
        start=start,
        n_labels=len(labels),
        model_count_correct=len(labels) == n_true,
        camera_coverage=cam_cov,
        camera_max_drift_m=cam_drift,
        camera_drift_pct=cam_pct,
        motions=motions,
    )


def evaluate(dumps: list, truth: SceneTruth, schedule: WindowSchedule,
             baseline_dumps: list | None = None, n_calib: int = 25) -> ErrorReport:
    """Aggregate per-window metrics; pure function of the dump contents."""
    windows = [_evaluate_window(d, truth, n_calib) for d in dumps]
    n_true = len(truth.bodies)
    frac = (
        sum(w.model_count_correct for w in windows) / len(windows) if windows else 0.0
    )
    base_frac = None
    if baseline_dumps is not None:
        correct = [
            len(d.get("labels", [])) == n_true and d.get("status") == "ok"
            for d in baseline_dumps
        ]
        base_frac = sum(correct) / len(correct) if correct else 0.0
    drifts = [w.camera_max_drift_m for w in windows if w.camera_max_drift_m is not None]
    pcts = [w.camera_drift_pct for w in windows if w.camera_drift_pct is not None]
    coverage: dict = {b.id: [] for b in truth.bodies}
    for w in windows:
        for m in w.motions:
            coverage[m.body_id].append(m.coverage)
    mean_cov = {b: (sum(v) / len(v) if v else 0.0) for b, v in coverage.items()}
    return ErrorReport(
        windows=windows,
        model_count_fraction=frac,
        baseline_model_count_fraction=base_frac,
        camera_max_drift_m=max(drifts) if drifts else None,
        camera_drift_pct=max(pcts) if pcts else None,
        mean_coverage=mean_cov,
    )


def write_motion_csv(path, errors: MotionErrors) -> None:
    """Per-frame error series: frame, ex, ey, ez, roll, pitch, yaw."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "ex", "ey", "ez", "roll", "pitch", "yaw"])
        for k, t, r in zip(errors.frames, errors.translational, errors.rotational_deg):
            writer.writerow([k] + [repr(float(x)) for x in t] + [repr(float(x)) for x in r])
