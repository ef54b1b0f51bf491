"""Full-batch Gauss-Newton refinement of one label's poses and landmarks.

The state couples the label's pose chain (first pose pinned to identity as
the gauge) with one 3D landmark per supporting tracklet, expressed in the
label's first covered frame. Every stereo observation (u, v, d) of a
landmark contributes a residual; the normal equations are solved by a
Schur complement over the block-diagonal landmark system, poses are
updated by a left-multiplied twist exponential and landmarks additively,
and a Levenberg-style diagonal damping kicks in only when an undamped step
would increase the cost.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .labeling import Label
from .se3 import Pose, exp, skew
from .stereo import BehindCamera, StereoIntrinsics, StereoObservation
from .tracklets import TrackletArrays

_Z_EPS = 1e-6


class RankDeficient(RuntimeError):
    """The reduced normal equations are singular beyond damping."""


@dataclass
class BatchState:
    intrinsics: StereoIntrinsics
    frames: list            # absolute window frames, frames[0] = gauge frame
    poses: list             # Pose per frame; poses[0] stays identity
    landmarks: np.ndarray   # (m, 3) in the gauge frame
    tracklet_ids: list      # tracklet per landmark row

    def copy(self) -> "BatchState":
        return BatchState(
            self.intrinsics,
            list(self.frames),
            list(self.poses),
            self.landmarks.copy(),
            list(self.tracklet_ids),
        )


@dataclass(frozen=True)
class BatchObservations:
    frame_pos: np.ndarray   # (n_obs,) index into state.frames
    lm_idx: np.ndarray      # (n_obs,) index into state.landmarks
    y: np.ndarray           # (n_obs, 3) observed (u, v, d)


@dataclass
class GaussNewtonReport:
    iterations: int
    initial_cost: float
    final_cost: float
    converged: bool
    gradient_norm: float

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "initial_cost": self.initial_cost,
            "final_cost": self.final_cost,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
        }


def measurement(state: BatchState, lm: int, frame_pos: int) -> StereoObservation:
    """Predicted stereo observation of landmark ``lm`` at pose ``frame_pos``."""
    q = state.poses[frame_pos].apply(state.landmarks[lm])
    if q[2] <= _Z_EPS:
        raise BehindCamera(f"landmark {lm} behind camera at frame index {frame_pos}")
    k = state.intrinsics
    return StereoObservation(
        u=k.fu * q[0] / q[2] + k.cu,
        v=k.fv * q[1] / q[2] + k.cv,
        d=k.fu * k.baseline / q[2],
    )


def measurement_jacobian(state: BatchState, lm: int, frame_pos: int) -> np.ndarray:
    """3x9 Jacobian: 3x6 pose block (left-twist perturbation) | 3x3 landmark block."""
    pose = state.poses[frame_pos]
    q = pose.apply(state.landmarks[lm])
    if q[2] <= _Z_EPS:
        raise BehindCamera(f"landmark {lm} behind camera at frame index {frame_pos}")
    k = state.intrinsics
    s = np.array(
        [
            [k.fu / q[2], 0.0, -k.fu * q[0] / q[2] ** 2],
            [0.0, k.fv / q[2], -k.fv * q[1] / q[2] ** 2],
            [0.0, 0.0, -k.fu * k.baseline / q[2] ** 2],
        ]
    )
    pose_block = s @ np.concatenate([np.eye(3), -skew(q)], axis=1)
    lm_block = s @ pose.rotation
    return np.concatenate([pose_block, lm_block], axis=1)


def initialize_from_label(label: Label, arrs: TrackletArrays,
                          min_obs_per_pose: int = 3,
                          min_frames_per_landmark: int = 2) -> tuple:
    """Operating point from the label's RANSAC chain and back-projections.

    Landmarks are each tracklet's back-projection at its first observed
    covered frame, transported into the label's first frame through the
    chain. Frames (other than the gauge frame) seeing fewer than
    ``min_obs_per_pose`` landmarks and tracklets observed on fewer than
    ``min_frames_per_landmark`` kept frames are pruned until stable.

    Returns (BatchState, BatchObservations, pruned tracklet ids).
    """
    covered = list(label.covered)
    support = sorted(label.support)
    rows = np.array([arrs.index[t] for t in support], dtype=int)
    seen = arrs.mask[rows][:, covered]  # (m, F)

    keep_lm = np.ones(len(support), dtype=bool)
    keep_fr = np.ones(len(covered), dtype=bool)
    while True:
        lm_ok = seen[:, keep_fr].sum(axis=1) >= min_frames_per_landmark
        lm_ok &= keep_lm
        fr_ok = seen[lm_ok].sum(axis=0) >= min_obs_per_pose
        fr_ok[0] = True  # gauge frame carries no pose variables
        fr_ok &= keep_fr
        if lm_ok.sum() == keep_lm.sum() and fr_ok.sum() == keep_fr.sum():
            break
        keep_lm, keep_fr = lm_ok, fr_ok

    frames = [covered[i] for i in np.nonzero(keep_fr)[0]]
    poses = [label.poses[f] for f in frames]
    lm_rows = rows[keep_lm]
    lm_ids = [support[i] for i in np.nonzero(keep_lm)[0]]
    pruned = [t for t, ok in zip(support, keep_lm) if not ok]

    landmarks = np.zeros((len(lm_ids), 3))
    f_pos, l_idx, ys = [], [], []
    for j, row in enumerate(lm_rows):
        first = None
        for pos, f in enumerate(frames):
            if arrs.mask[row, f]:
                if first is None:
                    first = pos
                    landmarks[j] = poses[pos].inverse().apply(arrs.points[row, f])
                f_pos.append(pos)
                l_idx.append(j)
                ys.append(arrs.obs[row, f])
    obs = BatchObservations(
        frame_pos=np.array(f_pos, dtype=int),
        lm_idx=np.array(l_idx, dtype=int),
        y=np.array(ys, dtype=float),
    )
    state = BatchState(arrs.intrinsics, frames, poses, landmarks, lm_ids)
    return state, obs, pruned


def _predict(state: BatchState, obs: BatchObservations) -> tuple:
    """(q, yhat, ok): transformed points, predicted observations, depth validity."""
    rot = np.stack([p.rotation for p in state.poses])
    trn = np.stack([p.translation for p in state.poses])
    q = (
        np.einsum("oij,oj->oi", rot[obs.frame_pos], state.landmarks[obs.lm_idx])
        + trn[obs.frame_pos]
    )
    z = q[:, 2]
    ok = z > _Z_EPS
    zs = np.where(ok, z, 1.0)
    k = state.intrinsics
    yhat = np.stack(
        [
            k.fu * q[:, 0] / zs + k.cu,
            k.fv * q[:, 1] / zs + k.cv,
            k.fu * k.baseline / zs,
        ],
        axis=1,
    )
    return q, yhat, ok


def _cost(state: BatchState, obs: BatchObservations, weight: float) -> float:
    _, yhat, ok = _predict(state, obs)
    if not ok.all():
        return np.inf
    e = obs.y - yhat
    return 0.5 * weight * float(np.sum(e * e))


def solve(obs: BatchObservations, initial: BatchState, sigma: float = 0.5,
          max_iterations: int = 50, step_tol: float = 1e-8) -> tuple:
    """Gauss-Newton with damping fallback; returns (refined state, report).

    The first pose is held exactly at identity throughout. Raises
    RankDeficient when the system stays singular under maximal damping or a
    landmark block is structurally singular.
    """
    state = initial.copy()
    n_free = len(state.frames) - 1
    m = len(state.landmarks)
    weight = 1.0 / float(sigma) ** 2
    initial_cost = _cost(state, obs, weight)
    cost = initial_cost
    grad_norm = np.inf
    converged = False
    iterations = 0
    free = obs.frame_pos >= 1

    for iterations in range(1, max_iterations + 1):
        q, yhat, ok = _predict(state, obs)
        if not ok.all():
            raise RankDeficient("operating point places landmarks behind the camera")
        e = obs.y - yhat
        k = state.intrinsics
        z = q[:, 2]
        s = np.zeros((len(q), 3, 3))
        s[:, 0, 0] = k.fu / z
        s[:, 0, 2] = -k.fu * q[:, 0] / z**2
        s[:, 1, 1] = k.fv / z
        s[:, 1, 2] = -k.fv * q[:, 1] / z**2
        s[:, 2, 2] = -k.fu * k.baseline / z**2

        sk = np.zeros((len(q), 3, 3))
        sk[:, 0, 1] = -q[:, 2]
        sk[:, 0, 2] = q[:, 1]
        sk[:, 1, 0] = q[:, 2]
        sk[:, 1, 2] = -q[:, 0]
        sk[:, 2, 0] = -q[:, 1]
        sk[:, 2, 1] = q[:, 0]
        g_pose = np.concatenate([s, -np.einsum("oij,ojk->oik", s, sk)], axis=2)  # (o,3,6)
        rot = np.stack([p.rotation for p in state.poses])
        g_lm = np.einsum("oij,ojk->oik", s, rot[obs.frame_pos])  # (o,3,3)

        b_pose = np.zeros((n_free, 6))
        h_pose = np.zeros((n_free, 6, 6))
        fi = obs.frame_pos[free] - 1
        np.add.at(b_pose, fi, weight * np.einsum("oij,oi->oj", g_pose[free], e[free]))
        np.add.at(h_pose, fi, weight * np.einsum("oij,oik->ojk", g_pose[free], g_pose[free]))

        b_lm = np.zeros((m, 3))
        h_lm = np.zeros((m, 3, 3))
        np.add.at(b_lm, obs.lm_idx, weight * np.einsum("oij,oi->oj", g_lm, e))
        np.add.at(h_lm, obs.lm_idx, weight * np.einsum("oij,oik->ojk", g_lm, g_lm))

        w_blocks = weight * np.einsum("oij,oik->ojk", g_pose[free], g_lm[free])  # (of,6,3)
        w_fi = fi
        w_lm = obs.lm_idx[free]

        eig = np.linalg.eigvalsh(h_lm)
        if np.any(eig[:, 0] <= 1e-12 * np.maximum(eig[:, -1], 1.0)):
            raise RankDeficient("landmark normal-equation block is singular")

        grad_norm = float(np.sqrt(np.sum(b_pose**2) + np.sum(b_lm**2)))

        # observation lists per landmark for the Schur products
        order = np.argsort(w_lm, kind="stable")
        bounds = np.searchsorted(w_lm[order], np.arange(m + 1))

        accepted = False
        mu = 0.0
        while True:
            h_lm_d = h_lm.copy()
            h_pose_d = h_pose.copy()
            if mu > 0.0:
                idx3 = np.arange(3)
                h_lm_d[:, idx3, idx3] += mu * (h_lm[:, idx3, idx3] + 1e-12)
                idx6 = np.arange(6)
                h_pose_d[:, idx6, idx6] += mu * (h_pose[:, idx6, idx6] + 1e-12)
            try:
                h_lm_inv = np.linalg.inv(h_lm_d)
                if n_free > 0:
                    reduced = np.zeros((n_free, 6, n_free, 6))
                    reduced[np.arange(n_free), :, np.arange(n_free), :] = h_pose_d
                    rhs = b_pose.copy()
                    for j in range(m):
                        rows = order[bounds[j] : bounds[j + 1]]
                        if len(rows) == 0:
                            continue
                        wj = w_blocks[rows]              # (k,6,3)
                        pj = w_fi[rows]
                        mj = np.einsum("aik,kl->ail", wj, h_lm_inv[j])  # (k,6,3)
                        contrib = np.einsum("aik,bjk->aibj", mj, wj)
                        reduced[np.ix_(pj, np.arange(6), pj, np.arange(6))] -= contrib
                        rhs[pj] -= np.einsum("aik,k->ai", mj, b_lm[j])
                    eps_free = np.linalg.solve(
                        reduced.reshape(6 * n_free, 6 * n_free), rhs.reshape(-1)
                    ).reshape(n_free, 6)
                else:
                    eps_free = np.zeros((0, 6))
                zeta = np.einsum("mij,mj->mi", h_lm_inv, b_lm)
                for j in range(m):
                    rows = order[bounds[j] : bounds[j + 1]]
                    if len(rows) == 0:
                        continue
                    back = np.einsum("aik,ai->k", w_blocks[rows], eps_free[w_fi[rows]])
                    zeta[j] -= h_lm_inv[j] @ back
            except np.linalg.LinAlgError:
                if mu >= 1e8:
                    raise RankDeficient("normal equations singular beyond damping")
                mu = 1e-6 if mu == 0.0 else mu * 10.0
                continue

            trial = state.copy()
            for i in range(n_free):
                trial.poses[i + 1] = exp(eps_free[i]) @ trial.poses[i + 1]
            trial.landmarks = trial.landmarks + zeta
            new_cost = _cost(trial, obs, weight)
            if new_cost <= cost + 1e-15:
                accepted = True
                break
            if mu >= 1e8:
                break
            mu = 1e-6 if mu == 0.0 else mu * 10.0

        if not accepted:
            converged = False
            break
        state, cost = trial, new_cost
        step = float(np.sqrt(np.sum(eps_free**2) + np.sum(zeta**2)))
        if step < step_tol:
            converged = True
            break

    report = GaussNewtonReport(
        iterations=iterations,
        initial_cost=float(initial_cost),
        final_cost=float(cost),
        converged=converged,
        gradient_norm=grad_norm,
    )
    return state, report


def refined_label(label: Label, state: BatchState) -> Label:
    """Label with poses replaced by the refined chain; pruned frames become gaps."""
    poses: list = [None] * len(label.poses)
    for f, p in zip(state.frames, state.poses):
        poses[f] = p
    return replace(label, poses=tuple(poses), support=frozenset(state.tracklet_ids))
