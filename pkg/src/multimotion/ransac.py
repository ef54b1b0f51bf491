"""Frame-to-frame RANSAC estimation of a camera-egomotion hypothesis.

For every consecutive frame pair, triples of tracklets observed in both
frames are sampled, the rigid transform between their back-projected
point triples is solved in closed form, and the hypothesis whose (u, v)
reprojection residuals put the most tracklets under the inlier threshold
is kept. The per-pair winners are chained into a trajectory anchored at
identity on its first covered frame; a pair with no valid model ends the
chain and later frames stay uncovered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .se3 import Pose
from .tracklets import TrackletArrays

_Z_EPS = 1e-6
_MIN_POINT_SPACING = 1e-3   # meters; tighter triples are degenerate
_MIN_ALTITUDE = 1e-3        # meters; flatter triangles are degenerate


class InsufficientTracklets(ValueError):
    """Fewer than 3 tracklets co-visible in every frame pair; nothing to estimate."""


def rigid_align(src: np.ndarray, dst: np.ndarray) -> Pose:
    """Least-squares rigid transform with dst ~= R @ src + t (Kabsch/Horn)."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    u, _, vt = np.linalg.svd(h)
    sign = np.sign(np.linalg.det(vt.T @ u.T))
    d = np.diag([1.0, 1.0, sign if sign != 0 else 1.0])
    r = vt.T @ d @ u.T
    return Pose(r, cd - r @ cs)


def _rigid_align_batch(src: np.ndarray, dst: np.ndarray) -> tuple:
    """Batched Kabsch over (m, 3, 3) point triples -> R (m, 3, 3), t (m, 3)."""
    cs = src.mean(axis=1)
    cd = dst.mean(axis=1)
    a = src - cs[:, None, :]
    b = dst - cd[:, None, :]
    h = np.einsum("mpi,mpj->mij", a, b)
    u, _, vt = np.linalg.svd(h)
    det = np.linalg.det(np.einsum("mij->mji", vt) @ np.einsum("mij->mji", u))
    vt = vt.copy()
    vt[det < 0, -1, :] *= -1.0
    r = np.einsum("mji,mkj->mik", vt, u)  # V @ U^T
    t = cd - np.einsum("mij,mj->mi", r, cs)
    return r, t


def _degenerate(triples: np.ndarray) -> np.ndarray:
    """(m, 3, 3) source triples -> (m,) mask of unusable samples."""
    d01 = np.linalg.norm(triples[:, 0] - triples[:, 1], axis=1)
    d02 = np.linalg.norm(triples[:, 0] - triples[:, 2], axis=1)
    d12 = np.linalg.norm(triples[:, 1] - triples[:, 2], axis=1)
    sides = np.stack([d01, d02, d12], axis=1)
    too_close = sides.min(axis=1) < _MIN_POINT_SPACING
    area = 0.5 * np.linalg.norm(
        np.cross(triples[:, 1] - triples[:, 0], triples[:, 2] - triples[:, 0]), axis=1
    )
    longest = sides.max(axis=1)
    altitude = np.where(longest > 0, 2.0 * area / np.where(longest > 0, longest, 1.0), 0.0)
    return too_close | (altitude < _MIN_ALTITUDE)


@dataclass(frozen=True)
class EstimatedTrajectory:
    poses: tuple            # per-frame Pose | None, identity at first covered frame
    pair_counts: tuple      # inlier count per frame pair (-1 where no model)

    @property
    def covered(self) -> tuple:
        return tuple(k for k, p in enumerate(self.poses) if p is not None)


class TrajectoryEstimator:
    """Windowed estimator with a per-support cache and counter-based seeding.

    Random draws are keyed by (window seed, frame pair, member id set), so
    the result for a given support set is a pure function of the data and
    the seed, independent of call order or thread scheduling.
    """

    def __init__(self, arrs: TrackletArrays, e_th: float, iterations: int, seed: int):
        self.arrs = arrs
        self.e_th = float(e_th)
        self.iterations = int(iterations)
        self.seed = int(seed)
        self._cache: dict = {}

    def estimate(self, members: Iterable[int]) -> EstimatedTrajectory | None:
        """Best-effort trajectory over the window for the given tracklet ids.

        Returns None when no frame pair has 3 usable co-visible tracklets.
        """
        key = frozenset(int(m) for m in members)
        if key in self._cache:
            return self._cache[key]
        result = self._estimate(key)
        self._cache[key] = result
        return result

    def _pair_transform(self, rows: np.ndarray, k: int) -> tuple:
        """Winning (R, t, inliers) for frame pair (k-1, k), or None."""
        arrs = self.arrs
        covis = rows[arrs.mask[rows, k - 1] & arrs.mask[rows, k]]
        if len(covis) < 3:
            return None
        src_all = arrs.points[covis, k - 1]
        dst_all = arrs.points[covis, k]
        m = len(covis)
        if m == 3:
            picks = np.array([[0, 1, 2]])
        else:
            ids = [self.seed, k, len(covis)] + [int(arrs.ids[r]) for r in covis]
            rng = np.random.default_rng(np.random.SeedSequence(ids))
            picks = rng.integers(0, m, size=(self.iterations, 3))
        src = src_all[picks]
        dst = dst_all[picks]
        bad = _degenerate(src)
        if bad.all():
            return None
        r, t = _rigid_align_batch(src, dst)
        moved = np.einsum("mij,nj->mni", r, src_all) + t[:, None, :]
        z = moved[:, :, 2]
        ok = z > _Z_EPS
        zs = np.where(ok, z, 1.0)
        kin = arrs.intrinsics
        du = kin.fu * moved[:, :, 0] / zs + kin.cu - arrs.uv[covis, k, 0][None, :]
        dv = kin.fv * moved[:, :, 1] / zs + kin.cv - arrs.uv[covis, k, 1][None, :]
        res = np.hypot(du, dv)
        inliers = ok & (res < self.e_th)
        counts = inliers.sum(axis=1)
        counts[bad] = -1
        best = int(np.argmax(counts))
        if counts[best] < 0:
            return None
        return r[best], t[best], int(counts[best])

    def _estimate(self, members: frozenset) -> EstimatedTrajectory | None:
        arrs = self.arrs
        frames = arrs.frames
        rows = arrs.rows(members)
        if len(rows) == 0:
            return None
        rel: list = [None] * frames  # rel[k] maps frame k-1 points to frame k
        counts = [-1] * frames
        for k in range(1, frames):
            found = self._pair_transform(rows, k)
            if found is not None:
                rel[k] = Pose(found[0], found[1])
                counts[k] = found[2]
        poses: list = [None] * frames
        started = False
        for k in range(1, frames):
            if rel[k] is None:
                if started:
                    break
                continue
            if not started:
                poses[k - 1] = Pose.identity()
                started = True
            poses[k] = rel[k] @ poses[k - 1]
        if not started:
            return None
        return EstimatedTrajectory(poses=tuple(poses), pair_counts=tuple(counts[1:]))
