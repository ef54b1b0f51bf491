"""Tracklet storage and the JSON-lines interchange format.

A tracklet is one feature point's stereo observations over a batch of
frames, possibly with gaps. On disk each tracklet is one JSON object per
line: {"id": int, "first_frame": int, "obs": [[u, v, d] | null, ...]}.
The 3D back-projections are always derived from the observations, so they
are recomputed from the stored intrinsics on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .stereo import StereoIntrinsics, StereoObservation, backproject_many


@dataclass(frozen=True, eq=False)
class Tracklet:
    id: int
    first_frame: int
    obs: np.ndarray     # (n, 3) float; NaN rows where unobserved
    points: np.ndarray  # (n, 3) back-projections; NaN rows where unobserved

    def __post_init__(self) -> None:
        self.obs.setflags(write=False)
        self.points.setflags(write=False)

    @staticmethod
    def build(tid: int, first_frame: int, obs_rows: Sequence, intrinsics: StereoIntrinsics) -> "Tracklet":
        """From a per-frame list of [u, v, d] or None, trimming gap padding at the ends."""
        rows = [None if r is None else [float(x) for x in r] for r in obs_rows]
        observed = [i for i, r in enumerate(rows) if r is not None]
        if not observed:
            raise ValueError(f"tracklet {tid} has no observed frame")
        lo, hi = observed[0], observed[-1]
        rows = rows[lo : hi + 1]
        obs = np.array([r if r is not None else [np.nan] * 3 for r in rows], dtype=float)
        pts, ok = backproject_many(intrinsics, obs)
        pts[~ok] = np.nan
        return Tracklet(tid, first_frame + lo, obs, pts)

    @property
    def last_frame(self) -> int:
        return self.first_frame + len(self.obs) - 1

    @cached_property
    def observed_frames(self) -> np.ndarray:
        local = np.nonzero(~np.isnan(self.obs[:, 0]))[0]
        return local + self.first_frame

    def has_frame(self, k: int) -> bool:
        i = k - self.first_frame
        return 0 <= i < len(self.obs) and not np.isnan(self.obs[i, 0])

    def observation(self, k: int) -> StereoObservation | None:
        if not self.has_frame(k):
            return None
        u, v, d = self.obs[k - self.first_frame]
        return StereoObservation(u, v, d)

    def point(self, k: int) -> np.ndarray | None:
        if not self.has_frame(k):
            return None
        return self.points[k - self.first_frame]


@dataclass(frozen=True, eq=False)
class TrackletArrays:
    """Window-padded views over a tracklet set, shared by the heavy loops."""

    intrinsics: StereoIntrinsics
    ids: np.ndarray     # (n,) int
    uv: np.ndarray      # (n, K, 2); NaN when unobserved
    obs: np.ndarray     # (n, K, 3)
    points: np.ndarray  # (n, K, 3)
    mask: np.ndarray    # (n, K) bool

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def frames(self) -> int:
        return self.mask.shape[1]

    @cached_property
    def index(self) -> dict:
        return {int(t): i for i, t in enumerate(self.ids)}

    def rows(self, tracklet_ids: Iterable[int]) -> np.ndarray:
        return np.array(sorted(self.index[t] for t in tracklet_ids), dtype=int)


def stack_window(tracklets: Sequence[Tracklet], frames: int, intrinsics: StereoIntrinsics) -> TrackletArrays:
    n = len(tracklets)
    obs = np.full((n, frames, 3), np.nan)
    pts = np.full((n, frames, 3), np.nan)
    for i, t in enumerate(tracklets):
        lo = t.first_frame
        hi = min(t.last_frame + 1, frames)
        if lo >= frames or hi <= lo:
            continue
        obs[i, lo:hi] = t.obs[: hi - lo]
        pts[i, lo:hi] = t.points[: hi - lo]
    mask = ~np.isnan(obs[:, :, 0])
    ids = np.array([t.id for t in tracklets], dtype=int)
    return TrackletArrays(intrinsics, ids, obs[:, :, :2], obs, pts, mask)


def slice_window(tracklets: Sequence[Tracklet], start: int, frames: int, intrinsics: StereoIntrinsics) -> list:
    """Clip tracklets to [start, start + frames), re-anchored at frame 0."""
    out = []
    for t in tracklets:
        lo = max(t.first_frame, start)
        hi = min(t.last_frame + 1, start + frames)
        if hi <= lo:
            continue
        rows = []
        for k in range(lo, hi):
            o = t.observation(k)
            rows.append(None if o is None else [o.u, o.v, o.d])
        if all(r is None for r in rows):
            continue
        out.append(Tracklet.build(t.id, lo - start, rows, intrinsics))
    return out


def sequence_length(tracklets: Sequence[Tracklet]) -> int:
    return max((t.last_frame + 1 for t in tracklets), default=0)


def write_jsonl(tracklets: Sequence[Tracklet], path) -> None:
    with open(path, "w") as fh:
        for t in tracklets:
            rows = [
                None if np.isnan(row[0]) else [float(row[0]), float(row[1]), float(row[2])]
                for row in t.obs
            ]
            fh.write(
                json.dumps(
                    {"id": int(t.id), "first_frame": int(t.first_frame), "obs": rows},
                    separators=(",", ":"),
                )
            )
            fh.write("\n")


def read_jsonl(path, intrinsics: StereoIntrinsics) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(Tracklet.build(int(rec["id"]), int(rec["first_frame"]), rec["obs"], intrinsics))
    return out
