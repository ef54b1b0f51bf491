"""Window scheduling, batch refinement, and dump assembly for the CLI.

One window's processing is: multimotion fitting (propose/assign/merge/
sanitize), per-label batch refinement, static-label selection, and
center-of-motion computation. The dump records everything evaluation
needs, so reports are pure functions of the dump files.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .batch import RankDeficient, initialize_from_label, refined_label, solve
from .labeling import (
    OUTLIER,
    EnergyParams,
    Labeling,
    NoModelsFound,
    _with_supports,
    run_window,
)
from .stereo import StereoIntrinsics
from .tracklets import Tracklet, slice_window, stack_window
from .trajectories import (
    MotionTrajectory,
    camera_trajectory,
    center_of_motion,
    egocentric,
    geocentric,
    select_static_label,
    write_trajectories_csv,
)
from .evaluation import WindowSchedule


def window_seed(base_seed: int, start: int) -> int:
    """Stable per-window seed, independent of scheduling order."""
    return int(np.random.SeedSequence([int(base_seed), int(start)]).generate_state(1)[0])


def _dropout_dump(start: int, frames: int) -> dict:
    return {"window_start": start, "frames": frames, "status": "no_models"}


def process_window(window_tracklets: Sequence[Tracklet], intrinsics: StereoIntrinsics,
                   params: EnergyParams, seed: int, start: int, frames: int,
                   sigma: float = 0.5, refine: bool = True,
                   trace: list | None = None) -> tuple:
    """Run one window end to end; returns (dump dict, trajectory list)."""
    if not window_tracklets:
        return _dropout_dump(start, frames), []
    arrs = stack_window(window_tracklets, frames, intrinsics)
    try:
        labeling = run_window(window_tracklets, intrinsics, params, seed, trace=trace, arrs=arrs)
    except NoModelsFound:
        return _dropout_dump(start, frames), []

    assignment = dict(labeling.assignment)
    final_labels = []
    reports = {}
    for label in labeling.labels:
        if not refine:
            final_labels.append(label)
            continue
        state, obs, pruned = initialize_from_label(label, arrs)
        for tid in pruned:
            assignment[tid] = OUTLIER
        if len(state.tracklet_ids) < 3:
            for tid in state.tracklet_ids:
                assignment[tid] = OUTLIER
            continue
        try:
            state, report = solve(obs, state, sigma=sigma)
        except RankDeficient:
            for tid in label.support:
                assignment[tid] = OUTLIER
            continue
        final_labels.append(refined_label(label, state))
        reports[label.id] = report
    if not final_labels:
        return _dropout_dump(start, frames), []
    labeling = _with_supports(final_labels, assignment)

    static_id = select_static_label(labeling, arrs)
    camera = camera_trajectory(labeling, static_id)
    centers = {l.id: center_of_motion(l, arrs) for l in labeling.labels}

    trajectories: list[MotionTrajectory] = [camera]
    for label in labeling.labels:
        trajectories.append(egocentric(label))
        if label.id != static_id:
            trajectories.append(geocentric(label, camera, centers[label.id]))

    dump = {
        "window_start": start,
        "frames": frames,
        "status": "ok",
        "static_label": static_id,
        "labels": [
            {
                "id": l.id,
                "first_frame": l.first_frame,
                "last_frame": l.covered[-1],
                "poses": [None if p is None else p.flat12() for p in l.poses],
                "support": sorted(int(t) for t in l.support),
                "center": [float(x) for x in centers[l.id]],
                "solver": reports[l.id].to_dict() if l.id in reports else None,
            }
            for l in labeling.labels
        ],
        "assignment": {str(t): int(v) for t, v in sorted(labeling.assignment.items())},
    }
    return dump, trajectories


def run_pipeline(tracklets: Sequence[Tracklet], intrinsics: StereoIntrinsics,
                 params: EnergyParams, schedule: WindowSchedule, sequence_frames: int,
                 base_seed: int, threads: int = 1, sigma: float = 0.5,
                 baseline: bool = False) -> list:
    """Process every window of the schedule; results ordered by window start.

    Windows are independent given their derived seeds, so results are
    identical for any thread count.
    """
    starts = schedule.starts(sequence_frames)

    def _one(start: int) -> tuple:
        window = slice_window(tracklets, start, schedule.window, intrinsics)
        seed = window_seed(base_seed, start)
        if baseline:
            from .labeling import labeling_to_dict, sequential_ransac_baseline

            if not window:
                return start, _dropout_dump(start, schedule.window), []
            labeling = sequential_ransac_baseline(window, intrinsics, params, seed)
            dump = {
                "window_start": start,
                "frames": schedule.window,
                "status": "ok" if labeling.labels else "no_models",
            }
            dump.update(labeling_to_dict(labeling, schedule.window))
            return start, dump, []
        dump, trajs = process_window(
            window, intrinsics, params, seed, start, schedule.window, sigma=sigma
        )
        return start, dump, trajs

    if threads <= 1:
        results = [_one(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one, starts))
    return sorted(results, key=lambda r: r[0])


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def write_window_outputs(outdir, results, with_trajectories: bool = True,
                         subdir: str = "windows") -> None:
    base = outdir / subdir
    base.mkdir(parents=True, exist_ok=True)
    for start, dump, trajs in results:
        write_json(base / f"window_{start:04d}.json", dump)
        if with_trajectories and trajs:
            write_trajectories_csv(base / f"trajectories_{start:04d}.csv", trajs)


def load_window_dumps(outdir, subdir: str = "windows") -> list:
    base = outdir / subdir
    dumps = []
    for path in sorted(base.glob("window_*.json")):
        with open(path) as fh:
            dumps.append(json.load(fh))
    return dumps
