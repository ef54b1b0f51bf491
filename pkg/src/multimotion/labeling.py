"""Iterative multimotion fitting: propose, assign, merge, sanitize.

Each label is a camera-egomotion hypothesis (the camera trajectory that
would explain a tracklet group if that group were static) plus its support
set. The engine alternates RANSAC label proposal over connected components
of each label's support, energy-minimizing assignment over the tracklet
graph, and energy-decreasing label merging, until the assignment is stable;
a final sanitization pass removes undersized labels and outlier tracklets.

The assignment energy is

    sum_p residual(p, label(p))
    + smoothness_weight * (edges whose endpoints disagree)
    + label_cost * (labels with non-empty support)

with the outlier label's residual decaying exponentially in the best real
label's residual and its label cost fixed at zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .graph import NeighborhoodGraph, build_graph, connected_components
from .ransac import TrajectoryEstimator
from .se3 import Pose
from .stereo import StereoIntrinsics
from .tracklets import Tracklet, TrackletArrays, sequence_length, stack_window

OUTLIER = -1

_Z_EPS = 1e-6

# Assignment instances at or below this many label combinations are solved
# by exhaustive enumeration instead of local search.
EXHAUSTIVE_LIMIT = 300_000


class FrameNotCovered(ValueError):
    """Tracklet or label does not cover both frames of the requested pair."""


class NoOverlap(ValueError):
    """Tracklet and label share no consecutive frame pair; residual is unbounded."""


class NoModelsFound(RuntimeError):
    """Sanitization left zero labels; the window is an estimation dropout."""


@dataclass(frozen=True)
class EnergyParams:
    smoothness_weight: float = 1.0      # weight of label-disagreement edges
    label_cost: float = 1000.0          # cost of each label with support
    outlier_scale: float = 100.0        # outlier residual at a perfectly-fit point
    outlier_decay: float = 2.0          # e-folding of the outlier residual, pixels
    inlier_threshold: float = 4.0       # pixels, RANSAC inliers and sanitization
    k_nn: int = 5
    ransac_iterations: int = 1000
    min_support_points: int = 10
    min_support_frames: int = 3
    max_outer_iterations: int = 10

    def __post_init__(self) -> None:
        problems = []
        for name in (
            "smoothness_weight",
            "label_cost",
            "outlier_scale",
            "outlier_decay",
            "inlier_threshold",
        ):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0")
        for name in (
            "k_nn",
            "ransac_iterations",
            "min_support_points",
            "min_support_frames",
            "max_outer_iterations",
        ):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "smoothness_weight": self.smoothness_weight,
            "label_cost": self.label_cost,
            "outlier_scale": self.outlier_scale,
            "outlier_decay": self.outlier_decay,
            "inlier_threshold": self.inlier_threshold,
            "k_nn": self.k_nn,
            "ransac_iterations": self.ransac_iterations,
            "min_support_points": self.min_support_points,
            "min_support_frames": self.min_support_frames,
            "max_outer_iterations": self.max_outer_iterations,
        }

    @staticmethod
    def from_dict(d: dict) -> "EnergyParams":
        return EnergyParams(**{k: d[k] for k in EnergyParams().to_dict() if k in d})


@dataclass(frozen=True, eq=False)
class Label:
    id: int
    poses: tuple            # len = window frames; Pose | None outside the span
    support: frozenset

    @cached_property
    def covered(self) -> tuple:
        return tuple(k for k, p in enumerate(self.poses) if p is not None)

    @property
    def first_frame(self) -> int:
        return self.covered[0]

    @property
    def span(self) -> int:
        return len(self.covered)

    @cached_property
    def pair_arrays(self) -> tuple:
        """Relative transforms per frame pair: (R (K-1,3,3), t (K-1,3), ok (K-1,))."""
        frames = len(self.poses)
        rot = np.zeros((frames - 1, 3, 3))
        trans = np.zeros((frames - 1, 3))
        ok = np.zeros(frames - 1, dtype=bool)
        for k in range(1, frames):
            a, b = self.poses[k - 1], self.poses[k]
            if a is None or b is None:
                continue
            rel = b @ a.inverse()
            rot[k - 1] = rel.rotation
            trans[k - 1] = rel.translation
            ok[k - 1] = True
        return rot, trans, ok

    def relative_transform(self, k: int) -> Pose:
        """Hypothesis transform taking frame k-1 points to frame k."""
        if not (0 < k < len(self.poses)):
            raise FrameNotCovered(f"frame pair ({k - 1}, {k}) outside window")
        a, b = self.poses[k - 1], self.poses[k]
        if a is None or b is None:
            raise FrameNotCovered(f"label {self.id} does not cover frames {k - 1} and {k}")
        return b @ a.inverse()


@dataclass(frozen=True)
class OutlierLabel:
    support: frozenset


@dataclass(frozen=True, eq=False)
class Labeling:
    labels: tuple           # Label, ascending id
    assignment: dict        # tracklet id -> label id or OUTLIER

    @cached_property
    def by_id(self) -> dict:
        return {l.id: l for l in self.labels}

    @property
    def outlier(self) -> OutlierLabel:
        return OutlierLabel(frozenset(t for t, l in self.assignment.items() if l == OUTLIER))

    def support_of(self, label_id: int) -> frozenset:
        return frozenset(t for t, l in self.assignment.items() if l == label_id)


def _with_supports(labels: Sequence[Label], assignment: dict) -> Labeling:
    """Labeling with each label's support rebuilt as the preimage of its id."""
    supports: dict = {l.id: set() for l in labels}
    for tid, lid in assignment.items():
        if lid != OUTLIER:
            supports[lid].add(tid)
    rebuilt = tuple(
        replace(l, support=frozenset(supports[l.id]))
        for l in sorted(labels, key=lambda l: l.id)
    )
    return Labeling(labels=rebuilt, assignment=dict(assignment))


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def frame_residual(p: Tracklet, label: Label, k: int, intrinsics: StereoIntrinsics) -> float:
    """Pixel distance between p at frame k and its hypothesis-transported k-1 point."""
    if not (p.has_frame(k - 1) and p.has_frame(k)):
        raise FrameNotCovered(f"tracklet {p.id} not observed at both {k - 1} and {k}")
    rel = label.relative_transform(k)
    moved = rel.apply(p.point(k - 1))
    if moved[2] <= _Z_EPS:
        return math.inf
    u = intrinsics.fu * moved[0] / moved[2] + intrinsics.cu
    v = intrinsics.fv * moved[1] / moved[2] + intrinsics.cv
    obs = p.observation(k)
    return float(np.hypot(u - obs.u, v - obs.v))


def label_residual(p: Tracklet, label: Label, intrinsics: StereoIntrinsics) -> float:
    """Max frame residual over all frame pairs covered by both p and the label."""
    best = None
    for k in range(1, len(label.poses)):
        try:
            r = frame_residual(p, label, k, intrinsics)
        except FrameNotCovered:
            continue
        best = r if best is None else max(best, r)
    if best is None:
        raise NoOverlap(f"tracklet {p.id} and label {label.id} share no frame pair")
    return best


def outlier_residual(p: Tracklet, labels: Sequence[Label], alpha: float, beta: float, intrinsics: StereoIntrinsics) -> float:
    """alpha * exp(-min_label residual / beta); 0 when no label overlaps p."""
    best = math.inf
    for label in labels:
        try:
            best = min(best, label_residual(p, label, intrinsics))
        except NoOverlap:
            continue
    return float(alpha * math.exp(-best / beta))


def residual_vector(arrs: TrackletArrays, label: Label) -> np.ndarray:
    """Max-over-pairs residual of every tracklet against one label; inf = no overlap."""
    rot, trans, pair_ok = label.pair_arrays
    both = arrs.mask[:, :-1] & arrs.mask[:, 1:]
    valid = both & pair_ok[None, :]
    if not valid.any():
        return np.full(arrs.n, np.inf)
    pts = np.where(np.isnan(arrs.points[:, :-1, :]), 0.0, arrs.points[:, :-1, :])
    moved = np.einsum("kij,nkj->nki", rot, pts) + trans[None, :, :]
    z = moved[:, :, 2]
    zok = z > _Z_EPS
    zs = np.where(zok, z, 1.0)
    kin = arrs.intrinsics
    du = kin.fu * moved[:, :, 0] / zs + kin.cu - arrs.uv[:, 1:, 0]
    dv = kin.fv * moved[:, :, 1] / zs + kin.cv - arrs.uv[:, 1:, 1]
    px = np.hypot(du, dv)
    res = np.where(valid & zok, px, np.where(valid, np.inf, -np.inf))
    rho = res.max(axis=1)
    rho[~valid.any(axis=1)] = np.inf
    return rho


def _rho_matrix(arrs: TrackletArrays, labels: Sequence[Label]) -> np.ndarray:
    if not labels:
        return np.zeros((arrs.n, 0))
    return np.stack([residual_vector(arrs, l) for l in labels], axis=1)


def _outlier_cost(rho: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    if rho.shape[1] == 0:
        return np.zeros(rho.shape[0])
    best = rho.min(axis=1)
    with np.errstate(over="ignore"):
        return alpha * np.exp(-best / beta)


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


def _energy_of_columns(cols: np.ndarray, rho: np.ndarray, out_cost: np.ndarray,
                       e0: np.ndarray, e1: np.ndarray, params: EnergyParams) -> float:
    n = len(cols)
    safe = np.where(cols < 0, 0, cols)
    if rho.shape[1]:
        resid = np.where(cols < 0, out_cost, rho[np.arange(n), safe])
    else:
        resid = out_cost
    smooth = params.smoothness_weight * float(np.count_nonzero(cols[e0] != cols[e1]))
    used = len(np.unique(cols[cols >= 0]))
    return float(resid.sum()) + smooth + params.label_cost * used


def total_energy(labeling: Labeling, arrs: TrackletArrays, graph: NeighborhoodGraph,
                 params: EnergyParams) -> float:
    """Exact residual + smoothness + complexity energy of a labeling."""
    labels = labeling.labels
    rho = _rho_matrix(arrs, labels)
    out_cost = _outlier_cost(rho, params.outlier_scale, params.outlier_decay)
    col_of = {l.id: i for i, l in enumerate(labels)}
    cols = np.array(
        [col_of.get(labeling.assignment[int(t)], OUTLIER) for t in arrs.ids], dtype=int
    )
    e0, e1 = graph.edge_index_arrays(arrs.index)
    return _energy_of_columns(cols, rho, out_cost, e0, e1, params)


# ---------------------------------------------------------------------------
# Assignment
# ---------------------------------------------------------------------------


def _adjacency_rows(graph: NeighborhoodGraph, arrs: TrackletArrays) -> list:
    adj = [np.zeros(0, dtype=int)] * arrs.n
    for tid, i in arrs.index.items():
        nbs = graph.neighbors(tid)
        if nbs:
            adj[i] = np.array([arrs.index[q] for q in nbs], dtype=int)
    return adj


def _icm(cols: np.ndarray, rho: np.ndarray, out_cost: np.ndarray, adj: list,
         params: EnergyParams, max_sweeps: int = 200) -> np.ndarray:
    """Single-tracklet coordinate descent to a local minimum of the energy."""
    n, n_labels = rho.shape
    cols = cols.copy()
    counts = np.zeros(n_labels, dtype=int)
    for c in cols:
        if c >= 0:
            counts[c] += 1
    cand_codes = np.append(np.arange(n_labels), OUTLIER)
    lam, gamma = params.smoothness_weight, params.label_cost
    for _ in range(max_sweeps):
        changed = False
        for i in range(n):
            cur = cols[i]
            cur_idx = cur if cur >= 0 else n_labels
            local = np.append(rho[i], out_cost[i])
            nbs = adj[i]
            if len(nbs):
                disagree = (cols[nbs][None, :] != cand_codes[:, None]).sum(axis=1)
                local = local + lam * disagree
            delta = local - local[cur_idx]
            # complexity change of entering/leaving a label
            if cur >= 0 and counts[cur] == 1:
                delta[:n_labels] -= gamma
                delta[n_labels] -= gamma
                delta[cur] += gamma
            entering = (counts == 0) & (cand_codes[:n_labels] != cur)
            delta[:n_labels] += gamma * entering
            best = int(np.argmin(delta))
            if delta[best] < -1e-12 and best != cur_idx:
                new = int(cand_codes[best])
                if cur >= 0:
                    counts[cur] -= 1
                if new >= 0:
                    counts[new] += 1
                cols[i] = new
                changed = True
        if not changed:
            break
    return cols


def _exhaustive(rho: np.ndarray, out_cost: np.ndarray, e0: np.ndarray, e1: np.ndarray,
                params: EnergyParams) -> np.ndarray:
    n, n_labels = rho.shape
    full = np.concatenate([rho, out_cost[:, None]], axis=1)  # column n_labels = outlier
    combos = np.array(list(itertools.product(range(n_labels + 1), repeat=n)), dtype=int)
    resid = full[np.arange(n)[None, :], combos].sum(axis=1)
    smooth = params.smoothness_weight * (combos[:, e0] != combos[:, e1]).sum(axis=1)
    complexity = np.zeros(len(combos))
    for c in range(n_labels):
        complexity += params.label_cost * (combos == c).any(axis=1)
    best = int(np.argmin(resid + smooth + complexity))
    cols = combos[best].copy()
    cols[cols == n_labels] = OUTLIER
    return cols


def assign_labels(labeling: Labeling, proposals: Sequence[Label], graph: NeighborhoodGraph,
                  params: EnergyParams, arrs: TrackletArrays, trace: list | None = None) -> Labeling:
    """Minimize the assignment energy over current labels, proposals, and outlier.

    The returned assignment never has higher energy than the incoming one
    (measured against the same candidate set); candidates that end up with
    empty support are dropped. Instances small enough to enumerate are
    solved exactly; larger ones run coordinate descent from both the
    incoming assignment and a residual-greedy start, keeping the better.
    """
    candidates = sorted(list(labeling.labels) + list(proposals), key=lambda l: l.id)
    rho = _rho_matrix(arrs, candidates)
    out_cost = _outlier_cost(rho, params.outlier_scale, params.outlier_decay)
    e0, e1 = graph.edge_index_arrays(arrs.index)
    col_of = {l.id: i for i, l in enumerate(candidates)}
    incoming = np.array(
        [col_of.get(labeling.assignment.get(int(t), OUTLIER), OUTLIER) for t in arrs.ids],
        dtype=int,
    )
    energy_in = _energy_of_columns(incoming, rho, out_cost, e0, e1, params)

    n, n_labels = rho.shape
    if (n_labels + 1) ** n <= EXHAUSTIVE_LIMIT:
        cols = _exhaustive(rho, out_cost, e0, e1, params)
    else:
        adj = _adjacency_rows(graph, arrs)
        local = _icm(incoming, rho, out_cost, adj, params)
        greedy = np.concatenate([rho, out_cost[:, None]], axis=1).argmin(axis=1)
        greedy[greedy == n_labels] = OUTLIER
        alt = _icm(greedy.astype(int), rho, out_cost, adj, params)
        e_local = _energy_of_columns(local, rho, out_cost, e0, e1, params)
        e_alt = _energy_of_columns(alt, rho, out_cost, e0, e1, params)
        cols = local if e_local <= e_alt else alt
    energy_out = _energy_of_columns(cols, rho, out_cost, e0, e1, params)
    if trace is not None:
        trace.append({"stage": "assign", "before": energy_in, "after": energy_out})

    assignment = {
        int(t): (candidates[c].id if c >= 0 else OUTLIER) for t, c in zip(arrs.ids, cols)
    }
    used = {lid for lid in assignment.values() if lid != OUTLIER}
    kept = [l for l in candidates if l.id in used]
    return _with_supports(kept, assignment)


# ---------------------------------------------------------------------------
# Proposal
# ---------------------------------------------------------------------------


def propose_labels(labeling: Labeling, graph: NeighborhoodGraph, arrs: TrackletArrays,
                   params: EnergyParams, estimator: TrajectoryEstimator,
                   next_id: int) -> list:
    """New candidate labels from each connected component of each label's support.

    Real labels are processed in id order and the outlier label last. A
    component's proposal carries the RANSAC trajectory estimated from it;
    its tentative support is the component tracklets within the inlier
    threshold (everything else is left for the outlier label).
    """
    proposals = []
    nid = next_id
    groups = [l.support for l in labeling.labels]
    groups.append(frozenset(t for t, l in labeling.assignment.items() if l == OUTLIER))
    for group in groups:
        if not group:
            continue
        for comp in connected_components(graph, group):
            traj = estimator.estimate(comp)
            if traj is None:
                continue
            label = Label(id=nid, poses=traj.poses, support=frozenset())
            rho = residual_vector(arrs, label)
            rows = arrs.rows(comp)
            inliers = frozenset(
                int(arrs.ids[r]) for r in rows if rho[r] <= params.inlier_threshold
            )
            proposals.append(replace(label, support=inliers))
            nid += 1
    return proposals


# ---------------------------------------------------------------------------
# Merging and sanitization
# ---------------------------------------------------------------------------


def _adjacent_pairs(labeling: Labeling, graph: NeighborhoodGraph) -> set:
    owner = labeling.assignment
    pairs = set()
    for p, q, _ in graph.edges:
        lp, lq = owner.get(p, OUTLIER), owner.get(q, OUTLIER)
        if lp != lq and lp != OUTLIER and lq != OUTLIER:
            pairs.add((min(lp, lq), max(lp, lq)))
    return pairs


def merge_labels(labeling: Labeling, graph: NeighborhoodGraph, params: EnergyParams,
                 arrs: TrackletArrays, estimator: TrajectoryEstimator,
                 require_adjacency: bool = True, trace: list | None = None) -> Labeling:
    """Greedy best-first merging while some merge strictly decreases the energy.

    Each candidate merge re-estimates the surviving label's trajectory on the
    union support. Only pairs with graph-adjacent supports are considered
    unless ``require_adjacency`` is False (the sanitization pass); the
    outlier label never merges.
    """
    current = labeling
    while len(current.labels) >= 2:
        energy_before = total_energy(current, arrs, graph, params)
        adjacent = None if not require_adjacency else _adjacent_pairs(current, graph)
        best_delta = -1e-9
        best: Labeling | None = None
        labels = current.labels
        for i, keep in enumerate(labels):
            for other in labels[i + 1:]:
                if require_adjacency and (keep.id, other.id) not in adjacent:
                    continue
                union = keep.support | other.support
                traj = estimator.estimate(union)
                if traj is None:
                    continue
                merged = Label(id=keep.id, poses=traj.poses, support=union)
                new_labels = [merged] + [
                    l for l in labels if l.id not in (keep.id, other.id)
                ]
                new_assignment = {
                    t: (keep.id if l == other.id else l)
                    for t, l in current.assignment.items()
                }
                candidate = _with_supports(new_labels, new_assignment)
                delta = total_energy(candidate, arrs, graph, params) - energy_before
                if delta < best_delta:
                    best_delta = delta
                    best = candidate
        if best is None:
            break
        if trace is not None:
            trace.append(
                {"stage": "merge", "before": energy_before, "after": energy_before + best_delta}
            )
        current = best
    return current


def sanitize(labeling: Labeling, graph: NeighborhoodGraph, params: EnergyParams,
             arrs: TrackletArrays, estimator: TrajectoryEstimator,
             trace: list | None = None) -> Labeling:
    """Final cleanup: unrestricted merges, then size/length and residual filters.

    Labels with fewer than ``min_support_points`` tracklets or covering
    fewer than ``min_support_frames`` frames dissolve into the outlier
    label, and any tracklet whose residual under its own label exceeds the
    inlier threshold is relabeled as an outlier.
    """
    current = merge_labels(
        labeling, graph, params, arrs, estimator, require_adjacency=False, trace=trace
    )
    assignment = dict(current.assignment)
    kept = []
    for label in current.labels:
        if len(label.support) < params.min_support_points or label.span < params.min_support_frames:
            for t in label.support:
                assignment[t] = OUTLIER
        else:
            kept.append(label)
    survivors = []
    for label in kept:
        rho = residual_vector(arrs, label)
        support = set()
        for t in label.support:
            if rho[arrs.index[t]] > params.inlier_threshold:
                assignment[t] = OUTLIER
            else:
                support.add(t)
        if support:
            survivors.append(replace(label, support=frozenset(support)))
        # a label emptied by the residual filter simply disappears
    return _with_supports(survivors, assignment)


# ---------------------------------------------------------------------------
# Window driver and baseline
# ---------------------------------------------------------------------------


def run_window(tracklets: Sequence[Tracklet], intrinsics: StereoIntrinsics,
               params: EnergyParams, seed: int, trace: list | None = None,
               arrs: TrackletArrays | None = None) -> Labeling:
    """Full multimotion fitting over one window of tracklets.

    Starts with everything on the outlier label, iterates propose/assign/
    merge until the assignment repeats (or the iteration cap), then
    sanitizes. Deterministic for a fixed seed. Raises NoModelsFound when
    sanitization leaves no labels.
    """
    if not tracklets:
        raise ValueError("run_window needs at least one tracklet")
    if arrs is None:
        arrs = stack_window(tracklets, sequence_length(tracklets), intrinsics)
    graph = build_graph(arrs, params.k_nn)
    estimator = TrajectoryEstimator(
        arrs, params.inlier_threshold, params.ransac_iterations, seed
    )
    labeling = Labeling(labels=(), assignment={int(t): OUTLIER for t in arrs.ids})
    next_id = 0
    previous = None
    for _ in range(params.max_outer_iterations):
        proposals = propose_labels(labeling, graph, arrs, params, estimator, next_id)
        next_id += len(proposals)
        labeling = assign_labels(labeling, proposals, graph, params, arrs, trace=trace)
        labeling = merge_labels(labeling, graph, params, arrs, estimator, trace=trace)
        if labeling.assignment == previous:
            break
        previous = dict(labeling.assignment)
    labeling = sanitize(labeling, graph, params, arrs, estimator, trace=trace)
    if not labeling.labels:
        raise NoModelsFound("sanitization left zero labels for this window")
    return labeling


def sequential_ransac_baseline(tracklets: Sequence[Tracklet], intrinsics: StereoIntrinsics,
                               params: EnergyParams, seed: int,
                               arrs: TrackletArrays | None = None) -> Labeling:
    """Greedy dominant-model peeling: estimate, remove inliers, repeat.

    Stops when fewer than ``min_support_points`` tracklets remain unassigned
    or the latest model's inlier set is smaller than that.
    """
    if not tracklets:
        return Labeling(labels=(), assignment={})
    if arrs is None:
        arrs = stack_window(tracklets, sequence_length(tracklets), intrinsics)
    estimator = TrajectoryEstimator(
        arrs, params.inlier_threshold, params.ransac_iterations, seed
    )
    pool = set(int(t) for t in arrs.ids)
    assignment = {t: OUTLIER for t in pool}
    labels = []
    next_id = 0
    while len(pool) >= max(3, params.min_support_points):
        traj = estimator.estimate(pool)
        if traj is None:
            break
        label = Label(id=next_id, poses=traj.poses, support=frozenset())
        rho = residual_vector(arrs, label)
        inliers = {
            t for t in pool if rho[arrs.index[t]] <= params.inlier_threshold
        }
        if len(inliers) < params.min_support_points:
            break
        labels.append(replace(label, support=frozenset(inliers)))
        for t in inliers:
            assignment[t] = next_id
        pool -= inliers
        next_id += 1
    return _with_supports(labels, assignment)


def labeling_to_dict(labeling: Labeling, frames: int) -> dict:
    """JSON-ready dump: per-label spans, poses (12 numbers or null), supports."""
    return {
        "frames": frames,
        "labels": [
            {
                "id": l.id,
                "first_frame": l.first_frame,
                "last_frame": l.covered[-1],
                "poses": [None if p is None else p.flat12() for p in l.poses],
                "support": sorted(int(t) for t in l.support),
            }
            for l in labeling.labels
        ],
        "assignment": {str(t): int(l) for t, l in sorted(labeling.assignment.items())},
    }


def labeling_from_dict(d: dict) -> Labeling:
    labels = tuple(
        Label(
            id=int(rec["id"]),
            poses=tuple(None if p is None else Pose.from_flat12(p) for p in rec["poses"]),
            support=frozenset(int(t) for t in rec["support"]),
        )
        for rec in d["labels"]
    )
    assignment = {int(t): int(l) for t, l in d["assignment"].items()}
    return Labeling(labels=labels, assignment=assignment)
