"""k-nearest-neighbor geometric neighborhood graph over tracklets.

The distance between two tracklets is the maximum image-space (u, v)
distance over the frames where both are observed; tracklets that never
coexist in a frame are infinitely far apart and never connected. Edges
carry uniform energy weight 1; the stored distance is kept for debugging.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .tracklets import Tracklet, TrackletArrays


def tracklet_distance(p: Tracklet, q: Tracklet) -> float:
    """Max (u, v) distance over shared frames; inf if the tracklets never coexist."""
    lo = max(p.first_frame, q.first_frame)
    hi = min(p.last_frame, q.last_frame)
    best = -math.inf
    for k in range(lo, hi + 1):
        if p.has_frame(k) and q.has_frame(k):
            du = p.obs[k - p.first_frame, :2] - q.obs[k - q.first_frame, :2]
            best = max(best, float(np.hypot(du[0], du[1])))
    return best if best >= 0.0 else math.inf


@dataclass(frozen=True, eq=False)
class NeighborhoodGraph:
    ids: tuple                 # vertex tracklet ids, ascending
    edges: tuple               # ((p, q, distance), ...) with p < q, sorted

    @cached_property
    def adjacency(self) -> dict:
        adj = {t: [] for t in self.ids}
        for p, q, _ in self.edges:
            adj[p].append(q)
            adj[q].append(p)
        return {t: tuple(sorted(ns)) for t, ns in adj.items()}

    def neighbors(self, tid: int) -> tuple:
        return self.adjacency.get(tid, ())

    def degree(self, tid: int) -> int:
        return len(self.adjacency.get(tid, ()))

    def edge_index_arrays(self, index: dict) -> tuple:
        """Edge endpoints as row-index arrays for vectorized energy sums."""
        if not self.edges:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        e0 = np.array([index[p] for p, _, _ in self.edges], dtype=int)
        e1 = np.array([index[q] for _, q, _ in self.edges], dtype=int)
        return e0, e1

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p_id", "q_id", "distance"])
            for p, q, d in self.edges:
                writer.writerow([p, q, repr(float(d))])


def distance_matrix(arrs: TrackletArrays) -> np.ndarray:
    """(n, n) max-over-frames image distances; inf where tracklets never coexist."""
    n = arrs.n
    best = np.full((n, n), -np.inf)
    for k in range(arrs.frames):
        rows = np.nonzero(arrs.mask[:, k])[0]
        if len(rows) < 2:
            continue
        uv = arrs.uv[rows, k]
        d = np.linalg.norm(uv[:, None, :] - uv[None, :, :], axis=-1)
        sub = best[np.ix_(rows, rows)]
        best[np.ix_(rows, rows)] = np.maximum(sub, d)
    out = np.where(np.isneginf(best), np.inf, best)
    np.fill_diagonal(out, 0.0)
    return out


def build_graph(arrs: TrackletArrays, k_nn: int) -> NeighborhoodGraph:
    """Connect each tracklet to its k nearest finite-distance neighbors.

    Ties at equal distance break by ascending tracklet id; the relation is
    symmetrized by union, so an edge exists if either endpoint lists the other.
    """
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    n = arrs.n
    dist = distance_matrix(arrs)
    edges = {}
    for i in range(n):
        row = dist[i].copy()
        row[i] = np.inf
        finite = np.nonzero(np.isfinite(row))[0]
        if len(finite) == 0:
            continue
        order = finite[np.lexsort((arrs.ids[finite], row[finite]))]
        for j in order[:k_nn]:
            a, b = int(arrs.ids[i]), int(arrs.ids[j])
            key = (a, b) if a < b else (b, a)
            edges.setdefault(key, float(row[j]))
    edge_list = tuple((p, q, edges[(p, q)]) for p, q in sorted(edges))
    return NeighborhoodGraph(ids=tuple(int(t) for t in np.sort(arrs.ids)), edges=edge_list)


def connected_components(graph: NeighborhoodGraph, subset: Iterable[int]) -> list:
    """Partition of ``subset`` into connected components of the induced subgraph.

    Components are returned sorted by their smallest member id.
    """
    subset = set(subset)
    unknown = subset - set(graph.ids)
    if unknown:
        raise ValueError(f"subset contains unknown tracklet ids: {sorted(unknown)[:5]}")
    seen = set()
    components = []
    for start in sorted(subset):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nb in graph.neighbors(cur):
                if nb in subset and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        components.append(frozenset(comp))
    return components
