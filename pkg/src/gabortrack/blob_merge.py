"""Merge blob fragments into whole objects.

Blob centroids become graph nodes with Euclidean edge weights. A minimum
spanning tree over the complete graph is cut at a weight threshold; the
surviving subtrees group fragments that belong to one object. Undersized
clusters are pruned, and each remaining cluster is summarized as an
object feature vector (box-center centroid, box height and width, and a
four-bin gray histogram of the frame content inside the box).

Threshold rules for the MST cut:

  mst_mean_std     mean + population std of the tree's own edge weights
                   (default; prunes edges that are long for this tree)
  matrix_mean_std  mean + population std over the full weight matrix,
                   diagonal included
  matrix_mean      mean over the full weight matrix

The matrix-wide statistics are dominated by the many long pairwise
distances, so the matrix_mean_std rule rarely removes anything; it is
kept for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blob_extract import Blob
from .sequence_io import FrameGrid

THRESHOLD_RULES = ("mst_mean_std", "matrix_mean_std", "matrix_mean")

HIST_BIN_EDGES = np.array([0, 64, 128, 192, 256])


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric centroid-distance matrix with its source blobs."""

    distances: np.ndarray  # (u, u), zero diagonal
    blobs: tuple[Blob, ...]

    @property
    def size(self) -> int:
        return self.distances.shape[0]


@dataclass(frozen=True)
class ObjectFeature:
    """Feature vector of one detected object.

    The centroid is the bounding-box center; the box is recoverable as
    (col - w/2, row - h/2, w, h). Histogram bins hold percentages of the
    box pixels in [0,64), [64,128), [128,192), [192,256).
    """

    centroid: tuple[float, float]  # (row, col)
    height: float
    width: float
    gray_hist: np.ndarray  # 4 bins, sums to 100

    @property
    def box(self) -> tuple[int, int, int, int]:
        row, col = self.centroid
        x = int(round(col - self.width / 2.0))
        y = int(round(row - self.height / 2.0))
        return (x, y, int(round(self.width)), int(round(self.height)))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def weight_matrix(blobs: Sequence[Blob]) -> WeightMatrix:
    """Pairwise Euclidean distances between blob centroids."""
    if not blobs:
        raise ValueError("need at least one blob")
    pts = np.array([b.centroid for b in blobs], dtype=np.float64)
    diff = pts[:, None, :] - pts[None, :, :]
    return WeightMatrix(
        distances=np.sqrt((diff**2).sum(axis=2)), blobs=tuple(blobs)
    )


def kruskal_mst(weights: WeightMatrix) -> list[tuple[int, int, float]]:
    """Minimum spanning tree edges as (i, j, weight), i < j.

    Edges are considered in (weight, i, j) order, which makes ties
    deterministic. A single node yields an empty edge list.
    """
    u = weights.size
    dist = weights.distances
    edges = sorted(
        ((dist[i, j], i, j) for i in range(u) for j in range(i + 1, u))
    )
    uf = _UnionFind(u)
    tree = []
    for w, i, j in edges:
        if uf.union(i, j):
            tree.append((i, j, float(w)))
            if len(tree) == u - 1:
                break
    return tree


def cut_threshold(
    mst_edges: Sequence[tuple[int, int, float]],
    weights: WeightMatrix,
    rule: str = "mst_mean_std",
) -> float:
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"unknown threshold rule {rule!r}; choose from {THRESHOLD_RULES}")
    if rule == "mst_mean_std":
        if not mst_edges:
            return 0.0
        w = np.array([e[2] for e in mst_edges])
        return float(w.mean() + w.std())
    flat = weights.distances.ravel()
    if rule == "matrix_mean_std":
        return float(flat.mean() + flat.std())
    return float(flat.mean())


def cut_and_cluster(
    mst_edges: Sequence[tuple[int, int, float]],
    weights: WeightMatrix,
    rule: str = "mst_mean_std",
) -> list[set[int]]:
    """Remove MST edges heavier than the threshold; the remaining forest's
    components are the clusters, ordered by smallest member index."""
    threshold = cut_threshold(mst_edges, weights, rule)
    uf = _UnionFind(weights.size)
    for i, j, w in mst_edges:
        if w <= threshold:
            uf.union(i, j)
    groups: dict[int, set[int]] = {}
    for node in range(weights.size):
        groups.setdefault(uf.find(node), set()).add(node)
    return sorted(groups.values(), key=min)


def prune_clusters(
    clusters: Sequence[set[int]], blobs: Sequence[Blob]
) -> list[set[int]]:
    """Drop clusters whose total blob area is under a third of the
    largest cluster's area."""
    if not clusters:
        return []
    areas = [sum(blobs[i].area for i in cluster) for cluster in clusters]
    cutoff = max(areas) / 3.0
    return [c for c, a in zip(clusters, areas) if a >= cutoff]


def make_object(
    cluster: set[int], blobs: Sequence[Blob], frame: FrameGrid | np.ndarray
) -> ObjectFeature:
    """Summarize a blob cluster against the original grayscale frame."""
    if not cluster:
        raise ValueError("empty cluster")
    boxes = [blobs[i].box for i in sorted(cluster)]
    left = min(b[0] for b in boxes)
    top = min(b[1] for b in boxes)
    right = max(b[0] + b[2] for b in boxes)
    bottom = max(b[1] + b[3] for b in boxes)
    w = right - left
    h = bottom - top
    pixels = frame.pixels if isinstance(frame, FrameGrid) else np.asarray(frame)
    patch = pixels[top:bottom, left:right]
    counts, _ = np.histogram(patch, bins=HIST_BIN_EDGES)
    hist = counts.astype(np.float64) / patch.size * 100.0
    return ObjectFeature(
        centroid=(top + h / 2.0, left + w / 2.0),
        height=float(h),
        width=float(w),
        gray_hist=hist,
    )


def merge_blobs(
    blobs: Sequence[Blob],
    frame: FrameGrid | np.ndarray,
    rule: str = "mst_mean_std",
) -> list[ObjectFeature]:
    """Full per-frame merge: weight matrix, MST, cut, prune, summarize."""
    if not blobs:
        return []
    weights = weight_matrix(blobs)
    mst = kruskal_mst(weights)
    clusters = prune_clusters(cut_and_cluster(mst, weights, rule), blobs)
    return [make_object(cluster, blobs, frame) for cluster in clusters]
