"""Shared fixtures: the worked seven-node weight-matrix example and a
2-D centroid layout that reproduces it, plus small reusable helpers."""

from __future__ import annotations

import numpy as np
import pytest

from gabortrack.blob_extract import Blob

# Seven-node distance matrix used across the merge tests. The two
# mirrored entries that differ in the source by 0.01 are averaged.
SEVEN_NODE_DISTANCES = np.array(
    [
        [0.0, 15.65, 72.56, 98.595, 73.79, 87.205, 126.015],
        [15.65, 0.0, 65.19, 84.40, 61.98, 75.27, 119.60],
        [72.56, 65.19, 0.0, 55.08, 24.73, 30.59, 54.45],
        [98.595, 84.40, 55.08, 0.0, 32.28, 25.17, 80.28],
        [73.79, 61.98, 24.73, 32.28, 0.0, 13.41, 67.53],
        [87.205, 75.27, 30.59, 25.17, 13.41, 0.0, 60.60],
        [126.015, 119.60, 54.45, 80.28, 67.53, 60.60, 0.0],
    ]
)

# Planar embedding of the matrix above (least-squares fit; every pairwise
# distance reproduces the table within 0.01). Stored as (row, col).
SEVEN_NODE_CENTROIDS = [
    (21.0647, 5.0),
    (33.9147, 13.9355),
    (19.6618, 77.5474),
    (73.6604, 88.3919),
    (44.2670, 75.0479),
    (48.4916, 87.7796),
    (5.0, 129.9866),
]

# 0-based expected MST edge set and clusters for the seven-node example
SEVEN_NODE_MST_EDGES = {(0, 1), (1, 4), (2, 4), (2, 6), (3, 5), (4, 5)}
SEVEN_NODE_CLUSTERS = [{0, 1}, {2, 3, 4, 5}, {6}]


def blob_at(centroid, area=25, size=5):
    """Minimal blob stub with a given centroid; pixel list is a square
    patch around it (contents only matter for area sums)."""
    row, col = centroid
    half = size // 2
    rows, cols = np.mgrid[0:size, 0:size]
    pixels = np.column_stack(
        [rows.ravel() + int(row) - half, cols.ravel() + int(col) - half]
    )[:area]
    top = int(pixels[:, 0].min())
    left = int(pixels[:, 1].min())
    h = int(pixels[:, 0].max()) - top + 1
    w = int(pixels[:, 1].max()) - left + 1
    return Blob(
        pixels=pixels,
        centroid=(float(row), float(col)),
        area=int(area),
        box=(left, top, w, h),
    )


@pytest.fixture
def seven_node_blobs():
    return [blob_at(c) for c in SEVEN_NODE_CENTROIDS]
