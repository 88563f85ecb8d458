"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles, without
importing the corresponding package internals, so a bug in the library
cannot hide in its own oracle.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def direct_convolve_3d(block: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Direct triple-loop 3-D convolution at the single fully-overlapping
    temporal position.

    block has axes (t, row, col); kernel has axes (row, col, t) with taps
    on integer offsets centered at zero. Spatial borders replicate edge
    pixels. True convolution: output(y, x) =
        sum_{dy,dx,dt} kernel[dy, dx, dt] * block[tc - dt, y - dy, x - dx]
    """
    n, height, width = block.shape
    s = kernel.shape[0]
    tk = kernel.shape[2]
    assert n == tk, "block depth must equal kernel depth"
    ps = s // 2
    pt = tk // 2
    padded = np.pad(block, ((0, 0), (ps, ps), (ps, ps)), mode="edge")
    out = np.zeros((height, width), dtype=kernel.dtype)
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for dt in range(-pt, pt + 1):
                frame = padded[pt - dt]
                # window of block values at offsets (y-dy, x-dx); flipping
                # the slice realizes the sign flip of true convolution
                window = frame[y : y + s, x : x + s][::-1, ::-1]
                acc = acc + (kernel[:, :, dt + pt] * window).sum()
            out[y, x] = acc
    return out


def selective_average_pixel(energies, sigmas):
    """Fusion rule for one pixel, straight from its definition.

    energies: the per-filter energy values at this pixel.
    sigmas: the per-filter thresholds.
    """
    marks = []
    for e, s in zip(energies, sigmas):
        marks.append(e if e >= s else 0.0)
    accepted = sum(1 for m in marks if m > 0)
    rejected = sum(1 for m in marks if m == 0)
    if accepted > rejected:
        total = 0.0
        for m in marks:
            total = total + m
        return total / accepted
    return 0.0


def selective_average_frame(stack: np.ndarray) -> np.ndarray:
    """Per-pixel fusion of an (n_maps, H, W) stack; thresholds are each
    map's population standard deviation."""
    n_maps, height, width = stack.shape
    sigmas = [_population_std(stack[i]) for i in range(n_maps)]
    out = np.zeros((height, width))
    for r in range(height):
        for c in range(width):
            out[r, c] = selective_average_pixel(
                [stack[i, r, c] for i in range(n_maps)], sigmas
            )
    return out


def _population_std(values: np.ndarray) -> float:
    flat = values.ravel()
    mean = flat.sum() / flat.size
    return math.sqrt(((flat - mean) ** 2).sum() / flat.size)


def min_spanning_tree_weight(dist: np.ndarray) -> float:
    """Exhaustive minimum over all labeled spanning trees.

    Trees on u nodes are enumerated through Pruefer sequences, an
    entirely different construction from the greedy edge selection it
    checks. Feasible for u <= 7 or so.
    """
    u = dist.shape[0]
    if u == 1:
        return 0.0
    if u == 2:
        return float(dist[0, 1])
    best = math.inf
    for seq in itertools.product(range(u), repeat=u - 2):
        best = min(best, _tree_weight_from_pruefer(seq, dist))
    return best


def _tree_weight_from_pruefer(seq, dist) -> float:
    u = dist.shape[0]
    degree = [1] * u
    for node in seq:
        degree[node] += 1
    total = 0.0
    seq = list(seq)
    leaves = sorted(i for i in range(u) if degree[i] == 1)
    for node in seq:
        leaf = leaves.pop(0)
        total += dist[leaf, node]
        degree[node] -= 1
        if degree[node] == 1:
            # keep the leaf list sorted for the canonical decode order
            import bisect

            bisect.insort(leaves, node)
    total += dist[leaves[0], leaves[1]]
    return total


class ReferenceKalman:
    """Textbook linear Kalman filter, matrices passed explicitly."""

    def __init__(self, x0, p0=100.0, q=0.01, r=1.0):
        self.x = np.asarray(x0, dtype=float).copy()
        self.P = np.eye(4) * p0
        self.A = np.array(
            [[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float
        )
        self.H = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
        self.Q = np.eye(4) * q
        self.R = np.eye(2) * r

    def predict(self):
        self.x = self.A @ self.x
        self.P = self.A @ self.P @ self.A.T + self.Q
        return self

    def correct(self, z):
        z = np.asarray(z, dtype=float)
        innovation = z - self.H @ self.x
        s_mat = self.H @ self.P @ self.H.T + self.R
        gain = np.linalg.solve(s_mat.T, (self.P @ self.H.T).T).T
        self.x = self.x + gain @ innovation
        self.P = (np.eye(4) - gain @ self.H) @ self.P
        return self


def brute_force_min_assignment(costs: np.ndarray, phi: float) -> float:
    """Minimum total cost over all one-to-one matchings that use only
    finite-cost pairs and match as many tracks as possible."""
    n_tracks, n_objects = costs.shape
    best = math.inf
    best_size = 0
    indices = list(range(n_objects))
    for size in range(min(n_tracks, n_objects), -1, -1):
        for track_subset in itertools.combinations(range(n_tracks), size):
            for perm in itertools.permutations(indices, size):
                total = 0.0
                ok = True
                for k, l in zip(track_subset, perm):
                    if costs[k, l] >= phi:
                        ok = False
                        break
                    total += costs[k, l]
                if ok:
                    if size > best_size or (size == best_size and total < best):
                        best = total
                        best_size = size
        if best_size == size and best < math.inf:
            break
    return best if best < math.inf else 0.0
