"""Track management: cost matrix, assignment, and the frame loop.

A track is matched to a detected object only when it passes a hard gate:
the centroid distance may not exceed either of the track's box sides, and
the boxes may not differ by more than a few pixels in height or width.
Gated pairs cost the mean absolute difference of the 4-bin gray
histograms; everything else costs PHI, a sentinel meaning no resemblance.

Assignment is greedy in track-id order: each track takes the cheapest
object still on the table. Objects that resemble no track start new
tracks; objects that resembled some track but lost out are discarded as
likely duplicate or partial detections. Unmatched tracks coast on their
Kalman prediction and retire after too many consecutive misses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kalman
from .blob_extract import extract_blobs, fuse_energy
from .blob_merge import ObjectFeature, merge_blobs
from .gabor_bank import EnergyStream, make_bank
from .sequence_io import FrameGrid, TrackSnapshot

PHI = 1e9
DEFAULT_SIZE_DIFF = 5.0
DEFAULT_MAX_MISSED = 10


@dataclass(frozen=True)
class CostCell:
    """One track-object entry: the object id, or -1 with cost PHI when
    the gate rejects the pair."""

    object_no: int
    cost: float


@dataclass
class Track:
    id: int
    feature: ObjectFeature
    kalman: kalman.KalmanState
    trajectory: list[TrackSnapshot] = field(default_factory=list)
    missed: int = 0
    age: int = 0

    def snapshot(self, frame_index: int) -> TrackSnapshot:
        return TrackSnapshot(
            frame=frame_index,
            track_id=self.id,
            centroid=self.feature.centroid,
            box=self.feature.box,
        )


def pair_cost(track_feature: ObjectFeature, obj: ObjectFeature, size_diff: float) -> float | None:
    """Histogram cost if the gate passes, else None."""
    tr, tc = track_feature.centroid
    orow, ocol = obj.centroid
    d = float(np.hypot(tr - orow, tc - ocol))
    if d > track_feature.height or d > track_feature.width:
        return None
    if abs(track_feature.height - obj.height) >= size_diff:
        return None
    if abs(track_feature.width - obj.width) >= size_diff:
        return None
    return float(np.abs(track_feature.gray_hist - obj.gray_hist).mean())


def cost_matrix(
    tracks: Sequence[Track],
    objects: Sequence[ObjectFeature],
    size_diff: float = DEFAULT_SIZE_DIFF,
    phi: float = PHI,
) -> list[list[CostCell]]:
    """Tracks-by-objects grid of CostCells."""
    grid = []
    for track in tracks:
        row = []
        for l, obj in enumerate(objects):
            cost = pair_cost(track.feature, obj, size_diff)
            row.append(CostCell(l, cost) if cost is not None else CostCell(-1, phi))
        grid.append(row)
    return grid


@dataclass(frozen=True)
class Assignment:
    matched: dict[int, int]  # track row -> object column
    unassigned_tracks: list[int]
    new_objects: list[int]
    discarded_objects: list[int]


def assign(grid: Sequence[Sequence[CostCell]], phi: float = PHI) -> Assignment:
    """Greedy assignment in track order.

    Each track takes its cheapest remaining gated object (ties go to the
    lower object index), removing it from contention. Leftover objects
    whose whole column is PHI become new tracks; leftover objects that
    were gated for some track are discarded.
    """
    n_objects = len(grid[0]) if grid else 0
    remaining = set(range(n_objects))
    matched: dict[int, int] = {}
    unassigned = []
    for k, row in enumerate(grid):
        candidates = [(row[l].cost, l) for l in sorted(remaining) if row[l].cost < phi]
        if candidates:
            _, best = min(candidates)
            matched[k] = best
            remaining.discard(best)
        else:
            unassigned.append(k)
    new_objects = []
    discarded = []
    for l in sorted(remaining):
        if any(row[l].cost < phi for row in grid):
            discarded.append(l)
        else:
            new_objects.append(l)
    return Assignment(matched, unassigned, new_objects, discarded)


def assign_optimal(grid: Sequence[Sequence[CostCell]], phi: float = PHI) -> Assignment:
    """Globally optimal variant of assign() via the Hungarian method.

    Kept behind a config switch; the greedy rule is the default
    behavior. PHI pairs are never matched.
    """
    from scipy.optimize import linear_sum_assignment

    n_tracks = len(grid)
    n_objects = len(grid[0]) if grid else 0
    if n_tracks == 0 or n_objects == 0:
        return Assignment(
            {}, list(range(n_tracks)), list(range(n_objects)), []
        )
    costs = np.array([[cell.cost for cell in row] for row in grid])
    rows, cols = linear_sum_assignment(costs)
    matched = {
        int(k): int(l) for k, l in zip(rows, cols) if costs[k, l] < phi
    }
    unassigned = [k for k in range(n_tracks) if k not in matched]
    leftover = set(range(n_objects)) - set(matched.values())
    new_objects = []
    discarded = []
    for l in sorted(leftover):
        if any(row[l].cost < phi for row in grid):
            discarded.append(l)
        else:
            new_objects.append(l)
    return Assignment(matched, unassigned, new_objects, discarded)


@dataclass
class TrackerConfig:
    phi: float = PHI
    size_diff: float = DEFAULT_SIZE_DIFF
    max_missed: int = DEFAULT_MAX_MISSED
    assignment: str = "greedy"  # or "optimal"


class TrackerState:
    """Owns the live tracks; step() consumes one frame's detections."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        if self.config.assignment not in ("greedy", "optimal"):
            raise ValueError(f"unknown assignment mode {self.config.assignment!r}")
        self.tracks: list[Track] = []
        self.retired: list[Track] = []
        self.next_id = 1
        self._seeded = False

    def _spawn(self, obj: ObjectFeature) -> Track:
        track = Track(id=self.next_id, feature=obj, kalman=kalman.init(obj.centroid))
        self.next_id += 1
        self.tracks.append(track)
        return track

    def step(self, objects: Sequence[ObjectFeature], frame_index: int) -> list[TrackSnapshot]:
        """Advance one frame; returns the snapshots of the active tracks."""
        cfg = self.config
        if not self._seeded:
            # the first frame that yields detections seeds the tracks
            if objects:
                for obj in objects:
                    self._spawn(obj)
                self._seeded = True
            return self._record(frame_index)

        if not self.tracks:
            # an empty cost grid carries no object count
            result = Assignment({}, [], list(range(len(objects))), [])
        else:
            grid = cost_matrix(self.tracks, objects, cfg.size_diff, cfg.phi)
            if cfg.assignment == "optimal":
                result = assign_optimal(grid, cfg.phi)
            else:
                result = assign(grid, cfg.phi)

        survivors = []
        for k, track in enumerate(self.tracks):
            track.age += 1
            if k in result.matched:
                obj = objects[result.matched[k]]
                state = kalman.correct(kalman.predict(track.kalman), obj.centroid)
                track.kalman = state
                track.feature = obj
                track.missed = 0
                survivors.append(track)
            else:
                state = kalman.predict(track.kalman)
                track.kalman = state
                track.feature = ObjectFeature(
                    centroid=state.position,
                    height=track.feature.height,
                    width=track.feature.width,
                    gray_hist=track.feature.gray_hist,
                )
                track.missed += 1
                if track.missed > cfg.max_missed:
                    self.retired.append(track)
                else:
                    survivors.append(track)
        self.tracks = survivors
        for l in result.new_objects:
            self._spawn(objects[l])
        return self._record(frame_index)

    def _record(self, frame_index: int) -> list[TrackSnapshot]:
        snapshots = []
        for track in self.tracks:
            snap = track.snapshot(frame_index)
            track.trajectory.append(snap)
            snapshots.append(snap)
        return snapshots


# ---------------------------------------------------------------------------
# Full pipeline over a frame sequence


@dataclass
class PipelineResult:
    per_frame: list[tuple[int, list[TrackSnapshot]]]
    tracks: list[Track]
    elapsed_seconds: float

    @property
    def frames_processed(self) -> int:
        return len(self.per_frame)

    @property
    def fps(self) -> float:
        if self.elapsed_seconds <= 0:
            return float("inf")
        return self.frames_processed / self.elapsed_seconds


def run_pipeline(frames: Sequence[FrameGrid], config=None) -> PipelineResult:
    """Detect and track over a whole sequence.

    The first temporal_extent - 1 frames only prime the filter stream
    and produce no output. Timing covers the processing loop only, not
    image decoding or output writing.
    """
    from .config import PipelineConfig

    cfg = config or PipelineConfig()
    bank = make_bank(
        base_omega=cfg.gabor.omega,
        thetas=cfg.gabor.thetas,
        omega_t0s=cfg.gabor.omega_t0s,
        sigma_x=cfg.gabor.sigma_x,
        sigma_y=cfg.gabor.sigma_y,
        sigma_t=cfg.gabor.sigma_t,
        spatial_extent=cfg.gabor.spatial_extent,
        temporal_extent=cfg.gabor.temporal_extent,
    )
    stream = EnergyStream(bank)
    state = TrackerState(
        TrackerConfig(
            phi=cfg.tracker.phi,
            size_diff=cfg.tracker.size_diff,
            max_missed=cfg.tracker.max_missed,
            assignment=cfg.tracker.assignment,
        )
    )
    per_frame: list[tuple[int, list[TrackSnapshot]]] = []
    start = time.perf_counter()
    for frame in frames:
        stack = stream.push(frame)
        if stack is None:
            continue
        energy = fuse_energy(stack)
        blobs = extract_blobs(energy, cfg.blob.min_blob_area)
        objects = merge_blobs(blobs, frame, cfg.merge.threshold_rule)
        snapshots = state.step(objects, frame.index)
        per_frame.append((frame.index, snapshots))
    elapsed = time.perf_counter() - start
    return PipelineResult(
        per_frame=per_frame,
        tracks=state.tracks + state.retired,
        elapsed_seconds=elapsed,
    )
