"""Scoring of tracking output against ground truth.

Per-frame classification:

  TrueDetection    predicted and ground-truth boxes intersect
  FalseDetection   a prediction exists but misses the ground truth
                   entirely, or there is no ground truth at all
  MissedDetection  ground truth exists but nothing was predicted
  NoGT             neither side has anything

Sequence scores: the true/false/missed detection percentages, a
precision curve over center-location-error thresholds 0..50 px, a
success curve over overlap thresholds 0..1 in steps of 0.05 (a frame
succeeds when its overlap exceeds the threshold), the area under the
success curve (mean of its samples, as a fraction), mean center error,
and the processing frame rate.

When several tracks are alive in a frame, the one whose box center is
nearest the ground-truth center is scored; benchmark sequences have a
single annotated target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .sequence_io import FrameGrid, GroundTruthBox, TrackSnapshot

PRECISION_THRESHOLDS = tuple(range(0, 51))
SUCCESS_THRESHOLDS = tuple(round(0.05 * i, 2) for i in range(21))
DEFAULT_TRE_STARTS = 20

Box = tuple[int, int, int, int]


class Outcome(str, Enum):
    TRUE_DETECTION = "TD"
    FALSE_DETECTION = "FD"
    MISSED_DETECTION = "MD"
    NO_GT = "NoGT"


@dataclass(frozen=True)
class FrameOutcome:
    frame: int
    classification: Outcome
    overlap: float = 0.0
    cle: float = math.inf

    def as_row(self) -> dict:
        return {
            "frame": self.frame,
            "classification": self.classification.value,
            "overlap": f"{self.overlap:.6f}",
            "cle": "" if math.isinf(self.cle) else f"{self.cle:.4f}",
        }


def overlap(box_a: Box, box_b: Box) -> float:
    """Intersection-over-union of two (x, y, w, h) boxes, in pixels."""
    ax, ay, aw, ah = box_a
    bx, by, bw, bh = box_b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union


def _center(box: Box) -> tuple[float, float]:
    x, y, w, h = box
    return (y + h / 2.0, x + w / 2.0)


def classify_frame(
    frame: int, pred_box: Box | None, gt_box: Box | None
) -> FrameOutcome:
    if pred_box is None and gt_box is None:
        return FrameOutcome(frame, Outcome.NO_GT)
    if pred_box is None:
        return FrameOutcome(frame, Outcome.MISSED_DETECTION)
    if gt_box is None:
        return FrameOutcome(frame, Outcome.FALSE_DETECTION)
    s = overlap(pred_box, gt_box)
    pr, pc = _center(pred_box)
    gr, gc = _center(gt_box)
    cle = math.hypot(pr - gr, pc - gc)
    if s > 0:
        return FrameOutcome(frame, Outcome.TRUE_DETECTION, overlap=s, cle=cle)
    return FrameOutcome(frame, Outcome.FALSE_DETECTION, overlap=0.0, cle=cle)


def select_scored_box(
    snapshots: Sequence[TrackSnapshot], gt_box: Box | None
) -> Box | None:
    """The box to score for a frame: nearest to the ground-truth center,
    or the first one when no ground truth exists."""
    if not snapshots:
        return None
    if gt_box is None:
        return snapshots[0].box
    gr, gc = _center(gt_box)

    def distance(snap: TrackSnapshot) -> float:
        sr, sc = _center(snap.box)
        return math.hypot(sr - gr, sc - gc)

    return min(snapshots, key=distance).box


def score_run(
    per_frame: Sequence[tuple[int, Sequence[TrackSnapshot]]],
    groundtruth: Sequence[GroundTruthBox],
    start_frame: int = 0,
) -> list[FrameOutcome]:
    """Classify every frame from start_frame that has output or ground
    truth."""
    gt_by_frame = {box.frame: box for box in groundtruth}
    pred_by_frame = {index: list(snaps) for index, snaps in per_frame}
    last = max(
        [box.frame for box in groundtruth] + [index for index, _ in per_frame],
        default=-1,
    )
    outcomes = []
    for f in range(start_frame, last + 1):
        gt = gt_by_frame.get(f)
        gt_box = (gt.x, gt.y, gt.w, gt.h) if gt else None
        pred_box = select_scored_box(pred_by_frame.get(f, []), gt_box)
        outcomes.append(classify_frame(f, pred_box, gt_box))
    return outcomes


@dataclass
class MetricsReport:
    td: float
    fd: float
    md: float
    precision_curve: list[float]  # percent at each CLE threshold 0..50
    success_curve: list[float]  # percent at each overlap threshold
    auc: float
    mean_cle: float
    fps: float
    n_frames: int
    counts: dict = field(default_factory=dict)

    @property
    def precision_at_20(self) -> float:
        return self.precision_curve[20]

    def to_dict(self) -> dict:
        return {
            "td_percent": self.td,
            "fd_percent": self.fd,
            "md_percent": self.md,
            "auc": self.auc,
            "mean_cle": None if math.isinf(self.mean_cle) else self.mean_cle,
            "precision_at_20px": self.precision_at_20,
            "fps": self.fps,
            "n_frames": self.n_frames,
            "counts": self.counts,
            "precision_curve": self.precision_curve,
            "success_curve": self.success_curve,
        }


def sequence_metrics(
    outcomes: Sequence[FrameOutcome], elapsed_seconds: float = 0.0
) -> MetricsReport:
    """Aggregate frame outcomes into the sequence-level report."""
    if not outcomes:
        raise ValueError("no outcomes to score")
    n = len(outcomes)
    n_td = sum(1 for o in outcomes if o.classification is Outcome.TRUE_DETECTION)
    n_fd = sum(1 for o in outcomes if o.classification is Outcome.FALSE_DETECTION)
    n_md = sum(1 for o in outcomes if o.classification is Outcome.MISSED_DETECTION)

    td = n_td / n * 100.0
    fd = n_fd / (n_td + n_fd) * 100.0 if n_td + n_fd else 0.0
    md = n_md / (n_td + n_md) * 100.0 if n_td + n_md else 0.0

    # curves run over frames where ground truth exists; a missed frame
    # scores zero overlap and infinite center error
    gt_outcomes = [
        o
        for o in outcomes
        if o.classification in (Outcome.TRUE_DETECTION, Outcome.MISSED_DETECTION)
        or (o.classification is Outcome.FALSE_DETECTION and not math.isinf(o.cle))
    ]
    if gt_outcomes:
        cles = np.array([o.cle for o in gt_outcomes])
        overlaps = np.array([o.overlap for o in gt_outcomes])
        precision = [
            float((cles <= t).mean() * 100.0) for t in PRECISION_THRESHOLDS
        ]
        success = [
            float((overlaps > t).mean() * 100.0) for t in SUCCESS_THRESHOLDS
        ]
    else:
        precision = [0.0] * len(PRECISION_THRESHOLDS)
        success = [0.0] * len(SUCCESS_THRESHOLDS)
    auc = float(np.mean(success)) / 100.0

    finite = [o.cle for o in outcomes if not math.isinf(o.cle)]
    mean_cle = float(np.mean(finite)) if finite else math.inf
    fps = n / elapsed_seconds if elapsed_seconds > 0 else 0.0
    return MetricsReport(
        td=td,
        fd=fd,
        md=md,
        precision_curve=precision,
        success_curve=success,
        auc=auc,
        mean_cle=mean_cle,
        fps=fps,
        n_frames=n,
        counts={"td": n_td, "fd": n_fd, "md": n_md},
    )


# ---------------------------------------------------------------------------
# Evaluation protocols


def ope(
    frames: Sequence[FrameGrid],
    groundtruth: Sequence[GroundTruthBox],
    config=None,
) -> MetricsReport:
    """One-pass evaluation: run the pipeline once from the first frame."""
    from .tracker import run_pipeline

    cfg = _default_config(config)
    result = run_pipeline(frames, cfg)
    outcomes = score_run(
        result.per_frame, groundtruth, start_frame=cfg.gabor.temporal_extent - 1
    )
    return sequence_metrics(outcomes, result.elapsed_seconds)


# the detector needs no initial box, so varying the starting box has no
# effect; spatial-robustness evaluation reduces to the one-pass protocol
sre = ope


@dataclass
class TREResult:
    starts: list[int]
    reports: list[MetricsReport]
    mean: MetricsReport


def tre_harness(
    frames: Sequence[FrameGrid],
    groundtruth: Sequence[GroundTruthBox],
    config=None,
    n_starts: int = DEFAULT_TRE_STARTS,
    warn: Callable[[str], None] | None = None,
) -> TREResult:
    """Temporal-robustness evaluation: rerun the pipeline from several
    start offsets and average the reports.

    Start offsets are spread evenly over the sequence; offsets leaving
    fewer frames than one temporal block are skipped with a warning.
    """
    from .tracker import run_pipeline

    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    cfg = _default_config(config)
    n = cfg.gabor.temporal_extent
    max_start = len(frames) - n
    if max_start < 0:
        raise ValueError(f"sequence too short for any start: {len(frames)} < {n}")
    offsets = sorted(
        {int(round(v)) for v in np.linspace(0, max_start, num=n_starts)}
    )
    starts = []
    reports = []
    for off in offsets:
        if len(frames) - off < n:
            if warn:
                warn(f"start {off} leaves fewer than {n} frames; skipped")
            continue
        # reindex the suffix so pipeline output and ground truth agree
        suffix = [
            FrameGrid(index=f.index - off, pixels=f.pixels) for f in frames[off:]
        ]
        gt = [
            GroundTruthBox(frame=b.frame - off, x=b.x, y=b.y, w=b.w, h=b.h)
            for b in groundtruth
            if b.frame >= off
        ]
        result = run_pipeline(suffix, cfg)
        outcomes = score_run(result.per_frame, gt, start_frame=n - 1)
        reports.append(sequence_metrics(outcomes, result.elapsed_seconds))
        starts.append(off)
    if not reports:
        raise ValueError("no valid start offsets")
    return TREResult(starts=starts, reports=reports, mean=_mean_report(reports))


def _mean_report(reports: Sequence[MetricsReport]) -> MetricsReport:
    def mean(attr):
        return float(np.mean([getattr(r, attr) for r in reports]))

    finite_cles = [r.mean_cle for r in reports if not math.isinf(r.mean_cle)]
    return MetricsReport(
        td=mean("td"),
        fd=mean("fd"),
        md=mean("md"),
        precision_curve=list(
            np.mean([r.precision_curve for r in reports], axis=0)
        ),
        success_curve=list(np.mean([r.success_curve for r in reports], axis=0)),
        auc=mean("auc"),
        mean_cle=float(np.mean(finite_cles)) if finite_cles else math.inf,
        fps=mean("fps"),
        n_frames=int(sum(r.n_frames for r in reports)),
        counts={},
    )


def _default_config(config):
    if config is not None:
        return config
    from .config import PipelineConfig

    return PipelineConfig()
