"""Synthetic moving-camera sequences with exact ground truth.

The background is seeded value noise smoothed by a box blur, translated
each frame by the camera-motion vector with wrap-around. Targets are
flat-intensity rectangles or disks following linear paths (optionally
bouncing off the frame edges); static occluder patches can be scripted
over chosen frame windows, and targets can be hidden outright while they
pass behind one. Ground truth is the exact bounding box of the target's
composited pixels (its nominal box while hidden).

The first listed target is the annotated one; any others act as
distractors. Boxes are written in the x,y,w,h one-line-per-frame format
the loader expects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .sequence_io import FrameGrid, GroundTruthBox, write_groundtruth

MIN_LENGTH = 8


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    shape: str = "rectangle"  # or "disk"
    intensity: int = 230
    size: tuple[int, int] = (20, 20)  # (w, h); disks use w as diameter
    start: tuple[float, float] = (10.0, 10.0)  # (x, y) top-left
    velocity: tuple[float, float] = (2.0, 0.0)  # (vx, vy) px/frame
    bounce: bool = False
    hidden: tuple[tuple[int, int], ...] = ()  # inclusive frame windows

    def __post_init__(self):
        if self.shape not in ("rectangle", "disk"):
            raise SynthError(f"unknown target shape {self.shape!r}")
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise SynthError("target size must be positive")

    def is_hidden(self, frame: int) -> bool:
        return any(a <= frame <= b for a, b in self.hidden)


@dataclass(frozen=True)
class OccluderSpec:
    box: tuple[int, int, int, int]  # x, y, w, h
    intensity: int = 128
    frames: tuple[int, int] | None = None  # inclusive window; None = always

    def active(self, frame: int) -> bool:
        return self.frames is None or self.frames[0] <= frame <= self.frames[1]


@dataclass(frozen=True)
class SynthSpec:
    width: int = 160
    height: int = 120
    length: int = 60
    camera_motion: tuple[float, float] = (1.0, 0.0)  # (dx, dy) px/frame
    background_low: int = 60
    background_high: int = 150
    targets: tuple[TargetSpec, ...] = (TargetSpec(),)
    occluders: tuple[OccluderSpec, ...] = ()
    noise_std: float = 0.0

    def __post_init__(self):
        if self.length < MIN_LENGTH:
            raise SynthError(f"length must be >= {MIN_LENGTH}, got {self.length}")
        if not self.targets:
            raise SynthError("need at least one target")
        if self.background_low >= self.background_high:
            raise SynthError("background_low must be below background_high")


def _background(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """Smoothed value noise, float in [background_low, background_high]."""
    noise = rng.random((spec.height, spec.width))
    smooth = ndimage.uniform_filter(noise, size=5, mode="wrap")
    lo, hi = smooth.min(), smooth.max()
    unit = (smooth - lo) / (hi - lo) if hi > lo else np.zeros_like(smooth)
    return spec.background_low + unit * (spec.background_high - spec.background_low)


def _target_position(target: TargetSpec, frame: int, bounds: tuple[int, int]) -> tuple[int, int]:
    """Integer top-left (x, y) at a frame, reflecting off edges if the
    target bounces. Raises when a non-bouncing path exits the frame."""
    w_max = bounds[0] - target.size[0]
    h_max = bounds[1] - target.size[1]
    if w_max < 0 or h_max < 0:
        raise SynthError("target larger than frame")
    x = target.start[0] + target.velocity[0] * frame
    y = target.start[1] + target.velocity[1] * frame
    if target.bounce:
        x = _reflect(x, w_max)
        y = _reflect(y, h_max)
    elif not (0 <= x <= w_max and 0 <= y <= h_max):
        raise SynthError(
            f"target leaves the frame at frame {frame} (x={x:.1f}, y={y:.1f})"
        )
    return int(round(x)), int(round(y))


def _reflect(value: float, limit: float) -> float:
    if limit <= 0:
        return 0.0
    period = 2.0 * limit
    value = value % period
    return period - value if value > limit else value


def _draw_target(canvas: np.ndarray, target: TargetSpec, x: int, y: int) -> np.ndarray:
    """Composite the target; returns its boolean pixel mask."""
    mask = np.zeros(canvas.shape, dtype=bool)
    w, h = target.size
    if target.shape == "rectangle":
        mask[y : y + h, x : x + w] = True
    else:
        radius = w / 2.0
        cy, cx = y + radius, x + radius
        ys, xs = np.mgrid[0 : canvas.shape[0], 0 : canvas.shape[1]]
        mask = (ys - cy + 0.5) ** 2 + (xs - cx + 0.5) ** 2 <= radius**2
    canvas[mask] = target.intensity
    return mask


def _mask_box(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows, cols = np.nonzero(mask)
    return (
        int(cols.min()),
        int(rows.min()),
        int(cols.max() - cols.min() + 1),
        int(rows.max() - rows.min() + 1),
    )


def generate(spec: SynthSpec, seed: int = 0) -> tuple[list[FrameGrid], list[GroundTruthBox]]:
    """Render the sequence; deterministic for a given (spec, seed)."""
    rng = np.random.default_rng(seed)
    base = _background(spec, rng)
    frames = []
    boxes = []
    for f in range(spec.length):
        # background content translates by the camera-motion vector
        shift_x = int(round(spec.camera_motion[0] * f))
        shift_y = int(round(spec.camera_motion[1] * f))
        canvas = np.roll(base, (shift_y, shift_x), axis=(0, 1)).copy()

        gt_box = None
        for t_index, target in enumerate(spec.targets):
            x, y = _target_position(target, f, (spec.width, spec.height))
            if target.is_hidden(f):
                if t_index == 0:
                    gt_box = (x, y, target.size[0], target.size[1])
                continue
            mask = _draw_target(canvas, target, x, y)
            if t_index == 0:
                gt_box = _mask_box(mask)

        for occ in spec.occluders:
            if occ.active(f):
                ox, oy, ow, oh = occ.box
                canvas[oy : oy + oh, ox : ox + ow] = occ.intensity

        if spec.noise_std > 0:
            canvas = canvas + rng.normal(0.0, spec.noise_std, canvas.shape)
        pixels = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        frames.append(FrameGrid(index=f, pixels=pixels))
        assert gt_box is not None
        boxes.append(GroundTruthBox(frame=f, x=gt_box[0], y=gt_box[1], w=gt_box[2], h=gt_box[3]))
    return frames, boxes


def write_sequence(
    frames: Sequence[FrameGrid],
    boxes: Sequence[GroundTruthBox],
    out_dir: str | Path,
) -> Path:
    """Write frames as PNGs plus groundtruth_rect.txt; returns the dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        Image.fromarray(frame.pixels).save(out / f"{frame.index:06d}.png")
    write_groundtruth(boxes, out / "groundtruth_rect.txt")
    return out


def spec_from_dict(data: dict) -> SynthSpec:
    """Build a SynthSpec from parsed JSON, rejecting unknown keys."""
    data = dict(data)
    targets = tuple(
        _target_from_dict(item) for item in data.pop("targets", [{}])
    )
    occluders = tuple(
        _occluder_from_dict(item) for item in data.pop("occluders", [])
    )
    known = {
        "width", "height", "length", "camera_motion",
        "background_low", "background_high", "noise_std",
    }
    unknown = set(data) - known
    if unknown:
        raise SynthError(f"unknown spec keys: {sorted(unknown)}")
    if "camera_motion" in data:
        data["camera_motion"] = tuple(data["camera_motion"])
    return SynthSpec(targets=targets, occluders=occluders, **data)


def _target_from_dict(data: dict) -> TargetSpec:
    data = dict(data)
    known = {"shape", "intensity", "size", "start", "velocity", "bounce", "hidden"}
    unknown = set(data) - known
    if unknown:
        raise SynthError(f"unknown target keys: {sorted(unknown)}")
    for key in ("size", "start", "velocity"):
        if key in data:
            data[key] = tuple(data[key])
    if "hidden" in data:
        data["hidden"] = tuple(tuple(w) for w in data["hidden"])
    return TargetSpec(**data)


def _occluder_from_dict(data: dict) -> OccluderSpec:
    data = dict(data)
    known = {"box", "intensity", "frames"}
    unknown = set(data) - known
    if unknown:
        raise SynthError(f"unknown occluder keys: {sorted(unknown)}")
    data["box"] = tuple(data["box"])
    if data.get("frames") is not None:
        data["frames"] = tuple(data["frames"])
    return OccluderSpec(**data)


def load_spec(path: str | Path) -> SynthSpec:
    with Path(path).open("r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
