"""Image sequence and ground-truth I/O.

Frames are loaded from a directory of numerically named image files,
converted to 8-bit grayscale, and grouped into sliding spatio-temporal
blocks for the filtering stage. Ground truth follows the common
one-box-per-line text convention (x, y, w, h per frame).
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from PIL import Image, ImageDraw

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".pgm"}

# Rec.601 luma weights for RGB -> gray
_LUMA = np.array([0.299, 0.587, 0.114])


class SequenceError(Exception):
    """Raised for unreadable, empty, or inconsistent input sequences."""


@dataclass(frozen=True)
class FrameGrid:
    """One grayscale frame: 0-based index plus a (height, width) uint8 grid."""

    index: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise SequenceError(f"frame {self.index}: expected 2-D pixel grid")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class STBlock:
    """A window of consecutive frames, oldest first; target is the newest."""

    frames: tuple[FrameGrid, ...]

    def __post_init__(self):
        indices = [f.index for f in self.frames]
        if indices != list(range(indices[0], indices[0] + len(indices))):
            raise SequenceError(f"block frame indices not consecutive: {indices}")
        shapes = {f.pixels.shape for f in self.frames}
        if len(shapes) != 1:
            raise SequenceError(f"block mixes frame shapes: {sorted(shapes)}")

    @property
    def target_index(self) -> int:
        return self.frames[-1].index

    def as_array(self) -> np.ndarray:
        """Stack to float64 with axes (time, row, col), oldest frame first."""
        return np.stack([f.pixels for f in self.frames]).astype(np.float64)


@dataclass(frozen=True)
class GroundTruthBox:
    frame: int
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise SequenceError(
                f"ground truth frame {self.frame}: non-positive box {self.w}x{self.h}"
            )

    @property
    def center(self) -> tuple[float, float]:
        """(row, col) center of the box."""
        return (self.y + self.h / 2.0, self.x + self.w / 2.0)


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (H, W, 3) uint8 array, rounded to nearest int."""
    return np.rint(rgb[..., :3].astype(np.float64) @ _LUMA).astype(np.uint8)


def _numeric_key(path: Path) -> tuple:
    digits = re.findall(r"\d+", path.stem)
    if digits:
        return (0, int(digits[-1]), path.name)
    return (1, 0, path.name)


def load_frame(path: Path, index: int) -> FrameGrid:
    try:
        with Image.open(path) as img:
            arr = np.asarray(img)
    except Exception as exc:
        raise SequenceError(f"cannot read image {path.name}: {exc}") from exc
    if arr.ndim == 3:
        arr = to_grayscale(arr)
    elif arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return FrameGrid(index=index, pixels=arr)


def load_sequence(dir_path: str | Path, limit: int | None = None) -> list[FrameGrid]:
    """Load all image files in filename-numeric order as grayscale frames.

    Raises SequenceError if the directory is empty, a file is unreadable,
    or frame dimensions differ (the offending filename is reported).
    """
    directory = Path(dir_path)
    if not directory.is_dir():
        raise SequenceError(f"not a directory: {directory}")
    files = sorted(
        (p for p in directory.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS),
        key=_numeric_key,
    )
    if limit is not None:
        files = files[:limit]
    if not files:
        raise SequenceError(f"no image files in {directory}")
    frames: list[FrameGrid] = []
    for i, path in enumerate(files):
        frame = load_frame(path, i)
        if frames and frame.pixels.shape != frames[0].pixels.shape:
            raise SequenceError(
                f"dimension mismatch in {path.name}: "
                f"{frame.width}x{frame.height} vs {frames[0].width}x{frames[0].height}"
            )
        frames.append(frame)
    return frames


def load_groundtruth(file_path: str | Path) -> list[GroundTruthBox]:
    """Parse a ground-truth file; line k describes frame k-1.

    Each line holds four numbers separated by commas, tabs, or spaces.
    """
    boxes = []
    path = Path(file_path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = re.split(r"[,\t ]+", line)
            if len(tokens) != 4:
                raise SequenceError(
                    f"{path.name}:{lineno}: expected 4 fields, got {len(tokens)}"
                )
            try:
                x, y, w, h = (int(round(float(tok))) for tok in tokens)
            except ValueError as exc:
                raise SequenceError(f"{path.name}:{lineno}: non-numeric field") from exc
            boxes.append(GroundTruthBox(frame=len(boxes), x=x, y=y, w=w, h=h))
    return boxes


def write_groundtruth(boxes: Sequence[GroundTruthBox], file_path: str | Path) -> None:
    with Path(file_path).open("w", encoding="utf-8") as fh:
        for box in boxes:
            fh.write(f"{box.x},{box.y},{box.w},{box.h}\n")


def block_stream(frames: Sequence[FrameGrid], n: int) -> Iterator[STBlock]:
    """Slide a window of n frames over the sequence, one frame per step.

    The first block targets frame n-1; a sequence of T frames yields
    T - n + 1 blocks.
    """
    if len(frames) < n:
        raise SequenceError(f"sequence has {len(frames)} frames, need at least {n}")
    for end in range(n, len(frames) + 1):
        yield STBlock(frames=tuple(frames[end - n : end]))


# ---------------------------------------------------------------------------
# Output writing


@dataclass(frozen=True)
class TrackSnapshot:
    """State of one track at one frame, as written to the trajectory file."""

    frame: int
    track_id: int
    centroid: tuple[float, float]  # (row, col)
    box: tuple[int, int, int, int]  # x, y, w, h

    def to_record(self) -> dict:
        x, y, w, h = self.box
        return {
            "frame": self.frame,
            "id": self.track_id,
            "cx": self.centroid[1],
            "cy": self.centroid[0],
            "x": x,
            "y": y,
            "w": w,
            "h": h,
        }


def write_trajectories(
    per_frame: Sequence[tuple[int, Sequence[TrackSnapshot]]], path: str | Path
) -> int:
    """Write one JSON record per (frame, track); returns record count."""
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for _, snapshots in per_frame:
            for snap in snapshots:
                fh.write(json.dumps(snap.to_record()) + "\n")
                count += 1
    return count


def read_trajectories(path: str | Path) -> dict[int, list[TrackSnapshot]]:
    """Read a trajectory file back as frame -> snapshots."""
    by_frame: dict[int, list[TrackSnapshot]] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            snap = TrackSnapshot(
                frame=rec["frame"],
                track_id=rec["id"],
                centroid=(rec["cy"], rec["cx"]),
                box=(rec["x"], rec["y"], rec["w"], rec["h"]),
            )
            by_frame.setdefault(snap.frame, []).append(snap)
    return by_frame


_PALETTE = [
    (255, 64, 64),
    (64, 200, 64),
    (80, 120, 255),
    (240, 200, 40),
    (200, 80, 220),
    (40, 220, 220),
]


def annotate_frame(frame: FrameGrid, snapshots: Sequence[TrackSnapshot]) -> Image.Image:
    """Burn track boxes and ids into a copy of the frame."""
    img = Image.fromarray(frame.pixels).convert("RGB")
    draw = ImageDraw.Draw(img)
    for snap in snapshots:
        x, y, w, h = snap.box
        color = _PALETTE[(snap.track_id - 1) % len(_PALETTE)]
        draw.rectangle([x, y, x + w - 1, y + h - 1], outline=color, width=2)
        draw.text((x + 2, max(0, y - 12)), str(snap.track_id), fill=color)
    return img


def write_outputs(
    per_frame: Sequence[tuple[int, Sequence[TrackSnapshot]]],
    out_dir: str | Path,
    frames: Sequence[FrameGrid] | None = None,
    frame_metrics: Iterable[dict] | None = None,
    annotate: bool = False,
) -> dict[str, Path]:
    """Write trajectory JSONL plus optional annotated frames and metrics CSV.

    Annotated frames are produced for every processed frame, whether or
    not any track is active in it.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SequenceError(f"cannot create output directory {out}: {exc}") from exc

    paths = {"trajectories": out / "trajectories.jsonl"}
    write_trajectories(per_frame, paths["trajectories"])

    if annotate:
        if frames is None:
            raise ValueError("annotate=True requires the source frames")
        frame_by_index = {f.index: f for f in frames}
        ann_dir = out / "annotated"
        ann_dir.mkdir(exist_ok=True)
        for index, snapshots in per_frame:
            img = annotate_frame(frame_by_index[index], snapshots)
            img.save(ann_dir / f"frame_{index:06d}.png")
        paths["annotated"] = ann_dir

    if frame_metrics is not None:
        paths["frame_metrics"] = out / "frame_metrics.csv"
        rows = list(frame_metrics)
        with paths["frame_metrics"].open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["frame", "classification", "overlap", "cle"]
            )
            writer.writeheader()
            writer.writerows(rows)
    return paths
