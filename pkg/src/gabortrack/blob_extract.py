"""Fuse per-filter energy maps and extract motion blobs.

The fusion rule is a selective average. Every map thresholds itself at
its own population standard deviation; a pixel keeps an energy value
(a "mark") only where it meets that per-map threshold. A pixel survives
fusion when more of its marks are positive than zero, in which case its
fused value is the mean of the positive marks. With an odd number of
maps the majority test has no ties.

Blobs are 8-connected components of the fused frame's nonzero pixels;
components below a minimum area are dropped as noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .gabor_bank import EnergyStack

DEFAULT_MIN_BLOB_AREA = 9

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class EnergyFrame:
    """Fused energy for one frame; nonzero only where a majority of the
    per-filter energies passed their thresholds."""

    values: np.ndarray  # (H, W), >= 0
    frame_index: int


@dataclass(frozen=True)
class Blob:
    """One connected motion region."""

    pixels: np.ndarray  # (area, 2) array of (row, col)
    centroid: tuple[float, float]  # (row, col), mean of pixel coordinates
    area: int
    box: tuple[int, int, int, int]  # x, y, w, h (tight hull)


def fuse_energy(stack: EnergyStack) -> EnergyFrame:
    """Selective-average fusion of a 9-map energy stack.

    Per map E_n the threshold is sigma(E_n), the population standard
    deviation over all pixels including zeros. A mark of exactly zero
    counts as rejected even when the threshold is zero, so an all-zero
    stack fuses to an all-zero frame.
    """
    maps = stack.maps
    if maps.shape[0] != 9:
        raise ValueError(f"expected 9 energy maps, got {maps.shape[0]}")
    sigmas = maps.std(axis=(1, 2))
    marks = np.where(maps >= sigmas[:, None, None], maps, 0.0)
    accepted = (marks > 0).sum(axis=0)
    rejected = maps.shape[0] - accepted
    # left-to-right summation keeps the result reproducible per pixel
    total = reduce(np.add, marks)
    mean_accepted = total / np.maximum(accepted, 1)
    fused = np.where(accepted > rejected, mean_accepted, 0.0)
    return EnergyFrame(values=fused, frame_index=stack.frame_index)


def extract_blobs(
    frame: EnergyFrame, min_blob_area: int = DEFAULT_MIN_BLOB_AREA
) -> list[Blob]:
    """8-connected components of the nonzero fused pixels.

    Components smaller than min_blob_area are discarded. Blobs are
    returned ordered by the (top, left) corner of their bounding box so
    downstream node numbering is deterministic.
    """
    labeled, _ = ndimage.label(frame.values > 0, structure=_EIGHT_CONNECTED)
    blobs = []
    for label_idx, slc in enumerate(ndimage.find_objects(labeled), start=1):
        if slc is None:
            continue
        rows, cols = np.nonzero(labeled[slc] == label_idx)
        rows = rows + slc[0].start
        cols = cols + slc[1].start
        area = rows.size
        if area < min_blob_area:
            continue
        top, left = int(rows.min()), int(cols.min())
        bottom, right = int(rows.max()), int(cols.max())
        blobs.append(
            Blob(
                pixels=np.column_stack([rows, cols]),
                centroid=(float(rows.mean()), float(cols.mean())),
                area=int(area),
                box=(left, top, right - left + 1, bottom - top + 1),
            )
        )
    blobs.sort(key=lambda b: (b.box[1], b.box[0]))
    return blobs


def save_energy_png(frame: EnergyFrame, path: str | Path) -> None:
    """Debug dump of a fused frame as a 16-bit grayscale PNG, scaled to
    the full value range."""
    values = frame.values
    peak = values.max()
    scaled = (values / peak * 65535.0) if peak > 0 else np.zeros_like(values)
    img = Image.fromarray(scaled.astype(np.uint16))
    img.save(Path(path))
