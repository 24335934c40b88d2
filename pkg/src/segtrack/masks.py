"""Run-length encoded binary masks and the geometric primitives built on them.

Runs are stored in row-major scan order and always start with a background
run, which may be zero when the first pixel is foreground. This is the
uncompressed ``counts`` layout used by COCO, except that COCO scans columns
first; :func:`rle_from_coco` and :func:`rle_to_coco` convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, RleFormatError

__all__ = [
    "BoundingBox",
    "RleMask",
    "empty_mask",
    "mask_area",
    "mask_bbox",
    "mask_iou",
    "masks_union",
    "rle_decode",
    "rle_encode",
    "rle_from_coco",
    "rle_to_coco",
]


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel box ``[x_min, x_max] x [y_min, y_max]``."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise DimensionError(f"degenerate box {self}", invariant="box-order")

    def overlaps(self, other: BoundingBox) -> bool:
        return not (
            self.x_max < other.x_min
            or other.x_max < self.x_min
            or self.y_max < other.y_min
            or other.y_max < self.y_min
        )


@dataclass(frozen=True)
class RleMask:
    """Binary instance mask on a ``height x width`` grid.

    ``runs`` alternates background and foreground lengths, background first.
    Only the leading run may be zero, so every bitmap has exactly one
    encoding and ``==`` on masks is pixel equality.
    """

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.runs, tuple):
            object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))
        if self.width <= 0 or self.height <= 0:
            raise DimensionError(
                f"mask dimensions must be positive, got {self.width}x{self.height}",
                invariant="positive-dimensions",
            )
        if not self.runs:
            raise RleFormatError("empty run list", invariant="run-sum")
        if any(r < 0 for r in self.runs):
            raise RleFormatError("negative run length", invariant="nonnegative-runs")
        if any(r == 0 for r in self.runs[1:]):
            raise RleFormatError(
                "only the leading background run may be zero", invariant="positive-runs"
            )
        total = sum(self.runs)
        if total != self.width * self.height:
            raise RleFormatError(
                f"runs sum to {total}, expected {self.width * self.height}",
                invariant="run-sum",
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @cached_property
    def intervals(self) -> tuple[tuple[int, int], ...]:
        """Foreground runs as half-open ``(start, stop)`` flat-index pairs."""
        out = []
        pos = 0
        for i, r in enumerate(self.runs):
            if i % 2 == 1:
                out.append((pos, pos + r))
            pos += r
        return tuple(out)

    @cached_property
    def area(self) -> int:
        return sum(self.runs[1::2])

    @cached_property
    def bbox(self) -> BoundingBox | None:
        if not self.intervals:
            return None
        w = self.width
        y_min = self.intervals[0][0] // w
        y_max = (self.intervals[-1][1] - 1) // w
        x_min, x_max = w, -1
        for start, stop in self.intervals:
            if stop - start >= w or start // w != (stop - 1) // w:
                # run wraps a row boundary
                x_min, x_max = 0, w - 1
                break
            x_min = min(x_min, start % w)
            x_max = max(x_max, (stop - 1) % w)
        return BoundingBox(x_min, y_min, x_max, y_max)

    def to_bitmap(self) -> np.ndarray:
        return rle_decode(self)

    @classmethod
    def from_bitmap(cls, bitmap) -> RleMask:
        return rle_encode(bitmap)


def empty_mask(width: int, height: int) -> RleMask:
    return RleMask(width, height, (width * height,))


def rle_encode(bitmap) -> RleMask:
    """Encode a ``(height, width)`` boolean grid as an :class:`RleMask`."""
    grid = np.asarray(bitmap, dtype=bool)
    if grid.ndim != 2:
        raise DimensionError(f"expected a 2-D grid, got shape {grid.shape}")
    height, width = grid.shape
    if height == 0 or width == 0:
        raise DimensionError(
            f"grid must have positive area, got {height}x{width}",
            invariant="positive-dimensions",
        )
    flat = grid.ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return RleMask(width, height, tuple(runs))


def rle_decode(mask: RleMask) -> np.ndarray:
    """Expand a mask into a ``(height, width)`` boolean array."""
    runs = np.asarray(mask.runs, dtype=np.int64)
    if int(runs.sum()) != mask.width * mask.height:
        raise RleFormatError("run-sum mismatch", invariant="run-sum")
    values = np.zeros(len(runs), dtype=bool)
    values[1::2] = True
    return np.repeat(values, runs).reshape(mask.height, mask.width)


def mask_area(mask: RleMask) -> int:
    return mask.area


def mask_bbox(mask: RleMask) -> BoundingBox | None:
    """Tight inclusive bounding box, or ``None`` for an empty mask."""
    return mask.bbox


def _check_same_shape(a: RleMask, b: RleMask):
    if a.width != b.width or a.height != b.height:
        raise DimensionError(
            f"mask dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}",
            invariant="shared-dimensions",
        )


def _intersection_area(a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]) -> int:
    i = j = 0
    total = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return total


def mask_iou(a: RleMask, b: RleMask) -> float:
    """Intersection over union computed directly on the run lists.

    Two empty masks have IoU 0 so that empty detections never match anything.

    Raises:
        DimensionError: if the masks live on different grids.
    """
    _check_same_shape(a, b)
    if a.area == 0 or b.area == 0:
        return 0.0
    if not a.bbox.overlaps(b.bbox):
        return 0.0
    inter = _intersection_area(a.intervals, b.intervals)
    return inter / (a.area + b.area - inter)


def masks_union(masks: Iterable[RleMask], width: int, height: int) -> np.ndarray:
    """Pixel-wise OR of ``masks`` as a boolean array (all-false when empty)."""
    out = np.zeros((height, width), dtype=bool)
    for m in masks:
        if m.width != width or m.height != height:
            raise DimensionError(
                f"mask {m.width}x{m.height} on a {width}x{height} frame",
                invariant="shared-dimensions",
            )
        flat = out.reshape(-1)
        for start, stop in m.intervals:
            flat[start:stop] = True
    return out


def rle_from_coco(counts: Sequence[int], height: int, width: int) -> RleMask:
    """Convert column-major COCO uncompressed counts to a row-major mask."""
    col_major = RleMask(height, width, tuple(counts))
    return rle_encode(rle_decode(col_major).T)


def rle_to_coco(mask: RleMask) -> dict:
    """COCO uncompressed RLE dict (``size`` is ``[h, w]``, counts column-major)."""
    transposed = rle_encode(rle_decode(mask).T)
    return {"size": [mask.height, mask.width], "counts": list(transposed.runs)}
