"""Static per-frame overlays of a track set, written as binary PPM images."""

from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .tracker import TrackSet

BACKGROUND = (24, 24, 24)
_GOLDEN = 0.6180339887498949


def track_color(track_id: int) -> tuple[int, int, int]:
    """Color of a track, a pure function of its id (golden-ratio hue walk)."""
    hue = (track_id * _GOLDEN) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 0.95)
    return (round(r * 255), round(g * 255), round(b * 255))


def overlay_image(tracks: TrackSet, frame_index: int) -> np.ndarray:
    """``(height, width, 3)`` uint8 image of the masks present at ``frame_index``.

    Observed masks are painted solid. Filled (gap-carried) masks are painted
    on a diagonal hatch only, so they stay distinguishable.
    """
    if not 0 <= frame_index < tracks.num_frames:
        raise ValidationError(
            f"frame {frame_index} outside [0, {tracks.num_frames})", invariant="frame-range", frame_index=frame_index
        )
    img = np.empty((tracks.height, tracks.width, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    ys, xs = np.indices((tracks.height, tracks.width))
    hatch = (xs + ys) % 4 < 2
    for tr in tracks:
        obs = tr.observations.get(frame_index)
        if obs is None:
            continue
        region = obs.mask.to_bitmap()
        if obs.filled:
            region &= hatch
        img[region] = track_color(tr.track_id)
    return img


def encode_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render_overlay(tracks: TrackSet, frame_index: int, path) -> bytes:
    """Write the overlay of ``frame_index`` to ``path`` and return the file bytes."""
    data = encode_ppm(overlay_image(tracks, frame_index))
    Path(path).write_bytes(data)
    return data
