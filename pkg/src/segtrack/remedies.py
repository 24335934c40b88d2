"""Label-free post-processing of tracker output.

Two independent mechanisms: re-linking joins a track that ended with one that
starts shortly afterwards at the same place (identity fragmentation), and
windowed majority voting steadies each track's masks over time (flicker).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .masks import rle_decode, rle_encode, mask_iou
from .tracker import MergeEvent, Observation, Track, TrackSet

__all__ = [
    "RemedyConfig",
    "apply_remedy",
    "fill_track_gaps",
    "relink_tracks",
    "remedy_name",
    "smooth_masks",
]


@dataclass(frozen=True)
class RemedyConfig:
    """Post-hoc remedy parameters.

    Attributes:
        relink_gap: Maximum number of empty frames between the end of one
            track and the start of the track it is joined with.
        relink_iou: Minimum IoU between the boundary masks of a joined pair.
        smooth_window: Odd temporal window of the mask majority vote; 1
            disables smoothing.
        fill_gaps: Fill the holes of re-linked tracks by carrying the last
            observed mask forward (flagged ``filled``).
        relink: Enable re-linking.
        smooth: Enable mask smoothing.
    """

    relink_gap: int = 3
    relink_iou: float = 0.5
    smooth_window: int = 3
    fill_gaps: bool = False
    relink: bool = True
    smooth: bool = True

    def __post_init__(self):
        if self.relink_gap < 0:
            raise ConfigError(f"relink_gap must be nonnegative, got {self.relink_gap}")
        if not 0.0 < self.relink_iou <= 1.0:
            raise ConfigError(f"relink_iou must be in (0, 1], got {self.relink_iou}")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ConfigError(f"smooth_window must be an odd positive integer, got {self.smooth_window}")


def remedy_name(config: RemedyConfig) -> str:
    parts = []
    if config.relink:
        parts.append(f"relink(gap={config.relink_gap},iou={config.relink_iou:g})")
    if config.smooth and config.smooth_window > 1:
        parts.append(f"smooth(window={config.smooth_window})")
    if config.fill_gaps:
        parts.append("fill")
    return "+".join(parts) or "none"


def _candidates(tracks: dict[int, Track], config: RemedyConfig) -> list[tuple]:
    out = []
    for a in tracks.values():
        for b in tracks.values():
            if a is b or a.category != b.category or b.first_frame <= a.last_frame:
                continue
            if b.first_frame - a.last_frame - 1 > config.relink_gap:
                continue
            iou = mask_iou(a.last_mask, b.first_mask)
            if iou >= config.relink_iou:
                out.append((b.first_frame - a.last_frame, -iou, a.last_frame, a.track_id, b.track_id))
    out.sort()
    return out


def fill_track_gaps(tracks: TrackSet, track_ids=None) -> TrackSet:
    """Fill interior holes by repeating the last observed mask, flagged ``filled``.

    Only tracks in ``track_ids`` are touched (all tracks when ``None``).
    """
    out = []
    for tr in tracks:
        if track_ids is not None and tr.track_id not in track_ids:
            out.append(tr)
            continue
        obs = {}
        last = None
        for t in range(tr.first_frame, tr.last_frame + 1):
            if t in tr.observations:
                obs[t] = tr.observations[t]
                if not obs[t].filled:
                    last = obs[t].mask
            else:
                obs[t] = Observation(last, filled=True)
        out.append(Track(tr.track_id, tr.category, obs))
    return TrackSet(tracks.width, tracks.height, tracks.num_frames, tuple(out), tracks.merges)


def relink_tracks(tracks: TrackSet, config: RemedyConfig | None = None) -> TrackSet:
    """Join fragmented tracks of the same object.

    A pair (A, B) is admissible when A ends before B starts, both share a
    category, at most ``relink_gap`` frames separate them, and A's last
    observed mask overlaps B's first with IoU >= ``relink_iou``. Pairs are
    accepted greedily, fewest empty frames first, then by descending IoU
    (ties: earlier end of A, then smaller ids), each track end and start used
    at most once. Shortest-gap-first keeps a short fragment sandwiched
    between two dropouts from being skipped by a slightly better-overlapping
    long jump over it. Accepted pairs are
    chained and each chain keeps the id of its earliest track. Every join is
    appended to ``TrackSet.merges``.
    """
    config = config or RemedyConfig()
    current = {tr.track_id: tr for tr in tracks}
    merges = list(tracks.merges)
    while True:
        successor: dict[int, tuple[int, float]] = {}
        heads = set()
        for _, neg_iou, _, a, b in _candidates(current, config):
            if a in successor or b in heads:
                continue
            successor[a] = (b, -neg_iou)
            heads.add(b)
        if not successor:
            break
        snapshot = dict(current)
        for root in sorted(a for a in successor if a not in heads):
            obs = dict(snapshot[root].observations)
            node = root
            while node in successor:
                nxt, iou = successor[node]
                merges.append(
                    MergeEvent(root, nxt, snapshot[node].last_frame, snapshot[nxt].first_frame, iou)
                )
                obs.update(snapshot[nxt].observations)
                del current[nxt]
                node = nxt
            current[root] = Track(root, snapshot[root].category, obs)

    merged = TrackSet(tracks.width, tracks.height, tracks.num_frames, tuple(current.values()), tuple(merges))
    if config.fill_gaps:
        merged = fill_track_gaps(merged, {m.kept_id for m in merges})
    return merged


def smooth_masks(tracks: TrackSet, config: RemedyConfig | None = None) -> TrackSet:
    """Per-pixel majority vote over each track's observed masks in a sliding window.

    The window ``[t - w//2, t + w//2]`` is truncated at the track ends and
    only counts observed (not filled) masks present in it. A tied vote keeps
    the pixel's original value. A vote that would erase the mask entirely
    keeps the original mask.
    """
    config = config or RemedyConfig()
    half = config.smooth_window // 2
    if half == 0:
        return tracks
    out = []
    for tr in tracks:
        frames = tr.observed_frames
        bitmaps = {t: rle_decode(tr.observations[t].mask) for t in frames}
        obs = dict(tr.observations)
        for t in frames:
            window = [bitmaps[s] for s in frames if abs(s - t) <= half]
            votes = np.sum(window, axis=0, dtype=np.int32)
            n = len(window)
            smoothed = (2 * votes > n) | ((2 * votes == n) & bitmaps[t])
            if smoothed.any():
                obs[t] = Observation(rle_encode(smoothed))
        out.append(Track(tr.track_id, tr.category, obs))
    return TrackSet(tracks.width, tracks.height, tracks.num_frames, tuple(out), tracks.merges)


def apply_remedy(tracks: TrackSet, config: RemedyConfig | None = None) -> TrackSet:
    """Re-link, then smooth, then fill the holes of re-linked tracks (each if enabled)."""
    config = config or RemedyConfig()
    out = tracks
    if config.relink:
        out = relink_tracks(out, RemedyConfig(config.relink_gap, config.relink_iou, config.smooth_window))
    if config.smooth:
        out = smooth_masks(out, config)
    if config.fill_gaps:
        out = fill_track_gaps(out, {m.kept_id for m in out.merges})
    return out
