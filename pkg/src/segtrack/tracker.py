"""Greedy IoU tracking-by-matching over a stream of per-frame instance masks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, ValidationError
from .masks import RleMask, mask_iou

__all__ = [
    "ActiveTrack",
    "Assignment",
    "Detection",
    "FrameDetections",
    "MergeEvent",
    "Observation",
    "Track",
    "TrackSet",
    "TrackerConfig",
    "VideoPredictions",
    "associate",
    "greedy_match",
    "run_tracker",
]


@dataclass(frozen=True)
class Detection:
    frame_index: int
    category: int
    score: float
    mask: RleMask

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(
                f"score {self.score} outside [0, 1]",
                invariant="score-range",
                frame_index=self.frame_index,
            )


@dataclass(frozen=True)
class FrameDetections:
    frame_index: int
    detections: tuple[Detection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "detections", tuple(self.detections))
        for d in self.detections:
            if d.frame_index != self.frame_index:
                raise ValidationError(
                    f"detection for frame {d.frame_index} filed under frame {self.frame_index}",
                    invariant="frame-membership",
                    frame_index=self.frame_index,
                )

    def __len__(self):
        return len(self.detections)


@dataclass(frozen=True)
class VideoPredictions:
    """Per-frame detections for frames ``0 .. num_frames - 1``."""

    width: int
    height: int
    frames: tuple[FrameDetections, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.width <= 0 or self.height <= 0:
            raise DimensionError(
                f"frame dimensions must be positive, got {self.width}x{self.height}",
                invariant="positive-dimensions",
            )
        for t, frame in enumerate(self.frames):
            if frame.frame_index != t:
                raise ValidationError(
                    f"frame indices must be contiguous from 0, found {frame.frame_index} at position {t}",
                    invariant="contiguous-frames",
                    frame_index=frame.frame_index,
                )
            for d in frame.detections:
                if d.mask.width != self.width or d.mask.height != self.height:
                    raise DimensionError(
                        f"mask {d.mask.width}x{d.mask.height} in a {self.width}x{self.height} video",
                        invariant="shared-dimensions",
                        frame_index=t,
                    )

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def num_detections(self) -> int:
        return sum(len(f) for f in self.frames)


@dataclass(frozen=True)
class TrackerConfig:
    """Parameters of the greedy tracker.

    Attributes:
        iou_threshold: Minimum mask IoU for a track/detection link.
        max_age: Number of consecutive missed frames after which a track can
            still be matched. 0 means strictly frame-to-frame matching.
        score_threshold: Detections scoring below this are dropped.
        category_aware: Only link detections of the track's category.
    """

    iou_threshold: float = 0.5
    max_age: int = 0
    score_threshold: float = 0.0
    category_aware: bool = True

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ConfigError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")
        if self.max_age < 0 or int(self.max_age) != self.max_age:
            raise ConfigError(f"max_age must be a nonnegative integer, got {self.max_age}")
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ConfigError(f"score_threshold must be in [0, 1], got {self.score_threshold}")


@dataclass(frozen=True)
class Observation:
    mask: RleMask
    filled: bool = False


@dataclass(frozen=True)
class Track:
    """One identity and the masks assigned to it, keyed by frame index."""

    track_id: int
    category: int
    observations: dict[int, Observation] = field(default_factory=dict)

    def __post_init__(self):
        obs = dict(sorted(self.observations.items()))
        object.__setattr__(self, "observations", obs)

    @property
    def frames(self) -> list[int]:
        return list(self.observations)

    @property
    def observed_frames(self) -> list[int]:
        return [t for t, o in self.observations.items() if not o.filled]

    @property
    def first_frame(self) -> int:
        return next(iter(self.observations))

    @property
    def last_frame(self) -> int:
        return next(reversed(self.observations))

    @property
    def first_mask(self) -> RleMask:
        return self.observations[self.observed_frames[0]].mask

    @property
    def last_mask(self) -> RleMask:
        return self.observations[self.observed_frames[-1]].mask

    def __len__(self):
        return len(self.observations)

    def num_observed(self) -> int:
        return sum(1 for o in self.observations.values() if not o.filled)


@dataclass(frozen=True)
class MergeEvent:
    """Record of one re-link: ``absorbed_id`` was appended to ``kept_id``."""

    kept_id: int
    absorbed_id: int
    death_frame: int
    birth_frame: int
    iou: float


@dataclass(frozen=True)
class TrackSet:
    width: int
    height: int
    num_frames: int
    tracks: tuple[Track, ...] = ()
    merges: tuple[MergeEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(sorted(self.tracks, key=lambda tr: tr.track_id)))
        object.__setattr__(self, "merges", tuple(self.merges))
        self.validate()

    def validate(self):
        """Check the set-level invariants.

        Raises:
            ValidationError: on duplicate ids, out-of-range frames, foreign
                mask dimensions, or two tracks observing one mask in a frame.
        """
        seen_ids = set()
        per_frame: dict[int, set] = {}
        for tr in self.tracks:
            if tr.track_id in seen_ids:
                raise ValidationError(f"duplicate track_id {tr.track_id}", invariant="unique-track-ids")
            seen_ids.add(tr.track_id)
            for t, obs in tr.observations.items():
                if not 0 <= t < self.num_frames:
                    raise ValidationError(
                        f"track {tr.track_id} observes frame {t} outside [0, {self.num_frames})",
                        invariant="frame-range",
                        frame_index=t,
                    )
                if obs.mask.width != self.width or obs.mask.height != self.height:
                    raise DimensionError(
                        f"track {tr.track_id} mask has foreign dimensions",
                        invariant="shared-dimensions",
                        frame_index=t,
                    )
                if obs.filled:
                    continue
                masks = per_frame.setdefault(t, set())
                if obs.mask in masks:
                    raise ValidationError(
                        f"track {tr.track_id} shares an observed mask with another track",
                        invariant="exclusive-observations",
                        frame_index=t,
                    )
                masks.add(obs.mask)

    def __len__(self):
        return len(self.tracks)

    def __iter__(self):
        return iter(self.tracks)

    @property
    def track_ids(self) -> list[int]:
        return [tr.track_id for tr in self.tracks]

    def get(self, track_id: int) -> Track:
        for tr in self.tracks:
            if tr.track_id == track_id:
                return tr
        raise KeyError(track_id)

    def masks_at(self, frame_index: int, include_filled: bool = True) -> list[tuple[int, RleMask]]:
        """``(track_id, mask)`` for every track present at ``frame_index``."""
        out = []
        for tr in self.tracks:
            obs = tr.observations.get(frame_index)
            if obs is not None and (include_filled or not obs.filled):
                out.append((tr.track_id, obs.mask))
        return out


class ActiveTrack(NamedTuple):
    track_id: int
    mask: RleMask
    category: int | None = None


class Assignment(NamedTuple):
    pairs: list[tuple[int, int]]
    unmatched_tracks: list[int]
    unmatched_detections: list[int]


def greedy_match(scores: np.ndarray, threshold: float, allowed: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Greedy one-to-one matching on a score matrix.

    Picks the highest remaining score at or above ``threshold`` and removes
    its row and column, until nothing admissible is left. Equal scores go to
    the smaller row index, then the smaller column index, so callers encode
    their tie-break by ordering rows and columns.

    Returns:
        Accepted ``(row, col)`` pairs in acceptance order.
    """
    work = np.array(scores, dtype=float, copy=True)
    if work.size == 0:
        return []
    admissible = work >= threshold
    if allowed is not None:
        admissible &= allowed
    work[~admissible] = -np.inf
    pairs = []
    while True:
        best = work.max()
        if best == -np.inf:
            break
        rows, cols = np.nonzero(work == best)
        r, c = int(rows[0]), int(cols[0])
        pairs.append((r, c))
        work[r, :] = -np.inf
        work[:, c] = -np.inf
    return pairs


def associate(
    active_tracks: Iterable[ActiveTrack | tuple],
    detections: FrameDetections | Sequence[Detection],
    config: TrackerConfig,
) -> Assignment:
    """Link active tracks to the detections of one frame.

    Candidate pairs need IoU >= ``config.iou_threshold`` (and equal category
    when ``config.category_aware`` and the track's category is known). They
    are accepted greedily by descending IoU, ties going to the smaller
    track_id and then the smaller detection index.

    Returns:
        Assignment whose ``pairs`` are ``(track_id, detection_index)``.
    """
    tracks = sorted((ActiveTrack(*t) for t in active_tracks), key=lambda a: a.track_id)
    dets = detections.detections if isinstance(detections, FrameDetections) else tuple(detections)
    scores = np.zeros((len(tracks), len(dets)))
    allowed = np.ones_like(scores, dtype=bool)
    for i, tr in enumerate(tracks):
        for k, det in enumerate(dets):
            scores[i, k] = mask_iou(tr.mask, det.mask)
            if config.category_aware and tr.category is not None:
                allowed[i, k] = tr.category == det.category
    matched = greedy_match(scores, config.iou_threshold, allowed)
    pairs = sorted((tracks[r].track_id, c) for r, c in matched)
    taken_tracks = {p[0] for p in pairs}
    taken_dets = {p[1] for p in pairs}
    return Assignment(
        pairs=pairs,
        unmatched_tracks=[t.track_id for t in tracks if t.track_id not in taken_tracks],
        unmatched_detections=[k for k in range(len(dets)) if k not in taken_dets],
    )


def _retained(frame: FrameDetections, config: TrackerConfig) -> list[Detection]:
    kept = []
    seen = set()
    for det in frame.detections:
        if det.score < config.score_threshold:
            continue
        # exact duplicates would give two tracks the same observed mask
        key = (det.category, det.mask) if config.category_aware else det.mask
        if key in seen:
            continue
        seen.add(key)
        kept.append(det)
    return kept


def run_tracker(video: VideoPredictions, config: TrackerConfig | None = None) -> TrackSet:
    """Assign persistent identities to every retained detection of ``video``.

    Every detection in frame 0 starts a track. In each later frame, tracks
    whose last observation is at most ``max_age + 1`` frames old compete for
    the new detections through :func:`associate`; unmatched detections start
    new tracks with ids 1, 2, ... in birth order. Older tracks are closed.
    """
    config = config or TrackerConfig()
    categories: dict[int, int] = {}
    observations: dict[int, dict[int, Observation]] = {}
    last_frame: dict[int, int] = {}
    alive: list[int] = []
    next_id = 1

    for frame in video.frames:
        t = frame.frame_index
        dets = _retained(frame, config)
        alive = [tid for tid in alive if t - last_frame[tid] - 1 <= config.max_age]
        active = [
            ActiveTrack(tid, observations[tid][last_frame[tid]].mask, categories[tid]) for tid in alive
        ]
        assignment = associate(active, dets, config)
        for tid, k in assignment.pairs:
            observations[tid][t] = Observation(dets[k].mask)
            last_frame[tid] = t
        for k in assignment.unmatched_detections:
            tid = next_id
            next_id += 1
            categories[tid] = dets[k].category
            observations[tid] = {t: Observation(dets[k].mask)}
            last_frame[tid] = t
            alive.append(tid)

    tracks = [Track(tid, categories[tid], observations[tid]) for tid in sorted(observations)]
    return TrackSet(video.width, video.height, video.num_frames, tuple(tracks))
