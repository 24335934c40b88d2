"""Frame-wise accuracy, identity-stability metrics and instance counting.

Metrics against ground truth follow the CLEAR-MOT conventions: an ID switch
is a change of the matched track relative to the most recent previous match,
and a fragmentation is an interruption of the matched status that later
resumes. Ground-truth-free proxies (flicker index, rebirth events, short
tracks) are reported alongside and never substitute for them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, ValidationError
from .masks import RleMask, mask_iou, masks_union
from .tracker import Detection, FrameDetections, TrackSet, VideoPredictions, greedy_match

__all__ = [
    "GroundTruthVideo",
    "GtAssociation",
    "GtInstance",
    "MetricsConfig",
    "MetricsReport",
    "build_report",
    "count_instances",
    "counting_error",
    "flicker_index",
    "fragmentation",
    "frame_miou",
    "gt_free_fragment_proxy",
    "id_switches",
    "match_to_gt",
    "short_track_count",
]


@dataclass(frozen=True)
class GtInstance:
    gt_id: int
    category: int
    mask: RleMask


@dataclass(frozen=True)
class GroundTruthVideo:
    """Annotated instances per frame; ``gt_id`` is persistent across frames."""

    width: int
    height: int
    frames: tuple[tuple[GtInstance, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(tuple(f) for f in self.frames))
        if self.width <= 0 or self.height <= 0:
            raise DimensionError(
                f"frame dimensions must be positive, got {self.width}x{self.height}",
                invariant="positive-dimensions",
            )
        for t, frame in enumerate(self.frames):
            ids = [inst.gt_id for inst in frame]
            if len(set(ids)) != len(ids):
                raise ValidationError("duplicate gt identity within a frame", invariant="unique-gt-ids", frame_index=t)
            for inst in frame:
                if inst.mask.width != self.width or inst.mask.height != self.height:
                    raise DimensionError(
                        f"gt {inst.gt_id} mask has foreign dimensions",
                        invariant="shared-dimensions",
                        frame_index=t,
                    )

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def identities(self) -> list[int]:
        return sorted({inst.gt_id for frame in self.frames for inst in frame})

    def to_predictions(self, score: float = 1.0) -> VideoPredictions:
        """The ground truth as identity-free detections."""
        frames = [
            FrameDetections(t, tuple(Detection(t, inst.category, score, inst.mask) for inst in frame))
            for t, frame in enumerate(self.frames)
        ]
        return VideoPredictions(self.width, self.height, tuple(frames))


@dataclass(frozen=True)
class MetricsConfig:
    """Evaluation parameters.

    ``short_track_len``, ``rebirth_gap`` and ``rebirth_iou`` only affect the
    ground-truth-free proxies.
    """

    match_iou: float = 0.5
    min_track_length: int = 1
    short_track_len: int = 3
    rebirth_gap: int = 3
    rebirth_iou: float = 0.5
    include_filled: bool = True

    def __post_init__(self):
        if not 0.0 < self.match_iou <= 1.0:
            raise ConfigError(f"match_iou must be in (0, 1], got {self.match_iou}")
        if not 0.0 < self.rebirth_iou <= 1.0:
            raise ConfigError(f"rebirth_iou must be in (0, 1], got {self.rebirth_iou}")
        if self.min_track_length < 1 or self.short_track_len < 1 or self.rebirth_gap < 0:
            raise ConfigError("track-length thresholds must be positive and rebirth_gap nonnegative")


@dataclass
class MetricsReport:
    mean_frame_miou: float | None
    id_switches: int | None
    fragments: int | None
    flicker_index: float
    short_track_count: int
    rebirth_count: int
    predicted_count: int
    true_count: int | None = None
    counting_error: int | None = None
    run_name: str = "run"
    remedy: str | None = None

    GT_FIELDS = ("mean_frame_miou", "id_switches", "fragments", "true_count", "counting_error")

    def to_dict(self) -> dict:
        return asdict(self)


def _mask_list(items) -> list[RleMask]:
    if isinstance(items, FrameDetections):
        items = items.detections
    out = []
    for item in items:
        out.append(item if isinstance(item, RleMask) else item.mask)
    return out


def frame_miou(pred, gt_frame) -> float:
    """Foreground IoU between the union of predicted and of GT masks.

    ``pred`` and ``gt_frame`` may hold masks, detections or GT instances.
    Both unions empty counts as a perfect frame (1.0).
    """
    pred_masks = _mask_list(pred)
    gt_masks = _mask_list(gt_frame)
    everything = pred_masks + gt_masks
    if not everything:
        return 1.0
    width, height = everything[0].width, everything[0].height
    p = masks_union(pred_masks, width, height)
    g = masks_union(gt_masks, width, height)
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.0
    return np.count_nonzero(p & g) / union


@dataclass(frozen=True)
class GtAssociation:
    """Per frame, every present gt identity mapped to its track (or ``None``)."""

    frames: tuple[dict[int, int | None], ...] = field(default_factory=tuple)

    def history(self, gt_id: int) -> list[int | None]:
        """Matched track per frame where ``gt_id`` is present, in frame order."""
        return [f[gt_id] for f in self.frames if gt_id in f]

    @property
    def identities(self) -> list[int]:
        return sorted({g for f in self.frames for g in f})


def _check_dims(tracks: TrackSet, width: int, height: int):
    if tracks.width != width or tracks.height != height:
        raise DimensionError(
            f"tracks are {tracks.width}x{tracks.height}, reference is {width}x{height}",
            invariant="shared-dimensions",
        )


def match_to_gt(
    tracks: TrackSet, gt: GroundTruthVideo, match_iou: float = 0.5, include_filled: bool = True
) -> GtAssociation:
    """Frame-by-frame one-to-one greedy matching of GT instances to tracks.

    Same acceptance order as the tracker: descending IoU, ties to the
    smaller gt_id and then the smaller track_id.
    """
    _check_dims(tracks, gt.width, gt.height)
    frames = []
    for t, instances in enumerate(gt.frames):
        insts = sorted(instances, key=lambda i: i.gt_id)
        present = tracks.masks_at(t, include_filled=include_filled)
        scores = np.zeros((len(insts), len(present)))
        for i, inst in enumerate(insts):
            for j, (_, mask) in enumerate(present):
                scores[i, j] = mask_iou(inst.mask, mask)
        assoc: dict[int, int | None] = {inst.gt_id: None for inst in insts}
        for r, c in greedy_match(scores, match_iou):
            assoc[insts[r].gt_id] = present[c][0]
        frames.append(assoc)
    return GtAssociation(tuple(frames))


def id_switches(association: GtAssociation) -> int:
    total = 0
    for gid in association.identities:
        previous = None
        for tid in association.history(gid):
            if tid is None:
                continue
            if previous is not None and tid != previous:
                total += 1
            previous = tid
    return total


def fragmentation(association: GtAssociation) -> int:
    """Interruptions of a GT object's matched status that later resume."""
    total = 0
    for gid in association.identities:
        matched = [tid is not None for tid in association.history(gid)]
        pending = False
        seen_match = False
        for m in matched:
            if m:
                if pending:
                    total += 1
                    pending = False
                seen_match = True
            elif seen_match:
                pending = True
    return total


def flicker_index(tracks: TrackSet) -> float:
    """Mean ``1 - IoU`` over observed masks of a track on adjacent frames."""
    losses = []
    for tr in tracks:
        for t, obs in tr.observations.items():
            nxt = tr.observations.get(t + 1)
            if obs.filled or nxt is None or nxt.filled:
                continue
            losses.append(1.0 - mask_iou(obs.mask, nxt.mask))
    return float(np.mean(losses)) if losses else 0.0


def gt_free_fragment_proxy(tracks: TrackSet, gap: int = 3, link_iou: float = 0.5) -> int:
    """Count rebirth events: (ended track, later track) pairs that look like one object.

    A pair qualifies when the later track starts after the earlier one's last
    frame with at most ``gap`` empty frames in between, and its first observed
    mask has IoU >= ``link_iou`` with the earlier track's last observed mask.
    """
    count = 0
    for a in tracks:
        for b in tracks:
            if a is b or b.first_frame <= a.last_frame:
                continue
            if b.first_frame - a.last_frame - 1 > gap:
                continue
            if mask_iou(a.last_mask, b.first_mask) >= link_iou:
                count += 1
    return count


def short_track_count(tracks: TrackSet, min_length: int = 3) -> int:
    return sum(1 for tr in tracks if tr.num_observed() < min_length)


def count_instances(tracks: TrackSet, category: int | None = None, min_length: int = 1) -> int:
    """Number of distinct identities, optionally per category and minimum length."""
    ids = {
        tr.track_id
        for tr in tracks
        if (category is None or tr.category == category) and tr.num_observed() >= min_length
    }
    return len(ids)


def counting_error(predicted: int, true: int) -> int:
    if true < 0:
        raise ValueError(f"true count must be nonnegative, got {true}")
    return predicted - true


def build_report(
    tracks: TrackSet,
    video: VideoPredictions | None = None,
    gt: GroundTruthVideo | None = None,
    config: MetricsConfig | None = None,
    *,
    run_name: str = "run",
    remedy: str | None = None,
) -> MetricsReport:
    """Compute every metric that the available inputs support.

    Frame mIoU is measured on the masks carried by ``tracks`` (so remedied
    masks are what gets scored); ``video`` is only checked for consistency.
    Without ``gt`` the GT-dependent fields are ``None``.
    """
    config = config or MetricsConfig()
    if video is not None:
        _check_dims(tracks, video.width, video.height)
        if video.num_frames != tracks.num_frames:
            raise ValidationError(
                f"tracks cover {tracks.num_frames} frames, predictions {video.num_frames}",
                invariant="frame-count",
            )
    predicted = count_instances(tracks, min_length=config.min_track_length)
    report = MetricsReport(
        mean_frame_miou=None,
        id_switches=None,
        fragments=None,
        flicker_index=flicker_index(tracks),
        short_track_count=short_track_count(tracks, config.short_track_len),
        rebirth_count=gt_free_fragment_proxy(tracks, config.rebirth_gap, config.rebirth_iou),
        predicted_count=predicted,
        run_name=run_name,
        remedy=remedy,
    )
    if gt is not None:
        _check_dims(tracks, gt.width, gt.height)
        per_frame = [
            frame_miou([m for _, m in tracks.masks_at(t, config.include_filled)], instances)
            for t, instances in enumerate(gt.frames)
        ]
        assoc = match_to_gt(tracks, gt, config.match_iou, config.include_filled)
        true = len(gt.identities)
        report.mean_frame_miou = float(np.mean(per_frame)) if per_frame else 1.0
        report.id_switches = id_switches(assoc)
        report.fragments = fragmentation(assoc)
        report.true_count = true
        report.counting_error = counting_error(predicted, true)
    return report
