"""JSON file formats for predictions, ground truth and tracks.

Every file is a single JSON object with a ``format`` tag, an integer
``version``, the frame grid (``width``, ``height``, ``num_frames``) and a flat
list of records. Masks are stored COCO-style as
``{"size": [height, width], "counts": [...]}`` with row-major,
background-first uncompressed counts. See ``FORMATS.md`` for the byte layout.

Loading validates every declared invariant. Malformed JSON or missing fields
raise :class:`~segtrack.errors.ParseError`; invariant violations raise a
:class:`~segtrack.errors.ValidationError` subclass naming the record index,
frame and invariant.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import DimensionError, ParseError, ValidationError
from .masks import RleMask
from .metrics import GroundTruthVideo, GtInstance
from .tracker import Detection, FrameDetections, MergeEvent, Observation, Track, TrackSet, VideoPredictions

PREDICTIONS_FORMAT = "segtrack/predictions"
GROUNDTRUTH_FORMAT = "segtrack/groundtruth"
TRACKS_FORMAT = "segtrack/tracks"
FORMAT_VERSION = 1


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dump_json(obj, path):
    """Write ``obj`` with sorted keys and compact separators (byte-stable)."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def _read(path, expected_format: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    if doc.get("format") != expected_format:
        raise ParseError(f"{path}: expected format {expected_format!r}, got {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported version {doc.get('version')!r}")
    for key in ("width", "height", "num_frames"):
        if not isinstance(doc.get(key), int) or isinstance(doc.get(key), bool):
            raise ParseError(f"{path}: header field {key!r} must be an integer")
    if doc["width"] <= 0 or doc["height"] <= 0:
        raise DimensionError(f"{path}: non-positive frame size", invariant="positive-dimensions")
    if doc["num_frames"] < 0:
        raise ValidationError(f"{path}: negative num_frames", invariant="frame-count")
    return doc


def _field(record: dict, key: str, kind, index: int):
    try:
        value = record[key]
    except (KeyError, TypeError):
        raise ParseError(f"missing field {key!r}", record=index) from None
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"field {key!r} must be an integer", record=index)
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ParseError(f"field {key!r} must be a number", record=index)
    if kind is bool and not isinstance(value, bool):
        raise ParseError(f"field {key!r} must be a boolean", record=index)
    if kind in (list, dict) and not isinstance(value, kind):
        raise ParseError(f"field {key!r} must be a {kind.__name__}", record=index)
    return value


def _frame_index(record: dict, index: int, num_frames: int) -> int:
    t = _field(record, "frame_index", int, index)
    if not 0 <= t < num_frames:
        raise ValidationError(
            f"frame_index outside [0, {num_frames})", invariant="frame-range", record=index, frame_index=t
        )
    return t


def _mask(seg, width: int, height: int, index: int, frame_index: int) -> RleMask:
    if not isinstance(seg, dict):
        raise ParseError("segmentation must be an object", record=index)
    size = _field(seg, "size", list, index)
    counts = _field(seg, "counts", list, index)
    if size != [height, width]:
        raise DimensionError(
            f"segmentation size {size} differs from header [{height}, {width}]",
            invariant="shared-dimensions",
            record=index,
            frame_index=frame_index,
        )
    if not all(isinstance(c, int) and not isinstance(c, bool) for c in counts):
        raise ParseError("counts must be integers", record=index)
    try:
        return RleMask(width, height, tuple(counts))
    except ValidationError as exc:
        raise type(exc)(str(exc), invariant=exc.invariant, record=index, frame_index=frame_index) from None


def _seg(mask: RleMask) -> dict:
    return {"size": [mask.height, mask.width], "counts": list(mask.runs)}


def _records(doc: dict, key: str) -> list:
    records = doc.get(key)
    if not isinstance(records, list):
        raise ParseError(f"field {key!r} must be a list")
    return records


def save_predictions(video: VideoPredictions, path):
    records = [
        {
            "frame_index": d.frame_index,
            "category_id": d.category,
            "score": d.score,
            "segmentation": _seg(d.mask),
        }
        for frame in video.frames
        for d in frame.detections
    ]
    dump_json(
        {
            "format": PREDICTIONS_FORMAT,
            "version": FORMAT_VERSION,
            "width": video.width,
            "height": video.height,
            "num_frames": video.num_frames,
            "detections": records,
        },
        path,
    )


def load_predictions(path) -> VideoPredictions:
    """Read and validate a predictions file.

    Records may appear in any frame order; within a frame, file order is kept.
    """
    doc = _read(path, PREDICTIONS_FORMAT)
    w, h, n = doc["width"], doc["height"], doc["num_frames"]
    per_frame: list[list[Detection]] = [[] for _ in range(n)]
    for i, rec in enumerate(_records(doc, "detections")):
        t = _frame_index(rec, i, n)
        score = _field(rec, "score", float, i)
        if not 0.0 <= score <= 1.0:
            raise ValidationError("score outside [0, 1]", invariant="score-range", record=i, frame_index=t)
        mask = _mask(_field(rec, "segmentation", dict, i), w, h, i, t)
        per_frame[t].append(Detection(t, _field(rec, "category_id", int, i), float(score), mask))
    return VideoPredictions(w, h, tuple(FrameDetections(t, tuple(d)) for t, d in enumerate(per_frame)))


def save_groundtruth(gt: GroundTruthVideo, path):
    records = [
        {
            "frame_index": t,
            "gt_id": inst.gt_id,
            "category_id": inst.category,
            "segmentation": _seg(inst.mask),
        }
        for t, frame in enumerate(gt.frames)
        for inst in frame
    ]
    dump_json(
        {
            "format": GROUNDTRUTH_FORMAT,
            "version": FORMAT_VERSION,
            "width": gt.width,
            "height": gt.height,
            "num_frames": gt.num_frames,
            "instances": records,
        },
        path,
    )


def load_groundtruth(path) -> GroundTruthVideo:
    doc = _read(path, GROUNDTRUTH_FORMAT)
    w, h, n = doc["width"], doc["height"], doc["num_frames"]
    per_frame: list[list[GtInstance]] = [[] for _ in range(n)]
    for i, rec in enumerate(_records(doc, "instances")):
        t = _frame_index(rec, i, n)
        gid = _field(rec, "gt_id", int, i)
        if any(inst.gt_id == gid for inst in per_frame[t]):
            raise ValidationError(
                f"gt_id {gid} repeated within a frame", invariant="unique-gt-ids", record=i, frame_index=t
            )
        mask = _mask(_field(rec, "segmentation", dict, i), w, h, i, t)
        per_frame[t].append(GtInstance(gid, _field(rec, "category_id", int, i), mask))
    return GroundTruthVideo(w, h, tuple(tuple(f) for f in per_frame))


def save_tracks(tracks: TrackSet, path, provenance: dict | None = None):
    """Write a track set; ``provenance`` is stored verbatim alongside it."""
    records = [
        {
            "track_id": tr.track_id,
            "category_id": tr.category,
            "observations": [
                {"frame_index": t, "filled": o.filled, "segmentation": _seg(o.mask)}
                for t, o in tr.observations.items()
            ],
        }
        for tr in tracks
    ]
    merges = [
        {
            "kept_id": m.kept_id,
            "absorbed_id": m.absorbed_id,
            "death_frame": m.death_frame,
            "birth_frame": m.birth_frame,
            "iou": m.iou,
        }
        for m in tracks.merges
    ]
    dump_json(
        {
            "format": TRACKS_FORMAT,
            "version": FORMAT_VERSION,
            "width": tracks.width,
            "height": tracks.height,
            "num_frames": tracks.num_frames,
            "tracks": records,
            "merges": merges,
            "provenance": provenance or {},
        },
        path,
    )


def read_tracks_file(path) -> tuple[TrackSet, dict]:
    """Load a tracks file and return it with its stored provenance."""
    doc = _read(path, TRACKS_FORMAT)
    w, h, n = doc["width"], doc["height"], doc["num_frames"]
    tracks = []
    seen = set()
    for i, rec in enumerate(_records(doc, "tracks")):
        tid = _field(rec, "track_id", int, i)
        if tid in seen:
            raise ValidationError(f"duplicate track_id {tid}", invariant="unique-track-ids", record=i)
        seen.add(tid)
        obs = {}
        for o in _field(rec, "observations", list, i):
            t = _frame_index(o, i, n)
            if t in obs or (obs and t < max(obs)):
                raise ValidationError(
                    "observation frames must be strictly increasing",
                    invariant="increasing-frames",
                    record=i,
                    frame_index=t,
                )
            mask = _mask(_field(o, "segmentation", dict, i), w, h, i, t)
            obs[t] = Observation(mask, _field(o, "filled", bool, i))
        if not obs:
            raise ValidationError(f"track {tid} has no observations", invariant="nonempty-track", record=i)
        tracks.append(Track(tid, _field(rec, "category_id", int, i), obs))
    merges = []
    for i, m in enumerate(doc.get("merges", [])):
        merges.append(
            MergeEvent(
                _field(m, "kept_id", int, i),
                _field(m, "absorbed_id", int, i),
                _field(m, "death_frame", int, i),
                _field(m, "birth_frame", int, i),
                float(_field(m, "iou", float, i)),
            )
        )
    provenance = doc.get("provenance") or {}
    return TrackSet(w, h, n, tuple(tracks), tuple(merges)), provenance


def load_tracks(path) -> TrackSet:
    return read_tracks_file(path)[0]
