import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from segtrack.errors import DimensionError, ParseError, RleFormatError, ValidationError
from segtrack.formats import (
    load_groundtruth,
    load_predictions,
    load_tracks,
    read_tracks_file,
    save_groundtruth,
    save_predictions,
    save_tracks,
)
from segtrack.remedies import RemedyConfig, apply_remedy
from segtrack.synth import PerturbConfig, ScenarioConfig, degrade, generate_scenario
from segtrack.tracker import TrackSet, run_tracker


@pytest.fixture
def scenario():
    gt = generate_scenario(ScenarioConfig(width=48, height=40, num_frames=12, num_objects=3, radius_range=(5, 7), velocity_range=(0, 2), seed=1))
    return gt, degrade(gt, PerturbConfig(dropout_prob=0.2, jitter_sigma=0.8, split_prob=0.1, seed=1))


def _predictions_doc(records, num_frames=2, width=4, height=3):
    return {
        "format": "segtrack/predictions",
        "version": 1,
        "width": width,
        "height": height,
        "num_frames": num_frames,
        "detections": records,
    }


def _record(frame_index=0, counts=(5, 3, 4), size=(3, 4), score=0.9):
    return {
        "frame_index": frame_index,
        "category_id": 1,
        "score": score,
        "segmentation": {"size": list(size), "counts": list(counts)},
    }


def _write(tmp_path, doc, name="f.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestPredictions:
    def test_zero_noise_roundtrip(self, tmp_path):
        gt = generate_scenario(ScenarioConfig(num_frames=6, num_objects=4, seed=2))
        video = degrade(gt)
        save_predictions(video, tmp_path / "p.json")
        loaded = load_predictions(tmp_path / "p.json")
        assert loaded == video
        assert all(len(f.detections) == 4 for f in loaded.frames)

    def test_perturbed_roundtrip(self, tmp_path, scenario):
        _, video = scenario
        save_predictions(video, tmp_path / "p.json")
        assert load_predictions(tmp_path / "p.json") == video

    def test_run_sum_short_by_one(self, tmp_path):
        path = _write(tmp_path, _predictions_doc([_record(), _record(1, counts=(5, 3, 3))]))
        with pytest.raises(RleFormatError) as exc:
            load_predictions(path)
        assert exc.value.record == 1 and exc.value.frame_index == 1
        assert exc.value.invariant == "run-sum"
        assert "record=1" in str(exc.value)

    def test_header_only(self, tmp_path):
        video = load_predictions(_write(tmp_path, _predictions_doc([], num_frames=5)))
        assert video.num_frames == 5 and video.num_detections == 0

    def test_frame_out_of_range(self, tmp_path):
        with pytest.raises(ValidationError) as exc:
            load_predictions(_write(tmp_path, _predictions_doc([_record(frame_index=2)])))
        assert exc.value.invariant == "frame-range"

    def test_score_out_of_range(self, tmp_path):
        with pytest.raises(ValidationError) as exc:
            load_predictions(_write(tmp_path, _predictions_doc([_record(score=1.5)])))
        assert exc.value.invariant == "score-range"

    def test_size_mismatch(self, tmp_path):
        with pytest.raises(DimensionError):
            load_predictions(_write(tmp_path, _predictions_doc([_record(size=(4, 3))])))

    def test_errors_are_distinguishable(self, tmp_path):
        bad_json = tmp_path / "bad.json"
        bad_json.write_text("{not json")
        with pytest.raises(ParseError):
            load_predictions(bad_json)
        with pytest.raises(ParseError):
            load_predictions(_write(tmp_path, {**_predictions_doc([]), "format": "other"}))
        with pytest.raises(ParseError):
            load_predictions(_write(tmp_path, _predictions_doc([{"frame_index": 0}])))
        # a parse error is not a run-sum error and vice versa
        assert not issubclass(ParseError, RleFormatError) and not issubclass(RleFormatError, ParseError)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_predictions(tmp_path / "absent.json")


def test_groundtruth_roundtrip(tmp_path, scenario):
    gt, _ = scenario
    save_groundtruth(gt, tmp_path / "g.json")
    assert load_groundtruth(tmp_path / "g.json") == gt


def test_groundtruth_duplicate_id(tmp_path, scenario):
    gt, _ = scenario
    save_groundtruth(gt, tmp_path / "g.json")
    doc = json.loads((tmp_path / "g.json").read_text())
    doc["instances"][1]["gt_id"] = doc["instances"][0]["gt_id"]
    with pytest.raises(ValidationError) as exc:
        load_groundtruth(_write(tmp_path, doc))
    assert exc.value.invariant == "unique-gt-ids"


class TestTracks:
    def test_roundtrip_with_filled_and_merges(self, tmp_path, scenario):
        _, video = scenario
        tracks = apply_remedy(run_tracker(video), RemedyConfig(fill_gaps=True, relink_gap=5))
        prov = {"command": "remedy", "nested": {"a": [1, 2]}}
        save_tracks(tracks, tmp_path / "t.json", prov)
        loaded, loaded_prov = read_tracks_file(tmp_path / "t.json")
        assert loaded == tracks and loaded_prov == prov

    def test_empty_roundtrip(self, tmp_path):
        empty = TrackSet(5, 5, 3, ())
        save_tracks(empty, tmp_path / "t.json")
        assert load_tracks(tmp_path / "t.json") == empty

    def test_duplicate_track_id(self, tmp_path, scenario):
        _, video = scenario
        save_tracks(run_tracker(video), tmp_path / "t.json")
        doc = json.loads((tmp_path / "t.json").read_text())
        doc["tracks"][1]["track_id"] = doc["tracks"][0]["track_id"]
        with pytest.raises(ValidationError) as exc:
            load_tracks(_write(tmp_path, doc))
        assert exc.value.invariant == "unique-track-ids"

    def test_decreasing_frames(self, tmp_path, scenario):
        _, video = scenario
        save_tracks(run_tracker(video), tmp_path / "t.json")
        doc = json.loads((tmp_path / "t.json").read_text())
        obs = next(tr["observations"] for tr in doc["tracks"] if len(tr["observations"]) > 1)
        obs.reverse()
        with pytest.raises(ValidationError) as exc:
            load_tracks(_write(tmp_path, doc))
        assert exc.value.invariant == "increasing-frames"

    def test_byte_stable(self, tmp_path, scenario):
        _, video = scenario
        tracks = run_tracker(video)
        save_tracks(tracks, tmp_path / "a.json")
        save_tracks(load_tracks(tmp_path / "a.json"), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 0.4), st.floats(0, 1.5))
def test_tracks_roundtrip_property(tmp_path_factory, seed, p, sigma):
    gt = generate_scenario(ScenarioConfig(width=32, height=32, num_frames=8, num_objects=2, radius_range=(4, 6), velocity_range=(0, 1.5), seed=seed))
    video = degrade(gt, PerturbConfig(dropout_prob=p, jitter_sigma=sigma, seed=seed))
    tracks = apply_remedy(run_tracker(video), RemedyConfig(fill_gaps=True))
    path = tmp_path_factory.mktemp("rt") / "t.json"
    save_tracks(tracks, path)
    assert load_tracks(path) == tracks
    np.testing.assert_equal(len(load_tracks(path)), len(tracks))
