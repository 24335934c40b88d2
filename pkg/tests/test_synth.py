import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from segtrack.errors import ConfigError
from segtrack.masks import mask_iou, masks_union, rle_decode, rle_encode
from segtrack.metrics import GroundTruthVideo, GtInstance, build_report
from segtrack.synth import (
    MAX_SPEED_PER_RADIUS,
    PerturbConfig,
    ScenarioConfig,
    degrade,
    dropout_schedule,
    generate_scenario,
    simulate_trajectories,
    standard_configs,
)
from segtrack.tracker import TrackerConfig, run_tracker


class TestGenerate:
    def test_no_objects(self):
        gt = generate_scenario(ScenarioConfig(num_frames=7, num_objects=0))
        assert gt.num_frames == 7
        assert all(frame == () for frame in gt.frames)

    def test_zero_velocity_is_static(self):
        gt = generate_scenario(ScenarioConfig(num_frames=5, num_objects=3, velocity_range=(0, 0), seed=3))
        assert all(len(frame) == 3 for frame in gt.frames)
        assert all(frame == gt.frames[0] for frame in gt.frames)

    def test_deterministic(self):
        cfg = ScenarioConfig(num_frames=20, num_objects=4, seed=9)
        assert generate_scenario(cfg) == generate_scenario(cfg)

    def test_seed_changes_output(self):
        a = generate_scenario(ScenarioConfig(num_frames=3, seed=1))
        b = generate_scenario(ScenarioConfig(num_frames=3, seed=2))
        assert a != b

    def test_zero_frames(self):
        assert generate_scenario(ScenarioConfig(num_frames=0)).frames == ()

    def test_persistent_identities(self):
        gt = generate_scenario(ScenarioConfig(num_frames=10, num_objects=4, seed=5))
        assert gt.identities == [1, 2, 3, 4]
        assert all(sorted(i.gt_id for i in frame) == [1, 2, 3, 4] for frame in gt.frames)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"radius_range": (70, 80)},
            {"radius_range": (0, 5)},
            {"radius_range": (9, 5)},
            {"num_objects": -1},
            {"num_frames": -1},
            {"width": 0},
            {"velocity_range": (0, 10)},
            {"velocity_range": (2, 1)},
        ],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            ScenarioConfig(**kwargs)

    def test_overcrowded(self):
        with pytest.raises(ConfigError):
            generate_scenario(ScenarioConfig(width=30, height=30, num_objects=20, radius_range=(6, 7), velocity_range=(0, 1)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_motion_invariants(seed, n):
    cfg = ScenarioConfig(num_frames=60, num_objects=n, seed=seed)
    centers, radii = simulate_trajectories(cfg)
    # inside the frame
    assert np.all(centers[..., 0] >= radii - 1e-9) and np.all(centers[..., 0] <= cfg.width - 1 - radii + 1e-9)
    assert np.all(centers[..., 1] >= radii - 1e-9) and np.all(centers[..., 1] <= cfg.height - 1 - radii + 1e-9)
    # separated
    for t in range(cfg.num_frames):
        d = np.hypot(*(centers[t, :, None] - centers[t, None, :]).transpose(2, 0, 1))
        need = radii[:, None] + radii[None, :] + cfg.min_separation
        np.fill_diagonal(d, np.inf)
        assert np.all(d >= need - 1e-6)
    # bounded displacement
    step = np.hypot(*np.diff(centers, axis=0).transpose(2, 0, 1))
    assert np.all(step <= MAX_SPEED_PER_RADIUS * cfg.radius_range[0] + 1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_velocity_bound_keeps_self_iou(seed):
    # worst case: every object at the maximum speed with the smallest radius
    cfg = ScenarioConfig(num_frames=40, num_objects=4, radius_range=(8, 8), velocity_range=(3.6, 3.6), seed=seed)
    gt = generate_scenario(cfg)
    for prev, cur in zip(gt.frames, gt.frames[1:]):
        for a, b in zip(prev, cur):
            assert mask_iou(a.mask, b.mask) >= 0.5


class TestDegrade:
    def gt(self, **kw):
        return generate_scenario(ScenarioConfig(**{"num_frames": 25, "num_objects": 4, "seed": 7, **kw}))

    def test_zero_noise_is_exact(self):
        gt = self.gt()
        video = degrade(gt, PerturbConfig())
        for frame, dets in zip(gt.frames, video.frames):
            assert sorted(d.mask.runs for d in dets.detections) == sorted(i.mask.runs for i in frame)
            assert all(d.score == 1.0 for d in dets.detections)

    def test_full_dropout(self):
        video = degrade(self.gt(), PerturbConfig(dropout_prob=1.0))
        assert video.num_detections == 0

    def test_split_union_equals_gt(self):
        gt = self.gt(num_objects=1, velocity_range=(0, 0))
        video = degrade(gt, PerturbConfig(split_prob=1.0, seed=4))
        for frame, dets in zip(gt.frames, video.frames):
            assert len(dets.detections) == 2
            halves = [rle_decode(d.mask) for d in dets.detections]
            assert not (halves[0] & halves[1]).any()
            np.testing.assert_array_equal(
                masks_union([d.mask for d in dets.detections], gt.width, gt.height), rle_decode(frame[0].mask)
            )

    def test_merge_produces_union(self):
        ell = np.zeros((8, 8), bool)
        ell[0, :6] = ell[:6, 0] = True
        block = np.zeros((8, 8), bool)
        block[2:6, 2:6] = True
        far = np.zeros((8, 8), bool)
        far[7, 7] = True
        masks = [rle_encode(ell), rle_encode(block), rle_encode(far)]
        frame = tuple(GtInstance(i + 1, 1, m) for i, m in enumerate(masks))
        gt = GroundTruthVideo(8, 8, (frame, frame))
        video = degrade(gt, PerturbConfig(merge_prob=1.0))
        for dets in video.frames:
            assert len(dets.detections) == 2
            np.testing.assert_array_equal(rle_decode(dets.detections[0].mask), ell | block)
            assert dets.detections[1].mask == masks[2]
        assert degrade(gt, PerturbConfig(merge_prob=0.0)).num_detections == 6

    def test_deterministic(self):
        gt = self.gt()
        cfg = PerturbConfig(dropout_prob=0.2, jitter_sigma=1.0, split_prob=0.1, merge_prob=0.2, seed=3)
        assert degrade(gt, cfg) == degrade(gt, cfg)

    def test_common_random_numbers(self):
        # raising the dropout rate removes detections but leaves the jitter of the rest untouched
        gt = self.gt()
        clean = degrade(gt, PerturbConfig(jitter_sigma=1.0, seed=2))
        lossy = degrade(gt, PerturbConfig(jitter_sigma=1.0, dropout_prob=0.2, seed=2))
        assert lossy.num_detections < clean.num_detections
        for a, b in zip(clean.frames, lossy.frames):
            assert {d.mask for d in b.detections} <= {d.mask for d in a.detections}

    def test_burst_length_cap(self):
        gt = self.gt(num_frames=200)
        cfg = PerturbConfig(dropout_prob=0.3, dropout_burst_len=4.0, max_burst_len=3, seed=1)
        dropped = dropout_schedule(gt.num_frames, gt.identities, cfg)
        for gid in gt.identities:
            run = longest = 0
            for t in range(gt.num_frames):
                run = run + 1 if (t, gid) in dropped else 0
                longest = max(longest, run)
            assert longest <= 3

    def test_forced_dropouts(self):
        gt = self.gt()
        video = degrade(gt, PerturbConfig(forced_dropouts={(3, 1), (4, 2)}))
        assert len(video.frames[3].detections) == 3 and len(video.frames[4].detections) == 3

    def test_jitter_changes_area(self):
        gt = self.gt()
        video = degrade(gt, PerturbConfig(jitter_sigma=2.0, seed=5))
        areas = sorted(d.mask.area for f in video.frames for d in f.detections)
        gt_areas = sorted(i.mask.area for f in gt.frames for i in f)
        assert areas != gt_areas

    @pytest.mark.parametrize(
        "kwargs",
        [{"dropout_prob": 1.5}, {"split_prob": -0.1}, {"merge_prob": 2}, {"dropout_burst_len": 0.5}, {"jitter_sigma": -1}, {"max_burst_len": 0}],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            PerturbConfig(**kwargs)


@pytest.mark.parametrize("n", [1, 3, 5, 10])
def test_closure(n):
    for seed in range(3):
        gt = generate_scenario(ScenarioConfig(num_frames=100, num_objects=n, seed=seed))
        video = degrade(gt, PerturbConfig(seed=seed))
        r = build_report(run_tracker(video), video, gt)
        assert (r.id_switches, r.fragments, r.mean_frame_miou, r.predicted_count) == (0, 0, 1.0, n)


def _forced_interior(gt, k, rng):
    """K length-1 dropouts strictly inside the video, two or more frames apart per object."""
    chosen = set()
    while len(chosen) < k:
        t = int(rng.integers(1, gt.num_frames - 1))
        gid = int(rng.choice(gt.identities))
        if all(g != gid or abs(s - t) >= 2 for s, g in chosen):
            chosen.add((t, gid))
    return chosen


@pytest.mark.parametrize("seed", range(5))
def test_injected_faults_are_detected(seed):
    rng = np.random.default_rng(seed)
    gt = generate_scenario(ScenarioConfig(num_frames=40, num_objects=3, seed=seed))
    k = int(rng.integers(0, 6))
    video = degrade(gt, PerturbConfig(forced_dropouts=_forced_interior(gt, k, rng), seed=seed))
    r = build_report(run_tracker(video, TrackerConfig(max_age=0)), video, gt)
    assert r.fragments == k
    assert r.counting_error == k


def test_standard_configs():
    scenario, perturb = standard_configs(4)
    assert scenario.seed == perturb.seed == 4
    assert perturb.max_burst_len <= 3
