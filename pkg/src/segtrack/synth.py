"""Synthetic videos of moving disks with known identities, and a degrader that
turns them into imperfect per-frame detections.

All randomness comes from ``numpy.random.Generator`` seeded through
``SeedSequence`` (PCG64 bit generator), which yields the same streams on every
platform. The scenario and the degradation draw from independent streams of
the same integer seed, and every noise variate is drawn whether or not it is
used, so changing one probability leaves the other perturbations untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .masks import RleMask, rle_decode, rle_encode
from .metrics import GroundTruthVideo, GtInstance
from .tracker import Detection, FrameDetections, VideoPredictions

__all__ = [
    "MAX_SPEED_PER_RADIUS",
    "PerturbConfig",
    "ScenarioConfig",
    "degrade",
    "dropout_schedule",
    "generate_scenario",
    "simulate_trajectories",
    "standard_configs",
]

# Per-frame displacement bound relative to the smallest radius. Two equal
# disks offset by 0.45 r overlap with IoU ~0.56, so an unperturbed object
# always stays above the default 0.5 matching threshold.
MAX_SPEED_PER_RADIUS = 0.45

_SCENARIO_STREAM = 0
_DEGRADE_STREAM = 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Scene layout and motion.

    Objects are disks with radius drawn uniformly from ``radius_range`` and a
    speed drawn uniformly from ``velocity_range`` (pixels/frame) in a random
    direction. They move at constant velocity, reflect off the frame border
    and bounce off each other, keeping at least ``min_separation`` pixels of
    clearance between disks.
    """

    width: int = 128
    height: int = 128
    num_frames: int = 50
    num_objects: int = 5
    radius_range: tuple[float, float] = (8.0, 12.0)
    velocity_range: tuple[float, float] = (0.0, 2.0)
    seed: int = 0
    category: int = 1
    min_separation: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "radius_range", tuple(float(r) for r in self.radius_range))
        object.__setattr__(self, "velocity_range", tuple(float(v) for v in self.velocity_range))
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("frame dimensions must be positive")
        if self.num_frames < 0 or self.num_objects < 0:
            raise ConfigError("num_frames and num_objects must be nonnegative")
        r_lo, r_hi = self.radius_range
        if not 0 < r_lo <= r_hi:
            raise ConfigError(f"invalid radius_range {self.radius_range}")
        if 2 * r_hi + 1 > min(self.width, self.height):
            raise ConfigError(f"radius {r_hi} does not fit in a {self.width}x{self.height} frame")
        v_lo, v_hi = self.velocity_range
        if not 0 <= v_lo <= v_hi:
            raise ConfigError(f"invalid velocity_range {self.velocity_range}")
        if v_hi > MAX_SPEED_PER_RADIUS * r_lo:
            raise ConfigError(
                f"max speed {v_hi} exceeds {MAX_SPEED_PER_RADIUS} x min radius ({MAX_SPEED_PER_RADIUS * r_lo:.3g})"
            )
        if self.min_separation < 0:
            raise ConfigError("min_separation must be nonnegative")


@dataclass(frozen=True)
class PerturbConfig:
    """Failure-mode injection rates.

    Attributes:
        dropout_prob: Per object and frame, probability that a dropout burst
            starts (when the object is not already in one).
        dropout_burst_len: Mean of the geometric burst-length distribution (>= 1).
        max_burst_len: Optional cap on burst length.
        jitter_sigma: Std-dev (pixels) of the per-frame boundary offset; the
            rounded offset dilates (positive) or erodes (negative) the mask.
        split_prob: Probability that a mask is emitted as two disjoint halves.
        merge_prob: Probability that two objects with overlapping boxes are
            emitted as a single union mask.
        seed: Seed of the degradation stream.
        forced_dropouts: Extra ``(frame_index, gt_id)`` pairs that are always dropped.
    """

    dropout_prob: float = 0.0
    dropout_burst_len: float = 1.0
    max_burst_len: int | None = None
    jitter_sigma: float = 0.0
    split_prob: float = 0.0
    merge_prob: float = 0.0
    seed: int = 0
    forced_dropouts: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(
            self, "forced_dropouts", frozenset((int(t), int(g)) for t, g in self.forced_dropouts)
        )
        for name in ("dropout_prob", "split_prob", "merge_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.dropout_burst_len < 1.0:
            raise ConfigError("dropout_burst_len must be >= 1")
        if self.max_burst_len is not None and self.max_burst_len < 1:
            raise ConfigError("max_burst_len must be >= 1")
        if self.jitter_sigma < 0:
            raise ConfigError("jitter_sigma must be nonnegative")


def standard_configs(seed: int) -> tuple[ScenarioConfig, PerturbConfig]:
    """The reference perturbed scenario used by the acceptance suite and demos.

    Five disks over 100 frames, short dropout bursts (at most 3 frames, so the
    default re-linking gap can bridge them) and mild boundary jitter.
    """
    scenario = ScenarioConfig(num_frames=100, num_objects=5, radius_range=(10, 14), velocity_range=(0, 1.0), seed=seed)
    perturb = PerturbConfig(
        dropout_prob=0.1, dropout_burst_len=1.5, max_burst_len=3, jitter_sigma=0.4, seed=seed
    )
    return scenario, perturb


def _place(config: ScenarioConfig, rng: np.random.Generator, radii: np.ndarray) -> np.ndarray:
    centers = np.zeros((len(radii), 2))
    for i, r in enumerate(radii):
        for _ in range(10_000):
            c = np.array([
                rng.uniform(r, config.width - 1 - r),
                rng.uniform(r, config.height - 1 - r),
            ])
            gaps = np.hypot(*(centers[:i] - c).T) - radii[:i] - r
            if np.all(gaps >= config.min_separation):
                centers[i] = c
                break
        else:
            raise ConfigError(f"cannot place {len(radii)} separated objects in the frame")
    return centers


def _reflect(pos: np.ndarray, vel: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    pos = pos.copy()
    vel = vel.copy()
    below = pos < lo
    pos[below] = 2 * lo[below] - pos[below]
    vel[below] = -vel[below]
    above = pos > hi
    pos[above] = 2 * hi[above] - pos[above]
    vel[above] = -vel[above]
    return np.clip(pos, lo, hi), vel


def simulate_trajectories(config: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Centers ``(T, N, 2)`` as ``(x, y)`` and radii ``(N,)`` of every object.

    A move that would bring two disks closer than ``min_separation`` is
    cancelled for that frame and the two velocities are exchanged (an elastic
    bounce between equal masses), so separation holds in every frame.
    """
    rng = np.random.default_rng([config.seed, _SCENARIO_STREAM])
    n = config.num_objects
    radii = rng.uniform(*config.radius_range, size=n)
    speeds = rng.uniform(*config.velocity_range, size=n)
    angles = rng.uniform(0.0, 2 * np.pi, size=n)
    vel = np.stack([speeds * np.cos(angles), speeds * np.sin(angles)], axis=1)
    pos = _place(config, rng, radii)
    lo = np.stack([radii, radii], axis=1)
    hi = np.stack([config.width - 1 - radii, config.height - 1 - radii], axis=1)
    need = radii[:, None] + radii[None, :] + config.min_separation

    out = np.zeros((config.num_frames, n, 2))
    for t in range(config.num_frames):
        out[t] = pos
        new, vel = _reflect(pos + vel, vel, lo, hi)
        moved = np.ones(n, dtype=bool)
        while True:
            dist = np.hypot(*(new[:, None, :] - new[None, :, :]).transpose(2, 0, 1))
            np.fill_diagonal(dist, np.inf)
            clash = np.argwhere(np.triu(dist < need - 1e-9))
            clash = [(i, j) for i, j in clash if moved[i] or moved[j]]
            if not clash:
                break
            i, j = clash[0]
            vel[[i, j]] = vel[[j, i]]
            for k in (i, j):
                new[k] = pos[k]
                moved[k] = False
        pos = new
    return out, radii


def _disk(width: int, height: int, cx: float, cy: float, r: float) -> np.ndarray:
    ys, xs = np.ogrid[:height, :width]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def generate_scenario(config: ScenarioConfig) -> GroundTruthVideo:
    """Render the scenario as ground truth; object ``i`` has gt_id ``i + 1``."""
    centers, radii = simulate_trajectories(config)
    frames = []
    for t in range(config.num_frames):
        frame = []
        for i, r in enumerate(radii):
            cx, cy = centers[t, i]
            mask = rle_encode(_disk(config.width, config.height, cx, cy, r))
            frame.append(GtInstance(i + 1, config.category, mask))
        frames.append(tuple(frame))
    return GroundTruthVideo(config.width, config.height, tuple(frames))


def dropout_schedule(num_frames: int, gt_ids: Iterable[int], config: PerturbConfig) -> set[tuple[int, int]]:
    """``(frame_index, gt_id)`` pairs removed by :func:`degrade`.

    A burst can only start on a frame where the object was visible in the
    previous frame, so ``max_burst_len`` bounds every run of consecutive
    missing frames (forced dropouts aside). With ``dropout_prob`` 1 the
    object is missing everywhere.
    """
    ids = list(gt_ids)
    starts, lengths, _, _, _, _ = _draw_noise(num_frames, len(ids), config)
    dropped = set(config.forced_dropouts)
    always = config.dropout_prob >= 1.0
    for m, gid in enumerate(ids):
        remaining = 0
        previous_dropped = False
        for t in range(num_frames):
            if remaining > 0:
                dropped.add((t, gid))
                remaining -= 1
                previous_dropped = True
            elif (always or not previous_dropped) and starts[t, m] < config.dropout_prob:
                dropped.add((t, gid))
                remaining = lengths[t, m] - 1
                previous_dropped = True
            else:
                previous_dropped = False
    return dropped


def _draw_noise(num_frames: int, num_ids: int, config: PerturbConfig):
    rng = np.random.default_rng([config.seed, _DEGRADE_STREAM])
    shape = (num_frames, num_ids)
    starts = rng.random(shape)
    lengths = rng.geometric(1.0 / config.dropout_burst_len, size=shape)
    if config.max_burst_len is not None:
        lengths = np.minimum(lengths, config.max_burst_len)
    jitter = np.rint(rng.standard_normal(shape) * config.jitter_sigma).astype(int)
    split_u = rng.random(shape)
    split_axis = rng.integers(0, 2, size=shape)
    merge_u = rng.random((num_frames, num_ids, num_ids))
    return starts, lengths, jitter, split_u, split_axis, merge_u


def _disk_structure(k: int) -> np.ndarray:
    ys, xs = np.ogrid[-k : k + 1, -k : k + 1]
    return xs * xs + ys * ys <= k * k


def _jitter(bitmap: np.ndarray, k: int) -> np.ndarray:
    if k > 0:
        return ndimage.binary_dilation(bitmap, structure=_disk_structure(k))
    if k < 0:
        return ndimage.binary_erosion(bitmap, structure=_disk_structure(-k), border_value=0)
    return bitmap


def _split(bitmap: np.ndarray, axis: int) -> list[np.ndarray]:
    coords = np.nonzero(bitmap)[axis]
    cut = int(np.floor(coords.mean()))
    index = np.arange(bitmap.shape[axis])
    first = (index <= cut)[:, None] if axis == 0 else (index <= cut)[None, :]
    halves = [bitmap & first, bitmap & ~first]
    if not halves[0].any() or not halves[1].any():
        return [bitmap]
    return halves


def degrade(gt: GroundTruthVideo, config: PerturbConfig | None = None) -> VideoPredictions:
    """Identity-free detections derived from ``gt`` with injected failures.

    Per frame the steps are: dropout bursts remove objects; boundary jitter
    dilates or erodes each mask (an eroded-away mask is dropped); objects with
    overlapping boxes may merge pairwise into one union mask; remaining masks
    may split into two halves along a row or column through their centroid.
    Every detection has score 1.0. With all rates at zero the detections are
    exactly the GT masks.
    """
    config = config or PerturbConfig()
    ids = gt.identities
    col = {gid: m for m, gid in enumerate(ids)}
    _, _, jitter, split_u, split_axis, merge_u = _draw_noise(gt.num_frames, len(ids), config)
    dropped = dropout_schedule(gt.num_frames, ids, config)

    frames = []
    for t, instances in enumerate(gt.frames):
        live = []
        for inst in sorted(instances, key=lambda i: i.gt_id):
            if (t, inst.gt_id) in dropped or inst.mask.area == 0:
                continue
            m = col[inst.gt_id]
            k = int(jitter[t, m])
            if k == 0:
                live.append((inst, inst.mask, None))
                continue
            bitmap = _jitter(rle_decode(inst.mask), k)
            if bitmap.any():
                live.append((inst, rle_encode(bitmap), bitmap))

        emitted: list[tuple[int, np.ndarray | RleMask]] = []
        merged = set()
        for a in range(len(live)):
            if a in merged:
                continue
            inst_a, mask_a, bits_a = live[a]
            partner = None
            for b in range(a + 1, len(live)):
                if b in merged:
                    continue
                inst_b, mask_b, _ = live[b]
                if not mask_a.bbox.overlaps(mask_b.bbox):
                    continue
                if merge_u[t, col[inst_a.gt_id], col[inst_b.gt_id]] < config.merge_prob:
                    partner = b
                    break
            if partner is not None:
                merged.update((a, partner))
                union = rle_decode(mask_a) | rle_decode(live[partner][1])
                emitted.append((inst_a.category, union))
                continue
            m = col[inst_a.gt_id]
            if split_u[t, m] < config.split_prob:
                bits = bits_a if bits_a is not None else rle_decode(mask_a)
                emitted.extend((inst_a.category, h) for h in _split(bits, int(split_axis[t, m])))
            else:
                emitted.append((inst_a.category, mask_a))

        dets = []
        for category, m in emitted:
            mask = m if isinstance(m, RleMask) else rle_encode(m)
            dets.append(Detection(t, category, 1.0, mask))
        frames.append(FrameDetections(t, tuple(dets)))
    return VideoPredictions(gt.width, gt.height, tuple(frames))
