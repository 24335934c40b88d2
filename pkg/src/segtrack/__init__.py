"""Temporal stability toolkit for per-frame instance segmentation.

Turns per-frame instance masks into tracks by greedy IoU matching, measures
identity stability (ID switches, fragmentation, flicker), counts instances,
applies post-hoc re-linking and mask smoothing, and generates synthetic
ground truth with controlled failure modes.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DimensionError, ParseError, RleFormatError, SegtrackError, ValidationError
from .masks import BoundingBox, RleMask, mask_area, mask_iou, rle_decode, rle_encode
from .metrics import (
    GroundTruthVideo,
    GtInstance,
    MetricsConfig,
    MetricsReport,
    build_report,
    count_instances,
    counting_error,
    flicker_index,
    fragmentation,
    frame_miou,
    gt_free_fragment_proxy,
    id_switches,
    match_to_gt,
)
from .remedies import RemedyConfig, apply_remedy, relink_tracks, smooth_masks
from .synth import PerturbConfig, ScenarioConfig, degrade, generate_scenario, standard_configs
from .tracker import (
    Detection,
    FrameDetections,
    Observation,
    Track,
    TrackerConfig,
    TrackSet,
    VideoPredictions,
    associate,
    run_tracker,
)
