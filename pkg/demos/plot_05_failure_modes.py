"""
Injected failure modes
======================

The degrader turns clean ground truth into detections with dropouts, boundary
jitter, splits and merges. Rendering a frame of the resulting tracks shows
each failure as a color change or an extra track.
"""

import matplotlib.pyplot as plt

from _common import OUT, save
from segtrack import PerturbConfig, ScenarioConfig, degrade, generate_scenario, run_tracker
from segtrack.render import overlay_image, render_overlay

gt = generate_scenario(ScenarioConfig(num_frames=30, num_objects=6, seed=8))
modes = {
    "clean": PerturbConfig(),
    "dropout": PerturbConfig(dropout_prob=0.2, dropout_burst_len=2, seed=1),
    "jitter": PerturbConfig(jitter_sigma=1.5, seed=1),
    "split": PerturbConfig(split_prob=0.3, seed=1),
}

fig, axes = plt.subplots(1, len(modes), figsize=(3 * len(modes), 3))
for ax, (name, cfg) in zip(axes, modes.items()):
    tracks = run_tracker(degrade(gt, cfg))
    print(f"{name:<8} {len(tracks):3d} tracks for {len(gt.identities)} objects")
    ax.imshow(overlay_image(tracks, 20))
    ax.set_title(f"{name}: {len(tracks)} tracks")
    ax.axis("off")
save(fig, "05_failure_modes.png")

# the same overlay as a dependency-free PPM file
render_overlay(run_tracker(degrade(gt, modes["dropout"])), 20, OUT / "05_dropout_frame20.ppm")
