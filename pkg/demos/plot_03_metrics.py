"""
Identity metrics and counting
=============================

With ground truth, ID switches and fragments measure how often an object's
track id changes or is interrupted. Counting by distinct track ids turns each
fragment into an extra "object", so counting error follows fragmentation.
"""

from dataclasses import replace

import matplotlib.pyplot as plt
import numpy as np

from _common import save
from segtrack import build_report, degrade, generate_scenario, run_tracker, standard_configs

rates = [0.0, 0.02, 0.05, 0.1, 0.2]
rows = []
for p in rates:
    per_seed = []
    for seed in range(10):
        scenario, perturb = standard_configs(seed)
        gt = generate_scenario(scenario)
        video = degrade(gt, replace(perturb, dropout_prob=p))
        r = build_report(run_tracker(video), video, gt)
        per_seed.append((r.id_switches, r.fragments, r.counting_error, r.mean_frame_miou, r.flicker_index))
    rows.append(np.mean(per_seed, axis=0))
rows = np.array(rows)

print("p      IDSW   Frag   count err  mIoU    flicker")
for p, (sw, fr, err, miou, fl) in zip(rates, rows):
    print(f"{p:<5}  {sw:5.1f}  {fr:5.1f}  {err:+8.1f}  {miou:.3f}   {fl:.3f}")

# %%
# The frame-level mIoU barely moves while identity metrics climb steeply:
# per-frame accuracy hides temporal instability.
fig, ax1 = plt.subplots(figsize=(6, 3.5))
ax1.plot(rates, rows[:, 0], "o-", label="ID switches")
ax1.plot(rates, rows[:, 1], "s-", label="fragments")
ax1.plot(rates, rows[:, 2], "^-", label="counting error")
ax1.set_xlabel("dropout probability")
ax1.legend(loc="upper left")
ax2 = ax1.twinx()
ax2.plot(rates, rows[:, 3], "k--", label="frame mIoU")
ax2.set_ylim(0, 1.05)
ax2.set_ylabel("frame mIoU")
save(fig, "03_metrics.png")
