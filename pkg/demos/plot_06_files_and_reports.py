"""
Files, provenance and reports
=============================

Everything the command line does is also available from Python: write a
synthetic dataset, track it, remedy it, and emit both a JSON report and a
one-row-per-run table.
"""

from segtrack import apply_remedy, build_report, degrade, generate_scenario, run_tracker, standard_configs
from segtrack.formats import load_predictions, read_tracks_file, save_groundtruth, save_predictions, save_tracks
from segtrack.reporting import write_report

from _common import OUT

scenario, perturb = standard_configs(seed=1)
gt = generate_scenario(scenario)
save_groundtruth(gt, OUT / "groundtruth.json")
save_predictions(degrade(gt, perturb), OUT / "predictions.json")

video = load_predictions(OUT / "predictions.json")
tracks = run_tracker(video)
save_tracks(tracks, OUT / "tracks.json", provenance={"note": "demo run"})
_, provenance = read_tracks_file(OUT / "tracks.json")
print("stored provenance:", provenance)

table = OUT / "runs.csv"
table.unlink(missing_ok=True)
for name, result in (("raw", tracks), ("remedied", apply_remedy(tracks))):
    report = build_report(result, video, gt, run_name=name, remedy=None if name == "raw" else "default")
    write_report(report, OUT / f"report_{name}.json")
    write_report(report, table, format="tabular")
print(table.read_text())

# %%
# The equivalent shell session::
#
#     segtrack synth demos/synth_config.json --out-dir run/
#     segtrack track run/predictions.json -o run/tracks.json
#     segtrack remedy run/tracks.json -o run/remedied.json
#     segtrack metrics run/remedied.json --gt run/groundtruth.json -o run/report.json
#     segtrack render run/remedied.json --frame 10 -o run/frame10.ppm
