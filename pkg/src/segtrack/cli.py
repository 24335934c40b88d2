"""Command-line entry point: ``segtrack {track,metrics,count,remedy,synth,render}``.

Exit codes: 0 success, 1 validation error (bad input, bad config, bad
arguments), 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .errors import ConfigError, ParseError, ValidationError
from .formats import (
    file_sha256,
    load_groundtruth,
    load_predictions,
    read_tracks_file,
    save_groundtruth,
    save_predictions,
    save_tracks,
)
from .metrics import MetricsConfig, build_report, count_instances
from .remedies import RemedyConfig, apply_remedy, remedy_name
from .render import render_overlay
from .reporting import report_document, write_report
from .synth import PerturbConfig, ScenarioConfig, degrade, generate_scenario
from .tracker import TrackerConfig, run_tracker

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # show defaults, but not the placeholder None of required or optional-input flags
    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


def _input_record(path) -> dict:
    return {"path": str(path), "sha256": file_sha256(path)}


def _build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    parser = _Parser(prog="segtrack", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"segtrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("track", help="associate per-frame predictions into tracks", formatter_class=fmt)
    p.add_argument("predictions", type=Path, help="predictions file")
    p.add_argument("-o", "--output", type=Path, required=True, help="tracks file to write")
    p.add_argument("--iou-threshold", type=float, default=0.5, help="minimum IoU for a track-detection match")
    p.add_argument("--max-age", type=int, default=0, help="frames a track may go unmatched before it ends")
    p.add_argument("--score-threshold", type=float, default=0.0, help="drop detections scoring below this")
    p.add_argument(
        "--category-aware", action=argparse.BooleanOptionalAction, default=True, help="only match equal categories"
    )

    p = sub.add_parser("metrics", help="evaluate a tracks file", formatter_class=fmt)
    p.add_argument("tracks", type=Path, help="tracks file")
    p.add_argument("--gt", type=Path, default=None, help="ground-truth file (enables GT metrics)")
    p.add_argument("--predictions", type=Path, default=None, help="raw predictions, checked for consistency")
    p.add_argument("--match-iou", type=float, default=0.5, help="minimum IoU for a track to cover a GT object")
    p.add_argument("--min-track-length", type=int, default=1, help="ignore tracks with fewer observed frames")
    p.add_argument("--run-name", default="run", help="row label in the report")
    p.add_argument("-o", "--output", type=Path, default=None, help="report file (default: print JSON)")
    p.add_argument(
        "--format", choices=("structured", "tabular"), default="structured", help="JSON document or appended CSV row"
    )

    p = sub.add_parser("count", help="count instances in a tracks file", formatter_class=fmt)
    p.add_argument("tracks", type=Path, help="tracks file")
    p.add_argument("--min-track-length", type=int, default=1, help="ignore tracks with fewer observed frames")
    p.add_argument("--category", type=int, default=None, help="count only this category")

    p = sub.add_parser("remedy", help="re-link and smooth a tracks file", formatter_class=fmt)
    p.add_argument("tracks", type=Path, help="tracks file")
    p.add_argument("-o", "--output", type=Path, required=True, help="tracks file to write")
    p.add_argument("--relink-gap", type=int, default=3, help="maximum empty frames bridged by a re-link")
    p.add_argument("--relink-iou", type=float, default=0.5, help="minimum boundary-mask IoU for a re-link")
    p.add_argument("--smooth-window", type=int, default=3, help="odd majority-vote window; 1 disables smoothing")
    p.add_argument(
        "--fill-gaps", action=argparse.BooleanOptionalAction, default=False, help="carry masks across re-linked gaps"
    )

    p = sub.add_parser("synth", help="generate ground truth and degraded predictions", formatter_class=fmt)
    p.add_argument("config", type=Path, help="JSON file with 'scenario' and 'perturb' objects")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides both seeds in the config")

    p = sub.add_parser("render", help="draw one frame of a tracks file as a PPM image", formatter_class=fmt)
    p.add_argument("tracks", type=Path, help="tracks file")
    p.add_argument("--frame", type=int, required=True, help="frame index to draw")
    p.add_argument("-o", "--output", type=Path, required=True, help="PPM image to write")
    return parser


def _cmd_track(args) -> int:
    config = TrackerConfig(args.iou_threshold, args.max_age, args.score_threshold, args.category_aware)
    video = load_predictions(args.predictions)
    tracks = run_tracker(video, config)
    provenance = {
        "command": "track",
        "inputs": {"predictions": _input_record(args.predictions)},
        "tracker_config": asdict(config),
        "toolkit_version": __version__,
    }
    save_tracks(tracks, args.output, provenance)
    print(f"{len(tracks)} tracks over {tracks.num_frames} frames -> {args.output}")
    return EXIT_OK


def _remedy_in(provenance: dict) -> str | None:
    while provenance:
        if "remedy_config" in provenance:
            return remedy_name(RemedyConfig(**provenance["remedy_config"]))
        provenance = provenance.get("source")
    return None


def _cmd_metrics(args) -> int:
    config = MetricsConfig(match_iou=args.match_iou, min_track_length=args.min_track_length)
    tracks, track_prov = read_tracks_file(args.tracks)
    inputs = {"tracks": _input_record(args.tracks)}
    gt = video = None
    if args.gt is not None:
        gt = load_groundtruth(args.gt)
        inputs["groundtruth"] = _input_record(args.gt)
    if args.predictions is not None:
        video = load_predictions(args.predictions)
        inputs["predictions"] = _input_record(args.predictions)
    report = build_report(tracks, video, gt, config, run_name=args.run_name, remedy=_remedy_in(track_prov))
    provenance = {
        "command": "metrics",
        "inputs": inputs,
        "tracks_provenance": track_prov,
        "metrics_config": asdict(config),
        "toolkit_version": __version__,
    }
    if args.output is None:
        print(json.dumps(report_document(report, provenance), sort_keys=True, indent=2))
    else:
        write_report(report, args.output, args.format, provenance)
        print(f"report -> {args.output}")
    return EXIT_OK


def _cmd_count(args) -> int:
    tracks, _ = read_tracks_file(args.tracks)
    print(count_instances(tracks, category=args.category, min_length=args.min_track_length))
    return EXIT_OK


def _cmd_remedy(args) -> int:
    config = RemedyConfig(args.relink_gap, args.relink_iou, args.smooth_window, args.fill_gaps)
    tracks, source = read_tracks_file(args.tracks)
    out = apply_remedy(tracks, config)
    provenance = {
        "command": "remedy",
        "inputs": {"tracks": _input_record(args.tracks)},
        "source": source,
        "remedy_config": asdict(config),
        "toolkit_version": __version__,
    }
    save_tracks(out, args.output, provenance)
    print(f"{len(tracks)} -> {len(out)} tracks ({len(out.merges) - len(tracks.merges)} merges) -> {args.output}")
    return EXIT_OK


def _config_from(cls, values: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_synth_config(path, seed: int | None = None) -> tuple[ScenarioConfig, PerturbConfig]:
    """Parse a synth config file (``{"scenario": {...}, "perturb": {...}}``)."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) - {"scenario", "perturb"}:
        raise ParseError(f"{path}: expected an object with 'scenario' and/or 'perturb'")
    scenario = dict(doc.get("scenario", {}))
    perturb = dict(doc.get("perturb", {}))
    if seed is not None:
        scenario["seed"] = seed
        perturb["seed"] = seed
    if "forced_dropouts" in perturb:
        perturb["forced_dropouts"] = frozenset(tuple(p) for p in perturb["forced_dropouts"])
    return _config_from(ScenarioConfig, scenario), _config_from(PerturbConfig, perturb)


def _cmd_synth(args) -> int:
    scenario, perturb = load_synth_config(args.config, args.seed)
    gt = generate_scenario(scenario)
    video = degrade(gt, perturb)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_groundtruth(gt, args.out_dir / "groundtruth.json")
    save_predictions(video, args.out_dir / "predictions.json")
    print(f"{scenario.num_objects} objects, {scenario.num_frames} frames, {video.num_detections} detections -> {args.out_dir}")
    return EXIT_OK


def _cmd_render(args) -> int:
    tracks, _ = read_tracks_file(args.tracks)
    render_overlay(tracks, args.frame, args.output)
    print(f"frame {args.frame} -> {args.output}")
    return EXIT_OK


_COMMANDS = {
    "track": _cmd_track,
    "metrics": _cmd_metrics,
    "count": _cmd_count,
    "remedy": _cmd_remedy,
    "synth": _cmd_synth,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
