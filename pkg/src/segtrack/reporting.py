"""Report emission in a schema-versioned JSON form and as a run table."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from .metrics import MetricsReport

REPORT_SCHEMA = "segtrack/report"
REPORT_SCHEMA_VERSION = 1

ABSENT = "-"

# One row per run: accuracy, identity stability, counting,
# then the GT-free proxies.
TABLE_COLUMNS = (
    "run",
    "remedy",
    "frame_miou",
    "id_switches",
    "fragments",
    "true_count",
    "predicted_count",
    "counting_error",
    "proxy_flicker_index",
    "proxy_rebirths",
    "proxy_short_tracks",
)


def report_document(report: MetricsReport, provenance: dict | None = None, timestamp: str | None = None) -> dict:
    """Structured form of a report. ``timestamp`` defaults to now (UTC)."""
    gt_block = None
    if report.true_count is not None:
        gt_block = {
            "mean_frame_miou": report.mean_frame_miou,
            "id_switches": report.id_switches,
            "fragments": report.fragments,
            "true_count": report.true_count,
            "counting_error": report.counting_error,
        }
    return {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_SCHEMA_VERSION,
        "run_name": report.run_name,
        "remedy": report.remedy,
        "predicted_count": report.predicted_count,
        "ground_truth_metrics": gt_block,
        "gt_free_proxies": {
            "flicker_index": report.flicker_index,
            "rebirth_count": report.rebirth_count,
            "short_track_count": report.short_track_count,
        },
        "provenance": provenance or {},
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def report_from_document(doc: dict) -> MetricsReport:
    gt = doc.get("ground_truth_metrics") or {}
    proxies = doc["gt_free_proxies"]
    return MetricsReport(
        mean_frame_miou=gt.get("mean_frame_miou"),
        id_switches=gt.get("id_switches"),
        fragments=gt.get("fragments"),
        flicker_index=proxies["flicker_index"],
        short_track_count=proxies["short_track_count"],
        rebirth_count=proxies["rebirth_count"],
        predicted_count=doc["predicted_count"],
        true_count=gt.get("true_count"),
        counting_error=gt.get("counting_error"),
        run_name=doc.get("run_name", "run"),
        remedy=doc.get("remedy"),
    )


def table_row(report: MetricsReport) -> list[str]:
    def cell(value, fmt="{}"):
        return ABSENT if value is None else fmt.format(value)

    return [
        report.run_name,
        report.remedy or "none",
        cell(report.mean_frame_miou, "{:.4f}"),
        cell(report.id_switches),
        cell(report.fragments),
        cell(report.true_count),
        str(report.predicted_count),
        cell(report.counting_error, "{:+d}"),
        f"{report.flicker_index:.4f}",
        str(report.rebirth_count),
        str(report.short_track_count),
    ]


def write_report(
    report: MetricsReport,
    path,
    format: str = "structured",
    provenance: dict | None = None,
    timestamp: str | None = None,
):
    """Write ``report`` to ``path``.

    ``structured`` overwrites ``path`` with a JSON document. ``tabular``
    appends one CSV row, writing the header first when the file is new or
    empty; GT-dependent cells of a GT-free report hold ``-``.

    Raises:
        OSError: if ``path`` cannot be written.
        ValueError: for an unknown ``format``.
    """
    path = Path(path)
    if format == "structured":
        doc = report_document(report, provenance, timestamp)
        path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    elif format == "tabular":
        new = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if new:
                writer.writerow(TABLE_COLUMNS)
            writer.writerow(table_row(report))
    else:
        raise ValueError(f"unknown report format {format!r}")
