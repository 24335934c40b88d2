import numpy as np
import pytest

from segtrack.masks import rle_encode
from segtrack.tracker import Detection, FrameDetections, VideoPredictions


def bitmap_iou(a, b):
    """Brute-force IoU over pixel sets (independent of the run-space path)."""
    pa = {(y, x) for y, x in zip(*np.nonzero(a))}
    pb = {(y, x) for y, x in zip(*np.nonzero(b))}
    union = pa | pb
    if not union:
        return 0.0
    return len(pa & pb) / len(union)


def box_mask(width, height, x0, y0, x1, y1):
    """Mask that is true on the inclusive box [x0, x1] x [y0, y1]."""
    grid = np.zeros((height, width), dtype=bool)
    grid[y0 : y1 + 1, x0 : x1 + 1] = True
    return rle_encode(grid)


def video_from_masks(per_frame, width, height, category=1):
    """VideoPredictions from a list (per frame) of lists of masks."""
    frames = [
        FrameDetections(t, tuple(Detection(t, category, 1.0, m) for m in masks))
        for t, masks in enumerate(per_frame)
    ]
    return VideoPredictions(width, height, tuple(frames))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = getattr(report, "criterion", None) or report.nodeid.split("::")[-1]
        _ACCEPTANCE_LINES.append(f"{'PASS' if report.passed else 'FAIL'}  {doc}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    doc = item.function.__doc__ if hasattr(item, "function") else None
    if doc:
        rep.criterion = doc.strip().splitlines()[0]


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
