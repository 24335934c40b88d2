import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from segtrack.errors import DimensionError, RleFormatError
from segtrack.masks import (
    BoundingBox,
    RleMask,
    mask_area,
    mask_bbox,
    mask_iou,
    masks_union,
    rle_decode,
    rle_encode,
    rle_from_coco,
    rle_to_coco,
)

from conftest import bitmap_iou


def top_half(n=4):
    g = np.zeros((n, n), dtype=bool)
    g[: n // 2] = True
    return g


def left_half(n=4):
    g = np.zeros((n, n), dtype=bool)
    g[:, : n // 2] = True
    return g


bitmaps = st.tuples(st.integers(1, 64), st.integers(1, 64)).flatmap(
    lambda shape: arrays(bool, shape)
)


class TestEncodeDecode:
    def test_empty(self):
        m = rle_encode(np.zeros((2, 2), dtype=bool))
        assert m.runs == (4,)
        assert not rle_decode(m).any()

    def test_full(self):
        m = rle_encode(np.ones((2, 2), dtype=bool))
        assert m.runs == (0, 4)
        assert rle_decode(m).all()

    def test_top_half_roundtrip(self):
        g = top_half()
        np.testing.assert_array_equal(rle_decode(rle_encode(g)), g)

    def test_decode_scan_order(self):
        # runs [1, 2, 1]: skip (0,0), set (0,1) and (1,0), skip (1,1)
        expected = np.array([[False, True], [True, False]])
        np.testing.assert_array_equal(rle_decode(RleMask(2, 2, (1, 2, 1))), expected)

    def test_zero_area_grid(self):
        with pytest.raises(DimensionError):
            rle_encode(np.zeros((0, 3), dtype=bool))

    def test_run_sum_mismatch(self):
        with pytest.raises(RleFormatError) as exc:
            RleMask(2, 2, (1, 2))
        assert exc.value.invariant == "run-sum"

    def test_interior_zero_run_rejected(self):
        with pytest.raises(RleFormatError):
            RleMask(2, 2, (1, 0, 3))

    @settings(max_examples=200, deadline=None)
    @given(bitmaps)
    def test_roundtrip_property(self, g):
        m = rle_encode(g)
        assert sum(m.runs) == g.size
        assert all(r > 0 for r in m.runs[1:])
        np.testing.assert_array_equal(rle_decode(m), g)
        assert rle_decode(m).sum() == mask_area(m)


class TestArea:
    @pytest.mark.parametrize(
        "grid, expected",
        [(np.zeros((2, 2), bool), 0), (np.ones((2, 2), bool), 4), (top_half(), 8)],
    )
    def test_examples(self, grid, expected):
        assert mask_area(rle_encode(grid)) == expected
        assert mask_area(rle_encode(grid)) == int(grid.sum())


class TestIou:
    def test_identical(self):
        m = rle_encode(top_half())
        assert mask_iou(m, m) == 1.0

    def test_disjoint(self):
        a = rle_encode(top_half())
        b = rle_encode(~top_half())
        assert mask_iou(a, b) == 0.0

    def test_left_vs_top(self):
        a, b = left_half(), top_half()
        assert bitmap_iou(a, b) == pytest.approx(1 / 3, abs=0)
        assert mask_iou(rle_encode(a), rle_encode(b)) == 1 / 3

    def test_empty_vs_empty_is_zero(self):
        e = rle_encode(np.zeros((3, 3), bool))
        assert mask_iou(e, e) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            mask_iou(rle_encode(np.ones((2, 2), bool)), rle_encode(np.ones((2, 3), bool)))

    @settings(max_examples=300, deadline=None)
    @given(st.tuples(st.integers(1, 24), st.integers(1, 24)).flatmap(
        lambda s: st.tuples(arrays(bool, s), arrays(bool, s))
    ))
    def test_matches_bitmap_oracle(self, pair):
        a, b = pair
        ma, mb = rle_encode(a), rle_encode(b)
        iou = mask_iou(ma, mb)
        assert iou == bitmap_iou(a, b)
        assert iou == mask_iou(mb, ma)
        assert 0.0 <= iou <= 1.0
        assert (iou == 1.0) == (ma == mb and mask_area(ma) > 0)


class TestBoxes:
    def test_bbox(self):
        g = np.zeros((5, 6), bool)
        g[1:3, 2:5] = True
        assert mask_bbox(rle_encode(g)) == BoundingBox(2, 1, 4, 2)

    def test_bbox_run_wrapping_rows(self):
        g = np.zeros((3, 4), bool)
        g[0, 3] = g[1, 0] = True
        assert mask_bbox(rle_encode(g)) == BoundingBox(0, 0, 3, 1)

    def test_empty_has_no_box(self):
        assert mask_bbox(rle_encode(np.zeros((2, 2), bool))) is None

    def test_degenerate_box(self):
        with pytest.raises(DimensionError):
            BoundingBox(3, 0, 2, 0)

    @settings(max_examples=100, deadline=None)
    @given(bitmaps)
    def test_bbox_matches_nonzero(self, g):
        box = mask_bbox(rle_encode(g))
        if not g.any():
            assert box is None
            return
        ys, xs = np.nonzero(g)
        assert box == BoundingBox(xs.min(), ys.min(), xs.max(), ys.max())


def test_union():
    u = masks_union([rle_encode(top_half()), rle_encode(left_half())], 4, 4)
    np.testing.assert_array_equal(u, top_half() | left_half())


def test_coco_conversion_roundtrip(rng):
    g = rng.random((5, 7)) < 0.4
    m = rle_encode(g)
    coco = rle_to_coco(m)
    assert coco["size"] == [5, 7]
    # column-major counts describe the transposed scan
    np.testing.assert_array_equal(rle_decode(RleMask(5, 7, tuple(coco["counts"]))), g.T)
    assert rle_from_coco(coco["counts"], 5, 7) == m
