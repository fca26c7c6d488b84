import math

import pytest
from hypothesis import given, strategies as st

from vrueval.errors import ConversionError
from vrueval.geometry import (
    BoundingBox,
    ImageDims,
    NormalizedBox,
    from_normalized,
    iou,
    to_normalized,
)


def box(*coords):
    return BoundingBox(*map(float, coords))


# boxes on a coarse grid keep IoU comparisons exact enough for identity checks
grid = st.integers(min_value=0, max_value=200).map(lambda v: v / 2.0)


@st.composite
def boxes(draw):
    x0, x1 = sorted((draw(grid), draw(grid)))
    y0, y1 = sorted((draw(grid), draw(grid)))
    return BoundingBox(x0, y0, x1, y1)


class TestIou:
    def test_identical_boxes(self):
        assert iou(box(0, 0, 10, 10), box(0, 0, 10, 10)) == 1.0

    def test_disjoint_boxes(self):
        assert iou(box(0, 0, 1, 1), box(5, 5, 6, 6)) == 0.0

    def test_partial_overlap(self):
        # intersection 1, union 4 + 4 - 1 = 7
        assert iou(box(0, 0, 2, 2), box(1, 1, 3, 3)) == pytest.approx(1 / 7, abs=1e-12)

    def test_two_zero_area_boxes(self):
        assert iou(box(3, 3, 3, 3), box(3, 3, 3, 3)) == 0.0

    def test_zero_area_inside_positive(self):
        assert iou(box(5, 5, 5, 5), box(0, 0, 10, 10)) == 0.0

    def test_touching_edges(self):
        assert iou(box(0, 0, 1, 1), box(1, 0, 2, 1)) == 0.0

    @given(a=boxes(), b=boxes())
    def test_symmetric_and_bounded(self, a, b):
        ab = iou(a, b)
        assert ab == iou(b, a)
        assert 0.0 <= ab <= 1.0

    @given(a=boxes(), b=boxes())
    def test_one_iff_identical_positive_area(self, a, b):
        assert (iou(a, b) == 1.0) == (a == b and a.area > 0)

    def test_shrinking_inner_box_never_increases_iou(self):
        outer = box(0, 0, 100, 100)
        inner = box(10, 10, 90, 90)
        smaller = box(20, 20, 80, 80)
        smallest = box(40, 40, 60, 60)
        values = [iou(outer, b) for b in (inner, smaller, smallest)]
        assert values == sorted(values, reverse=True)
        assert values[0] > values[1] > values[2]

    def test_negative_extent_rejected(self):
        with pytest.raises(ValueError):
            BoundingBox(5, 0, 4, 10)


class TestNormalization:
    def test_full_image_box(self):
        n = to_normalized(box(0, 0, 100, 100), ImageDims(100, 100))
        assert (n.cx, n.cy, n.w, n.h) == (0.5, 0.5, 1.0, 1.0)

    def test_centered_half_box(self):
        n = to_normalized(box(25, 25, 75, 75), ImageDims(100, 100))
        assert (n.cx, n.cy, n.w, n.h) == (0.5, 0.5, 0.5, 0.5)

    def test_rectangular_image(self):
        n = to_normalized(box(0, 0, 30, 60), ImageDims(120, 240))
        assert (n.cx, n.cy, n.w, n.h) == (0.125, 0.125, 0.25, 0.25)

    def test_from_normalized_full(self):
        b = from_normalized(NormalizedBox(0.5, 0.5, 1.0, 1.0), ImageDims(100, 100))
        assert b == box(0, 0, 100, 100)

    def test_from_normalized_half(self):
        b = from_normalized(NormalizedBox(0.5, 0.5, 0.5, 0.5), ImageDims(100, 100))
        assert b == box(25, 25, 75, 75)

    def test_round_trip_specific(self):
        dims = ImageDims(640, 480)
        original = box(7.3, 2.1, 55.9, 88.8)
        back = from_normalized(to_normalized(original, dims), dims)
        for a, b in zip(
            (original.x_min, original.y_min, original.x_max, original.y_max),
            (back.x_min, back.y_min, back.x_max, back.y_max),
        ):
            assert math.isclose(a, b, rel_tol=1e-6, abs_tol=1e-6)

    def test_out_of_range_reports_component(self):
        with pytest.raises(ConversionError, match="cx"):
            to_normalized(box(90, 0, 120, 10), ImageDims(100, 100))
        with pytest.raises(ConversionError, match="h"):
            to_normalized(box(0, 0, 10, 200), ImageDims(100, 100))

    def test_denormalized_may_exceed_image(self):
        # legal: a wide box centered near the left edge reaches past x=0
        b = from_normalized(NormalizedBox(0.1, 0.5, 0.5, 0.2), ImageDims(100, 100))
        assert b.x_min < 0

    @given(
        data=st.data(),
        width=st.integers(min_value=1, max_value=4000),
        height=st.integers(min_value=1, max_value=4000),
    )
    def test_round_trip_property(self, data, width, height):
        dims = ImageDims(width, height)
        x0 = data.draw(st.floats(0, width, allow_nan=False))
        x1 = data.draw(st.floats(x0, width, allow_nan=False))
        y0 = data.draw(st.floats(0, height, allow_nan=False))
        y1 = data.draw(st.floats(y0, height, allow_nan=False))
        original = BoundingBox(x0, y0, x1, y1)
        back = from_normalized(to_normalized(original, dims), dims)
        scale = max(width, height)
        for a, b in zip(
            (original.x_min, original.y_min, original.x_max, original.y_max),
            (back.x_min, back.y_min, back.x_max, back.y_max),
        ):
            assert math.isclose(a, b, rel_tol=1e-6, abs_tol=1e-9 * scale)


def test_image_dims_must_be_positive():
    with pytest.raises(ValueError):
        ImageDims(0, 10)
    with pytest.raises(ValueError):
        ImageDims(10, -1)


def test_normalized_box_range_check():
    with pytest.raises(ValueError):
        NormalizedBox(1.2, 0.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        NormalizedBox(0.5, 0.5, -0.1, 0.1)
