import math

import pytest

from geoprompt.layout import (
    SIX_CAMERA_VIEWS,
    AnnotatedBox,
    BBox2D,
    GeometricLayout,
    GridSpec,
    validate_layout,
)


def make_layout(boxes=(), **kwargs):
    defaults = dict(image_id="img", width=800.0, height=456.0, boxes=tuple(boxes))
    defaults.update(kwargs)
    return GeometricLayout(**defaults)


def test_valid_layout_has_no_violations():
    layout = make_layout(
        [AnnotatedBox(0, "car", BBox2D(10, 20, 100, 200))], view="front"
    )
    assert validate_layout(layout) == []


def test_box_geometry():
    box = BBox2D(10, 20, 40, 60)
    assert box.width == 30
    assert box.height == 40
    assert box.area == 1200


def test_degenerate_box_allowed_but_zero_area():
    layout = make_layout([AnnotatedBox(0, "car", BBox2D(10, 20, 10, 20))])
    assert validate_layout(layout) == []
    assert layout.boxes[0].box.area == 0


def test_reversed_corners_flagged():
    layout = make_layout([AnnotatedBox(0, "car", BBox2D(100, 20, 10, 200))])
    violations = validate_layout(layout)
    assert len(violations) == 1
    assert "x1 <= x2" in violations[0]


def test_out_of_bounds_flagged():
    layout = make_layout([AnnotatedBox(0, "car", BBox2D(10, 20, 900, 200))])
    assert any("x2" in v for v in validate_layout(layout))


def test_non_finite_flagged():
    layout = make_layout([AnnotatedBox(0, "car", BBox2D(10, math.nan, 20, 200))])
    assert any("finite" in v for v in validate_layout(layout))


def test_empty_class_name_flagged():
    layout = make_layout([AnnotatedBox(0, "", BBox2D(10, 20, 100, 200))])
    assert any("class_name" in v for v in validate_layout(layout))


def test_unknown_view_flagged_when_views_given():
    layout = make_layout(view="rear")
    assert validate_layout(layout) == []
    assert any("view" in v for v in validate_layout(layout, known_views=SIX_CAMERA_VIEWS))


def test_multiple_violations_reported_together():
    layout = make_layout(
        [
            AnnotatedBox(0, "car", BBox2D(100, 20, 10, 200)),
            AnnotatedBox(1, "", BBox2D(10, 20, 100, 200)),
        ]
    )
    assert len(validate_layout(layout)) == 2


def test_grid_spec_token_count():
    grid = GridSpec(400, 228, 800, 456)
    assert grid.token_count == 91200


def test_grid_spec_rejects_bad_dims():
    with pytest.raises(ValueError):
        GridSpec(0, 228, 800, 456)
    with pytest.raises(ValueError):
        GridSpec(400, 228, 800, 0)


def test_grid_with_image_size():
    grid = GridSpec(400, 228, 800, 456).with_image_size(1600, 912)
    assert (grid.w_bins, grid.h_bins) == (400, 228)
    assert (grid.width, grid.height) == (1600, 912)


def test_with_boxes_replaces_only_boxes():
    layout = make_layout(view="front", weather="rainy")
    boxed = layout.with_boxes([AnnotatedBox(0, "car", BBox2D(0, 0, 10, 10))])
    assert len(boxed.boxes) == 1
    assert boxed.view == "front"
    assert boxed.weather == "rainy"
