"""Core domain types for geometric layouts, discretization grids, and tokens.

Everything here is an immutable value type with no I/O. Validation reports
violations as data (a list of strings) so that policy decisions, e.g. what to
do with a degenerate box, stay with the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

ImageId = Union[str, int]

#: Camera views of a six-camera self-driving rig, the default view set.
SIX_CAMERA_VIEWS = (
    "front",
    "front left",
    "front right",
    "back",
    "back left",
    "back right",
)


@dataclass(frozen=True)
class BBox2D:
    """Axis-aligned box in continuous pixel coordinates, origin top-left.

    Corners are (x1, y1) top-left and (x2, y2) bottom-right; a valid box has
    x1 <= x2 and y1 <= y2. Degenerate (zero-area) boxes are legal here.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class AnnotatedBox:
    """A class-labeled 2D box."""

    class_id: int
    class_name: str
    box: BBox2D

    def with_box(self, box: BBox2D) -> "AnnotatedBox":
        return replace(self, box=box)


@dataclass(frozen=True)
class GeometricLayout:
    """One image's worth of geometry: size, optional view/weather/time, boxes.

    Coordinates stay continuous at this layer; discretization into location
    bins happens only in the token codec.
    """

    image_id: ImageId
    width: float
    height: float
    boxes: tuple[AnnotatedBox, ...] = ()
    view: Optional[str] = None
    weather: Optional[str] = None
    timeofday: Optional[str] = None

    def with_boxes(self, boxes) -> "GeometricLayout":
        return replace(self, boxes=tuple(boxes))


@dataclass(frozen=True)
class GridSpec:
    """Discretization grid over a width x height image.

    ``w_bins`` cells span the image width and ``h_bins`` the height, so the
    token vocabulary has ``w_bins * h_bins`` entries and each cell covers
    ``width / w_bins`` x ``height / h_bins`` pixels.
    """

    w_bins: int
    h_bins: int
    width: float
    height: float

    def __post_init__(self):
        if self.w_bins < 1 or self.h_bins < 1:
            raise ValueError(f"grid bins must be >= 1, got {self.w_bins}x{self.h_bins}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"grid image size must be positive, got {self.width}x{self.height}")

    @property
    def token_count(self) -> int:
        return self.w_bins * self.h_bins

    def with_image_size(self, width: float, height: float) -> "GridSpec":
        return replace(self, width=width, height=height)


@dataclass(frozen=True)
class LocationToken:
    """A grid cell's identity: flat index plus its rendered lexical form."""

    index: int
    text: str


def validate_layout(layout: GeometricLayout, known_views=None) -> list[str]:
    """Check every layout invariant and return the violations found.

    Args:
        layout: layout to check.
        known_views: optional collection of admissible view labels; when
            given, a present view outside it is a violation.

    Returns:
        Empty list iff the layout is valid. Each entry names the field and
        the rule it breaks.
    """
    violations = []
    w, h = layout.width, layout.height
    if not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
        violations.append(f"width must be positive and finite, got {w!r}")
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        violations.append(f"height must be positive and finite, got {h!r}")
    if known_views is not None and layout.view is not None and layout.view not in known_views:
        violations.append(f"view {layout.view!r} not in the configured view set")
    if violations:
        return violations

    for i, ann in enumerate(layout.boxes):
        prefix = f"boxes[{i}]"
        if not ann.class_name:
            violations.append(f"{prefix}.class_name is empty")
        b = ann.box
        coords = (b.x1, b.y1, b.x2, b.y2)
        if not all(math.isfinite(c) for c in coords):
            violations.append(f"{prefix}.box has non-finite coordinates {coords}")
            continue
        if b.x1 > b.x2:
            violations.append(f"{prefix}.box: x1 <= x2 broken (x1={b.x1}, x2={b.x2})")
        if b.y1 > b.y2:
            violations.append(f"{prefix}.box: y1 <= y2 broken (y1={b.y1}, y2={b.y2})")
        if b.x1 < 0 or b.x2 > w:
            violations.append(f"{prefix}.box: 0 <= x1 <= x2 <= {w} broken (x1={b.x1}, x2={b.x2})")
        if b.y1 < 0 or b.y2 > h:
            violations.append(f"{prefix}.box: 0 <= y1 <= y2 <= {h} broken (y1={b.y1}, y2={b.y2})")
    return violations
