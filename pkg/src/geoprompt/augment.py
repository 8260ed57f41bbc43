"""Layout augmentation: area filtering, horizontal flip, integer shift.

The pipeline order is filter, flip, shift, then a second filter pass so that
boxes shrunk by clipping still respect the area floor. All randomness is
drawn per image from substreams keyed on (seed, image_id, purpose), so a
fixed (layout, policy, seed) triple always produces the same output no
matter how many layouts ran before it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .layout import BBox2D, GeometricLayout
from .seeding import record_rng

#: Minimum box area as a fraction of the image area.
DEFAULT_MIN_AREA_FRACTION = 0.002

#: Camera views exchanged under a horizontal flip; symmetric views map to
#: themselves. The table must stay an involution or double flip breaks.
DEFAULT_VIEW_SWAPS = {
    "front": "front",
    "back": "back",
    "front left": "front right",
    "front right": "front left",
    "back left": "back right",
    "back right": "back left",
}


@dataclass(frozen=True)
class AugmentPolicy:
    min_area_fraction: float = DEFAULT_MIN_AREA_FRACTION
    flip_p: float = 0.5
    max_shift_px: int = 256
    view_swaps: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_VIEW_SWAPS))

    def __post_init__(self):
        if not 0.0 <= self.flip_p <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {self.flip_p}")
        if self.max_shift_px < 0:
            raise ValueError(f"max shift must be >= 0, got {self.max_shift_px}")
        if not 0.0 <= self.min_area_fraction <= 1.0:
            raise ValueError(
                f"min area fraction must be in [0, 1], got {self.min_area_fraction}"
            )
        for src, dst in self.view_swaps.items():
            if self.view_swaps.get(dst) != src:
                raise ValueError(f"view swap table is not an involution at {src!r} -> {dst!r}")

    @classmethod
    def from_file(cls, path) -> "AugmentPolicy":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {"min_area_fraction", "flip_p", "max_shift_px", "view_swaps"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown policy keys: {sorted(unknown)}")
        return cls(**raw)


def filter_small(layout: GeometricLayout, policy: AugmentPolicy) -> GeometricLayout:
    """Drop boxes with area strictly below the fraction threshold."""
    floor = policy.min_area_fraction * layout.width * layout.height
    return layout.with_boxes(tuple(b for b in layout.boxes if b.box.area >= floor))


def flip_h(
    layout: GeometricLayout,
    policy: AugmentPolicy,
    seed: int,
    force: bool | None = None,
) -> GeometricLayout:
    """Horizontally flip with seeded probability flip_p; ``force`` overrides."""
    fire = force
    if fire is None:
        fire = record_rng(seed, layout.image_id, "flip").random() < policy.flip_p
    if not fire:
        return layout
    view = layout.view
    if view is not None:
        if view not in policy.view_swaps:
            raise ValueError(f"view {view!r} missing from the flip swap table")
        view = policy.view_swaps[view]
    w = layout.width
    boxes = tuple(
        b.with_box(BBox2D(w - b.box.x2, b.box.y1, w - b.box.x1, b.box.y2))
        for b in layout.boxes
    )
    return GeometricLayout(
        image_id=layout.image_id,
        width=layout.width,
        height=layout.height,
        boxes=boxes,
        view=view,
        weather=layout.weather,
        timeofday=layout.timeofday,
    )


def shift(
    layout: GeometricLayout,
    policy: AugmentPolicy,
    seed: int,
    offset: tuple[int, int] | None = None,
) -> GeometricLayout:
    """Translate all boxes by one per-image integer offset, clip, re-filter.

    Each axis draws uniformly from [-max_shift_px, +max_shift_px]. Boxes whose
    clipped area drops below the filter threshold are removed.
    """
    if offset is None:
        rng = record_rng(seed, layout.image_id, "shift")
        dx = rng.randint(-policy.max_shift_px, policy.max_shift_px)
        dy = rng.randint(-policy.max_shift_px, policy.max_shift_px)
    else:
        dx, dy = offset
    floor = policy.min_area_fraction * layout.width * layout.height
    survivors = []
    for b in layout.boxes:
        x1 = min(max(b.box.x1 + dx, 0.0), layout.width)
        x2 = min(max(b.box.x2 + dx, 0.0), layout.width)
        y1 = min(max(b.box.y1 + dy, 0.0), layout.height)
        y2 = min(max(b.box.y2 + dy, 0.0), layout.height)
        clipped = BBox2D(x1, y1, x2, y2)
        if clipped.area >= floor and clipped.area > 0.0:
            survivors.append(b.with_box(clipped))
    return layout.with_boxes(tuple(survivors))


def augment(layout: GeometricLayout, policy: AugmentPolicy, seed: int) -> GeometricLayout:
    """Full pipeline: filter, flip, shift (the shift pass re-filters)."""
    out = filter_small(layout, policy)
    out = flip_h(out, policy, seed)
    return shift(out, policy, seed)
