"""Dataset ingestion: COCO JSON, a canonical JSONL manifest, stats, subsets.

The canonical manifest is one JSON object per line carrying image_id, width,
height, optional view/weather/timeofday, and boxes as corner coordinates with
textual class names. Writing is canonical (stable key order, integral floats
emitted as ints), so parse -> write -> parse is a fixed point and a written
manifest re-writes byte-identically.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .errors import ManifestError, ReferentialIntegrityError
from .fileio import atomic_write_text
from .layout import (
    SIX_CAMERA_VIEWS,
    AnnotatedBox,
    BBox2D,
    GeometricLayout,
    validate_layout,
)
from .seeding import stream_seed

#: Classes whose annotation fraction falls below this are flagged as rare.
DEFAULT_RARITY_FRACTION = 0.015

_QUANTILE_POINTS = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class DatasetManifest:
    categories: dict[int, str]
    layouts: tuple[GeometricLayout, ...]
    source: str = ""
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        seen = set()
        for layout in self.layouts:
            if layout.image_id in seen:
                raise ManifestError(f"duplicate image_id {layout.image_id!r}")
            seen.add(layout.image_id)
            for b in layout.boxes:
                if b.class_id not in self.categories:
                    raise ReferentialIntegrityError(
                        f"image {layout.image_id!r}: class_id {b.class_id} not in categories"
                    )

    @property
    def annotation_count(self) -> int:
        return sum(len(la.boxes) for la in self.layouts)


@dataclass(frozen=True)
class ClassStats:
    total: int
    counts: dict[int, int]
    fractions: dict[int, float]
    area_quantiles: dict[int, dict[str, float]]
    rare: tuple[int, ...]
    rarity_fraction: float

    def to_json(self) -> str:
        payload = {
            "total": self.total,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "fractions": {str(k): v for k, v in sorted(self.fractions.items())},
            "area_quantiles": {str(k): v for k, v in sorted(self.area_quantiles.items())},
            "rare": list(self.rare),
            "rarity_fraction": self.rarity_fraction,
        }
        return json.dumps(payload, ensure_ascii=False, separators=(", ", ": "))


def parse_coco(path) -> DatasetManifest:
    """Parse a COCO detection file; images without annotations are kept."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: malformed JSON at byte {exc.pos}: {exc.msg}") from exc
    for key in ("images", "annotations", "categories"):
        if key not in raw:
            raise ManifestError(f"{path}: missing top-level {key!r}")
    categories = {int(c["id"]): str(c["name"]) for c in raw["categories"]}
    by_image: dict = {}
    order = []
    for img in raw["images"]:
        image_id = img["id"]
        by_image[image_id] = (img, [])
        order.append(image_id)
    for ann in raw["annotations"]:
        ann_id = ann.get("id")
        cat = ann["category_id"]
        if cat not in categories:
            raise ReferentialIntegrityError(
                f"{path}: annotation {ann_id} references unknown category_id {cat}"
            )
        if ann["image_id"] not in by_image:
            raise ReferentialIntegrityError(
                f"{path}: annotation {ann_id} references unknown image_id {ann['image_id']}"
            )
        x, y, w, h = ann["bbox"]
        box = AnnotatedBox(int(cat), categories[int(cat)], BBox2D(x, y, x + w, y + h))
        by_image[ann["image_id"]][1].append(box)
    layouts = []
    for image_id in order:
        img, boxes = by_image[image_id]
        layouts.append(
            GeometricLayout(
                image_id=image_id,
                width=img["width"],
                height=img["height"],
                boxes=tuple(boxes),
            )
        )
    return DatasetManifest(categories, tuple(layouts), source=str(path))


def parse_manifest(path, known_views: tuple[str, ...] = SIX_CAMERA_VIEWS) -> DatasetManifest:
    """Parse the canonical JSONL manifest.

    Unknown view labels do not fail the parse; the layout keeps no view and a
    warning is recorded on the manifest.
    """
    layouts = []
    warnings = []
    names: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from exc
            view = raw.get("view")
            if view is not None and view not in known_views:
                warnings.append(f"{path}:{lineno}: unknown view {view!r}, dropped")
                view = None
            boxes_raw = raw.get("boxes", [])
            for b in boxes_raw:
                names.add(str(b["class"]))
            layouts.append((raw, view, boxes_raw, lineno))
    class_ids = {name: i for i, name in enumerate(sorted(names))}
    built = []
    for raw, view, boxes_raw, lineno in layouts:
        boxes = tuple(
            AnnotatedBox(
                class_ids[str(b["class"])],
                str(b["class"]),
                BBox2D(b["x1"], b["y1"], b["x2"], b["y2"]),
            )
            for b in boxes_raw
        )
        layout = GeometricLayout(
            image_id=raw["image_id"],
            width=raw["width"],
            height=raw["height"],
            boxes=boxes,
            view=view,
            weather=raw.get("weather"),
            timeofday=raw.get("timeofday"),
        )
        problems = validate_layout(layout)
        if problems:
            raise ManifestError(f"{path}:{lineno}: " + "; ".join(problems))
        built.append(layout)
    categories = {i: name for name, i in class_ids.items()}
    return DatasetManifest(categories, tuple(built), source=str(path), warnings=tuple(warnings))


def _num(value):
    # Canonical number form: integral floats print as ints.
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def layout_to_line(layout: GeometricLayout) -> str:
    record = {
        "image_id": layout.image_id,
        "width": _num(layout.width),
        "height": _num(layout.height),
    }
    if layout.view is not None:
        record["view"] = layout.view
    if layout.weather is not None:
        record["weather"] = layout.weather
    if layout.timeofday is not None:
        record["timeofday"] = layout.timeofday
    record["boxes"] = [
        {
            "class": b.class_name,
            "x1": _num(b.box.x1),
            "y1": _num(b.box.y1),
            "x2": _num(b.box.x2),
            "y2": _num(b.box.y2),
        }
        for b in layout.boxes
    ]
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def write_manifest(manifest: DatasetManifest, path) -> None:
    atomic_write_text(path, "".join(layout_to_line(la) + "\n" for la in manifest.layouts))


def _quantile(sorted_values: list[float], q: float) -> float:
    # Linear interpolation between order statistics, matching a full sort.
    if len(sorted_values) == 1:
        return sorted_values[0]
    pos = q * (len(sorted_values) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac


def stats(manifest: DatasetManifest, rarity_fraction: float = DEFAULT_RARITY_FRACTION) -> ClassStats:
    """Per-class annotation counts, fractions, and box-area quantiles."""
    counts: dict[int, int] = {}
    areas: dict[int, list[float]] = {}
    for layout in manifest.layouts:
        for b in layout.boxes:
            counts[b.class_id] = counts.get(b.class_id, 0) + 1
            areas.setdefault(b.class_id, []).append(b.box.area)
    total = sum(counts.values())
    fractions = {cid: n / total for cid, n in counts.items()} if total else {}
    quantiles = {}
    for cid, values in areas.items():
        values.sort()
        quantiles[cid] = {f"p{int(q * 100)}": _quantile(values, q) for q in _QUANTILE_POINTS}
    rare = tuple(sorted(cid for cid, f in fractions.items() if f < rarity_fraction))
    return ClassStats(total, counts, fractions, quantiles, rare, rarity_fraction)


def split_subset(
    manifest: DatasetManifest,
    fraction: float,
    seed: int,
    nested: bool = True,
) -> DatasetManifest:
    """Seeded image-level sample of round(fraction * N) images.

    Nested mode draws one permutation per seed and takes its prefix, so the
    0.25 subset is contained in the 0.5 subset. Non-nested mode folds the
    fraction into the stream, giving independent draws per fraction.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(manifest.layouts)
    take = math.floor(fraction * n + 0.5)
    parts = ("split",) if nested else ("split", repr(fraction))
    rng = random.Random(stream_seed(seed, *parts))
    perm = list(range(n))
    rng.shuffle(perm)
    keep = set(perm[:take])
    layouts = tuple(la for i, la in enumerate(manifest.layouts) if i in keep)
    return DatasetManifest(manifest.categories, layouts, source=manifest.source)
