"""COCO-style average precision over box detections.

Matching, per (image, class, IoU threshold): detections sorted by score
descending (stable, so ties keep input order) greedily claim the unmatched
ground-truth box with the highest IoU at or above the threshold; equal IoU
resolves to the lowest ground-truth index. AP integrates the
precision-recall curve at 101 recall points (0, 0.01, ..., 1.0) after making
the precision envelope non-increasing. mAP averages per-class AP over IoU
thresholds 0.50:0.05:0.95.

Area-range variants (medium 32^2..96^2 inclusive, large strictly above 96^2)
select ground truth by its pixel area. A detection matched to an
out-of-range truth is ignored outright; an unmatched detection counts as a
false positive only if its own area lies in range. Classes with no ground
truth in a range are excluded from that range's mean; with no eligible
classes at all the metric is reported as None.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ManifestError
from .ingest import DatasetManifest
from .layout import BBox2D

IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
RECALL_POINTS = 101

#: Ground-truth pixel-area ranges, inclusive lower bound.
AREA_RANGES = {
    "all": (0.0, math.inf),
    "medium": (32.0**2, 96.0**2),
    "large": (96.0**2, math.inf),
}


@dataclass(frozen=True)
class Detection:
    image_id: object
    class_id: int
    box: BBox2D
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple[float, ...] = IOU_THRESHOLDS
    max_dets: int = 100
    area_ranges: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(AREA_RANGES))


@dataclass(frozen=True)
class EvalReport:
    mAP: float | None
    AP50: float | None
    AP75: float | None
    AP_medium: float | None
    AP_large: float | None
    per_class: dict[int, float]

    def to_json(self) -> str:
        payload = {
            "mAP": self.mAP,
            "AP50": self.AP50,
            "AP75": self.AP75,
            "AP_medium": self.AP_medium,
            "AP_large": self.AP_large,
            "per_class": {str(k): v for k, v in sorted(self.per_class.items())},
        }
        return json.dumps(payload, ensure_ascii=False, separators=(", ", ": "))


def iou(a: BBox2D, b: BBox2D) -> float:
    """Intersection over union; 0 when either box is degenerate."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if a.area <= 0.0 or b.area <= 0.0 or union <= 0.0:
        return 0.0
    return inter / union


def _in_range(area: float, bounds: tuple[float, float]) -> bool:
    lo, hi = bounds
    if math.isinf(hi):
        # "all" keeps the closed lower bound; "large" is strictly above 96^2.
        return area >= lo if lo == 0.0 else area > lo
    return lo <= area <= hi


def _boxes_array(boxes: list[BBox2D]) -> np.ndarray:
    return np.array(
        [(b.x1, b.y1, b.x2, b.y2) for b in boxes], dtype=np.float64
    ).reshape(-1, 4)


def _greedy_match(iou_matrix: np.ndarray, threshold: float) -> list[int]:
    """Row = detection in score order, column = ground truth. Returns, per
    detection, the matched ground-truth index or -1."""
    n_det, n_gt = iou_matrix.shape
    taken = [False] * n_gt
    matches = [-1] * n_det
    for d in range(n_det):
        best = -1
        best_iou = threshold
        for g in range(n_gt):
            if taken[g]:
                continue
            v = iou_matrix[d, g]
            if v > best_iou or (best == -1 and v == threshold):
                best = g
                best_iou = v
        if best >= 0:
            matches[d] = best
            taken[best] = True
    return matches


def _average_precision(scores, flags, ignores, npos: int) -> float:
    """101-point interpolated AP from per-detection outcomes.

    ``scores`` descending; ``flags`` true for true positives; ``ignores``
    true for detections excluded from both counts.
    """
    if npos == 0:
        raise ValueError("npos must be positive here; caller excludes empty classes")
    tp = 0
    fp = 0
    recalls = []
    precisions = []
    for is_tp, ignored in zip(flags, ignores):
        if ignored:
            continue
        if is_tp:
            tp += 1
        else:
            fp += 1
        recalls.append(tp / npos)
        precisions.append(tp / (tp + fp))
    if not recalls:
        return 0.0
    rc = np.array(recalls)
    pr = np.array(precisions)
    for i in range(len(pr) - 1, 0, -1):
        if pr[i - 1] < pr[i]:
            pr[i - 1] = pr[i]
    # Grid values are k/100 exactly; linspace's k*0.01 differs in the last
    # ulp and can flip the searchsorted side of an exact recall tie.
    grid = np.arange(RECALL_POINTS) / float(RECALL_POINTS - 1)
    idx = np.searchsorted(rc, grid, side="left")
    ap = 0.0
    for i in idx:
        if i < len(pr):
            ap += pr[i]
    return ap / RECALL_POINTS


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def evaluate(
    preds: list[Detection],
    truths: DatasetManifest,
    config: EvalConfig | None = None,
) -> EvalReport:
    """Average precision report for predictions against a manifest."""
    config = config or EvalConfig()
    known_images = {la.image_id for la in truths.layouts}
    for det in preds:
        if det.image_id not in known_images:
            raise ValueError(f"prediction references unknown image_id {det.image_id!r}")

    image_order = {la.image_id: i for i, la in enumerate(truths.layouts)}
    gts: dict[tuple, list[BBox2D]] = {}
    class_ids = set()
    for layout in truths.layouts:
        for b in layout.boxes:
            gts.setdefault((layout.image_id, b.class_id), []).append(b.box)
            class_ids.add(b.class_id)

    dets: dict[tuple, list[Detection]] = {}
    for det in preds:
        dets.setdefault((det.image_id, det.class_id), []).append(det)
    for key in dets:
        # Stable sort: ties keep input order, mirrored by the oracle.
        dets[key] = sorted(dets[key], key=lambda d: -d.score)[: config.max_dets]

    # ap[range_name][class_id] = list of per-threshold AP (or None entries
    # skipped when the class has no truth in range).
    ap: dict[str, dict[int, list[float]]] = {name: {} for name in config.area_ranges}
    for cid in sorted(class_ids):
        image_ids = sorted(
            {img for img, c in set(gts) | set(dets) if c == cid},
            key=image_order.get,
        )
        per_image = []
        for img in image_ids:
            gt_boxes = gts.get((img, cid), [])
            det_list = dets.get((img, cid), [])
            det_boxes = [d.box for d in det_list]
            matrix = kernels.pairwise_iou(_boxes_array(det_boxes), _boxes_array(gt_boxes))
            per_image.append((img, gt_boxes, det_list, matrix))

        for name, bounds in config.area_ranges.items():
            npos = sum(
                1
                for _, gt_boxes, _, _ in per_image
                for g in gt_boxes
                if _in_range(g.area, bounds)
            )
            if npos == 0:
                continue
            thr_aps = []
            for thr in config.iou_thresholds:
                scores = []
                flags = []
                ignores = []
                for _, gt_boxes, det_list, matrix in per_image:
                    matches = _greedy_match(matrix, thr)
                    for d, det in enumerate(det_list):
                        g = matches[d]
                        if g >= 0:
                            hit = _in_range(gt_boxes[g].area, bounds)
                            scores.append(det.score)
                            flags.append(hit)
                            ignores.append(not hit)
                        else:
                            scores.append(det.score)
                            flags.append(False)
                            ignores.append(not _in_range(det.box.area, bounds))
                order = sorted(range(len(scores)), key=lambda i: -scores[i])
                thr_aps.append(
                    _average_precision(
                        [scores[i] for i in order],
                        [flags[i] for i in order],
                        [ignores[i] for i in order],
                        npos,
                    )
                )
            ap[name][cid] = thr_aps

    all_ap = ap["all"]
    per_class = {cid: _mean(aps) for cid, aps in sorted(all_ap.items())}
    idx50 = config.iou_thresholds.index(0.5) if 0.5 in config.iou_thresholds else None
    idx75 = config.iou_thresholds.index(0.75) if 0.75 in config.iou_thresholds else None
    return EvalReport(
        mAP=_mean([v for v in per_class.values() if v is not None]),
        AP50=_mean([aps[idx50] for aps in all_ap.values()]) if idx50 is not None else None,
        AP75=_mean([aps[idx75] for aps in all_ap.values()]) if idx75 is not None else None,
        AP_medium=_mean([_mean(aps) for aps in ap["medium"].values()]) if "medium" in ap else None,
        AP_large=_mean([_mean(aps) for aps in ap["large"].values()]) if "large" in ap else None,
        per_class=per_class,
    )


def read_detections(path) -> list[Detection]:
    """JSON Lines: image_id, class_id, x1, y1, x2, y2, score."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                out.append(
                    Detection(
                        raw["image_id"],
                        int(raw["class_id"]),
                        BBox2D(raw["x1"], raw["y1"], raw["x2"], raw["y2"]),
                        float(raw["score"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad detection: {exc}") from exc
    return out
