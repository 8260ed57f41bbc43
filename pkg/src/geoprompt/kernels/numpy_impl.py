"""Pure-numpy reference implementations of the hot kernels.

These are the fallback path when the JIT backend is disabled or unavailable;
both backends must return bit-identical results (see tests/test_kernels.py).
"""

from __future__ import annotations

import numpy as np


def corner_bins(xs, ys, width, height, w_bins, h_bins):
    """Map corner coordinates to flat location-bin indices.

    Bin index along an axis is floor(coord / extent * bins), with coordinates
    exactly at the far edge clamped into the last bin. Inputs must already be
    range-checked to [0, extent].
    """
    xb = np.floor(xs / width * w_bins).astype(np.int64)
    yb = np.floor(ys / height * h_bins).astype(np.int64)
    np.minimum(xb, w_bins - 1, out=xb)
    np.minimum(yb, h_bins - 1, out=yb)
    return yb * w_bins + xb


def min_cover_fill(extents, areas, h, w):
    """Per-cell minimum covering-box area over a h x w grid.

    ``extents`` is (K, 4) int64 rows of (x0, y0, x1, y1) half-open cell
    ranges, ``areas`` the (K,) float64 cell counts of each box. Uncovered
    cells hold +inf.
    """
    cover = np.full((h, w), np.inf, dtype=np.float64)
    for k in range(extents.shape[0]):
        x0, y0, x1, y1 = extents[k]
        region = cover[y0:y1, x0:x1]
        np.minimum(region, areas[k], out=region)
    return cover


def pairwise_iou(a, b):
    """Intersection-over-union of every (N, 4) row of ``a`` against ``b`` (M, 4).

    Boxes are (x1, y1, x2, y2). A zero-area box scores 0 against everything.
    """
    ax1, ay1, ax2, ay2 = a[:, 0:1], a[:, 1:2], a[:, 2:3], a[:, 3:4]
    bx1, bx2 = b[None, :, 0], b[None, :, 2]
    by1, by2 = b[None, :, 1], b[None, :, 3]
    iw = np.minimum(ax2, bx2) - np.maximum(ax1, bx1)
    ih = np.minimum(ay2, by2) - np.maximum(ay1, by1)
    np.maximum(iw, 0.0, out=iw)
    np.maximum(ih, 0.0, out=ih)
    inter = iw * ih
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b - inter
    out = np.zeros_like(inter)
    valid = (area_a > 0.0) & (area_b > 0.0) & (union > 0.0)
    np.divide(inter, union, out=out, where=valid)
    return out
