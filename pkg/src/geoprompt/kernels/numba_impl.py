"""JIT-compiled kernels. Must match numpy_impl bit for bit.

Arithmetic is written in the exact same operation order as the numpy
fallback so the two backends are interchangeable in oracle tests.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def corner_bins(xs, ys, width, height, w_bins, h_bins):
    n = xs.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        xb = int(math.floor(xs[i] / width * w_bins))
        yb = int(math.floor(ys[i] / height * h_bins))
        if xb > w_bins - 1:
            xb = w_bins - 1
        if yb > h_bins - 1:
            yb = h_bins - 1
        out[i] = yb * w_bins + xb
    return out


@njit(cache=True, nogil=True)
def min_cover_fill(extents, areas, h, w):
    cover = np.full((h, w), np.inf, dtype=np.float64)
    for k in range(extents.shape[0]):
        x0 = extents[k, 0]
        y0 = extents[k, 1]
        x1 = extents[k, 2]
        y1 = extents[k, 3]
        c = areas[k]
        for y in range(y0, y1):
            for x in range(x0, x1):
                if c < cover[y, x]:
                    cover[y, x] = c
    return cover


@njit(cache=True, nogil=True)
def pairwise_iou(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        ax1, ay1, ax2, ay2 = a[i, 0], a[i, 1], a[i, 2], a[i, 3]
        area_a = (ax2 - ax1) * (ay2 - ay1)
        for j in range(m):
            bx1, by1, bx2, by2 = b[j, 0], b[j, 1], b[j, 2], b[j, 3]
            iw = min(ax2, bx2) - max(ax1, bx1)
            if iw < 0.0:
                iw = 0.0
            ih = min(ay2, by2) - max(ay1, by1)
            if ih < 0.0:
                ih = 0.0
            inter = iw * ih
            area_b = (bx2 - bx1) * (by2 - by1)
            union = area_a + area_b - inter
            if area_a > 0.0 and area_b > 0.0 and union > 0.0:
                out[i, j] = inter / union
    return out
