import os
import subprocess
import sys

import numpy as np

from geoprompt import kernels
from geoprompt.kernels import numpy_impl

try:
    from geoprompt.kernels import numba_impl
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

import pytest

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


def random_corners(rng, n, width, height):
    xs = rng.uniform(0.0, width, size=n)
    ys = rng.uniform(0.0, height, size=n)
    # Sprinkle exact edges to hit the clamp branch.
    xs[:: max(n // 7, 1)] = width
    ys[:: max(n // 11, 1)] = height
    return xs, ys


@needs_numba
def test_corner_bins_backends_bit_identical():
    rng = np.random.default_rng(21)
    for width, height, wb, hb in ((800.0, 456.0, 400, 228), (101.0, 53.0, 13, 7)):
        xs, ys = random_corners(rng, 5000, width, height)
        a = numpy_impl.corner_bins(xs, ys, width, height, wb, hb)
        b = numba_impl.corner_bins(xs, ys, width, height, wb, hb)
        assert np.array_equal(a, b)
        assert a.dtype == b.dtype == np.int64


@needs_numba
def test_min_cover_fill_backends_bit_identical():
    rng = np.random.default_rng(22)
    for _ in range(50):
        h = int(rng.integers(1, 60))
        w = int(rng.integers(1, 60))
        k = int(rng.integers(0, 6))
        extents = np.empty((k, 4), dtype=np.int64)
        for i in range(k):
            x0 = int(rng.integers(0, w))
            y0 = int(rng.integers(0, h))
            extents[i] = (x0, y0, int(rng.integers(x0 + 1, w + 1)), int(rng.integers(y0 + 1, h + 1)))
        areas = ((extents[:, 2] - extents[:, 0]) * (extents[:, 3] - extents[:, 1])).astype(np.float64)
        a = numpy_impl.min_cover_fill(extents, areas, h, w)
        b = numba_impl.min_cover_fill(extents, areas, h, w)
        assert np.array_equal(a, b)


@needs_numba
def test_pairwise_iou_backends_bit_identical():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(0, 30))
        m = int(rng.integers(0, 30))

        def boxes(count):
            x1 = rng.uniform(0, 700, size=count)
            y1 = rng.uniform(0, 400, size=count)
            out = np.stack(
                [x1, y1, x1 + rng.uniform(0, 100, size=count), y1 + rng.uniform(0, 56, size=count)],
                axis=1,
            )
            if count:
                out[0, 2] = out[0, 0]  # one degenerate box per batch
            return out

        a_boxes, b_boxes = boxes(n), boxes(m)
        a = numpy_impl.pairwise_iou(a_boxes, b_boxes)
        b = numba_impl.pairwise_iou(a_boxes, b_boxes)
        assert np.array_equal(a, b)
        assert a.shape == (n, m)


def test_pairwise_iou_values():
    a = np.array([[0.0, 0.0, 2.0, 2.0]])
    b = np.array([[1.0, 0.0, 3.0, 2.0], [0.0, 0.0, 2.0, 2.0], [5.0, 5.0, 6.0, 6.0]])
    out = numpy_impl.pairwise_iou(a, b)
    assert out[0, 0] == pytest.approx(1.0 / 3.0)
    assert out[0, 1] == 1.0
    assert out[0, 2] == 0.0


def test_zero_area_boxes_score_zero():
    a = np.array([[1.0, 1.0, 1.0, 5.0]])
    b = np.array([[0.0, 0.0, 4.0, 4.0]])
    assert numpy_impl.pairwise_iou(a, b)[0, 0] == 0.0


def test_backend_reports_name():
    assert kernels.backend() in ("numba", "numpy")


def test_warmup_is_idempotent():
    assert kernels.warmup() == kernels.backend()
    assert kernels.warmup() == kernels.backend()


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, GEOPROMPT_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "from geoprompt import kernels; print(kernels.backend())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
