"""Hot numeric kernels with a JIT backend and a pure-numpy fallback.

The backend is chosen once at import time: set ``GEOPROMPT_NUMBA=0`` to force
the numpy path (useful for debugging and as the comparison baseline in
benchmarks/bench_kernels.py). When the JIT backend cannot be imported the
numpy path is used silently.
"""

from __future__ import annotations

import os

_flag = os.environ.get("GEOPROMPT_NUMBA", "1").strip().lower()

if _flag in ("0", "false", "off", "no"):
    from . import numpy_impl as _impl

    _BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl

        _BACKEND = "numba"
    except ImportError:
        from . import numpy_impl as _impl

        _BACKEND = "numpy"

corner_bins = _impl.corner_bins
min_cover_fill = _impl.min_cover_fill
pairwise_iou = _impl.pairwise_iou


def backend() -> str:
    """Name of the active kernel backend: "numba" or "numpy"."""
    return _BACKEND


def warmup() -> str:
    """Trigger JIT compilation of every kernel on tiny inputs.

    Returns the backend name. A no-op on the numpy path.
    """
    import numpy as np

    corner_bins(np.zeros(1), np.zeros(1), 2.0, 2.0, 2, 2)
    min_cover_fill(np.zeros((1, 4), dtype=np.int64), np.ones(1), 2, 2)
    pairwise_iou(np.zeros((1, 4)), np.zeros((1, 4)))
    return _BACKEND
