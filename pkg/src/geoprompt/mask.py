"""Foreground re-weighting masks at latent resolution.

Each latent cell covered by at least one box gets unnormalized weight
w / c^p, where c is the area in cells of the smallest box covering it;
uncovered cells get 1 / (H'*W')^p. Smaller boxes therefore weigh more, and
with p = 0 the mask degenerates to a flat foreground/background split.
Normalization rescales so the mask sums to H'*W' (mean 1), keeping the
overall loss magnitude unchanged when the mask multiplies a per-cell
objective.

Accumulation runs in float64; the binary export quantizes to float32.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BinaryFormatError
from .fileio import atomic_write_bytes
from .layout import BBox2D, GeometricLayout

#: Foreground weight and area exponent defaults.
DEFAULT_FG_WEIGHT = 2.0
DEFAULT_AREA_POWER = 0.2

MASK_MAGIC = b"GEOM"
_MASK_HEADER = struct.Struct("<4sIIBdd")


@dataclass(frozen=True)
class LatentBox:
    """Half-open cell extent [x0, x1) x [y0, y1) on the latent grid."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class ReweightMask:
    h: int
    w: int
    values: np.ndarray  # (h, w) float64
    fg_weight: float
    area_power: float
    normalized: bool

    def __post_init__(self):
        self.values.setflags(write=False)


def to_latent(box: BBox2D, width: float, height: float, w_cells: int, h_cells: int) -> LatentBox:
    """Scale a pixel box onto the latent grid, covering every touched cell.

    Left/top floor and right/bottom ceil, so the latent extent never
    undershoots the box. A box thinner than one cell still occupies the one
    cell containing it.
    """
    x0 = math.floor(box.x1 / width * w_cells)
    y0 = math.floor(box.y1 / height * h_cells)
    x1 = math.ceil(box.x2 / width * w_cells)
    y1 = math.ceil(box.y2 / height * h_cells)
    x0 = min(max(x0, 0), w_cells - 1)
    y0 = min(max(y0, 0), h_cells - 1)
    x1 = min(max(x1, x0 + 1), w_cells)
    y1 = min(max(y1, y0 + 1), h_cells)
    return LatentBox(x0, y0, x1, y1)


def build_mask(
    layout: GeometricLayout,
    w_cells: int,
    h_cells: int,
    fg_weight: float = DEFAULT_FG_WEIGHT,
    area_power: float = DEFAULT_AREA_POWER,
    normalize: bool = True,
) -> ReweightMask:
    """Re-weighting mask for one layout; pure, deterministic, float64."""
    if fg_weight < 1.0:
        raise ValueError(f"foreground weight must be >= 1, got {fg_weight}")
    if area_power < 0.0:
        raise ValueError(f"area power must be >= 0, got {area_power}")
    latent = [to_latent(b.box, layout.width, layout.height, w_cells, h_cells) for b in layout.boxes]
    extents = np.array([(lb.x0, lb.y0, lb.x1, lb.y1) for lb in latent], dtype=np.int64).reshape(-1, 4)
    areas = np.array([float(lb.area) for lb in latent], dtype=np.float64)
    cover = kernels.min_cover_fill(extents, areas, h_cells, w_cells)

    total_cells = float(h_cells * w_cells)
    background = 1.0 / total_cells**area_power
    values = np.full((h_cells, w_cells), background, dtype=np.float64)
    # One scalar pow per distinct area, not a vectorized pow per cell: numpy's
    # array pow can drift an ulp from libm and this grid must be exact.
    for area in sorted(set(areas.tolist())):
        values[cover == area] = fg_weight / area**area_power
    if normalize:
        # Exactly rounded sum, then (value * total) / sum per cell, in that
        # order: a uniform grid then normalizes to exactly 1.0.
        values = values * total_cells / math.fsum(values.ravel().tolist())
    return ReweightMask(h_cells, w_cells, values, fg_weight, area_power, normalize)


def mask_to_bytes(mask: ReweightMask) -> bytes:
    header = _MASK_HEADER.pack(
        MASK_MAGIC, mask.h, mask.w, int(mask.normalized), mask.fg_weight, mask.area_power
    )
    return header + np.ascontiguousarray(mask.values, dtype="<f4").tobytes()


def mask_to_file(mask: ReweightMask, path, image_id: str | None = None) -> None:
    """Write the "GEOM" binary; optionally a JSON sidecar at ``<path>.json``."""
    payload = mask_to_bytes(mask)
    atomic_write_bytes(path, payload)
    if image_id is not None:
        sidecar = {
            "image_id": image_id,
            "h": mask.h,
            "w": mask.w,
            "fg_weight": mask.fg_weight,
            "area_power": mask.area_power,
            "normalized": mask.normalized,
            "sha256": hashlib.sha256(payload).hexdigest(),
        }
        atomic_write_bytes(
            str(path) + ".json",
            (json.dumps(sidecar, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8"),
        )


def mask_from_bytes(blob: bytes, source: str = "<bytes>") -> ReweightMask:
    if len(blob) < _MASK_HEADER.size:
        raise BinaryFormatError(f"{source}: truncated header ({len(blob)} bytes)")
    magic, h, w, normalized, fg_weight, area_power = _MASK_HEADER.unpack_from(blob)
    if magic != MASK_MAGIC:
        raise BinaryFormatError(f"{source}: bad magic {magic!r}")
    expected = _MASK_HEADER.size + h * w * 4
    if len(blob) != expected:
        raise BinaryFormatError(f"{source}: expected {expected} bytes, found {len(blob)}")
    values = np.frombuffer(blob, dtype="<f4", offset=_MASK_HEADER.size).reshape(h, w)
    return ReweightMask(h, w, values.astype(np.float64), fg_weight, area_power, bool(normalized))


def mask_from_file(path) -> ReweightMask:
    with open(path, "rb") as fh:
        return mask_from_bytes(fh.read(), source=str(path))
