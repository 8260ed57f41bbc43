"""Pinhole projection of 3D boxes and tokenization of their 8 corners.

Corner order convention (fixed, since reversal must mean something): bottom
face counter-clockwise seen from above starting at front-left, then the top
face in the same order. Index layout:

    0 front-left-bottom   4 front-left-top
    1 back-left-bottom    5 back-left-top
    2 back-right-bottom   6 back-right-top
    3 front-right-bottom  7 front-right-top

Projection runs world -> camera through a 4x4 rigid transform, then camera ->
image through the 3x3 intrinsics with zero skew. A corner at camera depth
<= 0 is invisible; a box with any invisible or out-of-frame corner is culled
rather than clamped, because clamping corners independently destroys the
projected shape.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .codec import BoxPhrase, TokenVocabulary, encode_corner
from .errors import NotEncodableError
from .layout import GridSpec

#: Corner index pairs forming the edges of each face, opposing faces aligned.
_OPPOSING_FACES = (
    ((0, 1, 2, 3), (4, 5, 6, 7)),  # bottom vs top
    ((0, 3, 7, 4), (1, 2, 6, 5)),  # front vs back
    ((0, 1, 5, 4), (3, 2, 6, 7)),  # left vs right
)

_RIGIDITY_TOL = 1e-6


@dataclass(frozen=True)
class CameraRig:
    """Intrinsics (3x3, zero skew) plus world-to-camera extrinsics (4x4)."""

    intrinsics: np.ndarray
    extrinsics: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.intrinsics, dtype=np.float64)
        t = np.asarray(self.extrinsics, dtype=np.float64)
        if k.shape != (3, 3) or t.shape != (4, 4):
            raise ValueError(f"intrinsics must be 3x3 and extrinsics 4x4, got {k.shape} and {t.shape}")
        if k[0, 0] <= 0 or k[1, 1] <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={k[0, 0]}, fy={k[1, 1]}")
        if abs(k[0, 1]) > 1e-9:
            raise ValueError(f"skew must be zero, got {k[0, 1]}")
        if np.max(np.abs(k[2] - (0.0, 0.0, 1.0))) > 1e-9:
            raise ValueError("intrinsics bottom row must be [0, 0, 1]")
        if np.max(np.abs(t[3] - (0.0, 0.0, 0.0, 1.0))) > 1e-9:
            raise ValueError("extrinsics bottom row must be [0, 0, 0, 1]")
        r = t[:3, :3]
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-6:
            raise ValueError("extrinsic rotation block is not orthonormal")
        object.__setattr__(self, "intrinsics", k)
        object.__setattr__(self, "extrinsics", t)
        k.setflags(write=False)
        t.setflags(write=False)

    @classmethod
    def from_file(cls, path) -> "CameraRig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        k = np.asarray(raw["intrinsics"], dtype=np.float64).reshape(3, 3)
        t = np.asarray(raw["extrinsics"], dtype=np.float64).reshape(4, 4)
        return cls(k, t)


@dataclass(frozen=True)
class Box3D:
    """8 world-frame corners in meters, in the documented order."""

    corners: np.ndarray  # (8, 3) float64

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.float64)
        if c.shape != (8, 3):
            raise ValueError(f"expected 8 corners of 3 coords, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("corners must be finite")
        for face_a, face_b in _OPPOSING_FACES:
            for i in range(4):
                ea = np.linalg.norm(c[face_a[(i + 1) % 4]] - c[face_a[i]])
                eb = np.linalg.norm(c[face_b[(i + 1) % 4]] - c[face_b[i]])
                if abs(ea - eb) > _RIGIDITY_TOL * max(1.0, ea, eb):
                    raise ValueError(
                        f"opposing face edges differ: {ea} vs {eb} (corner {face_a[i]})"
                    )
        object.__setattr__(self, "corners", c)
        c.setflags(write=False)


def box_from_pose(
    center: tuple[float, float, float],
    size: tuple[float, float, float],
    yaw: float = 0.0,
) -> Box3D:
    """Axis-aligned box of (length, width, height) rotated by yaw about +z.

    Length runs along the box's forward axis, width to its left, height up.
    """
    length, width, height = size
    hl, hw, hh = length / 2.0, width / 2.0, height / 2.0
    base = np.array(
        [
            (+hl, +hw, -hh),
            (-hl, +hw, -hh),
            (-hl, -hw, -hh),
            (+hl, -hw, -hh),
            (+hl, +hw, +hh),
            (-hl, +hw, +hh),
            (-hl, -hw, +hh),
            (+hl, -hw, +hh),
        ],
        dtype=np.float64,
    )
    cos_y, sin_y = math.cos(yaw), math.sin(yaw)
    rot = np.array(
        [(cos_y, -sin_y, 0.0), (sin_y, cos_y, 0.0), (0.0, 0.0, 1.0)], dtype=np.float64
    )
    return Box3D(base @ rot.T + np.asarray(center, dtype=np.float64))


def project_corners(box: Box3D, rig: CameraRig) -> tuple[np.ndarray, np.ndarray]:
    """Project all 8 corners; returns ((8, 2) pixels, (8,) visibility).

    Invisible corners (camera depth <= 0) keep NaN coordinates.
    """
    world = np.concatenate([box.corners, np.ones((8, 1))], axis=1)
    cam = world @ rig.extrinsics.T
    depth = cam[:, 2]
    visible = depth > 0.0
    pixels = np.full((8, 2), np.nan, dtype=np.float64)
    if np.any(visible):
        proj = cam[visible, :3] @ rig.intrinsics.T
        pixels[visible] = proj[:, :2] / proj[:, 2:3]
    return pixels, visible


def encode_box3d(
    box: Box3D,
    rig: CameraRig,
    grid: GridSpec,
    reverse: bool = False,
    class_name: str = "object",
    vocab: TokenVocabulary | None = None,
) -> BoxPhrase:
    """Tokenize the 8 projected corners, optionally in reversed order.

    Raises NotEncodableError when any corner is behind the camera or outside
    the image frame; partial boxes are culled, not clamped.
    """
    pixels, visible = project_corners(box, rig)
    if not np.all(visible):
        raise NotEncodableError(
            f"{int(8 - visible.sum())} of 8 corners are behind the camera"
        )
    in_frame = (
        (pixels[:, 0] >= 0.0)
        & (pixels[:, 0] <= grid.width)
        & (pixels[:, 1] >= 0.0)
        & (pixels[:, 1] <= grid.height)
    )
    if not np.all(in_frame):
        raise NotEncodableError(
            f"{int(8 - in_frame.sum())} of 8 corners project outside the frame"
        )
    order = range(7, -1, -1) if reverse else range(8)
    tokens = tuple(encode_corner(pixels[i, 0], pixels[i, 1], grid, vocab) for i in order)
    return BoxPhrase(class_name, tokens)
