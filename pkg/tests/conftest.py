import math
import random

import numpy as np
import pytest

from geoprompt import kernels
from geoprompt.geo3d import CameraRig
from geoprompt.layout import AnnotatedBox, BBox2D, GeometricLayout, GridSpec

CLASS_NAMES = ("car", "truck", "trailer", "bus", "construction vehicle",
               "bicycle", "motorcycle", "pedestrian", "traffic cone", "barrier")

VIEWS = ("front", "front left", "front right", "back", "back left", "back right")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile the JIT kernels once so no individual test pays for it.
    kernels.warmup()


def random_box(rng: random.Random, width: float, height: float, integer: bool = False) -> BBox2D:
    if integer:
        x1 = rng.randint(0, int(width) - 1)
        y1 = rng.randint(0, int(height) - 1)
        x2 = rng.randint(x1 + 1, int(width))
        y2 = rng.randint(y1 + 1, int(height))
        return BBox2D(float(x1), float(y1), float(x2), float(y2))
    x1 = rng.uniform(0, width * 0.9)
    y1 = rng.uniform(0, height * 0.9)
    x2 = rng.uniform(x1, width)
    y2 = rng.uniform(y1, height)
    return BBox2D(x1, y1, x2, y2)


def random_layout(
    rng: random.Random,
    image_id: str,
    width: float = 800.0,
    height: float = 456.0,
    max_boxes: int = 6,
    integer: bool = False,
    with_view: bool = True,
) -> GeometricLayout:
    boxes = tuple(
        AnnotatedBox(
            i % len(CLASS_NAMES),
            CLASS_NAMES[i % len(CLASS_NAMES)],
            random_box(rng, width, height, integer=integer),
        )
        for i in range(rng.randint(0, max_boxes))
    )
    return GeometricLayout(
        image_id=image_id,
        width=width,
        height=height,
        boxes=boxes,
        view=rng.choice(VIEWS) if with_view else None,
    )


def default_grid(width: float = 800.0, height: float = 456.0) -> GridSpec:
    return GridSpec(400, 228, width, height)


def simple_rig(fx=500.0, fy=500.0, cx=400.0, cy=228.0) -> CameraRig:
    k = np.array([(fx, 0.0, cx), (0.0, fy, cy), (0.0, 0.0, 1.0)])
    return CameraRig(k, np.eye(4))


def random_rig(rng: random.Random) -> CameraRig:
    # Random small rotation via axis-angle, plus a translation.
    axis = np.array([rng.gauss(0, 1) for _ in range(3)])
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-0.5, 0.5)
    kx = np.array(
        [
            (0, -axis[2], axis[1]),
            (axis[2], 0, -axis[0]),
            (-axis[1], axis[0], 0),
        ]
    )
    rot = np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)
    t = np.eye(4)
    t[:3, :3] = rot
    t[:3, 3] = [rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)]
    k = np.array(
        [
            (rng.uniform(300, 900), 0.0, rng.uniform(300, 500)),
            (0.0, rng.uniform(300, 900), rng.uniform(150, 300)),
            (0.0, 0.0, 1.0),
        ]
    )
    return CameraRig(k, t)
