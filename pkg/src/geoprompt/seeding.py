"""Deterministic derivation of per-record random streams.

Every randomized operation draws from its own stream keyed by (seed, purpose,
image id), so results are reproducible across runs, platforms, and worker
counts, and toggling one randomized feature never perturbs another.
"""

from __future__ import annotations

import hashlib
import random


def stream_seed(seed: int, *parts) -> int:
    """Collapse a base seed plus arbitrary key parts into a 64-bit stream seed."""
    key = "\x1f".join(str(p) for p in (seed, *parts))
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def record_rng(seed: int, image_id, purpose: str) -> random.Random:
    """Independent RNG for one (record, purpose) pair under a base seed."""
    return random.Random(stream_seed(seed, purpose, image_id))
