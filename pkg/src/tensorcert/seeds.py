"""Deterministic seed derivation.

All randomness in the package flows from a single user seed.  Each task
derives its own generator from (seed, task-kind, indices...) so that results
are independent of evaluation order and thread count, and identical across
runs and platforms (no use of the process-seeded ``hash``).
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def derive(seed: int, *tags: object) -> int:
    """64-bit integer derived from a seed and a tag path."""
    text = repr((int(seed),) + tags).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big")


def rng(seed: int, *tags: object) -> random.Random:
    return random.Random(derive(seed, *tags))


def np_rng(seed: int, *tags: object) -> np.random.Generator:
    return np.random.default_rng(derive(seed, *tags))
