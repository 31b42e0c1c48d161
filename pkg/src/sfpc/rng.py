"""Deterministic, splittable random streams.

Every sampling task derives its own generator from (seed, key...), so
results do not depend on scheduling or on how work is chunked. String keys
are hashed with SHA-256, never with Python's randomized hash().
"""

from __future__ import annotations

import hashlib

import numpy as np


def _as_entropy(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(*keys) -> np.random.Generator:
    """Independent generator for the given (seed, index...) path."""
    return np.random.default_rng(np.random.SeedSequence([_as_entropy(k) for k in keys]))


def fingerprint64(text: str) -> int:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
