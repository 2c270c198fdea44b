"""Deterministic named RNG streams derived from a single pipeline seed.

Every random choice in the pipeline draws from a stream addressed by
(seed, label), so independent stages and parallel workers reproduce the
same values regardless of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_words(label: str) -> list[int]:
    """Stable 32-bit words hashed from a label string."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def rng_for(seed: int, label: str) -> np.random.Generator:
    """A generator for the stream named `label` under the master seed."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *stream_words(label)])
    return np.random.Generator(np.random.PCG64(ss))
