"""Deterministic, splittable random streams.

Every generator in the package draws from a stream derived from
``(seed, *tags)`` so that adding a new consumer never perturbs the draws of
an existing one.  Tags are hashed with CRC32 (stable across processes and
platforms, unlike the builtin ``hash``).
"""

from __future__ import annotations

import zlib

import numpy as np


def derive_rng(seed: int, *tags: str | int) -> np.random.Generator:
    """Return a PCG64 generator keyed by ``seed`` and a sequence of tags."""
    entropy: list[int] = [int(seed)]
    for tag in tags:
        if isinstance(tag, int):
            entropy.append(tag)
        else:
            entropy.append(zlib.crc32(str(tag).encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))
