"""
Counter-based random streams for A-CubeNet.

Every stochastic draw in the package (weight initialization, patch
positions, augmentation choices, AWGN fields) comes from a numpy Philox
generator keyed by (seed, stream, counter count, *counters). Because a
draw depends only on its key, a run resumed at iteration k reproduces
exactly the numbers an unbroken run would have drawn at iteration k.

SeedSequence zero-pads short entropy lists, so the number of counters is
part of the key: (7, NOISE, 3) and (7, NOISE, 3, 0) are distinct streams.

Streams:
- INIT: weight initialization
- SAMPLE: patch positions and augmentation choices
- NOISE: whole-image degradation, keyed by image index (offline training
  LQ images, evaluation, the degrade command)
- JPEG: reserved
- EVAL: gradient-check perturbations and test draws
- PATCH_NOISE: online per-patch degradation, keyed by (iteration, slot)

Example:
    >>> rng = stream(7, Stream.NOISE, 12)
    >>> rng.standard_normal(3)  # identical for every call with (7, NOISE, 12)
"""

from enum import IntEnum
from typing import List

import numpy as np


class Stream(IntEnum):
    """Named stream identifiers (part of the key; never renumber)."""

    INIT = 1
    SAMPLE = 2
    NOISE = 3
    JPEG = 4
    EVAL = 5
    PATCH_NOISE = 6


def stream_key(seed: int, stream_id: int, *counters: int) -> List[int]:
    """
    Entropy words of one stream: [seed, stream_id, len(counters), *counters].

    Raises:
        ValueError: If any key word is negative.
    """
    key = [int(seed), int(stream_id), len(counters), *(int(c) for c in counters)]
    if any(k < 0 for k in key):
        raise ValueError(f"RNG key words must be non-negative, got {key}")
    return key


def stream(seed: int, stream_id: int, *counters: int) -> np.random.Generator:
    """
    Build the generator for one (seed, stream, counters) key.

    Args:
        seed: User seed (non-negative).
        stream_id: A Stream member or any non-negative integer.
        *counters: Further non-negative key words (iteration, image index, ...).

    Returns:
        A fresh numpy Generator backed by Philox.

    Raises:
        ValueError: If any key word is negative.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(stream_key(seed, stream_id, *counters))))


__all__ = ["Stream", "stream", "stream_key"]
