"""Counter-based random streams keyed by (master seed, trial index)."""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "MAX_SEED"]

MAX_SEED = 2 ** 64 - 1


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for ``key`` (e.g. a trial index) under ``master_seed``.

    The Philox key is derived by hashing ``(master_seed, key)`` through
    :class:`numpy.random.SeedSequence`, so the stream of a trial never depends
    on how many other trials exist or in which order they run. ``key``
    defaults to ``(0,)``; extra components separate e.g. matrix sizes.
    """
    if not 0 <= master_seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {master_seed}")
    key = key or (0,)
    if any(k < 0 for k in key):
        raise ValueError(f"stream key components must be >= 0, got {key}")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
