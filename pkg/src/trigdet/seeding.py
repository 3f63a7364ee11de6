"""Counter-based RNG substreams.

Every random draw in the package comes from a generator keyed by
(master_seed, *path) where the path encodes what the draw is for, e.g.
(timestep, rank) or (realization,). Streams are independent of the order in
which they are created, so ranks, timesteps, and realizations can be evaluated
concurrently or in any order without changing results.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (master_seed, *path); same key -> same stream."""
    check_seed(master_seed)
    key = tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=key))


def derive_seed(master_seed: int, *path: int) -> int:
    """A 64-bit seed derived from (master_seed, *path), for APIs that take a scalar seed."""
    check_seed(master_seed)
    key = tuple(int(p) for p in path)
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
