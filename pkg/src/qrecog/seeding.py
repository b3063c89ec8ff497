"""Counter-based seed derivation.

Every random stream in the package is keyed by a master seed plus a path of
non-negative integers (arm index, trial number, ...), so any stream can be
regenerated in isolation and evaluation order never matters.
"""

from __future__ import annotations

import numpy as np



def derive_seed(master: int, *path: int) -> int:
    """Return a 64-bit integer seed for the stream at ``path`` under ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int | np.random.Generator | None, *path: int) -> np.random.Generator:
    """Build a generator for ``seed`` (optionally at a derived ``path``).

    An existing Generator is passed through untouched so callers can thread
    one stream through several operations.
    """
    if isinstance(seed, np.random.Generator):
        if path:
            raise TypeError("cannot derive a sub-stream from a live Generator")
        return seed
    if seed is None:
        raise TypeError("an explicit seed is required")
    if path:
        return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=path))
    return np.random.default_rng(int(seed))
