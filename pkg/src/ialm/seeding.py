"""Deterministic random-stream derivation.

One user-facing 64-bit seed fans out into independent sub-streams keyed by
small integer tuples, so problem generation, each trajectory and each
permutation draw are reproducible in isolation and independent of scheduling.
"""

import numpy as np

# stream-key namespaces
PROBLEM_STREAM = 0
TRAJECTORY_STREAM = 1


def rng_for(seed, *key):
    """Generator for sub-stream `key` of `seed` (same key -> same stream)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
