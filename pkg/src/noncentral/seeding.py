"""Counter-based seed derivation.

Every random stream is identified by ``(master_seed, *keys)``.  Replicate ``i``
of a batch always receives the same generator no matter how the batch is split
across workers, which makes parallel runs reproducible bit-for-bit.
"""
import numpy as np


def derive_seed(master_seed, *keys):
    """Return a 64-bit integer seed for the stream ``(master_seed, *keys)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def replicate_seeds(master_seed, n, *keys):
    """Seeds for replicates ``0..n-1`` of the stream ``(master_seed, *keys)``."""
    return np.array([derive_seed(master_seed, *keys, i) for i in range(n)], dtype=np.uint64)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))
