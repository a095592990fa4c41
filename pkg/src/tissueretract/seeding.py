"""Deterministic seed derivation for nested RNG streams.

Every stochastic component (environment resets, buffers, agents, episode
rollouts) gets its own integer seed derived from the run seed plus a
stable label, so reruns of the same command are bit-identical while
distinct streams stay independent.
"""

import numpy as np

_LABEL_BITS = 64


def _encode(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & (2**_LABEL_BITS - 1)
    if isinstance(part, str):
        acc = 0
        for ch in part.encode("utf-8"):
            acc = (acc * 131 + ch) & (2**_LABEL_BITS - 1)
        return acc
    raise TypeError(f"seed parts must be int or str, got {type(part)!r}")


def derive_seed(*parts) -> int:
    """Collapse (seed, label, index, ...) into one reproducible 64-bit seed."""
    entropy = [_encode(p) for p in parts]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from(*parts) -> np.random.Generator:
    """PCG64 generator seeded from derive_seed(*parts)."""
    return np.random.default_rng(derive_seed(*parts))
