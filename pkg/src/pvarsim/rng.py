"""Deterministic seeding utilities.

Every random object in the package is a pure function of (inputs, seed).
Per-path seeds are derived from a master seed with a fixed 64-bit mixing
function, so results never depend on worker count or scheduling order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream tags keep independent consumers of the same master seed apart.
TAG_FBM = 0x01
TAG_BM = 0x02
TAG_DRIVER = 0x03
TAG_INNER = 0x04
TAG_ORACLE = 0x05
TAG_RETRY = 0x06


def splitmix64(x: int) -> int:
    """One SplitMix64 output step; a 64-bit bijection with full avalanche."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(master_seed: int, *indices: int) -> int:
    """Derive a child seed from a master seed and an index tuple.

    mix_seed(s, i) is injective in i for fixed s up to 64-bit collisions;
    distinct tag prefixes (TAG_*) separate independent consumers.
    """
    h = splitmix64(master_seed & _MASK64)
    for ix in indices:
        h = splitmix64(h ^ (ix & _MASK64))
    return h


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for a fully mixed 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def rademacher(n: int, seed: int) -> np.ndarray:
    """n signs, each +1 or -1 with probability 1/2."""
    g = generator(seed)
    return np.where(g.integers(0, 2, size=n) == 1, 1.0, -1.0)
