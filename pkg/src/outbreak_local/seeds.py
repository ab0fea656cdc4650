"""Deterministic substream derivation for seeded Monte Carlo runs.

Every random quantity in this package is driven by a 64-bit substream seed
derived from (master_seed, label, index). The derivation is a fixed bit-exact
mix so that results are independent of scheduling, worker count, and platform,
and so that other implementations can reproduce the streams. The mix is the
SplitMix64 finalizer applied byte-wise:

    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9  (mod 2^64)
               z ^= z >> 27;  z *= 0x94D049BB133111EB  (mod 2^64)
               z ^= z >> 31

    substream_seed(master, label, index):
        h = mix64(master mod 2^64)
        for each byte b of UTF-8(label):  h = mix64(h xor b)
        return mix64(h xor (index mod 2^64))

The resulting 64-bit value seeds a numpy PCG64 generator through SeedSequence.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def substream_seed(master: int, label: str, index: int = 0) -> int:
    """64-bit seed for the substream identified by (master, label, index)."""
    h = mix64(master)
    for b in label.encode("utf-8"):
        h = mix64(h ^ b)
    return mix64(h ^ (index & MASK64))


def rng_for(master: int, label: str, index: int = 0) -> np.random.Generator:
    """A fresh PCG64 generator on the substream (master, label, index)."""
    return np.random.Generator(np.random.PCG64(substream_seed(master, label, index)))
