"""Seeding policy: one named generator, one documented seed-splitting rule.

Every random routine in the package takes an explicit 64-bit seed and builds
its own `numpy` PCG64 generator, so results are reproducible independent of
call order or thread scheduling.  Nested work units (trials, rows, walkers)
get child seeds from :func:`derive_seed`, a SplitMix64 hash combine of the
parent seed and the unit index.
"""

from __future__ import annotations

import numpy as np

# Recorded in every report so outputs are tied to a concrete algorithm.
PRNG_ALGORITHM = "pcg64"

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, *indices: int) -> int:
    """Child seed for work unit ``indices`` under ``seed``.

    The rule is ``h = splitmix64(seed)``, then for each index
    ``h = splitmix64(h XOR splitmix64(index))``.  Deterministic, stateless,
    and collision-resistant enough for seeding disjoint trials.
    """
    h = _splitmix64(int(seed) & _MASK64)
    for ix in indices:
        h = _splitmix64(h ^ _splitmix64(int(ix) & _MASK64))
    return h


def generator(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
