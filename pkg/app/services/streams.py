"""Named, independent random streams derived from one experiment seed.

Every stochastic step takes an explicit ``numpy.random.Generator``. Streams are
keyed by purpose and integer indices (drop, batch, ...), so adding draws to one
step never shifts the numbers seen by another and parallel workers can rebuild
any stream from ``(seed, purpose, indices)`` alone.
"""

from typing import List

import numpy as np

PURPOSES = {
    "placement": 1,
    "shadowing": 2,
    "selection": 3,
    "channel": 4,
    "oracle": 5,
}


class RandomStreams:
    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)

    def _entropy(self, purpose: str, indices) -> List[int]:
        try:
            code = PURPOSES[purpose]
        except KeyError:
            raise ValueError(f"unknown random stream purpose: {purpose!r}") from None
        return [self.seed, code, *(int(i) for i in indices)]

    def generator(self, purpose: str, *indices: int) -> np.random.Generator:
        return np.random.default_rng(self._entropy(purpose, indices))

    def spawn(self, purpose: str, count: int, *indices: int) -> List[np.random.Generator]:
        """``count`` child generators for batched work under one purpose"""
        sequence = np.random.SeedSequence(self._entropy(purpose, indices))
        return [np.random.default_rng(child) for child in sequence.spawn(count)]

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed})"
