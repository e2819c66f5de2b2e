"""Counter-based random streams for reproducible sampling.

A stream is identified by ``(seed, stream)``: the seed is a 64-bit integer and
``stream`` an index used to split independent draws (trials, parallel
workers) without overlap. Both go through ``numpy.random.SeedSequence`` into
a Philox generator, so a given pair always yields the same numbers.
"""

from __future__ import annotations

import numpy as np

from tnsynth.errors import ValidationError

SEED_MAX = 2**64


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_MAX:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class Stream:
    """Philox stream that counts how often it is drawn from."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = check_seed(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.Philox(ss))
        self.calls = 0

    def choice(self, probabilities: np.ndarray, size: int | None = None):
        p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
        p = p / p.sum()
        self.calls += 1
        return self._gen.choice(p.size, size=size, p=p)
