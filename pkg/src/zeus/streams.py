"""Counter-based splittable random streams, one per particle.

Each particle's substream is a Philox generator keyed by (seed, particle
index), so substream i is a pure function of the pair and never depends
on how many other streams exist, which worker drew from them, or in what
order particles were processed.  Draws within a substream are consumed in
a fixed documented order (positions, then velocities, then per-sweep
coefficient vectors), giving every value a stable (particle, draw
counter) coordinate.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ParticleStreams", "make_start_streams"]

_MASK64 = (1 << 64) - 1


class ParticleStreams:
    """Lazy family of per-particle uniform generators."""

    def __init__(self, seed: int, n: int, dim: int):
        if n < 1:
            raise ValueError("need at least one particle stream")
        self.seed = int(seed) & _MASK64
        self.n = n
        self.dim = dim
        self._generators: list[np.random.Generator | None] = [None] * n

    def generator(self, i: int) -> np.random.Generator:
        """The persistent generator for particle ``i``."""
        gen = self._generators[i]
        if gen is None:
            key = np.array([self.seed, i], dtype=np.uint64)
            gen = np.random.Generator(np.random.Philox(key=key))
            self._generators[i] = gen
        return gen

    def draw_uniform(
        self, i: int, low: float, high: float, size: int
    ) -> np.ndarray:
        """Next ``size`` uniforms in [low, high) from particle i's stream."""
        return self.generator(i).uniform(low, high, size)


def make_start_streams(seed: int, n: int, dim: int) -> ParticleStreams:
    """Independent reproducible substreams for ``n`` particles.

    Identical (seed, i) pairs always reproduce identical draw sequences;
    distinct particle indices get statistically independent streams.
    """
    return ParticleStreams(seed, n, dim)
