"""Seeded random streams keyed by (seed, stream path)."""
from dataclasses import dataclass, field

import numpy as np

__all__ = ["RandomSource", "as_generator", "as_source"]


@dataclass(frozen=True)
class RandomSource:
    """A reproducible substream.

    Equal ``(seed, stream)`` pairs give identical draws no matter how work
    is split across threads; children extend the stream path.
    """

    seed: int
    stream: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise TypeError("seed must be an integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        stream = self.stream
        if isinstance(stream, (int, np.integer)):
            stream = (int(stream),)
        object.__setattr__(self, "stream", tuple(int(s) for s in stream))

    def child(self, *keys) -> "RandomSource":
        return RandomSource(self.seed, self.stream + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a RandomSource, a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomSource):
        return rng.generator()
    if rng is None:
        raise ValueError("an explicit seed or random source is required")
    return RandomSource(rng).generator()


def as_source(rng) -> RandomSource:
    """Coerce to a RandomSource so that callers can derive child streams."""
    if isinstance(rng, RandomSource):
        return rng
    if isinstance(rng, np.random.Generator):
        return RandomSource(int(rng.integers(0, 2**63)))
    if rng is None:
        raise ValueError("an explicit seed or random source is required")
    return RandomSource(rng)
