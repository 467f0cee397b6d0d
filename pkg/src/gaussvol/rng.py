"""Reproducible random number streams.

Every stochastic operation in the package takes either an :class:`RngStream`
(a named, replayable stream identity) or a live ``numpy.random.Generator``.
Two streams with distinct ``stream_id`` derived from the same seed are
statistically independent; the same ``(seed, stream_id)`` always reproduces
the same variate sequence, which is what makes whole runs replayable from a
single command-line seed.

Internal sub-derivations (one per median-boost run, per diagnostic block,
and so on) extend the spawn key below the stream, so they can never collide
with user-chosen stream ids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "as_generator"]


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not (0 <= int(self.stream_id) < 2**64):
            raise ValueError("stream_id must fit in an unsigned 64-bit integer")

    def seed_sequence(self, *path: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *path))

    def generator(self, *path: int) -> np.random.Generator:
        """A fresh generator for this stream, optionally sub-keyed by ``path``."""
        return np.random.default_rng(self.seed_sequence(*path))

    def derive(self, *path: int) -> "RngStream":
        """A derived stream addressed below this one (collision-free)."""
        return _DerivedStream(self.seed, self.stream_id, path)


@dataclass(frozen=True)
class _DerivedStream(RngStream):
    path: tuple[int, ...] = ()

    def __init__(self, seed: int, stream_id: int, path: tuple[int, ...]):
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "stream_id", stream_id)
        object.__setattr__(self, "path", tuple(path))
        self.__post_init__()

    def seed_sequence(self, *path: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            self.seed, spawn_key=(self.stream_id, *self.path, *path)
        )

    def derive(self, *path: int) -> "RngStream":
        return _DerivedStream(self.seed, self.stream_id, self.path + tuple(path))


def as_generator(rng) -> np.random.Generator:
    """Normalize an ``RngStream`` or ``Generator`` to a live generator.

    Passing a ``Generator`` hands over its (mutable) state: the caller and
    callee then share one stream, which is exactly what sequential pipeline
    stages want.  Passing an ``RngStream`` starts the stream from its origin.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"rng must be an RngStream or numpy Generator, got {type(rng).__name__}")
