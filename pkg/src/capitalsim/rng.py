"""Counter-based random streams.

Every random decision in a simulation is drawn from a stream addressed by
``(master_seed, purpose, entity, t)``.  The generator is Philox4x64-10
(Random123) as exposed by numpy, so any other Philox implementation can
reproduce the same words:

* key     = ``[master_seed mod 2**64, entity]``
* counter = ``[0, 0, t, purpose]``; the low word is incremented before
  each block, so the first four words come from ``[1, 0, t, purpose]``
* words   = successive outputs of ``random_raw()``, block words in order

``GENERATOR_ID`` is written into every report so streams can be matched
across versions.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

GENERATOR_ID = "philox4x64-10/v1"

_MASK64 = (1 << 64) - 1


class Purpose(IntEnum):
    """Stream purposes; values are part of the stream address."""

    ENV = 1
    AGENT = 2
    MONTE_CARLO = 3
    BOOTSTRAP = 4
    EPISODE = 5
    FIXTURE = 6


def _bitgen(seed: int, purpose: int, entity: int, t: int) -> np.random.Philox:
    if seed < 0 or entity < 0 or t < 0:
        raise ValueError("seed, entity and t must be non-negative")
    # explicit uint64 arrays: numpy routes plain int lists through float64
    return np.random.Philox(
        key=np.array([seed & _MASK64, entity & _MASK64], dtype=np.uint64),
        counter=np.array([0, 0, t & _MASK64, int(purpose) & _MASK64], dtype=np.uint64),
    )


class Stream:
    """A finite-use stream of 64-bit words at one address."""

    __slots__ = ("_bits", "address")

    def __init__(self, seed: int, purpose: int, entity: int = 0, t: int = 0):
        self.address = (seed, int(purpose), entity, t)
        self._bits = _bitgen(seed, purpose, entity, t)

    def word(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, exact for any ``n``."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        nwords = (n.bit_length() + 63) // 64
        span = 1 << (64 * nwords)
        limit = span - span % n
        while True:
            x = 0
            for _ in range(nwords):
                x = (x << 64) | self.word()
            if x < limit:
                return x % n

    def uniform(self) -> float:
        """Float in ``[0, 1)`` with 53 random bits."""
        return (self.word() >> 11) * (1.0 / (1 << 53))


def numpy_generator(seed: int, purpose: int, entity: int = 0, t: int = 0) -> np.random.Generator:
    """Bulk generator at a stream address, for vectorised sampling."""
    return np.random.Generator(_bitgen(seed, purpose, entity, t))


def derive_seed(seed: int, purpose: int, index: int) -> int:
    """Child master seed, e.g. one per episode or repetition."""
    return Stream(seed, purpose, index, 0).word()
