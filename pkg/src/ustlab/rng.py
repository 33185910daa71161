"""Reproducible, counter-based random streams.

A stream is addressed by ``(seed, stream_id)``.  Stream keys are derived
by the splitmix64 finalizer, so distinct stream ids give statistically
independent streams and the derivation is stable: replica ``i`` of an
experiment point with stream base ``b`` always uses stream id ``b + i``.

Two consumers share the derivation:

* pure-Python samplers draw from a numpy Philox generator keyed by the
  derived 128-bit key;
* compiled lattice kernels regenerate the same 64-bit key and step a
  splitmix64 state inline (see ``kernels.py``; equality of the two
  derivations is covered by tests).
"""

from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x):
    """splitmix64 finalizer; the core of all key derivation."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def stream_key(seed, stream_id):
    """64-bit key of stream ``(seed, stream_id)``."""
    return mix64(mix64(seed & _MASK) ^ mix64((stream_id + _GOLDEN) & _MASK))


def splitmix_next(state):
    """One splitmix64 step: returns (new_state, 64-bit output)."""
    state = (state + _GOLDEN) & _MASK
    return state, mix64(state)


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: (seed, stream_id) -> reproducible draws."""

    seed: int
    stream_id: int = 0

    def key(self):
        return stream_key(self.seed, self.stream_id)

    def generator(self):
        """numpy Generator on a Philox counter keyed by this stream."""
        k = self.key()
        key128 = (mix64(k ^ 0xA5A5A5A5A5A5A5A5) << 64) | k
        return np.random.Generator(np.random.Philox(key=key128))

    def substream(self, i):
        """Derived stream for sub-draws (e.g. the i-th walk of a replicate)."""
        return RngStream(self.seed, mix64(self.key() ^ (i + 1)) & _MASK)


class BufferedDraws:
    """Block-buffered 64-bit draws on top of a numpy Generator.

    Walk samplers burn one draw per step; pulling 64-bit blocks keeps the
    per-step cost down without changing reproducibility.
    """

    __slots__ = ("_gen", "_block", "_buf", "_pos")

    def __init__(self, stream, block=4096):
        self._gen = stream.generator() if isinstance(stream, RngStream) else stream
        self._block = block
        self._buf = None
        self._pos = 0

    def next_u64(self):
        if self._buf is None or self._pos >= len(self._buf):
            self._buf = self._gen.integers(0, 1 << 64, size=self._block, dtype=np.uint64)
            self._pos = 0
        v = int(self._buf[self._pos])
        self._pos += 1
        return v

    def randbelow(self, k):
        """Uniform integer in [0, k); k up to a few thousand."""
        return self.next_u64() % k

    def uniform(self):
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)
