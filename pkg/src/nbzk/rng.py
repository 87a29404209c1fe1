"""Seeded randomness.

All randomness in the package flows through :class:`Rng`, a thin wrapper
around numpy's Philox-4x64 counter-based generator. Child streams are keyed
by labels (run seed, session index, role name, ...) through ``SeedSequence``,
so a stream's output depends only on its label path, never on call order
elsewhere.
"""

import hashlib

import numpy as np

from .bits import Bits, int_to_bits


def _label_words(label) -> list:
    if isinstance(label, (int, np.integer)):
        v = int(label)
        if v < 0:
            raise ValueError("negative label")
        words = []
        while True:
            words.append(v & 0xFFFFFFFF)
            v >>= 32
            if not v:
                return words
    data = label if isinstance(label, bytes) else str(label).encode()
    digest = hashlib.blake2b(data, digest_size=16).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class Rng:
    """Counter-based PRNG stream with labelled children."""

    def __init__(self, seed=0, path=()):
        self.path = (seed,) + tuple(path) if not path else tuple(path)
        entropy = []
        for label in self.path:
            words = _label_words(label)
            entropy.extend([len(words)] + words)
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

    @classmethod
    def from_path(cls, *path):
        return cls(path=path)

    def child(self, *labels) -> "Rng":
        return Rng(path=self.path + labels)

    def bytes(self, n: int) -> bytes:
        return self._gen.bytes(n) if n else b""

    def bits(self, n: int) -> Bits:
        if n == 0:
            return ()
        return int_to_bits(int.from_bytes(self.bytes((n + 7) // 8), "little"), n)

    def below(self, n: int) -> int:
        return int(self._gen.integers(0, n))

    def random(self) -> float:
        return float(self._gen.random())

    def permutation(self, n: int) -> list:
        return [int(v) for v in self._gen.permutation(n)]

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi) for arbitrary-size Python ints."""
        span = hi - lo
        nbytes = (span.bit_length() + 7) // 8 + 8
        return lo + int.from_bytes(self.bytes(nbytes), "little") % span
