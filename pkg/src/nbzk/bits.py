"""Bit-string helpers.

Bits are tuples of 0/1 ints. Bytes <-> bits conversion is LSB-first within
each byte, so that bit ``i`` of a byte string is ``(data[i // 8] >> (i % 8)) & 1``.
Every component (hash, circuits, wire formats) uses this one convention.
"""

from typing import Iterable, Sequence, Tuple

import numpy as np

Bits = Tuple[int, ...]


def to_bits(data: bytes, nbits: int = None) -> Bits:
    if nbits is None:
        nbits = 8 * len(data)
    if nbits > 8 * len(data):
        raise ValueError("not enough bytes for %d bits" % nbits)
    arr = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), bitorder="little")
    return tuple(arr[:nbits].tolist())


def from_bits(bits: Sequence[int]) -> bytes:
    if not len(bits):
        return b""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def int_to_bits(value: int, width: int) -> Bits:
    return tuple((value >> i) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    n = 0
    for i, b in enumerate(bits):
        if b:
            n |= 1 << i
    return n


def xor_bits(a: Sequence[int], b: Sequence[int]) -> Bits:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return tuple(x ^ y for x, y in zip(a, b))


def concat(*parts: Iterable[int]) -> Bits:
    out = []
    for p in parts:
        out.extend(p)
    return tuple(out)


def zeros(n: int) -> Bits:
    return (0,) * n


def nbytes(nbits: int) -> int:
    return (nbits + 7) // 8
