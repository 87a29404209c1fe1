"""ToyHash: a small ARX sponge with a 128-bit digest.

State is four 64-bit words ``(s0, s1, s2, s3)``; the rate is the first two
words (128 bits), the capacity the last two.

* IV: the first four SHA-512 initial words, with the message length in bits
  XORed into ``s0``.
* Padding: a single 1 bit at position ``bitlen``, then zeros up to a multiple
  of 128 bits (so a full final block gets one extra padding block).
* Message bits map to words LSB-first: bit ``i`` of a block lands in word
  ``i // 64`` at bit ``i % 64``. For byte input this is plain little-endian.
* Absorb: XOR the block into ``(s0, s1)``, then apply the permutation.
* Permutation: 12 rounds of::

      s0 += s1; s3 ^= s0; s3 <<<= 32
      s2 += s3; s1 ^= s2; s1 <<<= 40
      s0 += s1; s3 ^= s0; s3 <<<= 48
      s2 += s3; s1 ^= s2; s1 <<<= 1
      s0 ^= RC[r],   RC[r] = 0x243F6A8885A308D3 + r * 0x9E3779B97F4A7C15 (mod 2**64)

* Digest: ``s0 || s1`` (little-endian), 128 bits.

The same function is available natively (pure Python, optionally numba) and
as a circuit gadget, so commitments can appear inside NP relations.
"""

import os

import numpy as np

from .bits import Bits, from_bits, to_bits

WIDTH = 128
ROUNDS = 12
M64 = (1 << 64) - 1
IV = (0x6A09E667F3BCC908, 0xBB67AE8584CAA73B, 0x3C6EF372FE94F82B, 0xA54FF53A5F1D36F1)
RC = tuple((0x243F6A8885A308D3 + r * 0x9E3779B97F4A7C15) & M64 for r in range(ROUNDS))
ROT = (32, 40, 48, 1)


def _perm_py(a, b, c, d):
    for rc in RC:
        a = (a + b) & M64; d ^= a; d = ((d << 32) | (d >> 32)) & M64
        c = (c + d) & M64; b ^= c; b = ((b << 40) | (b >> 24)) & M64
        a = (a + b) & M64; d ^= a; d = ((d << 48) | (d >> 16)) & M64
        c = (c + d) & M64; b ^= c; b = ((b << 1) | (b >> 63)) & M64
        a ^= rc
    return a, b, c, d


def _load_numba():
    if os.environ.get("NBZK_NO_NUMBA"):
        return None
    try:
        import numba
    except ImportError:
        return None
    rcs = np.array(RC, dtype=np.uint64)

    @numba.njit(cache=True)
    def sponge(words, nblocks, s):
        a, b, c, d = s[0], s[1], s[2], s[3]
        for k in range(nblocks):
            a ^= words[2 * k]
            b ^= words[2 * k + 1]
            for rc in rcs:
                a = a + b; d ^= a; d = (d << np.uint64(32)) | (d >> np.uint64(32))
                c = c + d; b ^= c; b = (b << np.uint64(40)) | (b >> np.uint64(24))
                a = a + b; d ^= a; d = (d << np.uint64(48)) | (d >> np.uint64(16))
                c = c + d; b ^= c; b = (b << np.uint64(1)) | (b >> np.uint64(63))
                a ^= rc
        s[0] = a; s[1] = b; s[2] = c; s[3] = d

    @numba.njit(cache=True)
    def sponge_batch(words, nblocks, a0, iv1, iv2, iv3, out):
        for m in range(words.shape[0]):
            a, b, c, d = a0, iv1, iv2, iv3
            for k in range(nblocks):
                a ^= words[m, 2 * k]
                b ^= words[m, 2 * k + 1]
                for rc in rcs:
                    a = a + b; d ^= a; d = (d << np.uint64(32)) | (d >> np.uint64(32))
                    c = c + d; b ^= c; b = (b << np.uint64(40)) | (b >> np.uint64(24))
                    a = a + b; d ^= a; d = (d << np.uint64(48)) | (d >> np.uint64(16))
                    c = c + d; b ^= c; b = (b << np.uint64(1)) | (b >> np.uint64(63))
                    a ^= rc
            out[m, 0] = a
            out[m, 1] = b

    return sponge, sponge_batch


_jits = _load_numba()
_sponge_jit, _sponge_batch_jit = _jits if _jits else (None, None)


def _padded_words(data: bytes, bitlen: int):
    nblocks = bitlen // 128 + 1
    n = int.from_bytes(data, "little") & ((1 << bitlen) - 1)
    n |= 1 << bitlen
    raw = n.to_bytes(16 * nblocks, "little")
    return raw, nblocks


def toyhash_py(data: bytes, bitlen: int = None) -> bytes:
    """Reference pure-Python ToyHash of the first ``bitlen`` bits of ``data``."""
    if bitlen is None:
        bitlen = 8 * len(data)
    raw, nblocks = _padded_words(data, bitlen)
    a, b, c, d = IV[0] ^ (bitlen & M64), IV[1], IV[2], IV[3]
    for k in range(nblocks):
        a ^= int.from_bytes(raw[16 * k:16 * k + 8], "little")
        b ^= int.from_bytes(raw[16 * k + 8:16 * k + 16], "little")
        a, b, c, d = _perm_py(a, b, c, d)
    return a.to_bytes(8, "little") + b.to_bytes(8, "little")


def toyhash(data: bytes, bitlen: int = None) -> bytes:
    """ToyHash digest (16 bytes) of the first ``bitlen`` bits of ``data``."""
    if _sponge_jit is None:
        return toyhash_py(data, bitlen)
    if bitlen is None:
        bitlen = 8 * len(data)
    raw, nblocks = _padded_words(data, bitlen)
    words = np.frombuffer(raw, dtype="<u8")
    s = np.array([IV[0] ^ (bitlen & M64), IV[1], IV[2], IV[3]], dtype=np.uint64)
    _sponge_jit(words, nblocks, s)
    return s[:2].astype("<u8").tobytes()


def toyhash_bits(bits) -> Bits:
    return to_bits(toyhash(from_bits(bits), len(bits)), WIDTH)


def keystream(key: bytes, nbytes: int) -> bytes:
    """Counter-mode stream: ToyHash(key || ctr32) blocks, concatenated."""
    count = (nbytes + 15) // 16
    if count <= 1:
        return b"".join(toyhash(key + ctr.to_bytes(4, "little")) for ctr in range(count))[:nbytes]
    ctrs = np.arange(count, dtype="<u4").view(np.uint8).reshape(count, 4)
    return _batch_blob(None, 8 * len(key) + 32, count, prefix=key, tails=ctrs)[:nbytes]


def _batch_blob(messages, bitlen: int, count: int, prefix: bytes = b"", tails=None):
    """Concatenated digests; byte-aligned inputs skip the big-int padding path."""
    nblocks = bitlen // 128 + 1
    if bitlen % 8 == 0 and (messages is None or all(len(m) == bitlen // 8 for m in messages)):
        buf = np.zeros((count, 16 * nblocks), dtype=np.uint8)
        if messages is None:
            buf[:, :len(prefix)] = np.frombuffer(prefix, np.uint8)
            buf[:, len(prefix):bitlen // 8] = tails
        elif bitlen:
            buf[:, :bitlen // 8] = np.frombuffer(b"".join(messages), np.uint8).reshape(count, -1)
        buf[:, bitlen // 8] = 1
        words = buf.view("<u8").astype(np.uint64)
    else:
        raw = b"".join(_padded_words(m, bitlen)[0] for m in messages)
        words = np.frombuffer(raw, dtype="<u8").reshape(count, 2 * nblocks).astype(np.uint64)
    if _sponge_batch_jit is not None:
        res = np.empty((count, 2), dtype=np.uint64)
        _sponge_batch_jit(words, nblocks, np.uint64(IV[0] ^ (bitlen & M64)), np.uint64(IV[1]),
                          np.uint64(IV[2]), np.uint64(IV[3]), res)
        return res.astype("<u8").tobytes()
    return _batch_numpy(words, nblocks, bitlen, count)


def toyhash_batch(messages, bitlen: int) -> list:
    """Vectorised ToyHash over many messages of equal bit length."""
    count = len(messages)
    if count == 0:
        return []
    out = _batch_blob(messages, bitlen, count)
    return [out[16 * i:16 * i + 16] for i in range(count)]


def _batch_numpy(words, nblocks, bitlen, count):
    a = np.full(count, IV[0] ^ (bitlen & M64), dtype=np.uint64)
    b = np.full(count, IV[1], dtype=np.uint64)
    c = np.full(count, IV[2], dtype=np.uint64)
    d = np.full(count, IV[3], dtype=np.uint64)
    u = np.uint64
    with np.errstate(over="ignore"):
        for k in range(nblocks):
            a ^= words[:, 2 * k]
            b ^= words[:, 2 * k + 1]
            for rc in RC:
                a += b; d ^= a; d = (d << u(32)) | (d >> u(32))
                c += d; b ^= c; b = (b << u(40)) | (b >> u(24))
                a += b; d ^= a; d = (d << u(48)) | (d >> u(16))
                c += d; b ^= c; b = (b << u(1)) | (b >> u(63))
                a ^= u(rc)
    return np.stack([a, b], axis=1).astype("<u8").tobytes()


# -- circuit gadget -----------------------------------------------------------

def _word_consts(builder, value):
    return builder.consts([(value >> i) & 1 for i in range(64)])


def _rotl(word, r):
    return [word[(i - r) % 64] for i in range(64)]


def toyhash_gadget(builder, msg_wires) -> list:
    """Emit ToyHash over ``msg_wires`` (length fixed at build time); returns 128 wires."""
    bitlen = len(msg_wires)
    nblocks = bitlen // 128 + 1
    padded = list(msg_wires) + [builder.const(1)] + [builder.const(0)] * (128 * nblocks - bitlen - 1)
    s = [_word_consts(builder, IV[0] ^ (bitlen & M64))] + [_word_consts(builder, v) for v in IV[1:]]
    xor = builder.xor
    for k in range(nblocks):
        blk = padded[128 * k:128 * (k + 1)]
        s[0] = [xor(x, y) for x, y in zip(s[0], blk[:64])]
        s[1] = [xor(x, y) for x, y in zip(s[1], blk[64:])]
        a, b, c, d = s
        for rc in RC:
            a = builder.add(a, b); d = _rotl([xor(x, y) for x, y in zip(d, a)], 32)
            c = builder.add(c, d); b = _rotl([xor(x, y) for x, y in zip(b, c)], 40)
            a = builder.add(a, b); d = _rotl([xor(x, y) for x, y in zip(d, a)], 48)
            c = builder.add(c, d); b = _rotl([xor(x, y) for x, y in zip(b, c)], 1)
            a = [builder.not_(w) if (rc >> i) & 1 else w for i, w in enumerate(a)]
        s = [a, b, c, d]
    return s[0] + s[1]


def keystream_gadget(builder, key_wires, nbits: int) -> list:
    out = []
    ctr = 0
    while len(out) < nbits:
        ctr_wires = builder.consts([(ctr >> i) & 1 for i in range(32)])
        out += toyhash_gadget(builder, list(key_wires) + ctr_wires)
        ctr += 1
    return out[:nbits]


def toyhash_circuit(msg_len: int):
    from .circuit import CircuitBuilder
    b = CircuitBuilder(msg_len)
    return b.build(toyhash_gadget(b, b.inputs))
