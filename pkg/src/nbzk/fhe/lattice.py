"""Toy GSW: leveled, bitwise, NAND-complete. No security claim at these sizes.

Parameters: modulus q = 2**logq (logq <= 64, arithmetic in uint64 with a
mask), LWE dimension n, gadget width N = (n+1) * logq, m = N public rows.

* sk: t in Z_q^n, with s = (1, -t).
* pk: A = [B t + e | B] in Z_q^{m x (n+1)}, e in {-1, 0, 1}^m, so A s = e.
* Enc(mu): C = R A + mu G, R in {0,1}^{N x m}, G = I_{n+1} (x) (1, 2, ..., 2^{logq-1}).
* AND: G^-1(C1) C2 (the lower-noise operand should be C2).
* NOT: G - C.  XOR: C1 + C2 - 2 AND(C1, C2).
* Dec: (C s) at gadget rows logq-1, logq-2, logq-3 of the first block must
  all sit within q/16 of mu * 2^j. A ciphertext whose noise has overflowed
  fails that check and raises NoiseOverflow instead of returning a guess.

Each ciphertext carries a variance estimate of its noise; operations raise
DepthOverflow once 6 sigma would exceed q/16.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from ..circuit import AND, CONST0, CONST1, NOT, XOR, Circuit

TAG = 0x4C


class LatticeError(ValueError):
    pass


class DepthOverflow(LatticeError):
    pass


class NoiseOverflow(LatticeError):
    pass


@dataclass(frozen=True)
class Params:
    logq: int = 16
    n: int = 4

    @property
    def N(self):
        return (self.n + 1) * self.logq

    @property
    def m(self):
        return self.N

    @property
    def mask(self):
        return np.uint64((1 << self.logq) - 1) if self.logq < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)

    @property
    def word_bytes(self):
        return (self.logq + 7) // 8

    def limit_var(self):
        q = 2.0 ** self.logq
        return (q / 16 / 6) ** 2


MICRO_PIPELINE = Params(logq=64, n=2)


def _gadget(p: Params):
    g = np.zeros((p.N, p.n + 1), dtype=np.uint64)
    for blk in range(p.n + 1):
        for j in range(p.logq):
            g[blk * p.logq + j, blk] = np.uint64(1) << np.uint64(j)
    return g


def _ginv(p: Params, c):
    """Bit decomposition: N x (n+1) -> N x N binary with G^-1(C) G = C."""
    shifts = np.arange(p.logq, dtype=np.uint64)
    bits = (c[:, :, None] >> shifts[None, None, :]) & np.uint64(1)
    return bits.reshape(c.shape[0], p.N)


@dataclass
class Ct:
    """One encrypted bit: an N x (n+1) matrix and its noise-variance estimate."""
    mat: np.ndarray
    var: float


def _small(rng, shape):
    return np.array([rng.below(3) for _ in range(int(np.prod(shape)))], dtype=np.int64).reshape(shape) - 1


def gen(p: Params, rng):
    raw = np.frombuffer(rng.bytes(8 * p.n), dtype="<u8").astype(np.uint64) & p.mask
    t = raw
    B = np.frombuffer(rng.bytes(8 * p.m * p.n), dtype="<u8").astype(np.uint64).reshape(p.m, p.n) & p.mask
    e = _small(rng, (p.m,)).astype(np.uint64)
    with np.errstate(over="ignore"):
        b = (B @ t + e) & p.mask
    A = np.concatenate([b[:, None], B], axis=1)
    return A, t


def _secret_vec(p: Params, t):
    with np.errstate(over="ignore"):
        neg = (np.uint64(0) - t) & p.mask
    return np.concatenate([np.array([1], dtype=np.uint64), neg])


def encrypt_bit(p: Params, A, mu: int, rng) -> Ct:
    raw = np.frombuffer(rng.bytes((p.N * p.m + 7) // 8), dtype=np.uint8)
    R = np.unpackbits(raw)[:p.N * p.m].reshape(p.N, p.m).astype(np.uint64)
    with np.errstate(over="ignore"):
        C = (R @ A + np.uint64(mu) * _gadget(p)) & p.mask
    return Ct(C, p.m / 3.0)


def trivial(p: Params, mu: int) -> Ct:
    return Ct(np.uint64(mu) * _gadget(p), 0.0)


def _check(p: Params, var):
    if var > p.limit_var():
        raise DepthOverflow("noise estimate exceeds the level budget")
    return var


def op_and(p: Params, c1: Ct, c2: Ct) -> Ct:
    if c1.var > c2.var:
        c1, c2 = c2, c1
    with np.errstate(over="ignore"):
        mat = (_ginv(p, c2.mat) @ c1.mat) & p.mask
    return Ct(mat, _check(p, c1.var * p.N / 2 + c2.var))


def op_not(p: Params, c: Ct) -> Ct:
    with np.errstate(over="ignore"):
        return Ct((_gadget(p) - c.mat) & p.mask, c.var)


def op_xor(p: Params, c1: Ct, c2: Ct) -> Ct:
    a = op_and(p, c1, c2)
    with np.errstate(over="ignore"):
        mat = (c1.mat + c2.mat - np.uint64(2) * a.mat) & p.mask
    return Ct(mat, _check(p, c1.var + c2.var + 4 * a.var))


def _centered(p: Params, v: int) -> int:
    q = 1 << p.logq
    v %= q
    return v - q if v >= q // 2 else v


def decrypt_bit(p: Params, t, c: Ct) -> int:
    s = _secret_vec(p, t)
    with np.errstate(over="ignore"):
        v = (c.mat[:p.logq] @ s) & p.mask
    q = 1 << p.logq
    top = int(v[p.logq - 1])
    mu = 1 if q // 4 <= top < 3 * q // 4 else 0
    for j in (p.logq - 1, p.logq - 2, p.logq - 3):
        if abs(_centered(p, int(v[j]) - mu * (1 << j))) >= q // 16:
            raise NoiseOverflow("gadget rows disagree: noise overflow or corrupted ciphertext")
    return mu


def evaluate(p: Params, c: Circuit, cts):
    if len(cts) != c.input_len:
        raise LatticeError("circuit takes %d inputs, got %d ciphertexts" % (c.input_len, len(cts)))
    wires = list(cts)
    for op, a, b in c.gates:
        if op == AND:
            wires.append(op_and(p, wires[a], wires[b]))
        elif op == XOR:
            wires.append(op_xor(p, wires[a], wires[b]))
        elif op == NOT:
            wires.append(op_not(p, wires[a]))
        elif op == CONST0:
            wires.append(trivial(p, 0))
        elif op == CONST1:
            wires.append(trivial(p, 1))
        else:
            raise LatticeError("unknown op %d" % op)
    return [wires[w] for w in c.outputs]


def estimate_depth_ok(p: Params, depth: int) -> bool:
    """Whether a balanced circuit of this multiplicative depth fits the budget."""
    var = p.m / 3.0
    for _ in range(depth):
        var = 5 * (var * p.N / 2 + var) + 2 * var
    return var <= p.limit_var()


# -- serialization ------------------------------------------------------------

def ct_bytes(p: Params, cts) -> bytes:
    head = struct.pack(">BBBI", TAG, p.logq, p.n, len(cts))
    wb = p.word_bytes
    body = []
    for c in cts:
        flat = c.mat.astype("<u8").tobytes()
        if wb == 8:
            body.append(flat)
        else:
            arr = np.frombuffer(flat, dtype=np.uint8).reshape(-1, 8)[:, :wb]
            body.append(arr.tobytes())
        body.append(struct.pack(">d", c.var))
    return head + b"".join(body)


def ct_from_bytes(data: bytes):
    if len(data) < 7 or data[0] != TAG:
        raise LatticeError("not a lattice ciphertext")
    _, logq, n, count = struct.unpack_from(">BBBI", data)
    p = Params(logq, n)
    wb = p.word_bytes
    size = p.N * (p.n + 1)
    step = size * wb + 8
    if len(data) != 7 + count * step:
        raise LatticeError("lattice ciphertext has the wrong length")
    out = []
    for i in range(count):
        off = 7 + i * step
        raw = np.frombuffer(data[off:off + size * wb], dtype=np.uint8).reshape(size, wb)
        full = np.zeros((size, 8), dtype=np.uint8)
        full[:, :wb] = raw
        mat = full.view("<u8").reshape(p.N, p.n + 1).astype(np.uint64)
        (var,) = struct.unpack_from(">d", data, off + size * wb)
        out.append(Ct(mat, var))
    return p, out


def ct_len(p: Params, nbits: int) -> int:
    return 7 + nbits * (p.N * (p.n + 1) * p.word_bytes + 8)


def log2_noise_bound(p: Params) -> float:
    return math.log2(math.sqrt(p.limit_var()))
