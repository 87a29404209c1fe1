"""Compute-and-compare obfuscation under the random-oracle heuristic.

``CC[f, u, z](x)`` returns ``z`` when ``f(x) == u`` and ``None`` (bottom)
otherwise. The obfuscation hides ``u`` and ``z`` behind ToyHash:

    salt (16) || lock (16) || u32 |z| || enc(z) || tag (16) || u32 |desc| || desc

with ``lock = H(01 || salt || u)``, ``enc(z) = z XOR KS(02 || u || salt)`` and
``tag = H(03 || u || salt || z)``. Only an input mapping to ``u`` reproduces
the lock, and only ``u`` yields the payload key. Correctness holds up to a
128-bit hash collision.

``f`` travels as a descriptor: a serialized circuit, the identity, or a
reference to a registered native function (e.g. an FHE decryptor).
"""

import struct
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from .bits import Bits, from_bits, nbytes, to_bits
from .circuit import Circuit, deserialize_circuit, eval_circuit, serialize_circuit
from .toyhash import keystream, toyhash

SALT_BYTES = 16
LOCK_BYTES = 16
TAG_BYTES = 16

KIND_CIRCUIT, KIND_IDENTITY, KIND_NATIVE, KIND_DUMMY = 0, 1, 2, 3


class CCOError(ValueError):
    pass


class TamperError(CCOError):
    """The lock opened but the payload failed authentication."""


# name -> resolver(params: bytes) -> (fn(bits) -> bits, input_len, output_len)
_NATIVE: Dict[str, Callable] = {}


def register_native(name: str, resolver: Callable) -> None:
    _NATIVE[name] = resolver


@dataclass(frozen=True)
class FnDescriptor:
    kind: int
    input_len: int
    output_len: int
    data: bytes = b""

    @classmethod
    def from_circuit(cls, c: Circuit) -> "FnDescriptor":
        return cls(KIND_CIRCUIT, c.input_len, c.output_len, serialize_circuit(c))

    @classmethod
    def identity(cls, n: int) -> "FnDescriptor":
        return cls(KIND_IDENTITY, n, n)

    @classmethod
    def native(cls, name: str, params: bytes, input_len: int, output_len: int) -> "FnDescriptor":
        nb = name.encode()
        return cls(KIND_NATIVE, input_len, output_len, struct.pack(">H", len(nb)) + nb + params)

    def native_parts(self):
        (n,) = struct.unpack_from(">H", self.data)
        return self.data[2:2 + n].decode(), self.data[2 + n:]

    def evaluate(self, x) -> Bits:
        x = tuple(x)
        if len(x) != self.input_len:
            raise CCOError("f expects %d input bits, got %d" % (self.input_len, len(x)))
        if self.kind == KIND_IDENTITY:
            return x
        if self.kind == KIND_CIRCUIT:
            return eval_circuit(deserialize_circuit(self.data), x)
        if self.kind == KIND_NATIVE:
            name, params = self.native_parts()
            if name not in _NATIVE:
                raise CCOError("unregistered native function %r" % name)
            fn, _, out_len = _NATIVE[name](params)
            y = tuple(fn(x))
            if len(y) != self.output_len:
                raise CCOError("native %r returned %d bits, expected %d" % (name, len(y), self.output_len))
            return y
        if self.kind == KIND_DUMMY:
            return (0,) * self.output_len
        raise CCOError("unknown descriptor kind %d" % self.kind)

    def to_bytes(self) -> bytes:
        return struct.pack(">BII", self.kind, self.input_len, self.output_len) + self.data

    @classmethod
    def from_bytes(cls, data: bytes) -> "FnDescriptor":
        if len(data) < 9:
            raise CCOError("descriptor too short")
        kind, i, o = struct.unpack_from(">BII", data)
        return cls(kind, i, o, bytes(data[9:]))


@dataclass(frozen=True)
class CCProgram:
    f: FnDescriptor
    u: Bits
    z: Bits

    def __post_init__(self):
        if len(self.u) != self.f.output_len:
            raise CCOError("target has %d bits, f outputs %d" % (len(self.u), self.f.output_len))


@dataclass(frozen=True)
class ObfuscatedProgram:
    salt: bytes
    lock: bytes
    z_len: int
    enc: bytes
    tag: bytes
    f: FnDescriptor

    def to_bytes(self) -> bytes:
        d = self.f.to_bytes()
        return b"".join([self.salt, self.lock, struct.pack(">I", self.z_len), self.enc, self.tag,
                         struct.pack(">I", len(d)), d])

    @classmethod
    def from_bytes(cls, data: bytes) -> "ObfuscatedProgram":
        try:
            off = SALT_BYTES + LOCK_BYTES
            salt, lock = data[:SALT_BYTES], data[SALT_BYTES:off]
            (z_len,) = struct.unpack_from(">I", data, off)
            off += 4
            zb = nbytes(z_len)
            enc = data[off:off + zb]
            off += zb
            tag = data[off:off + TAG_BYTES]
            off += TAG_BYTES
            (dl,) = struct.unpack_from(">I", data, off)
            off += 4
            desc = data[off:off + dl]
        except struct.error as exc:
            raise CCOError("truncated obfuscated program") from exc
        if len(enc) != zb or len(tag) != TAG_BYTES or len(desc) != dl or off + dl != len(data):
            raise CCOError("malformed obfuscated program")
        return cls(bytes(salt), bytes(lock), z_len, bytes(enc), bytes(tag), FnDescriptor.from_bytes(desc))


def obf_size(f: FnDescriptor, z_len: int) -> int:
    return SALT_BYTES + LOCK_BYTES + 4 + nbytes(z_len) + TAG_BYTES + 4 + len(f.to_bytes())


def _ub(u) -> bytes:
    return from_bits(tuple(u))


def _lock(salt: bytes, u) -> bytes:
    return toyhash(b"\x01" + salt + _ub(u))


def _pad(u, salt: bytes, n: int) -> bytes:
    return keystream(b"\x02" + _ub(u) + salt, n)


def _tag(u, salt: bytes, zb: bytes) -> bytes:
    return toyhash(b"\x03" + _ub(u) + salt + zb)


def cc_eval(p: CCProgram, x) -> Optional[Bits]:
    return tuple(p.z) if p.f.evaluate(x) == tuple(p.u) else None


def obfuscate(p: CCProgram, rng=None, salt: bytes = None) -> ObfuscatedProgram:
    if salt is None:
        salt = rng.bytes(SALT_BYTES)
    zb = from_bits(tuple(p.z))
    enc = bytes(a ^ b for a, b in zip(zb, _pad(p.u, salt, len(zb))))
    return ObfuscatedProgram(salt, _lock(salt, p.u), len(p.z), enc, _tag(p.u, salt, zb), p.f)


def obf_eval(o: ObfuscatedProgram, x) -> Optional[Bits]:
    """Run the obfuscated program: payload bits, or None for bottom.

    Raises TamperError when the lock opens but the payload does not
    authenticate.
    """
    y = o.f.evaluate(x)
    if _lock(o.salt, y) != o.lock:
        return None
    zb = bytes(a ^ b for a, b in zip(o.enc, _pad(y, o.salt, len(o.enc))))
    if _tag(y, o.salt, zb) != o.tag:
        raise TamperError("payload authentication failed")
    return to_bits(zb, o.z_len)


def cc_simulate(f_size: int, z_size: int, lam: int, rng, input_len: int = 0,
                output_len: int = None) -> ObfuscatedProgram:
    """Dummy obfuscation from sizes alone: random lock and payload.

    ``f_size`` is the byte length of the descriptor to imitate; the dummy
    descriptor evaluates to zeros, which misses the random lock w.h.p.
    """
    if output_len is None:
        output_len = lam
    pad = max(0, f_size - 9)
    f = FnDescriptor(KIND_DUMMY, input_len, output_len, rng.bytes(pad))
    return ObfuscatedProgram(rng.bytes(SALT_BYTES), rng.bytes(LOCK_BYTES), z_size,
                             rng.bytes(nbytes(z_size)), rng.bytes(TAG_BYTES), f)
