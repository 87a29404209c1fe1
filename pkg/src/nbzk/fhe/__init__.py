"""Classical FHE over the circuit IR, with two backends.

* ``ideal``: exact and fast, insecure by design (harness-keyed masking).
* ``lattice``: toy GSW over uint64 arithmetic, leveled.

The decryptor of either backend can be referenced from a CCO descriptor
(``fhe_dec_descriptor``) so an obfuscated CC program can run Dec_sk as its f.
The lattice descriptor names the key through an in-process registry, which
plays the part of the obfuscation hiding sk.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Any

from ..bits import Bits, from_bits, to_bits
from ..cco import FnDescriptor, register_native
from ..circuit import Circuit
from . import ideal, lattice
from .lattice import DepthOverflow, NoiseOverflow, Params


class FheError(ValueError):
    pass


@dataclass(frozen=True)
class FhePublicKey:
    backend: str
    lam: int
    data: Any  # ideal: pk bytes; lattice: (Params, A)

    def to_bytes(self) -> bytes:
        if self.backend == "ideal":
            return bytes([ideal.TAG]) + self.data
        p, A = self.data
        return bytes([lattice.TAG, p.logq, p.n]) + A.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, lam: int) -> "FhePublicKey":
        if data[:1] == bytes([ideal.TAG]):
            if len(data) != 1 + ideal.PK_BYTES:
                raise FheError("bad ideal public key")
            return cls("ideal", lam, bytes(data[1:]))
        if data[:1] == bytes([lattice.TAG]) and len(data) >= 3:
            import numpy as np
            p = Params(data[1], data[2])
            raw = data[3:]
            if len(raw) != 8 * p.m * (p.n + 1):
                raise FheError("bad lattice public key")
            A = np.frombuffer(raw, dtype="<u8").astype(np.uint64).reshape(p.m, p.n + 1)
            return cls("lattice", lam, (p, A))
        raise FheError("unknown public key format")


@dataclass(frozen=True)
class FheSecretKey:
    backend: str
    lam: int
    data: Any  # ideal: sk bytes; lattice: (Params, t)

    def bits(self) -> Bits:
        if self.backend == "ideal":
            return to_bits(self.data, ideal.sk_bits_len(self.lam))
        p, t = self.data
        return to_bits(t.astype("<u8").tobytes())

    def to_bytes(self) -> bytes:
        if self.backend == "ideal":
            return self.data
        return self.data[1].astype("<u8").tobytes()


@dataclass(frozen=True)
class FheKeyPair:
    pk: FhePublicKey
    sk: FheSecretKey


@dataclass(frozen=True)
class FheCiphertext:
    backend: str
    nbits: int
    payload: Any = field(repr=False)  # ideal: framed bytes; lattice: (Params, [Ct])

    def to_bytes(self) -> bytes:
        if self.backend == "ideal":
            return self.payload
        p, cts = self.payload
        return lattice.ct_bytes(p, cts)

    def bits(self) -> Bits:
        return to_bits(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "FheCiphertext":
        if data[:1] == bytes([ideal.TAG]):
            if len(data) < ideal.HEADER:
                raise FheError("truncated ciphertext")
            return cls("ideal", len(data) - ideal.HEADER, bytes(data))
        if data[:1] == bytes([lattice.TAG]):
            p, cts = lattice.ct_from_bytes(data)
            return cls("lattice", len(cts), (p, cts))
        raise FheError("unknown ciphertext tag")

    def block_size(self) -> int:
        if self.backend == "ideal":
            return 1
        p, _ = self.payload
        return p.N * (p.n + 1) * p.word_bytes + 8


def ct_len(backend: str, nbits: int, params: Params = None) -> int:
    if backend == "ideal":
        return ideal.ct_len(nbits)
    return lattice.ct_len(params or Params(), nbits)


def fhe_gen(lam: int, rng, backend: str = "ideal", params: Params = None) -> FheKeyPair:
    if backend == "ideal":
        pk, sk = ideal.gen(lam, rng)
        return FheKeyPair(FhePublicKey("ideal", lam, pk), FheSecretKey("ideal", lam, sk))
    if backend == "lattice":
        p = params or Params()
        A, t = lattice.gen(p, rng)
        return FheKeyPair(FhePublicKey("lattice", lam, (p, A)), FheSecretKey("lattice", lam, (p, t)))
    raise FheError("unknown backend %r" % backend)


def fhe_enc(pk: FhePublicKey, x, rng) -> FheCiphertext:
    x = tuple(x)
    if pk.backend == "ideal":
        return FheCiphertext("ideal", len(x), ideal.encrypt(pk.data, x, rng))
    p, A = pk.data
    return FheCiphertext("lattice", len(x), (p, [lattice.encrypt_bit(p, A, b, rng) for b in x]))


def fhe_eval(pk: FhePublicKey, c: Circuit, *cts: FheCiphertext) -> FheCiphertext:
    total = sum(ct.nbits for ct in cts)
    if total != c.input_len:
        raise FheError("circuit takes %d inputs, ciphertexts hold %d bits" % (c.input_len, total))
    if any(ct.backend != pk.backend for ct in cts):
        raise FheError("backend mismatch")
    if pk.backend == "ideal":
        try:
            out = ideal.evaluate(pk.data, c, [ct.payload for ct in cts])
        except ideal.IdealFheError as exc:
            raise FheError(str(exc)) from exc
        return FheCiphertext("ideal", c.output_len, out)
    p, _ = pk.data
    flat = [b for ct in cts for b in ct.payload[1]]
    return FheCiphertext("lattice", c.output_len, (p, lattice.evaluate(p, c, flat)))


def fhe_dec(sk: FheSecretKey, ct: FheCiphertext) -> Bits:
    if sk.backend != ct.backend:
        raise FheError("backend mismatch")
    if sk.backend == "ideal":
        try:
            return ideal.decrypt(sk.lam, sk.data, ct.payload)
        except ideal.IdealFheError as exc:
            raise FheError(str(exc)) from exc
    p, t = sk.data
    cp, cts = ct.payload
    if cp != p:
        raise FheError("parameter mismatch")
    return tuple(lattice.decrypt_bit(p, t, c) for c in cts)


# -- CCO integration ----------------------------------------------------------

_LATTICE_KEYS = {}


def _bytes_of(bits):
    return from_bits(bits)


def _ideal_dec_resolver(params: bytes):
    pk, nbits = params[:ideal.PK_BYTES], int.from_bytes(params[ideal.PK_BYTES:], "big")

    def fn(x):
        try:
            cpk, y = ideal.harness_open(_bytes_of(x))
        except ideal.IdealFheError:
            return (1,) * nbits
        if cpk != pk or len(y) != nbits:
            return (1,) * nbits
        return y

    return fn, 8 * ideal.ct_len(nbits), nbits


def _lattice_dec_resolver(params: bytes):
    key_id, nbits = params[:16], int.from_bytes(params[16:], "big")
    if key_id not in _LATTICE_KEYS:
        raise FheError("lattice key not registered")
    p, t = _LATTICE_KEYS[key_id]

    def fn(x):
        try:
            cp, cts = lattice.ct_from_bytes(_bytes_of(x))
            if cp != p or len(cts) != nbits:
                return (1,) * nbits
            return tuple(lattice.decrypt_bit(p, t, c) for c in cts)
        except lattice.LatticeError:
            return (1,) * nbits

    return fn, 8 * lattice.ct_len(p, nbits), nbits


register_native("fhe-ideal-dec", _ideal_dec_resolver)
register_native("fhe-lattice-dec", _lattice_dec_resolver)


def fhe_dec_descriptor(sk: FheSecretKey, nbits: int) -> FnDescriptor:
    """CCO descriptor for ``Dec_sk`` on ``nbits``-bit ciphertexts.

    Malformed inputs or ciphertexts under another key map to all-ones, which
    carries the bottom flag and so never matches a 0-flagged target.
    """
    if sk.backend == "ideal":
        pk = ideal.pk_from_sk(sk.lam, sk.data)
        return FnDescriptor.native("fhe-ideal-dec", pk + nbits.to_bytes(4, "big"),
                                   8 * ideal.ct_len(nbits), nbits)
    p, t = sk.data
    key_id = hashlib.blake2b(t.astype("<u8").tobytes() + bytes([p.logq, p.n]), digest_size=16).digest()
    _LATTICE_KEYS[key_id] = (p, t)
    return FnDescriptor.native("fhe-lattice-dec", key_id + nbits.to_bytes(4, "big"),
                               8 * lattice.ct_len(p, nbits), nbits)


__all__ = ["FheError", "FhePublicKey", "FheSecretKey", "FheKeyPair", "FheCiphertext", "Params",
           "DepthOverflow", "NoiseOverflow", "fhe_gen", "fhe_enc", "fhe_eval", "fhe_dec",
           "fhe_dec_descriptor", "ct_len", "secret_key_from_bits", "public_params"]


def secret_key_from_bits(backend: str, lam: int, bits, params: Params = None) -> FheSecretKey:
    """Inverse of ``FheSecretKey.bits``."""
    if backend == "ideal":
        return FheSecretKey("ideal", lam, from_bits(tuple(bits)[:ideal.sk_bits_len(lam)]))
    import numpy as np
    p = params or Params()
    raw = from_bits(tuple(bits)[:64 * p.n])
    return FheSecretKey("lattice", lam, (p, np.frombuffer(raw, dtype="<u8").astype(np.uint64)))


def public_params(pk: FhePublicKey):
    return pk.data[0] if pk.backend == "lattice" else None
