"""Ideal FHE backend: functionally exact, insecure by design.

Ciphertexts are masked under a keystream derived from a fixed harness key,
so ``eval`` can decrypt internally, run the circuit in the clear and
re-encrypt. The secret key only gates ``dec``: ``pk = ToyHash(sk)`` and dec
refuses a key whose hash does not match the ciphertext's pk field.

Layout::

    0x49 || pk (16) || nonce (4) || one byte per plaintext bit

Each per-bit byte is ``ks_i XOR (0x00 or 0xFF)`` with
``ks = keystream(HARNESS_KEY || pk || nonce)``; any other value is corruption.
"""

import hashlib

import numpy as np

from ..bits import to_bits
from ..circuit import Circuit, CircuitBuilder, fingerprint
from ..toyhash import keystream, keystream_gadget, toyhash, toyhash_gadget

TAG = 0x49
HARNESS_KEY = b"nbzk/fhe-ideal/harness-key/v1"
PK_BYTES = 16
NONCE_BYTES = 4
HEADER = 1 + PK_BYTES + NONCE_BYTES


class IdealFheError(ValueError):
    pass


def sk_bits_len(lam):
    return 2 * lam


def gen(lam, rng):
    sk = rng.bytes((sk_bits_len(lam) + 7) // 8)
    return toyhash(sk, sk_bits_len(lam)), sk


def pk_from_sk(lam, sk):
    return toyhash(sk, sk_bits_len(lam))


def _ks(pk, nonce, n):
    return keystream(HARNESS_KEY + pk + nonce, n)


def encrypt_with_nonce(pk, bits, nonce):
    ks = _ks(pk, nonce, len(bits))
    mask = np.asarray(bits, dtype=np.uint8) * np.uint8(0xFF)
    return bytes([TAG]) + pk + nonce + (np.frombuffer(ks, np.uint8)[:len(bits)] ^ mask).tobytes()


def encrypt(pk, bits, rng):
    return encrypt_with_nonce(pk, tuple(bits), rng.bytes(NONCE_BYTES))


def ct_len(n):
    return HEADER + n


def harness_open(ct: bytes):
    """Decrypt with the harness key (the decrypt-inside-eval interface)."""
    if len(ct) < HEADER or ct[0] != TAG:
        raise IdealFheError("not an ideal-FHE ciphertext")
    pk, nonce, body = ct[1:1 + PK_BYTES], ct[1 + PK_BYTES:HEADER], ct[HEADER:]
    ks = _ks(pk, nonce, len(body))
    v = np.frombuffer(ks, np.uint8) ^ np.frombuffer(body, np.uint8)
    if np.any((v != 0) & (v != 0xFF)):
        raise IdealFheError("corrupted ciphertext block")
    return pk, tuple((v == 0xFF).astype(np.uint8).tolist())


def decrypt(lam, sk, ct: bytes):
    pk, bits = harness_open(ct)
    if pk_from_sk(lam, sk) != pk:
        raise IdealFheError("secret key does not match ciphertext")
    return bits


def evaluate(pk, c: Circuit, cts):
    bits = []
    for ct in cts:
        cpk, b = harness_open(ct)
        if cpk != pk:
            raise IdealFheError("ciphertext under a different key")
        bits.extend(b)
    if len(bits) != c.input_len:
        raise IdealFheError("circuit takes %d inputs, got %d" % (c.input_len, len(bits)))
    y = c(bits)
    h = hashlib.blake2b(fingerprint(c) + b"".join(cts), digest_size=NONCE_BYTES).digest()
    return encrypt_with_nonce(pk, y, h)


# -- circuit forms ------------------------------------------------------------

def gen_circuit(lam):
    """sk -> pk."""
    b = CircuitBuilder(sk_bits_len(lam))
    return b.build(toyhash_gadget(b, b.inputs))


def enc_gadget(b, pk_wires, nonce_wires, x_wires):
    """Ciphertext wires for plaintext ``x_wires`` under ``pk``/``nonce`` wires."""
    key = b.consts(to_bits(HARNESS_KEY)) + list(pk_wires) + list(nonce_wires)
    ks = keystream_gadget(b, key, 8 * len(x_wires))
    out = b.consts(to_bits(bytes([TAG]))) + list(pk_wires) + list(nonce_wires)
    for i, x in enumerate(x_wires):
        out += [b.xor(k, x) for k in ks[8 * i:8 * i + 8]]
    return out


def enc_circuit(pk, nonce, n):
    """x -> ct with pk and nonce hard-wired (keystream folds to constants)."""
    b = CircuitBuilder(n)
    ks = to_bits(_ks(pk, nonce, n))
    out = b.consts(to_bits(bytes([TAG]) + pk + nonce))
    for i, x in enumerate(b.inputs):
        out += [b.not_(x) if k else x for k in ks[8 * i:8 * i + 8]]
    return b.build(out)
