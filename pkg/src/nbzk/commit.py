"""Non-interactive hash commitment: digest = ToyHash(x || rand), |rand| = 2*lam.

Binding is statistical (collision resistance of a 128-bit digest), not
perfect. The serialized form is the raw 16-byte digest.
"""

from dataclasses import dataclass

from .bits import Bits, from_bits, to_bits
from .circuit import Circuit, CircuitBuilder
from .toyhash import WIDTH, toyhash, toyhash_batch, toyhash_gadget

DIGEST_BYTES = WIDTH // 8
# largest (plaintext + randomness) length for which a relation circuit is built
CIRCUIT_BUDGET_BITS = 4096


class CommitError(ValueError):
    pass


@dataclass(frozen=True)
class Commitment:
    digest: bytes
    plaintext_len: int

    def __post_init__(self):
        if len(self.digest) != DIGEST_BYTES:
            raise CommitError("digest must be %d bytes" % DIGEST_BYTES)

    def to_bytes(self) -> bytes:
        return self.digest


@dataclass(frozen=True)
class Opening:
    plaintext: Bits
    randomness: Bits


def rand_len(lam: int) -> int:
    return 2 * lam


def _digest(x, rand) -> bytes:
    bits = tuple(x) + tuple(rand)
    return toyhash(from_bits(bits), len(bits))


def commit(lam: int, x, rand) -> Commitment:
    if len(rand) != rand_len(lam):
        raise CommitError("randomness must be %d bits, got %d" % (rand_len(lam), len(rand)))
    return Commitment(_digest(x, rand), len(x))


def commit_random(lam: int, x, rng):
    """Commit with fresh randomness drawn from ``rng``; returns (commitment, opening)."""
    r = rng.bits(rand_len(lam))
    return commit(lam, x, r), Opening(tuple(x), r)


def verify_open(c: Commitment, x, rand, lam: int = None) -> bool:
    if lam is not None and len(rand) != rand_len(lam):
        return False
    if len(x) != c.plaintext_len:
        return False
    return _digest(x, rand) == c.digest


def commit_many(lam: int, plaintexts, rands) -> list:
    """Batch commit for equal-length plaintexts (used by the sigma engine)."""
    if not plaintexts:
        return []
    n = len(plaintexts[0])
    rl = rand_len(lam)
    msgs = []
    for x, r in zip(plaintexts, rands):
        if len(x) != n or len(r) != rl:
            raise CommitError("batch entries must share lengths")
        msgs.append(from_bits(tuple(x) + tuple(r)))
    return [Commitment(d, n) for d in toyhash_batch(msgs, n + rl)]


def commitment_gadget(builder, x_wires, rand_wires) -> list:
    return toyhash_gadget(builder, list(x_wires) + list(rand_wires))


def relation_circuit(lam: int, plaintext_len: int) -> Circuit:
    """Circuit over (x || rand || digest) returning 1 iff the opening verifies."""
    rl = rand_len(lam)
    if plaintext_len + rl > CIRCUIT_BUDGET_BITS:
        raise CommitError("parameters exceed the circuit budget")
    b = CircuitBuilder(plaintext_len + rl + WIDTH)
    w = b.inputs
    x, r, d = w[:plaintext_len], w[plaintext_len:plaintext_len + rl], w[plaintext_len + rl:]
    return b.build([b.equals(commitment_gadget(b, x, r), d)])


def digest_bits(c: Commitment) -> Bits:
    return to_bits(c.digest, WIDTH)
