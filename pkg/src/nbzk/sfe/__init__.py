"""Two-message function-hiding secure function evaluation.

Flows are framed as ``backend tag byte || body``; bodies have lengths fixed by
(lam, sizes), never by plaintext values. Outputs of CC-style circuits carry a
leading bottom flag (1 = bottom) so that bottom is wire-encodable.

Backends:

* ``ideal``: linear masking under a harness key (see :mod:`.ideal`).
* ``garbled``: Yao garbling with ElGamal OT (see :mod:`.garbled`).
"""

from dataclasses import dataclass
from typing import Optional

from ..bits import Bits, from_bits, nbytes, to_bits
from ..circuit import Circuit, CircuitBuilder
from . import garbled, ideal

IDEAL_TAG, GARBLED_TAG = 0x49, 0x47
BACKENDS = {"ideal": IDEAL_TAG, "garbled": GARBLED_TAG}
DEFAULT_BUDGET = 256


class SfeError(ValueError):
    pass


class SfeDecodeError(SfeError):
    pass


class TierTooLarge(SfeError):
    pass


@dataclass(frozen=True)
class SfeKey:
    backend: str
    lam: int
    secret: int
    tier: str = "micro"

    def bits(self) -> Bits:
        """The key as a bit string of key_bits_len bits."""
        return tuple((self.secret >> i) & 1 for i in range(key_bits_len(self.backend, self.lam, self.tier)))

    @classmethod
    def from_bits(cls, backend: str, lam: int, bits, tier: str = None) -> "SfeKey":
        tier = tier or default_tier(lam)
        return cls(backend, lam, sum(b << i for i, b in enumerate(bits)), tier)

    def to_bytes(self) -> bytes:
        body = self.secret.to_bytes(16, "big")
        return bytes([BACKENDS[self.backend], garbled.TIER_IDS[self.tier], self.lam]) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "SfeKey":
        backend = {v: k for k, v in BACKENDS.items()}[data[0]]
        tier = {v: k for k, v in garbled.TIER_IDS.items()}[data[1]]
        return cls(backend, data[2], int.from_bytes(data[3:19], "big"), tier)


@dataclass(frozen=True)
class SfeCiphertext:
    backend: str
    lam: int
    plaintext_len: int
    body: bytes
    tier: str = "micro"

    def to_bytes(self) -> bytes:
        return bytes([BACKENDS[self.backend]]) + self.body


@dataclass(frozen=True)
class SfeEvaluated:
    backend: str
    lam: int
    output_len: int
    body: bytes
    budget: int = DEFAULT_BUDGET
    tier: str = "micro"
    input_len: int = 0

    def to_bytes(self) -> bytes:
        return bytes([BACKENDS[self.backend]]) + self.body


def default_tier(lam: int) -> str:
    return "micro" if lam <= 16 else "small"


def key_bits_len(backend: str, lam: int, tier: str = None) -> int:
    if backend == "ideal":
        return lam
    return garbled.group(tier or default_tier(lam))[1].bit_length()


def key_valid(dk: SfeKey) -> bool:
    """Whether dk lies in the range of sfe_gen (the gen relation)."""
    if dk.backend == "ideal":
        return 0 <= dk.secret < (1 << dk.lam)
    return 1 <= dk.secret < garbled.group(dk.tier)[1]


def ct_len(backend: str, lam: int, n: int, tier: str = None) -> int:
    """Framed byte length of a first flow."""
    if backend == "ideal":
        return 1 + nbytes(ideal.ct_bits_len(lam, n))
    return 1 + garbled.ct_len(tier or default_tier(lam), n)


def ev_len(backend: str, lam: int, n: int, m: int, budget: int = DEFAULT_BUDGET, tier: str = None) -> int:
    if backend == "ideal":
        return 1 + nbytes(ideal.ev_bits_len(lam, m))
    return 1 + garbled.ev_len(tier or default_tier(lam), n, budget, m)


def sfe_gen(lam: int, rng, backend: str = "ideal", tier: str = None) -> SfeKey:
    tier = tier or default_tier(lam)
    if backend == "ideal":
        return SfeKey("ideal", lam, int.from_bytes(rng.bytes(nbytes(lam)), "little") & ((1 << lam) - 1), tier)
    if backend == "garbled":
        return SfeKey("garbled", lam, garbled.gen_key(tier, rng), tier)
    raise SfeError("unknown backend %r" % backend)


SEED_BITS = 128


def coins_len(backend: str, lam: int) -> int:
    """Bit length of explicit randomness for enc (and for eval)."""
    return 2 * lam if backend == "ideal" else SEED_BITS


def eval_coins_len(backend: str, lam: int) -> int:
    return lam if backend == "ideal" else SEED_BITS


def _seeded(label, coins):
    from ..rng import Rng
    return Rng.from_path(label, from_bits(coins))


def ideal_enc_coins(lam: int, rng):
    return rng.bits(lam), rng.bits(lam)


def sfe_enc(dk: SfeKey, x, rng=None, coins=None) -> SfeCiphertext:
    """Encrypt ``x``; ``coins`` (a bit string of coins_len bits) fixes the randomness."""
    x = tuple(x)
    if coins is None:
        coins = rng.bits(coins_len(dk.backend, dk.lam))
    coins = tuple(coins)
    if dk.backend == "ideal":
        bits = ideal.enc_bits(dk.lam, dk.bits(), x, coins[:dk.lam], coins[dk.lam:])
        return SfeCiphertext("ideal", dk.lam, len(x), from_bits(bits), dk.tier)
    body = garbled.encrypt(dk.tier, dk.secret, x, _seeded("sfe-garbled-enc", coins))
    return SfeCiphertext("garbled", dk.lam, len(x), body, dk.tier)


def parse_ct(data: bytes, backend: str, lam: int, n: int, tier: str = None) -> SfeCiphertext:
    if len(data) != ct_len(backend, lam, n, tier) or data[0] != BACKENDS[backend]:
        raise SfeDecodeError("malformed first flow")
    return SfeCiphertext(backend, lam, n, bytes(data[1:]), tier or default_tier(lam))


def parse_ev(data: bytes, backend: str, lam: int, n: int, m: int, budget: int = DEFAULT_BUDGET,
             tier: str = None) -> SfeEvaluated:
    if len(data) != ev_len(backend, lam, n, m, budget, tier) or data[0] != BACKENDS[backend]:
        raise SfeDecodeError("malformed evaluated flow")
    return SfeEvaluated(backend, lam, m, bytes(data[1:]), budget, tier or default_tier(lam), n)


def sfe_eval(c: Circuit, ct: SfeCiphertext, rng=None, budget: int = DEFAULT_BUDGET,
             coins=None) -> SfeEvaluated:
    if c.input_len != ct.plaintext_len:
        raise SfeError("circuit takes %d inputs, ciphertext holds %d bits" % (c.input_len, ct.plaintext_len))
    if coins is None:
        coins = rng.bits(eval_coins_len(ct.backend, ct.lam))
    coins = tuple(coins)
    if ct.backend == "ideal":
        bits = to_bits(ct.body, ideal.ct_bits_len(ct.lam, ct.plaintext_len))
        x, dk, ok = ideal.open_ct(ct.lam, ct.plaintext_len, bits)
        if not ok:
            # a malformed first flow still gets a well-formed reply, which the
            # receiver cannot decode (all-ones key, all-ones output)
            dk, y = (1,) * ct.lam, (1,) * c.output_len
        else:
            y = c(x)
        ev = ideal.eval_bits(ct.lam, dk, y, coins)
        return SfeEvaluated("ideal", ct.lam, c.output_len, from_bits(ev), budget, ct.tier, ct.plaintext_len)
    if hasattr(c, "materialize"):
        c = c.materialize()
    try:
        body = garbled.garble_eval(ct.tier, c, ct.plaintext_len, ct.body, budget,
                                   _seeded("sfe-garbled-eval", coins))
    except garbled.GarbledError:
        body = _seeded("sfe-garbled-junk", coins).bytes(garbled.ev_len(ct.tier, ct.plaintext_len, budget,
                                                                       c.output_len))
    return SfeEvaluated("garbled", ct.lam, c.output_len, body, budget, ct.tier, ct.plaintext_len)


def sfe_dec(dk: SfeKey, ev: SfeEvaluated) -> Bits:
    if ev.backend != dk.backend:
        raise SfeDecodeError("backend mismatch")
    if ev.backend == "ideal":
        m = ev.output_len
        if len(ev.body) != nbytes(ideal.ev_bits_len(dk.lam, m)):
            raise SfeDecodeError("evaluated flow has the wrong length")
        y = ideal.dec_bits(dk.lam, dk.bits(), to_bits(ev.body, ideal.ev_bits_len(dk.lam, m)), m)
        if y is None:
            raise SfeDecodeError("output tag mismatch")
        return y
    try:
        return garbled.decrypt(dk.tier, dk.secret, ev.input_len, ev.budget, ev.output_len, ev.body)
    except garbled.GarbledError as exc:
        raise SfeDecodeError(str(exc)) from exc


def sfe_extract(data: bytes, lam: int, n: int, backend: str = "ideal", tier: str = None) -> Optional[Bits]:
    """Unbounded extractor on arbitrary first-flow bytes; None = not a ciphertext."""
    tier = tier or default_tier(lam)
    if backend == "garbled" and tier != "micro":
        raise TierTooLarge("brute-force extraction refused at tier %r" % tier)
    if len(data) != ct_len(backend, lam, n, tier) or data[0] != BACKENDS[backend]:
        return None
    if backend == "ideal":
        x, _, ok = ideal.open_ct(lam, n, to_bits(data[1:], ideal.ct_bits_len(lam, n)))
        return x if ok else None
    return garbled.extract(tier, n, data[1:])


# -- CC circuits with bottom flag ----------------------------------------------

def cc_gadget(b: CircuitBuilder, x, target, payload):
    """Wires of CC[Id, target, payload](x): flag (1 = bottom) || payload-or-zeros."""
    eq = b.equals(x, target)
    return [b.not_(eq)] + [b.and_(eq, z) for z in payload]


def cc_identity_circuit(t, s) -> Circuit:
    """CC[Id, t, s] over |t| input bits, output 1 + |s| bits."""
    b = CircuitBuilder(len(t))
    return b.build(cc_gadget(b, b.inputs, b.consts(t), b.consts(s)))


def bottom_circuit(n: int, m: int) -> Circuit:
    """C_bottom: always outputs the bottom encoding."""
    b = CircuitBuilder(n)
    return b.build([b.const(1)] + [b.const(0)] * m)


def decode_bottom(y) -> Optional[Bits]:
    """Strip the flag: payload bits, or None when the flag says bottom."""
    if not y or y[0]:
        return None
    return tuple(y[1:])
