"""Verifier coins, honest verifier messages, and the statements proved about them.

Everything the honest verifier sends is a deterministic function of its
coins (``VerifierCoins``) and the prover's messages. Explainability is the
relation "some coins reproduce these messages"; the verifier's WI proves it
(or that cmt1 hides a non-colouring). The prover's WI proves x in 3COL or
that cmt1/cmt2/ct_P are consistent commitments to a trapdoor opening.
"""

import struct
from dataclasses import dataclass
from typing import Mapping, Tuple

from .. import sfe
from ..bits import Bits, from_bits, nbytes, to_bits
from ..cco import CCProgram, obfuscate
from ..circuit import CircuitBuilder
from ..commit import DIGEST_BYTES, commit, commitment_gadget, rand_len
from ..fhe import FheCiphertext, FhePublicKey, fhe_enc, fhe_gen
from ..fhe import ideal as fhe_ideal
from ..npstmt import (ColoringInstance, NoCircuitForm, Relation, Statement, StatementError,
                      check_witness_3col, coloring_from_bits, coloring_relation, or_relation)
from ..proofs import SigmaChallenge
from ..rng import Rng
from ..sfe import ideal as sfe_ideal
from ..toyhash import keystream_gadget, toyhash_gadget
from .config import ProtocolConfig

NONCE_BITS = 8 * fhe_ideal.NONCE_BYTES
SALT_BITS = 128
SEED_BITS = 128
EXPLAINED_STEPS = ("2a", "2b", "2c", "3b")

# rough gate counts used to pick a WI mode without building circuits
_HASH_BLOCK_GATES = 18000


def fhe_coins_len(config: ProtocolConfig) -> int:
    if config.fhe == "ideal":
        return fhe_ideal.sk_bits_len(config.lam) + NONCE_BITS
    return SEED_BITS


@dataclass(frozen=True)
class VerifierCoins:
    """All randomness of the honest verifier up to and including step 3b."""
    t: Bits
    s: Bits
    beta: Tuple[int, ...]
    fhe: Bits
    salt: bytes
    ev: Bits

    @staticmethod
    def widths(config: ProtocolConfig):
        return (config.lam, config.lam, config.beta_bits(), fhe_coins_len(config), SALT_BITS,
                sfe.eval_coins_len(config.sfe, config.lam))

    @classmethod
    def bits_len(cls, config: ProtocolConfig) -> int:
        return sum(cls.widths(config))

    @classmethod
    def sample(cls, config: ProtocolConfig, x: ColoringInstance, rng) -> "VerifierCoins":
        lam = config.lam
        beta = tuple(rng.below(len(x.edges)) for _ in range(config.sigma_reps))
        return cls(rng.bits(lam), rng.bits(lam), beta, rng.bits(fhe_coins_len(config)),
                   rng.bytes(SALT_BITS // 8), rng.bits(sfe.eval_coins_len(config.sfe, lam)))

    def to_bits(self) -> Bits:
        return (tuple(self.t) + tuple(self.s) + SigmaChallenge(self.beta).bits() + tuple(self.fhe)
                + to_bits(self.salt) + tuple(self.ev))

    @classmethod
    def from_bits(cls, config: ProtocolConfig, bits) -> "VerifierCoins":
        bits = tuple(bits)
        if len(bits) != cls.bits_len(config):
            raise StatementError("coins have %d bits, expected %d" % (len(bits), cls.bits_len(config)))
        parts, off = [], 0
        for w in cls.widths(config):
            parts.append(bits[off:off + w])
            off += w
        t, s, bb, fc, salt, ev = parts
        beta = SigmaChallenge.from_bytes(from_bits(bb), config.sigma_reps).edges
        return cls(t, s, beta, fc, from_bits(salt), ev)


# -- honest verifier messages -----------------------------------------------

def fhe_material(config: ProtocolConfig, coins: VerifierCoins):
    """(key pair, ct_V) determined by the FHE coins."""
    lam = config.lam
    if config.fhe == "ideal":
        skl = fhe_ideal.sk_bits_len(lam)
        sk = from_bits(coins.fhe[:skl])
        pk = fhe_ideal.pk_from_sk(lam, sk)
        from ..fhe import FheKeyPair, FheSecretKey
        kp = FheKeyPair(FhePublicKey("ideal", lam, pk), FheSecretKey("ideal", lam, sk))
        ct = fhe_ideal.encrypt_with_nonce(pk, tuple(coins.t), from_bits(coins.fhe[skl:]))
        return kp, FheCiphertext("ideal", lam, ct)
    rng = Rng.from_path("nbzk/verifier-fhe", from_bits(coins.fhe))
    kp = fhe_gen(lam, rng.child("gen"), "lattice", config.fhe_params)
    return kp, fhe_enc(kp.pk, coins.t, rng.child("enc"))


def cc_payload(config: ProtocolConfig, kp, beta) -> Bits:
    return tuple(kp.sk.bits()) + SigmaChallenge(tuple(beta)).bits()


def verifier_msg_2a(config: ProtocolConfig, coins: VerifierCoins):
    """Returns (message bytes, key pair)."""
    kp, ct = fhe_material(config, coins)
    prog = CCProgram(config.dec_descriptor(kp.sk), (0,) + tuple(coins.s), cc_payload(config, kp, coins.beta))
    obf = obfuscate(prog, salt=coins.salt)
    return kp.pk.to_bytes() + ct.to_bytes() + obf.to_bytes(), kp


def loose_ct(config: ProtocolConfig, data: bytes) -> sfe.SfeCiphertext:
    """Read a (normalized) 2b payload as a ciphertext, ignoring its tag byte."""
    return sfe.SfeCiphertext(config.sfe, config.lam, config.lam, bytes(data[1:]), config.tier)


def verifier_msg_2c(config: ProtocolConfig, coins: VerifierCoins, ct_p: bytes) -> bytes:
    cc = sfe.cc_identity_circuit(coins.t, coins.s)
    return sfe.sfe_eval(cc, loose_ct(config, ct_p), budget=config.sfe_budget, coins=coins.ev).to_bytes()


def verifier_msg_3b(coins: VerifierCoins) -> bytes:
    return SigmaChallenge(tuple(coins.beta)).to_bytes()


# -- explainability -----------------------------------------------------------

def _prefix_messages(config, prefix):
    msgs = {}
    for step in EXPLAINED_STEPS:
        if hasattr(prefix, "payload"):
            msgs[step] = prefix.payload(step)
        else:
            msgs[step] = prefix[step]
        if msgs[step] is None:
            raise StatementError("prefix lacks step %s" % step)
    return msgs


def _explain_lengths(config):
    return {"2a": sum(config.msg2a_parts()), "2b": config.ct_p_len(), "2c": config.evct_len(),
            "3b": 4 * config.sigma_reps}


def explain_instance(config: ProtocolConfig, msgs: Mapping[str, bytes]) -> Bits:
    lens = _explain_lengths(config)
    out = []
    for step in EXPLAINED_STEPS:
        if len(msgs[step]) != lens[step]:
            raise StatementError("step %s has %d bytes, expected %d" % (step, len(msgs[step]), lens[step]))
        out.extend(to_bits(msgs[step]))
    return tuple(out)


def explains(config: ProtocolConfig, x: ColoringInstance, msgs: Mapping[str, bytes], coins: VerifierCoins) -> bool:
    if any(e >= len(x.edges) for e in coins.beta):
        return False
    m2a, _ = verifier_msg_2a(config, coins)
    if m2a != msgs["2a"]:
        return False
    if verifier_msg_3b(coins) != msgs["3b"]:
        return False
    return verifier_msg_2c(config, coins, msgs["2b"]) == msgs["2c"]


def explain_relation(config: ProtocolConfig, x: ColoringInstance) -> Relation:
    lens = _explain_lengths(config)
    ilen = 8 * sum(lens.values())
    wlen = VerifierCoins.bits_len(config)

    def check(i, w):
        msgs, off = {}, 0
        for step in EXPLAINED_STEPS:
            msgs[step] = from_bits(i[off:off + 8 * lens[step]])
            off += 8 * lens[step]
        try:
            coins = VerifierCoins.from_bits(config, w)
        except Exception:
            return False
        return explains(config, x, msgs, coins)

    build = None
    hint = 0
    if config.fhe == "ideal" and config.sfe == "ideal":
        def build():
            return _explain_circuit(config, x)
        hint = 24 * _HASH_BLOCK_GATES
    return Relation("explain-V", ilen, wlen, check, build, hint)


def _bytes_wires(b, data: bytes):
    return b.consts(to_bits(data))


def _pad_bytes(b, wires):
    return list(wires) + b.consts((0,) * (8 * nbytes(len(wires)) - len(wires)))


def _explain_circuit(config: ProtocolConfig, x: ColoringInstance):
    """Circuit form of explainability, ideal FHE and ideal SFE only."""
    if config.fhe != "ideal" or config.sfe != "ideal":
        raise NoCircuitForm("explainability has a circuit form only for the ideal backends")
    lam = config.lam
    lens = _explain_lengths(config)
    ilen = 8 * sum(lens.values())
    b = CircuitBuilder(ilen + VerifierCoins.bits_len(config))
    w = b.inputs
    inst, off = {}, 0
    for step in EXPLAINED_STEPS:
        inst[step] = w[off:off + 8 * lens[step]]
        off += 8 * lens[step]
    parts = []
    for width in VerifierCoins.widths(config):
        parts.append(w[off:off + width])
        off += width
    t, s, beta, fc, salt, ev = parts
    skl = fhe_ideal.sk_bits_len(lam)
    sk, nonce = fc[:skl], fc[skl:]
    checks = []

    # beta indices in range
    for r in range(config.sigma_reps):
        byts = beta[32 * r:32 * r + 32]
        le = [byts[8 * (3 - k) + j] for k in range(4) for j in range(8)]
        checks.append(b.less_than_const(le, len(x.edges)))

    # 2a = pk || ct_V || obf
    pk = toyhash_gadget(b, sk)
    ct_v = fhe_ideal.enc_gadget(b, pk, nonce, t)
    name = b"fhe-ideal-dec"
    nt = config.target_len()
    desc = (_bytes_wires(b, struct.pack(">BII", 2, 8 * fhe_ideal.ct_len(nt), nt) + struct.pack(">H", len(name))
                         + name) + pk + _bytes_wires(b, nt.to_bytes(4, "big")))
    u = _pad_bytes(b, [b.const(0)] + list(s))
    z = _pad_bytes(b, list(sk) + list(beta))
    lock = toyhash_gadget(b, _bytes_wires(b, b"\x01") + list(salt) + u)
    pad = keystream_gadget(b, _bytes_wires(b, b"\x02") + u + list(salt), len(z))
    enc = [b.xor(p, q) for p, q in zip(z, pad)]
    tag = toyhash_gadget(b, _bytes_wires(b, b"\x03") + u + list(salt) + z)
    obf = (list(salt) + lock + _bytes_wires(b, struct.pack(">I", config.payload_bits())) + enc + tag
           + _bytes_wires(b, struct.pack(">I", len(desc) // 8)) + desc)
    m2a = _bytes_wires(b, bytes([fhe_ideal.TAG])) + pk + ct_v + obf
    checks.append(b.equals(m2a, inst["2a"]))

    # 2c = sfe eval of CC[Id, t, s] on 2b
    def fn(bb, xw):
        return sfe.cc_gadget(bb, xw, t, s)

    ctw = inst["2b"][8:8 + sfe_ideal.ct_bits_len(lam, lam)]
    evw = sfe_ideal.eval_gadget(b, lam, lam, ctw, ev, fn)
    m2c = _bytes_wires(b, bytes([sfe.IDEAL_TAG])) + _pad_bytes(b, evw)
    checks.append(b.equals(m2c, inst["2c"]))

    # 3b = beta
    checks.append(b.equals(list(beta), inst["3b"]))
    return b.build([b.and_all(checks)])


def explainability_statement(role: str, prefix, config: ProtocolConfig, x: ColoringInstance = None) -> Statement:
    """Statement that the verifier's messages in ``prefix`` come from honest coins."""
    if role != "V":
        raise StatementError("only verifier messages are explained")
    if x is None:
        x = getattr(prefix, "x", None) if not isinstance(prefix, Mapping) else prefix.get("x")
    if x is None:
        raise StatementError("explainability needs the instance x")
    msgs = _prefix_messages(config, prefix)
    return Statement(explain_relation(config, x), explain_instance(config, msgs))


# -- WI statements ------------------------------------------------------------

def nonwitness_relation(config: ProtocolConfig, x: ColoringInstance) -> Relation:
    """cmt1 = Com(u; r) for some u that is not a valid colouring of x."""
    lam = config.lam
    ul, rl = 2 * x.n, rand_len(lam)
    pub = x.public()

    def check(i, w):
        u, r = w[:ul], w[ul:]
        if commit(lam, u, r).digest != from_bits(i):
            return False
        return not check_witness_3col(pub.with_witness(coloring_from_bits(u)))

    def build():
        col = coloring_relation(x).circuit()
        b = CircuitBuilder(8 * DIGEST_BYTES + ul + rl)
        w = b.inputs
        d, u, r = w[:8 * DIGEST_BYTES], w[8 * DIGEST_BYTES:8 * DIGEST_BYTES + ul], w[8 * DIGEST_BYTES + ul:]
        ok = b.equals(commitment_gadget(b, u, r), d)
        return b.build([b.and_(ok, b.not_(b.embed(col, u)[0]))])

    blocks = (ul + rl) // 256 + 1
    return Relation("noncol-commit", 8 * DIGEST_BYTES, ul + rl, check, build,
                    blocks * _HASH_BLOCK_GATES + 6 * x.n + 6 * len(x.edges))


def verifier_wi_statement(config: ProtocolConfig, x: ColoringInstance, msgs: Mapping[str, bytes],
                          cmt1: bytes) -> Statement:
    rel = or_relation(explain_relation(config, x), nonwitness_relation(config, x), "verifier-wi")
    return Statement(rel, explain_instance(config, msgs) + to_bits(cmt1))


def trapdoor_witness_len(config: ProtocolConfig, x: ColoringInstance) -> int:
    lam = config.lam
    return (2 * x.n + rand_len(lam) + sfe.key_bits_len(config.sfe, lam, config.tier) + rand_len(lam) + lam
            + sfe.coins_len(config.sfe, lam))


def trapdoor_relation(config: ProtocolConfig, x: ColoringInstance) -> Relation:
    """Branch A: cmt1 = Com(z), cmt2 = Com(dk), ct_P = SfeEnc(dk, y) for a valid dk."""
    lam = config.lam
    ctl = config.ct_p_len()
    ilen = 16 * DIGEST_BYTES + 8 * ctl
    kl = sfe.key_bits_len(config.sfe, lam, config.tier)
    widths = (2 * x.n, rand_len(lam), kl, rand_len(lam), lam, sfe.coins_len(config.sfe, lam))

    def split(w):
        out, off = [], 0
        for k in widths:
            out.append(w[off:off + k])
            off += k
        return out

    def check(i, w):
        z, r1, dkb, r2, y, renc = split(w)
        c1, c2 = from_bits(i[:8 * DIGEST_BYTES]), from_bits(i[8 * DIGEST_BYTES:16 * DIGEST_BYTES])
        ct = from_bits(i[16 * DIGEST_BYTES:])
        if commit(lam, z, r1).digest != c1 or commit(lam, dkb, r2).digest != c2:
            return False
        dk = sfe.SfeKey.from_bits(config.sfe, lam, dkb, config.tier)
        if not sfe.key_valid(dk):
            return False
        return sfe.sfe_enc(dk, y, coins=renc).to_bytes() == ct

    build = None
    if config.sfe == "ideal":
        def build():
            b = CircuitBuilder(ilen + sum(widths))
            inp = b.inputs
            c1, c2, ct = inp[:128], inp[128:256], inp[256:ilen]
            z, r1, dkb, r2, y, renc = split(inp[ilen:])
            ok = [b.equals(commitment_gadget(b, z, r1), c1), b.equals(commitment_gadget(b, dkb, r2), c2)]
            rho_x, rho_k = renc[:lam], renc[lam:]
            xm = sfe_ideal._xor_const(b, [b.xor(v, rho_x[j % lam]) for j, v in enumerate(y)],
                                      sfe_ideal.harness_bits("x", lam))
            km = sfe_ideal._xor_const(b, [b.xor(v, rho_k[j]) for j, v in enumerate(dkb)],
                                      sfe_ideal.harness_bits("k", lam))
            v = list(y) + list(dkb)
            tg = sfe_ideal._xor_const(b, [b.xor_all([v[j] for j in range(k, len(v), lam)]) for k in range(lam)],
                                      sfe_ideal.harness_bits("t", lam))
            body = _pad_bytes(b, list(rho_x) + list(rho_k) + xm + km + tg)
            ok.append(b.equals(_bytes_wires(b, bytes([sfe.IDEAL_TAG])) + body, ct))
            return b.build([b.and_all(ok)])

    return Relation("trapdoor", ilen, sum(widths), check, build, 2 * _HASH_BLOCK_GATES + 8 * ctl)


def prover_wi_statement(config: ProtocolConfig, x: ColoringInstance, cmt1: bytes, cmt2: bytes,
                        ct_p: bytes) -> Statement:
    rel = or_relation(trapdoor_relation(config, x), coloring_relation(x), "prover-wi")
    return Statement(rel, to_bits(cmt1) + to_bits(cmt2) + to_bits(ct_p))


def prover_wi_witness(config: ProtocolConfig, x: ColoringInstance, coloring=None, trapdoor=None) -> Bits:
    """Witness for the prover WI: the colouring branch (honest) or branch A."""
    from ..npstmt import coloring_bits
    ta = trapdoor_witness_len(config, x)
    if coloring is not None:
        return (0,) * ta + coloring_bits(coloring)
    if len(trapdoor) != ta:
        raise StatementError("trapdoor witness has %d bits, expected %d" % (len(trapdoor), ta))
    return tuple(trapdoor) + (0,) * (2 * x.n)
