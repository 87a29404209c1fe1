"""Honest prover and verifier state machines.

A party exposes ``send(step) -> bytes`` (may raise PartyAbort) and
``receive(step, payload)``; payloads it receives are already
length-normalized. The verifier's ``verdict()`` is the acceptance predicate.
"""

from .. import sfe
from ..commit import DIGEST_BYTES, commit, rand_len
from ..npstmt import ColoringInstance, StatementError, coloring_bits
from ..proofs import (SigmaChallenge, SigmaFirst, SigmaResponse, WIProver, WIVerifier, sigma_first,
                      sigma_respond, sigma_sim_first, sigma_verify, ProofError)
from .config import STEP_INDEX, ProtocolConfig
from .explain import (VerifierCoins, nonwitness_relation, prover_wi_statement, prover_wi_witness,
                      verifier_msg_2a, verifier_msg_2c, verifier_msg_3b, verifier_wi_statement)
from .transport import PartyAbort


class ProtocolError(RuntimeError):
    pass


class Party:
    role = None

    def __init__(self, config: ProtocolConfig, x: ColoringInstance, rng):
        self.config, self.x, self.rng = config, x.public(), rng
        self.msgs = {}
        self._last = -1

    def _advance(self, step):
        i = STEP_INDEX[step]
        if i <= self._last:
            raise ProtocolError("out-of-order step %s" % step)
        self._last = i

    def send(self, step: str) -> bytes:
        self._advance(step)
        out = getattr(self, "send_" + step.replace(".", "_"))()
        self.msgs[step] = out
        return out

    def sent(self, step: str, normalized: bytes) -> None:
        self.msgs[step] = normalized

    def receive(self, step: str, payload: bytes) -> None:
        self._advance(step)
        self.msgs[step] = payload
        hook = getattr(self, "recv_" + step.replace(".", "_"), None)
        if hook is not None:
            hook(payload)


class HonestProver(Party):
    """The honest prover; ``modified=True`` gives the S_Abort variant.

    The modified prover commits to zeros, sends a simulated sigma first
    message and proves its WI statement through the trapdoor branch. It has
    no witness and cannot send gamma.
    """
    role = "P"

    def __init__(self, config, x, rng, modified: bool = False):
        super().__init__(config, x, rng)
        self.modified = modified
        if not modified:
            if x.witness is None:
                raise ProtocolError("the honest prover needs a colouring")
            self.coloring = tuple(x.witness)
        self.verifier_wi_ok = None

    def send_1(self):
        c, lam = self.config, self.config.lam
        self.dk = sfe.sfe_gen(lam, self.rng.child("sfe-gen"), c.sfe, c.tier)
        self.z = (0,) * (2 * self.x.n) if self.modified else coloring_bits(self.coloring)
        self.r1 = self.rng.bits(rand_len(lam))
        self.r2 = self.rng.bits(rand_len(lam))
        self.cmt1 = commit(lam, self.z, self.r1).digest
        self.cmt2 = commit(lam, self.dk.bits(), self.r2).digest
        return self.cmt1 + self.cmt2

    def send_2b(self):
        lam = self.config.lam
        self.y = (0,) * lam
        self.r_enc = self.rng.bits(sfe.coins_len(self.config.sfe, lam))
        return sfe.sfe_enc(self.dk, self.y, coins=self.r_enc).to_bytes()

    def send_3a(self):
        c = self.config
        if self.modified:
            return sigma_sim_first(self.x, self.rng.child("sigma"), c.lam, c.sigma_reps).to_bytes()
        alpha, self.aux = sigma_first(self.x, self.coloring, self.rng.child("sigma"), c.lam, c.sigma_reps)
        return alpha.to_bytes()

    def recv_4_1(self, payload):
        st = verifier_wi_statement(self.config, self.x, self.msgs, self.cmt1)
        self._vwi = WIVerifier(st, self.config, self.rng.child("wi-challenge"))
        self._vwi_first = payload

    def send_4_2(self):
        return self._vwi.challenge(self._vwi_first)

    def recv_4_3(self, payload):
        self.verifier_wi_ok = self._vwi.verify(payload)

    def send_5_1(self):
        if not self.verifier_wi_ok:
            raise PartyAbort("verifier WI proof rejected")
        st = prover_wi_statement(self.config, self.x, self.cmt1, self.cmt2, self.msgs["2b"])
        if self.modified:
            w = prover_wi_witness(self.config, self.x, trapdoor=self.z + self.r1 + self.dk.bits() + self.r2
                                  + self.y + self.r_enc)
        else:
            w = prover_wi_witness(self.config, self.x, coloring=self.coloring)
        self._pwi = WIProver(st, w, self.config, self.rng.child("wi-prover"))
        return self._pwi.first()

    def send_5_3(self):
        return self._pwi.respond(self.msgs["5.2"])

    def send_6(self):
        if self.modified:
            raise PartyAbort("the modified prover has no witness for gamma")
        k = self.config.sigma_reps
        beta = SigmaChallenge.from_bytes(self.msgs["3b"], k)
        beta = SigmaChallenge(tuple(e % len(self.x.edges) for e in beta.edges))
        return sigma_respond(self.x, self.aux, beta).to_bytes(self.config.lam)


def verdict_from(config: ProtocolConfig, x: ColoringInstance, msgs, pwi_ok: bool) -> bool:
    """The acceptance predicate: prover WI accepted and the sigma transcript verifies."""
    if not pwi_ok:
        return False
    k, lam = config.sigma_reps, config.lam
    try:
        alpha = SigmaFirst.from_bytes(msgs["3a"], k, x.n)
        beta = SigmaChallenge.from_bytes(msgs["3b"], k)
        gamma = SigmaResponse.from_bytes(msgs["6"], k, lam)
    except (ProofError, ValueError):
        return False
    if any(e >= len(x.edges) for e in beta.edges):
        return False
    return sigma_verify(x, alpha, beta, gamma, lam)


class HonestVerifier(Party):
    role = "V"

    def __init__(self, config, x, rng, coins: VerifierCoins = None):
        super().__init__(config, x, rng)
        self.coins = coins or VerifierCoins.sample(config, self.x, rng.child("coins"))
        self.pwi_ok = None
        self._verdict = None

    def send_2a(self):
        out, self.keys = verifier_msg_2a(self.config, self.coins)
        return out

    def send_2c(self):
        return verifier_msg_2c(self.config, self.coins, self.msgs["2b"])

    def send_3b(self):
        return verifier_msg_3b(self.coins)

    def wi_witness(self):
        pad = nonwitness_relation(self.config, self.x).witness_len
        return self.coins.to_bits() + (0,) * pad

    def send_4_1(self):
        st = verifier_wi_statement(self.config, self.x, self.msgs, self.msgs["1"][:DIGEST_BYTES])
        try:
            self._wi = WIProver(st, self.wi_witness(), self.config, self.rng.child("wi-prover"))
        except StatementError:
            raise PartyAbort("the sent messages are not explained by the verifier's coins")
        return self._wi.first()

    def send_4_3(self):
        return self._wi.respond(self.msgs["4.2"])

    def recv_5_1(self, payload):
        c = self.msgs["1"]
        st = prover_wi_statement(self.config, self.x, c[:DIGEST_BYTES], c[DIGEST_BYTES:], self.msgs["2b"])
        self._pwi = WIVerifier(st, self.config, self.rng.child("wi-challenge"))

    def send_5_2(self):
        return self._pwi.challenge(self.msgs["5.1"])

    def recv_5_3(self, payload):
        self.pwi_ok = self._pwi.verify(payload)

    def recv_6(self, payload):
        self._verdict = verdict_from(self.config, self.x, self.msgs, bool(self.pwi_ok))

    def send_7(self):
        return bytes([1 if self.verdict() else 0])

    def verdict(self) -> bool:
        return bool(self._verdict)
