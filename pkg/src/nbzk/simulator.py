"""Non-black-box simulation against classical verifier circuits.

A ``VerifierModel`` is a verifier given as one circuit per speaking step,
each mapping ``state || incoming`` to ``state' || abort bit || outgoing``.
The simulator never rewinds: the model's state is held in a ``LinearState``
that can be consumed once per step.

Main run (``simulate``):

1. commit to 0 and to a fresh SFE key dk, feed message 1 to the model;
2. from the model's (pk, ct_V, obfC), homomorphically compute
   ``ct_P = SfeEnc_dk(t)``, run the model's 2(c) circuit on the encrypted
   state, and strip the SFE layer with dk; the result is an FHE encryption of
   ``CC[Id, t, s](t) = 0 || s``, which opens obfC and yields (sk, beta');
3. decrypt the model's state and continue in the clear with a simulated
   sigma transcript for beta' and the trapdoor branch of the prover WI.

Any abort, including a failed verifier WI proof or a stuck extraction,
discards the run and hands over to the abort simulator, which estimates the
abort probability and then rejection-samples aborting transcripts from the
modified honest prover.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

from . import sfe
from .bits import Bits, from_bits, to_bits
from .cco import CCOError, ObfuscatedProgram, obf_eval
from .circuit import Circuit, CircuitBuilder
from .commit import commit, rand_len
from .fhe import (FheCiphertext, FheError, FhePublicKey, fhe_dec, fhe_enc, fhe_eval, public_params,
                  secret_key_from_bits)
from .fhe.lattice import LatticeError
from .npstmt import ColoringInstance, NoCircuitForm
from .proofs import (ProofError, SigmaChallenge, WIProver, WIVerifier, sigma_simulate)
from .protocol.config import SCHEDULE, ProtocolConfig, normalize_message, split_2a
from .protocol.explain import prover_wi_statement, prover_wi_witness, verifier_wi_statement
from .protocol.parties import HonestProver, Party, verdict_from
from .protocol.session import session_lengths
from .protocol.transcript import ABORT, ACCEPT, FAIL, REJECT, Frame, Transcript
from .protocol.transport import PartyAbort, run_direct
from .rng import Rng
from .sfe import ideal as sfe_ideal

# the message each verifier step consumes
INCOMING = {"2a": "1", "2c": "2b", "3b": "3a", "4.1": None, "4.3": "4.2", "5.2": "5.1"}
VM_STEPS = tuple(INCOMING)
TRUNCATE_AFTER = "5.3"


class SimFail(RuntimeError):
    pass


class LinearState:
    """Verifier state that can be read exactly once (no cloning, no rewinding)."""

    def __init__(self, bits):
        self._bits = tuple(bits)
        self.reads = 0

    def take(self) -> Bits:
        if self._bits is None:
            raise SimFail("verifier state consumed twice")
        b, self._bits = self._bits, None
        self.reads += 1
        return b

    @property
    def consumed(self) -> bool:
        return self._bits is None


# -- verifier models ----------------------------------------------------------

@dataclass
class VerifierModel:
    name: str
    config: ProtocolConfig
    x: ColoringInstance
    state_lens: Dict[str, int]  # state width entering each step, plus "end"
    steps: Dict[str, Circuit]
    oracle: Callable  # rng -> advice state bits
    meta: dict = field(default_factory=dict)

    def io(self, step) -> Tuple[int, int]:
        """(incoming bits, outgoing bytes) for a step."""
        lens = session_lengths(self.config, self.x)
        src = INCOMING[step]
        return (8 * lens[src] if src else 0), lens[step]

    def state_out(self, step: str) -> int:
        i = VM_STEPS.index(step)
        return self.state_lens[VM_STEPS[i + 1] if i + 1 < len(VM_STEPS) else "end"]

    def run_step(self, step: str, state: Bits, incoming: bytes = b""):
        c = self.steps[step]
        n_in, _ = self.io(step)
        if len(state) != self.state_lens[step]:
            raise SimFail("state width %d does not match step %s" % (len(state), step))
        y = c(tuple(state) + to_bits(incoming, n_in))
        L = self.state_out(step)
        return y[:L], y[L], from_bits(y[L + 1:])

    def validate(self) -> None:
        for step in VM_STEPS:
            c = self.steps[step]
            n_in, n_out = self.io(step)
            if (c.input_len != self.state_lens[step] + n_in
                    or c.output_len != self.state_out(step) + 1 + 8 * n_out):
                raise ValueError("step %s circuit has the wrong shape" % step)


def vm_step_circuit(state_in: int, state_out: int, in_bits: int, out_bytes: int, body) -> Circuit:
    """Build a step circuit from ``body(b, state, incoming) -> (state', abort, out)``."""
    b = CircuitBuilder(state_in + in_bits)
    w = b.inputs
    st, ab, out = body(b, w[:state_in], w[state_in:])
    out = list(out)
    if len(st) != state_out or len(out) > 8 * out_bytes:
        raise ValueError("step body returned the wrong widths")
    out += [b.const(0)] * (8 * out_bytes - len(out))
    return b.build(list(st) + [ab] + out)


class CircuitVerifier(Party):
    """Runs a VerifierModel in the clear as a protocol party."""
    role = "V"

    def __init__(self, config, x, rng, vm: VerifierModel, advice=None):
        super().__init__(config, x, rng)
        self.vm = vm
        self.state = LinearState(advice if advice is not None else vm.oracle(rng.child("advice")))
        self._verdict = None

    def send(self, step):
        self._advance(step)
        if step == "7":
            out = bytes([1 if self._verdict else 0])
        else:
            src = INCOMING[step]
            st, ab, out = self.vm.run_step(step, self.state.take(), self.msgs.get(src, b"") if src else b"")
            self.state = LinearState(st)
            if ab:
                raise PartyAbort("verifier model aborted at %s" % step)
        self.msgs[step] = out
        return out

    def receive(self, step, payload):
        super().receive(step, payload)
        if step == "6":
            self._verdict = verdict_from(self.config, self.x, self.msgs,
                                         prover_wi_accepts(self.config, self.x, self.msgs))

    def final_state(self) -> Bits:
        return self.state.take()


def prover_wi_accepts(config, x, msgs) -> bool:
    c1 = msgs["1"]
    st = prover_wi_statement(config, x, c1[:16], c1[16:], msgs["2b"])
    v = WIVerifier(st, config, None)
    return v.check(msgs["5.1"], msgs["5.2"], msgs["5.3"])


def circuit_verifier(vm: VerifierModel):
    """Factory for run_session."""
    def make(config, x, rng):
        return CircuitVerifier(config, x, rng, vm)
    return make


# -- the homomorphic extraction pipeline ---------------------------------------

def _sfe_enc_circuit(config: ProtocolConfig, dk: sfe.SfeKey, coins) -> Circuit:
    if config.sfe != "ideal":
        raise NoCircuitForm("the extraction pipeline needs the ideal SFE backend")
    lam = config.lam
    inner = sfe_ideal.enc_circuit(lam, lam, dk.bits(), coins[:lam], coins[lam:])
    b = CircuitBuilder(lam)
    body = b.embed(inner, b.inputs)
    total = 8 * config.ct_p_len()
    head = b.consts(to_bits(bytes([sfe.IDEAL_TAG])))
    return b.build(head + body + [b.const(0)] * (total - 8 - len(body)))


def _strip_circuit(config: ProtocolConfig, vm: VerifierModel, dk: sfe.SfeKey) -> Circuit:
    """state' || abort || evct bytes  ->  SfeDec_dk(evct)."""
    lam, m = config.lam, config.target_len()
    L = vm.state_out("2c")
    _, out_bytes = vm.io("2c")
    b = CircuitBuilder(L + 1 + 8 * out_bytes)
    w = b.inputs
    ev = w[L + 1 + 8:L + 1 + 8 + sfe_ideal.ev_bits_len(lam, m)]
    return b.build(b.embed(sfe_ideal.dec_circuit(lam, m, dk.bits()), ev))


@dataclass
class Extraction:
    ok: bool
    reason: str = ""
    sk: object = None
    beta: Tuple[int, ...] = None
    state: Bits = None
    abort: int = 0
    evct: bytes = b""
    ct_p: bytes = b""
    t: Bits = None


def extract_challenge(vm: VerifierModel, state: LinearState, msg2a: bytes, dk: sfe.SfeKey, r_enc, rng) -> Extraction:
    """Run step 2(c) of the model under FHE and open obfC; consumes ``state``."""
    config, lam = vm.config, vm.config.lam
    pkb, ctvb, obfb = split_2a(config, msg2a)
    st = state.take()
    try:
        pk = FhePublicKey.from_bytes(pkb, lam)
        ct_v = FheCiphertext.from_bytes(ctvb)
        obf = ObfuscatedProgram.from_bytes(obfb)
        if pk.backend != config.fhe or ct_v.nbits != lam:
            return Extraction(False, "malformed 2a")
        ct_ctp = fhe_eval(pk, _sfe_enc_circuit(config, dk, r_enc), ct_v)
        ct_state = fhe_enc(pk, st, rng.child("state"))
        ct_out = fhe_eval(pk, vm.steps["2c"], ct_state, ct_ctp)
        ct_y = fhe_eval(pk, _strip_circuit(config, vm, dk), ct_out)
        payload = obf_eval(obf, ct_y.bits())
    except (FheError, LatticeError, CCOError, ValueError) as exc:
        return Extraction(False, "stuck: %s" % type(exc).__name__)
    if payload is None:
        return Extraction(False, "stuck: lock did not open")
    skl = config.fhe_sk_bits()
    try:
        sk = secret_key_from_bits(config.fhe, lam, payload[:skl], public_params(pk))
        beta = SigmaChallenge.from_bytes(from_bits(payload[skl:]), config.sigma_reps).edges
        out = fhe_dec(sk, ct_out)
        ct_p = from_bits(fhe_dec(sk, ct_ctp))
        t = fhe_dec(sk, ct_v)
    except (FheError, LatticeError, ProofError, ValueError) as exc:
        return Extraction(False, "stuck: %s after unlock" % type(exc).__name__)
    L = vm.state_out("2c")
    return Extraction(True, "", sk, beta, out[:L], out[L], from_bits(out[L + 1:]), ct_p, t)


# -- simulator runs -------------------------------------------------------------

COMPLETE, ABORTED, STUCK, FAILED = "complete", "abort", "stuck", "fail"


@dataclass
class RunResult:
    kind: str
    frames: list
    state: Optional[Bits] = None
    beta_prime: Optional[Tuple[int, ...]] = None
    status: Optional[tuple] = None
    reason: str = ""
    extraction: Optional[Extraction] = None


def _sim_run(vm: VerifierModel, rng, truncated: bool, advice=None) -> RunResult:
    config, x, lam = vm.config, vm.x, vm.config.lam
    lens = session_lengths(config, x)
    frames = []
    msgs = {}

    def emit(step, role, raw):
        norm = normalize_message(raw, lens[step])
        frames.append(Frame(step, role, norm, len(raw)))
        msgs[step] = norm
        return norm

    def aborted(step, role):
        frames.append(Frame(step, role, b"", 0, True))
        return RunResult(ABORTED, frames, status=(ABORT, step, role))

    state = LinearState(advice if advice is not None else vm.oracle(rng.child("advice")))

    def vstep(step):
        nonlocal state
        src = INCOMING[step]
        st, ab, out = vm.run_step(step, state.take(), msgs[src] if src else b"")
        state = LinearState(st)
        return ab, out

    # step 1: commitments to zeros and to dk
    dk = sfe.sfe_gen(lam, rng.child("sfe-gen"), config.sfe, config.tier)
    z = (0,) * (2 * x.n)
    r1, r2 = rng.bits(rand_len(lam)), rng.bits(rand_len(lam))
    cmt1, cmt2 = commit(lam, z, r1).digest, commit(lam, dk.bits(), r2).digest
    emit("1", "P", cmt1 + cmt2)

    ab, out = vstep("2a")
    if ab:
        return aborted("2a", "V")
    m2a = emit("2a", "V", out)

    r_enc = rng.bits(sfe.coins_len(config.sfe, lam))
    ex = extract_challenge(vm, state, m2a, dk, r_enc, rng.child("extract"))
    if not ex.ok:
        return RunResult(STUCK, frames, reason=ex.reason, extraction=ex)
    state = LinearState(ex.state)
    emit("2b", "P", ex.ct_p)
    if ex.abort:
        return aborted("2c", "V")
    emit("2c", "V", ex.evct)

    beta_p = ex.beta
    sim_beta = SigmaChallenge(tuple(e % len(x.edges) for e in beta_p))
    alpha, gamma = sigma_simulate(x, sim_beta, rng.child("sigma"), lam)
    emit("3a", "P", alpha.to_bytes())
    ab, out = vstep("3b")
    if ab:
        return aborted("3b", "V")
    emit("3b", "V", out)

    ab, out = vstep("4.1")
    if ab:
        return aborted("4.1", "V")
    emit("4.1", "V", out)
    vwi = WIVerifier(verifier_wi_statement(config, x, msgs, cmt1), config, rng.child("wi-challenge"))
    emit("4.2", "P", vwi.challenge(msgs["4.1"]))
    ab, out = vstep("4.3")
    if ab:
        return aborted("4.3", "V")
    emit("4.3", "V", out)
    if not vwi.verify(msgs["4.3"]):
        return aborted("5.1", "P")

    st = prover_wi_statement(config, x, cmt1, cmt2, msgs["2b"])
    w = prover_wi_witness(config, x, trapdoor=z + r1 + dk.bits() + r2 + tuple(ex.t) + r_enc)
    pwi = WIProver(st, w, config, rng.child("wi-prover"))
    emit("5.1", "P", pwi.first())
    ab, out = vstep("5.2")
    if ab:
        return aborted("5.2", "V")
    emit("5.2", "V", out)
    if truncated:
        # the verifier cannot abort after 5.2, so the estimator stops here
        return RunResult(COMPLETE, frames, beta_prime=beta_p, extraction=ex)
    emit("5.3", "P", pwi.respond(msgs["5.2"]))

    beta = SigmaChallenge.from_bytes(msgs["3b"], config.sigma_reps).edges
    if tuple(beta) != tuple(beta_p):
        return RunResult(FAILED, frames, reason="revealed beta differs from extracted beta", extraction=ex)
    emit("6", "P", gamma.to_bytes(lam))
    ok = verdict_from(config, x, msgs, prover_wi_accepts(config, x, msgs))
    emit("7", "V", bytes([1 if ok else 0]))
    return RunResult(COMPLETE, frames, state.take(), beta_p, (ACCEPT if ok else REJECT, None, None),
                     extraction=ex)


@dataclass
class AbortEstimate:
    a_prime: float
    N: int
    abort_target: int
    iteration_cap: int
    aborts: int = 0

    @property
    def succeeded(self) -> bool:
        return self.aborts >= self.abort_target


def loop_constants(config: ProtocolConfig, abort_target: int = 64, iteration_cap: int = 1 << 20,
                   paper_constants: bool = False):
    if paper_constants and config.lam <= 16:
        return config.lam ** 2, 1 << config.lam
    return abort_target, iteration_cap


def estimate_abort_prob(vm: VerifierModel, rng, abort_target: int = 64, iteration_cap: int = 1 << 20,
                        paper_constants: bool = False) -> Optional[AbortEstimate]:
    """Truncated simulations until ``abort_target`` aborts; None (fail) at the cap.

    A stuck extraction counts as an abort.
    """
    target, cap = loop_constants(vm.config, abort_target, iteration_cap, paper_constants)
    aborts = n = 0
    while aborts < target and n < cap:
        r = _sim_run(vm, rng.child("iter", n), truncated=True)
        n += 1
        if r.kind in (ABORTED, STUCK):
            aborts += 1
    if aborts < target:
        return None
    return AbortEstimate(target / n, n, target, cap, aborts)


@dataclass
class SimOutput:
    kind: str  # complete | abort | fail
    transcript: Transcript
    state: Optional[Bits] = None
    beta_prime: Optional[Tuple[int, ...]] = None
    estimate: Optional[AbortEstimate] = None
    reason: str = ""


def _transcript(vm, frames, status, seed, session, meta) -> Transcript:
    cfg = vm.config
    t = Transcript("zk", cfg.to_dict(), cfg.config_hash(), seed, vm.x.public(), list(frames), session=session,
                   simulated=True, meta=meta)
    return t.finish(*status) if status else t.finish(FAIL)


def simulate_abort(vm: VerifierModel, estimate: AbortEstimate, rng, seed=0, session: int = 0) -> SimOutput:
    """Rejection-sample an aborting run of the modified honest prover against the model."""
    bound = vm.config.lam * -(-estimate.N // estimate.abort_target)
    lens = session_lengths(vm.config, vm.x)
    for i in range(bound):
        r = rng.child("try", i)
        P = HonestProver(vm.config, vm.x, r.child("P"), modified=True)
        V = CircuitVerifier(vm.config, vm.x, r.child("V"), vm)
        frames = run_direct({"P": P, "V": V}, SCHEDULE, lens)
        last = frames[-1]
        # the modified prover stops before gamma; only verifier-caused aborts count
        if last.abort and last.step != "6":
            out = _transcript(vm, frames, (ABORT, last.step, last.role), seed, session,
                              {"simulator": "abort", "iterations": i + 1})
            return SimOutput(ABORTED, out, V.state.take(), estimate=estimate)
    return SimOutput(FAILED, _transcript(vm, [], None, seed, session, {"simulator": "abort"}), estimate=estimate,
                     reason="no abort within %d iterations" % bound)


def simulate(vm: VerifierModel, seed=0, session: int = 0, abort_target: int = 64, iteration_cap: int = 1 << 20,
             paper_constants: bool = False) -> SimOutput:
    """One simulated view: complete run, delegated abort, or fail."""
    rng = Rng(seed).child("zk-sim", session)
    r = _sim_run(vm, rng.child("main"), truncated=False)
    if r.kind == COMPLETE:
        t = _transcript(vm, r.frames, r.status, seed, session, {"simulator": "main"})
        return SimOutput(COMPLETE, t, r.state, r.beta_prime)
    if r.kind == FAILED:
        return SimOutput(FAILED, _transcript(vm, r.frames, None, seed, session, {"simulator": "main"}),
                         reason=r.reason)
    est = estimate_abort_prob(vm, rng.child("estimate"), abort_target, iteration_cap, paper_constants)
    if est is None:
        reason = "extraction stuck in a run that does not abort" if r.kind == STUCK else "estimate hit the cap"
        return SimOutput(FAILED, _transcript(vm, [], None, seed, session, {"simulator": "estimate"}), reason=reason)
    return simulate_abort(vm, est, rng.child("abort"), seed, session)
