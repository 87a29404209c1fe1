"""Constant-round coin flipping with full simulation of party A.

Message schedule (sender in brackets)::

    1  [B]  cmt_B = Com(0; r_0)
    2  [F]  accept bit of B's argument "cmt_B commits to 0"
    3  [A]  cmt_A = Com(a; r_a)
    4a [B]  ct_B = SfeEnc_dk(0^{2 lam})
    4b [A]  evct = SfeEval(C_{1->a}, ct_B)
    5  [F]  accept bit of A's argument "my transcript so far is explainable"
    6a [B]  b
    6b [A]  a || r_a

The two inner arguments run in the ideal zero-knowledge hybrid: the proving
party hands its witness to a trusted functionality ``F`` (the harness), which
checks the relation on the public transcript and broadcasts one accept bit.
The witness never enters the transcript.

The protocol output ``a xor b`` is a function of the transcript: it is bottom
after an abort, a rejected argument or an opening that does not verify.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

from . import sfe
from .bits import Bits, from_bits, nbytes, to_bits
from .circuit import BoundCircuit, Circuit, CircuitBuilder
from .commit import DIGEST_BYTES, Commitment, commit, commitment_gadget, rand_len, relation_circuit, verify_open
from .protocol.config import normalize_message
from .protocol.transcript import ABORT, ACCEPT, FAIL, REJECT, Frame, Transcript
from .protocol.transport import ABORT_BIT, PartyAbort, channel_pair, encode_frame
from .rng import Rng
from .sfe import ideal as sfe_ideal

PROTOCOL = "coinflip"
SCHEDULE = (("1", "B"), ("2", "F"), ("3", "A"), ("4a", "B"), ("4b", "A"), ("5", "F"), ("6a", "B"), ("6b", "A"))
STEP_BYTE = {"1": 0x81, "2": 0x82, "3": 0x83, "4a": 0x84, "4b": 0x85, "5": 0x86, "6a": 0x87, "6b": 0x88}
ROLE_BYTE = {"A": 0x41, "B": 0x42, "F": 0x46}
ARGUMENTS = {"2": "B", "5": "A"}  # functionality step -> proving party
SPEAKS = {"A": ("3", "4b", "6b"), "B": ("1", "4a", "6a")}
ACCEPT_BIT, REJECT_BIT = b"\x01", b"\x00"


class CoinflipError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoinflipConfig:
    lam: int = 16
    k: int = 8
    sfe: str = "ideal"

    def __post_init__(self):
        if self.sfe != "ideal":
            raise ValueError("coin flipping evaluates C_{1->a} with the ideal SFE backend only")
        if self.k < 1:
            raise ValueError("k must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()

    @property
    def r_len(self) -> int:
        return rand_len(self.lam)

    @property
    def out_len(self) -> int:
        """Output bits of C_{1->a}: bottom flag || a."""
        return 1 + self.k

    def lengths(self) -> Dict[str, int]:
        lam = self.lam
        return {"1": DIGEST_BYTES, "2": 1, "3": DIGEST_BYTES,
                "4a": sfe.ct_len(self.sfe, lam, self.r_len),
                "4b": sfe.ev_len(self.sfe, lam, self.r_len, self.out_len),
                "5": 1, "6a": nbytes(self.k), "6b": nbytes(self.k + self.r_len)}

    def witness_bits(self, step: str) -> int:
        if step == "2":
            return self.r_len
        return self.k + self.r_len + sfe.eval_coins_len(self.sfe, self.lam)


# -- C_{1->a} and the argument relations ---------------------------------------

@lru_cache(maxsize=8)
def one_to_a_base(lam: int, k: int) -> Circuit:
    """(r || digest || a) -> bottom flag || a, opening the digest to the bit 1 with r."""
    rl = rand_len(lam)
    b = CircuitBuilder(rl + 8 * DIGEST_BYTES + k)
    w = b.inputs
    r, d, a = w[:rl], w[rl:rl + 8 * DIGEST_BYTES], w[rl + 8 * DIGEST_BYTES:]
    return b.build(one_to_a_gadget(b, lam, r, d, a))


def one_to_a_gadget(b: CircuitBuilder, lam: int, r, digest, a):
    ok = b.embed(relation_circuit(lam, 1), [b.const(1)] + list(r) + list(digest))[0]
    return [b.not_(ok)] + [b.and_(ok, v) for v in a]


def one_to_a_circuit(config: CoinflipConfig, cmt_b: bytes, a) -> BoundCircuit:
    """C_{1->a} for the commitment ``cmt_b``: a on an opening of cmt_b to 1, bottom otherwise."""
    return BoundCircuit(one_to_a_base(config.lam, config.k), to_bits(cmt_b, 8 * DIGEST_BYTES) + tuple(a))


def loose_ct(config: CoinflipConfig, data: bytes) -> sfe.SfeCiphertext:
    """Read a normalized 4a payload as a ciphertext, ignoring its tag byte."""
    return sfe.SfeCiphertext(config.sfe, config.lam, config.r_len, bytes(data[1:]))


def a_response(config: CoinflipConfig, cmt_b: bytes, ct_b: bytes, a, nu) -> bytes:
    """A's step 4b message: SfeEval(C_{1->a}, ct_B) with eval coins ``nu``."""
    return sfe.sfe_eval(one_to_a_circuit(config, cmt_b, a), loose_ct(config, ct_b), coins=nu).to_bytes()


def split_a_witness(config: CoinflipConfig, bits):
    k, rl = config.k, config.r_len
    return tuple(bits[:k]), tuple(bits[k:k + rl]), tuple(bits[k + rl:config.witness_bits("5")])


def argument_ok(config: CoinflipConfig, step: str, msgs: Dict[str, bytes], witness: bytes) -> bool:
    """The relation the functionality checks at ``step``, natively."""
    bits = to_bits(normalize_message(witness, nbytes(config.witness_bits(step))), config.witness_bits(step))
    if step == "2":
        return verify_open(Commitment(msgs["1"], 1), (0,), bits, config.lam)
    a, r_a, nu = split_a_witness(config, bits)
    if commit(config.lam, a, r_a).digest != msgs["3"]:
        return False
    return a_response(config, msgs["1"], msgs["4a"], a, nu) == msgs["4b"]


def parse_reveal(config: CoinflipConfig, payload: bytes):
    bits = to_bits(payload, config.k + config.r_len)
    return bits[:config.k], bits[config.k:]


def coinflip_output(config: CoinflipConfig, msgs: Dict[str, bytes]) -> Optional[Bits]:
    """Protocol output from the public messages: a xor b, or None for bottom."""
    if any(msgs.get(s) != ACCEPT_BIT for s in ARGUMENTS):
        return None
    if "6a" not in msgs or "6b" not in msgs:
        return None
    a, r_a = parse_reveal(config, msgs["6b"])
    if not verify_open(Commitment(msgs["3"], config.k), a, r_a, config.lam):
        return None
    b = to_bits(msgs["6a"], config.k)
    return tuple(x ^ y for x, y in zip(a, b))


def output_of(t: Transcript) -> Optional[Bits]:
    """Output of a finished coin-flip transcript; the status field is authoritative."""
    if t.status != ACCEPT:
        return None
    bits = t.meta.get("output")
    return tuple(int(c) for c in bits) if bits is not None else None


# -- party state machines -------------------------------------------------------

@dataclass
class CoinflipState:
    role: str
    config: CoinflipConfig
    rng: Rng
    pos: int = 0
    msgs: Dict[str, bytes] = field(default_factory=dict)
    secrets: dict = field(default_factory=dict)
    witness: Dict[str, Bits] = field(default_factory=dict)
    output: Optional[Bits] = None
    done: bool = False


def _need(state: CoinflipState, *steps):
    for s in steps:
        if s not in state.msgs:
            raise CoinflipError("%s is missing message %s" % (state.role, s))
        if s in ARGUMENTS and state.msgs[s] != ACCEPT_BIT:
            raise PartyAbort("argument at %s rejected" % s)


def cf_b_step(state: CoinflipState, incoming: Dict[str, bytes]) -> Tuple[CoinflipState, Optional[bytes]]:
    """Advance honest B; returns its next message, or None once the session is over."""
    if state.done:
        raise CoinflipError("B already finished")
    c, lam, rng = state.config, state.config.lam, state.rng
    state.msgs.update(incoming)
    pos = state.pos
    state.pos += 1
    if pos == 0:
        r0 = rng.bits(c.r_len)
        state.witness["2"] = r0
        state.secrets["r0"] = r0
        return state, commit(lam, (0,), r0).digest
    if pos == 1:
        _need(state, "2", "3")
        dk = sfe.sfe_gen(lam, rng.child("sfe-gen"), c.sfe)
        state.secrets["dk"] = dk
        return state, sfe.sfe_enc(dk, (0,) * c.r_len, coins=rng.bits(sfe.coins_len(c.sfe, lam))).to_bytes()
    if pos == 2:
        _need(state, "4b", "5")
        state.secrets["evct_plain"] = b_decrypt(c, state.secrets["dk"], state.msgs["4b"])
        b = rng.bits(c.k)
        state.secrets["b"] = b
        return state, from_bits(b)
    _need(state, "6b")
    state.output = coinflip_output(c, state.msgs)
    state.done = True
    return state, None


def b_decrypt(config: CoinflipConfig, dk, evct: bytes) -> Optional[Bits]:
    """B's view of A's evaluation: the payload a, or None for the bottom encoding."""
    try:
        ev = sfe.SfeEvaluated(config.sfe, config.lam, config.out_len, bytes(evct[1:]))
        return sfe.decode_bottom(sfe.sfe_dec(dk, ev))
    except sfe.SfeError:
        return None


def cf_a_step(state: CoinflipState, incoming: Dict[str, bytes]) -> Tuple[CoinflipState, Optional[bytes]]:
    """Advance honest A; returns its next message, or None once the session is over."""
    if state.done:
        raise CoinflipError("A already finished")
    c, lam, rng = state.config, state.config.lam, state.rng
    state.msgs.update(incoming)
    pos = state.pos
    state.pos += 1
    if pos == 0:
        _need(state, "1", "2")
        a, r_a = rng.bits(c.k), rng.bits(c.r_len)
        state.secrets.update(a=a, r_a=r_a)
        return state, commit(lam, a, r_a).digest
    if pos == 1:
        _need(state, "4a")
        a, r_a = state.secrets["a"], state.secrets["r_a"]
        nu = rng.bits(sfe.eval_coins_len(c.sfe, lam))
        state.witness["5"] = a + r_a + nu
        return state, a_response(c, state.msgs["1"], state.msgs["4a"], a, nu)
    if pos == 2:
        _need(state, "5", "6a")
        return state, from_bits(state.secrets["a"] + state.secrets["r_a"])
    state.output = coinflip_output(c, state.msgs)
    state.done = True
    return state, None


class StepParty:
    """Adapter from a step function to the driver's send/receive/argue interface."""

    def __init__(self, role: str, step_fn: Callable, config: CoinflipConfig, rng: Rng):
        self.role, self.step_fn = role, step_fn
        self.state = CoinflipState(role, config, rng)
        self._inbox: Dict[str, bytes] = {}

    def receive(self, step: str, payload: bytes) -> None:
        self._inbox[step] = payload

    def send(self, step: str) -> bytes:
        if SPEAKS[self.role][self.state.pos] != step:
            raise CoinflipError("%s asked to send %s out of order" % (self.role, step))
        self.state, out = self.step_fn(self.state, self._inbox)
        self._inbox = {}
        return out

    def argue(self, step: str) -> bytes:
        w = self.state.witness.get(step)
        if w is None:
            raise PartyAbort("no witness for the argument at %s" % step)
        return from_bits(w)


def honest_a(config: CoinflipConfig, rng: Rng) -> StepParty:
    return StepParty("A", cf_a_step, config, rng)


def honest_b(config: CoinflipConfig, rng: Rng) -> StepParty:
    return StepParty("B", cf_b_step, config, rng)


class CommitOneB(StepParty):
    """Cheating B: commits to 1 and sends SfeEnc(r_1), so that honest A's
    evaluation would hand it a. Its argument cannot succeed."""

    def __init__(self, config, rng):
        super().__init__("B", cf_b_step, config, rng)

    def send(self, step):
        st, c = self.state, self.state.config
        if step == "1":
            st.pos = 1
            r1 = st.rng.bits(c.r_len)
            st.secrets["r1"] = r1
            st.witness["2"] = r1  # not a witness for the statement; F rejects it
            return commit(c.lam, (1,), r1).digest
        if step == "4a":
            st.msgs.update(self._inbox)
            self._inbox = {}
            st.pos = 2
            dk = sfe.sfe_gen(c.lam, st.rng.child("sfe-gen"), c.sfe)
            st.secrets["dk"] = dk
            return sfe.sfe_enc(dk, st.secrets["r1"], coins=st.rng.bits(sfe.coins_len(c.sfe, c.lam))).to_bytes()
        return super().send(step)


# -- session driver -------------------------------------------------------------

def session_rngs(seed, session: int = 0):
    base = Rng(seed).child("coinflip-session", session)
    return base.child("A"), base.child("B")


def _status(frames, output) -> Tuple[str, Optional[str], Optional[str]]:
    last = frames[-1]
    if last.abort:
        return ABORT, last.step, last.role
    return (ACCEPT if output is not None else REJECT), None, None


def run_coinflip(config: CoinflipConfig, a_impl=honest_a, b_impl=honest_b, transport: str = "direct",
                 seed=0, session: int = 0) -> Tuple[Optional[Bits], Transcript]:
    """One coin-flip session. ``a_impl``/``b_impl`` are factories ``(config, rng) -> party``.

    Party messages travel through the chosen transport in wire format
    (``direct`` skips the encoding); functionality frames are produced by the
    driver itself.
    """
    ra, rb = session_rngs(seed, session)
    parties = {"A": a_impl(config, ra), "B": b_impl(config, rb)}
    frames, cause = drive(config, parties, transport)
    msgs = {f.step: f.payload for f in frames if not f.abort}
    output = coinflip_output(config, msgs) if not frames[-1].abort else None
    meta = {"output": "".join(map(str, output)) if output is not None else None}
    if "B" in parties and hasattr(parties["B"], "state") and "evct_plain" in parties["B"].state.secrets:
        meta["b_saw_bottom"] = parties["B"].state.secrets["evct_plain"] is None
    t = Transcript(PROTOCOL, config.to_dict(), config.config_hash(), seed, None, frames, session=session, meta=meta)
    t.finish(*_status(frames, output), cause)
    return output, t


def drive(config: CoinflipConfig, parties, transport: str = "direct"):
    """Alternate the parties through the schedule; returns (frames, cause)."""
    lengths = config.lengths()
    chans = None if transport == "direct" else dict(zip("AB", channel_pair(transport)))
    frames, msgs = [], {}
    pending = {r: None for r in parties}
    try:
        for step, sender in SCHEDULE:
            if sender == "F":
                prover = ARGUMENTS[step]
                try:
                    if pending[prover] is not None:
                        raise PartyAbort(pending[prover])
                    ok = argument_ok(config, step, msgs, parties[prover].argue(step))
                except PartyAbort:
                    frames.append(Frame(step, prover, b"", 0, True))
                    return frames, "%s gave no witness" % prover
                payload = ACCEPT_BIT if ok else REJECT_BIT
                frames.append(Frame(step, "F", payload, 1))
                msgs[step] = payload
                for p in parties.values():
                    p.receive(step, payload)
                if not ok:
                    return frames, "argument at %s rejected" % step
                continue
            try:
                if pending[sender] is not None:
                    raise PartyAbort(pending[sender])
                raw = bytes(parties[sender].send(step))
            except PartyAbort as exc:
                if chans:
                    chans[sender].send(encode_frame(STEP_BYTE[step], ROLE_BYTE[sender] | ABORT_BIT, b""))
                    chans["B" if sender == "A" else "A"].recv()
                frames.append(Frame(step, sender, b"", 0, True))
                return frames, str(exc) or None
            if chans:
                chans[sender].send(encode_frame(STEP_BYTE[step], ROLE_BYTE[sender], raw))
                sb, rb, raw = chans["B" if sender == "A" else "A"].recv()
                if sb != STEP_BYTE[step] or rb != ROLE_BYTE[sender]:
                    raise CoinflipError("frame mismatch on the wire")
            norm = normalize_message(raw, lengths[step])
            frames.append(Frame(step, sender, norm, len(raw)))
            msgs[step] = norm
            for r, p in parties.items():
                if r != sender and pending[r] is None:
                    try:
                        p.receive(step, norm)
                    except Exception as exc:
                        pending[r] = "%s while processing %s" % (type(exc).__name__, step)
        return frames, None
    finally:
        if chans:
            for ch in chans.values():
                ch.close()


# -- adversary A as circuits ------------------------------------------------------

# messages each of A's steps consumes, in order; step "5" outputs A's witness
A_INCOMING = {"3": ("1", "2"), "4b": ("4a",), "5": (), "6b": ("5", "6a")}
A_STEPS = tuple(A_INCOMING)


@dataclass
class AdversaryModel:
    """Party A given as one circuit per step: state || incoming -> state' || abort || out."""
    name: str
    config: CoinflipConfig
    state_lens: Dict[str, int]  # width entering each step, plus "end"
    steps: Dict[str, Circuit]
    oracle: Callable  # rng -> initial state bits
    meta: dict = field(default_factory=dict)

    def io(self, step) -> Tuple[int, int]:
        lens = self.config.lengths()
        n_in = sum(8 * lens[s] for s in A_INCOMING[step])
        n_out = nbytes(self.config.witness_bits("5")) if step == "5" else lens[step]
        return n_in, n_out

    def state_out(self, step) -> int:
        i = A_STEPS.index(step)
        return self.state_lens[A_STEPS[i + 1] if i + 1 < len(A_STEPS) else "end"]

    def run_step(self, step, state: Bits, msgs: Dict[str, bytes]):
        if len(state) != self.state_lens[step]:
            raise CoinflipError("state width %d does not match step %s" % (len(state), step))
        inc = b"".join(msgs[s] for s in A_INCOMING[step])
        n_in, _ = self.io(step)
        y = self.steps[step](tuple(state) + to_bits(inc, n_in))
        L = self.state_out(step)
        return y[:L], y[L], from_bits(y[L + 1:])

    def validate(self) -> None:
        for step in A_STEPS:
            c = self.steps[step]
            n_in, n_out = self.io(step)
            if c.input_len != self.state_lens[step] + n_in or c.output_len != self.state_out(step) + 1 + 8 * n_out:
                raise ValueError("step %s circuit has the wrong shape" % step)


class CircuitA:
    """Runs an AdversaryModel in the clear as party A."""
    role = "A"

    def __init__(self, config, rng, model: AdversaryModel, state=None):
        from .simulator import LinearState
        self.config, self.model = config, model
        self.state = LinearState(state if state is not None else model.oracle(rng.child("advice")))
        self.msgs: Dict[str, bytes] = {}

    def receive(self, step, payload):
        self.msgs[step] = payload

    def _run(self, step):
        from .simulator import LinearState
        st, ab, out = self.model.run_step(step, self.state.take(), self.msgs)
        self.state = LinearState(st)
        if ab:
            raise PartyAbort("adversary aborted at %s" % step)
        return out

    def send(self, step):
        return self._run(step)

    def argue(self, step):
        return self._run(step)

    def final_state(self) -> Bits:
        return self.state.take()


def circuit_a(model: AdversaryModel):
    def make(config, rng):
        return CircuitA(config, rng, model)
    return make


# -- the simulator cfS -------------------------------------------------------------

@dataclass
class CfSimOutput:
    output: Optional[Bits]
    transcript: Transcript
    state: Optional[Bits]
    target: Bits
    a_prime: Optional[Bits] = None
    failed: bool = False
    reason: str = ""


def cf_simulate(config: CoinflipConfig, model: AdversaryModel, target=None, seed=0, session: int = 0,
                retries: int = 3) -> CfSimOutput:
    """Force the output ``target`` (random if None) against the adversary A.

    The simulator commits to 1 with r_1, simulates B's (false) argument
    through the functionality simulator, sends SfeEnc_dk(r_1) so that A's own
    evaluation of C_{1->a} returns a' to it, plays honest B's side of A's
    argument and finally sends b = a' xor target.
    """
    from .simulator import LinearState
    rng = Rng(seed).child("cf-sim", session)
    c, lam = config, config.lam
    target = tuple(target) if target is not None else rng.child("target").bits(c.k)
    lengths = c.lengths()
    state = LinearState(model.oracle(rng.child("advice")))
    frames, msgs = [], {}

    def emit(step, role, raw):
        norm = normalize_message(raw, lengths[step])
        frames.append(Frame(step, role, norm, len(raw)))
        msgs[step] = norm

    def a_step(step):
        nonlocal state
        st, ab, out = model.run_step(step, state.take(), msgs)
        state = LinearState(st)
        return ab, out

    def finish(status, ab_step=None, ab_role=None, output=None, a_prime=None, failed=False, reason=""):
        meta = {"output": "".join(map(str, output)) if output is not None else None,
                "target": "".join(map(str, target)), "simulator": "cfS"}
        t = Transcript(PROTOCOL, c.to_dict(), c.config_hash(), seed, None, frames, session=session,
                       simulated=True, meta=meta).finish(status, ab_step, ab_role, reason or None)
        return CfSimOutput(output, t, None if failed else state.take(), target, a_prime, failed, reason)

    r1 = rng.bits(c.r_len)
    emit("1", "B", commit(lam, (1,), r1).digest)
    # the functionality's simulator reports acceptance of B's argument
    emit("2", "F", ACCEPT_BIT)
    ab, out = a_step("3")
    if ab:
        frames.append(Frame("3", "A", b"", 0, True))
        return finish(ABORT, "3", "A")
    emit("3", "A", out)

    dk = sfe.sfe_gen(lam, rng.child("sfe-gen"), c.sfe)
    emit("4a", "B", sfe.sfe_enc(dk, r1, coins=rng.bits(sfe.coins_len(c.sfe, lam))).to_bytes())
    ab, out = a_step("4b")
    if ab:
        frames.append(Frame("4b", "A", b"", 0, True))
        return finish(ABORT, "4b", "A")
    emit("4b", "A", out)
    a_prime = b_decrypt(c, dk, msgs["4b"])

    ab, w = a_step("5")
    if ab:
        frames.append(Frame("5", "A", b"", 0, True))
        return finish(ABORT, "5", "A", a_prime=a_prime)
    ok = argument_ok(c, "5", msgs, w)
    emit("5", "F", ACCEPT_BIT if ok else REJECT_BIT)
    if not ok:
        return finish(REJECT, a_prime=a_prime, reason="argument at 5 rejected")
    if a_prime is None:
        # an accepted argument means evct is an honest evaluation on r_1, so this cannot happen
        return finish(FAIL, a_prime=None, failed=True, reason="extraction returned bottom")

    emit("6a", "B", from_bits(tuple(x ^ y for x, y in zip(a_prime, target))))
    ab, out = a_step("6b")
    if ab:
        frames.append(Frame("6b", "A", b"", 0, True))
        return finish(ABORT, "6b", "A", a_prime=a_prime)
    emit("6b", "A", out)
    output = coinflip_output(c, msgs)
    return finish(ACCEPT if output is not None else REJECT, output=output, a_prime=a_prime)


# -- circuit fixtures for A -----------------------------------------------------------

def honest_a_model(config: CoinflipConfig, name: str = "honest-a", abort_step: Optional[str] = None,
                   bad_open: bool = False) -> AdversaryModel:
    """Honest A as circuits; optionally aborting at one step or revealing a bad opening."""
    from .simulator import vm_step_circuit
    lam, k, rl = config.lam, config.k, config.r_len
    nu_len = sfe.eval_coins_len(config.sfe, lam)
    base = k + rl + nu_len
    dbits = 8 * DIGEST_BYTES
    state_lens = {"3": base, "4b": base + dbits, "5": base, "6b": base, "end": k}
    lens = config.lengths()
    model = AdversaryModel(name, config, state_lens, {}, None, {"abort_step": abort_step, "bad_open": bad_open})

    def parts(st):
        return list(st[:k]), list(st[k:k + rl]), list(st[k + rl:base])

    def abort(b, step):
        return b.const(1 if step == abort_step else 0)

    def body_3(b, st, inc):
        a, r_a, _ = parts(st)
        return list(st) + list(inc[:dbits]), abort(b, "3"), commitment_gadget(b, a, r_a)

    def body_4b(b, st, inc):
        a, _, nu = parts(st)
        cmt_b = st[base:base + dbits]
        ctw = inc[8:8 + sfe_ideal.ct_bits_len(lam, rl)]
        ev = sfe_ideal.eval_gadget(b, lam, rl, ctw, nu, lambda bb, xw: one_to_a_gadget(bb, lam, xw, cmt_b, a))
        return list(st[:base]), abort(b, "4b"), b.consts(to_bits(bytes([sfe.IDEAL_TAG]))) + ev

    def body_5(b, st, inc):
        return list(st), abort(b, "5"), list(st)

    def body_6b(b, st, inc):
        a, r_a, _ = parts(st)
        if bad_open:
            r_a = [b.not_(r_a[0])] + r_a[1:]
        return a, abort(b, "6b"), a + r_a

    bodies = {"3": body_3, "4b": body_4b, "5": body_5, "6b": body_6b}
    for i, step in enumerate(A_STEPS):
        n_in, n_out = model.io(step)
        model.steps[step] = vm_step_circuit(state_lens[step], model.state_out(step), n_in, n_out, bodies[step])

    def oracle(rng):
        return rng.bits(base)

    model.oracle = oracle
    model.validate()
    assert lens["6b"] == nbytes(k + rl)
    return model


__all__ = ["CoinflipConfig", "CoinflipState", "SCHEDULE", "PROTOCOL", "cf_a_step", "cf_b_step", "run_coinflip",
           "cf_simulate", "coinflip_output", "one_to_a_circuit", "a_response", "argument_ok", "honest_a",
           "honest_b", "CommitOneB", "AdversaryModel", "CircuitA", "circuit_a", "honest_a_model", "CfSimOutput",
           "output_of", "b_decrypt"]
