"""Session driver for the zero-knowledge protocol."""

from functools import lru_cache

from ..commit import DIGEST_BYTES
from ..npstmt import ColoringInstance
from ..proofs import _WIBase
from ..rng import Rng
from .config import ROLE_BYTE, SCHEDULE, STEP_BYTE, ProtocolConfig, message_lengths
from .explain import _explain_lengths, prover_wi_statement, verifier_wi_statement
from .transcript import ABORT, ACCEPT, FAIL, REJECT, Transcript
from .transport import run_direct, run_two_party

PROTOCOL = "zk"


@lru_cache(maxsize=64)
def _lengths_cached(config: ProtocolConfig, xb: bytes):
    x = ColoringInstance.from_bytes(xb)
    zmsgs = {k: bytes(v) for k, v in _explain_lengths(config).items()}
    vst = verifier_wi_statement(config, x, zmsgs, bytes(DIGEST_BYTES))
    pst = prover_wi_statement(config, x, bytes(DIGEST_BYTES), bytes(DIGEST_BYTES), bytes(config.ct_p_len()))
    return tuple(sorted(message_lengths(config, x.n, _WIBase(vst, config).lengths(),
                                        _WIBase(pst, config).lengths()).items()))


def session_lengths(config: ProtocolConfig, x: ColoringInstance) -> dict:
    """Expected payload length of every step, fixed by (config, x)."""
    return dict(_lengths_cached(config, x.public().to_bytes()))


def status_of(frames, verdict_step="7"):
    """(status, abort_step, abort_role) from a frame log."""
    if not frames:
        return FAIL, None, None
    last = frames[-1]
    if last.abort:
        return ABORT, last.step, last.role
    if last.step == verdict_step:
        return (ACCEPT if last.payload[:1] == b"\x01" else REJECT), None, None
    return FAIL, None, None


def session_rngs(seed, session: int = 0):
    base = Rng(seed).child("zk-session", session)
    return base.child("P"), base.child("V")


def run_session(config: ProtocolConfig, x: ColoringInstance, prover, verifier, transport: str = "queue",
                seed=0, session: int = 0) -> Transcript:
    """Run one session. ``prover``/``verifier`` are factories ``(config, x, rng) -> party``.

    ``transport`` is ``queue`` (threads over an in-process duplex queue),
    ``tcp`` (threads over a localhost socket) or ``direct`` (no threads).
    """
    rp, rv = session_rngs(seed, session)
    pub = x.public()
    P, V = prover(config, x, rp), verifier(config, pub, rv)
    lengths = session_lengths(config, x)
    err = None
    if transport == "direct":
        frames = run_direct({"P": P, "V": V}, SCHEDULE, lengths)
    else:
        frames, err = run_two_party({"P": P, "V": V}, SCHEDULE, lengths, STEP_BYTE, ROLE_BYTE, transport)
    t = Transcript(PROTOCOL, config.to_dict(), config.config_hash(), seed, pub, list(frames), session=session,
                   meta={"wi_lengths": {k: lengths[k] for k in ("4.1", "5.1")}})
    status, st, role = status_of(frames)
    if err is not None and status == FAIL:
        return t.finish(ABORT, st, role, err)
    return t.finish(status, st, role, err)
