"""Adversary fixtures: verifier models and cheating provers.

Every verifier fixture is a ``VerifierModel`` built from the honest verifier's
step circuits plus one deviation. Its advice state is sampled by an oracle
that runs the honest verifier's coin-dependent precomputation (the 2(a)
message and the transparent WI witness). Real sessions run the same model in
the clear through ``CircuitVerifier``.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional

from .. import sfe
from ..bits import from_bits, to_bits
from ..npstmt import ColoringInstance
from ..proofs import SigmaChallenge, best_coloring, sigma_first
from ..protocol.config import ProtocolConfig
from ..protocol.explain import (VerifierCoins, nonwitness_relation, prover_wi_witness, verifier_msg_2a)
from ..protocol.parties import HonestProver, HonestVerifier
from ..protocol.session import session_lengths
from ..simulator import VM_STEPS, VerifierModel, circuit_verifier, vm_step_circuit
from ..sfe import ideal as sfe_ideal

COIN_BITS = 16


class FixtureError(KeyError):
    pass


def _fields(config, x):
    lens = session_lengths(config, x)
    lam = config.lam
    return [("t", lam), ("s", lam), ("ev", sfe.eval_coins_len(config.sfe, lam)),
            ("beta", 8 * lens["3b"]), ("w41", 8 * lens["4.1"]), ("c52", 8 * lens["5.2"]), ("coin", COIN_BITS)]


def _layout(fields):
    out, off = {}, 0
    for name, w in fields:
        out[name] = (off, off + w)
        off += w
    return out, off


def honest_vm(config: ProtocolConfig, x: ColoringInstance, name: str = "honest", abort_step: Optional[str] = None,
              abort_p: float = 1.0, beta_bias: float = 0.0, bottom: bool = False) -> VerifierModel:
    """The honest verifier as circuits, optionally with one deviation.

    * ``abort_step``/``abort_p``: abort at that step when the state coin is
      below ``abort_p`` (always when ``abort_p == 1``);
    * ``beta_bias``: each repetition's challenge is edge 0 with this extra
      probability;
    * ``bottom``: step 2(c) evaluates C_bottom instead of CC[Id, t, s].
    """
    x = x.public()
    lens = session_lengths(config, x)
    lam = config.lam
    if lens["4.1"] != -(-(VerifierCoins.bits_len(config) + nonwitness_relation(config, x).witness_len) // 8):
        raise FixtureError("verifier models need the transparent verifier WI")
    fields = _fields(config, x)
    lay, core = _layout(fields)
    after2c = [f for f in fields if f[0] not in ("t", "s", "ev")]
    lay2, rest = _layout(after2c)
    m2a_bits = 8 * lens["2a"]
    state_lens = {"2a": m2a_bits + core, "2c": core, "3b": rest, "4.1": rest, "4.3": rest, "5.2": rest,
                  "end": rest}
    threshold = int(round(abort_p * (1 << COIN_BITS)))

    def abort_wire(b, st, step, layout):
        if step != abort_step:
            return b.const(0)
        if threshold >= 1 << COIN_BITS:
            return b.const(1)
        lo, hi = layout["coin"]
        return b.less_than_const(st[lo:hi], threshold)

    def seg(st, layout, key):
        lo, hi = layout[key]
        return list(st[lo:hi])

    def body_2a(b, st, inc):
        core_w = st[m2a_bits:]
        return core_w, abort_wire(b, core_w, "2a", lay), st[:m2a_bits]

    def body_2c(b, st, inc):
        t, s, ev = seg(st, lay, "t"), seg(st, lay, "s"), seg(st, lay, "ev")
        if bottom:
            def fn(bb, xw):
                return [bb.const(1)] + [bb.const(0)] * lam
        else:
            def fn(bb, xw):
                return sfe.cc_gadget(bb, xw, t, s)
        ctw = inc[8:8 + sfe_ideal.ct_bits_len(lam, lam)]
        out = b.consts(to_bits(bytes([sfe.IDEAL_TAG]))) + sfe_ideal.eval_gadget(b, lam, lam, ctw, ev, fn)
        nxt = [w for f, _ in after2c for w in seg(st, lay, f)]
        return nxt, abort_wire(b, st, "2c", lay), out

    def passthrough(step, out_field):
        def body(b, st, inc):
            out = seg(st, lay2, out_field) if out_field else []
            return list(st), abort_wire(b, st, step, lay2), out
        return body

    bodies = {"2a": body_2a, "2c": body_2c, "3b": passthrough("3b", "beta"), "4.1": passthrough("4.1", "w41"),
              "4.3": passthrough("4.3", None), "5.2": passthrough("5.2", "c52")}
    if config.sfe != "ideal":
        raise FixtureError("verifier models use the ideal SFE backend")

    steps = {}
    from ..simulator import INCOMING
    for i, step in enumerate(VM_STEPS):
        nxt = VM_STEPS[i + 1] if i + 1 < len(VM_STEPS) else "end"
        src = INCOMING[step]
        steps[step] = vm_step_circuit(state_lens[step], state_lens[nxt], 8 * lens[src] if src else 0, lens[step],
                                      bodies[step])
    pad = nonwitness_relation(config, x).witness_len
    nedges = len(x.edges)

    def oracle(rng):
        coins = VerifierCoins.sample(config, x, rng.child("coins"))
        if beta_bias:
            br = rng.child("bias")
            beta = tuple(0 if br.random() < beta_bias else e for e in coins.beta)
            coins = VerifierCoins(coins.t, coins.s, beta, coins.fhe, coins.salt, coins.ev)
        m2a, _ = verifier_msg_2a(config, coins)
        w41 = from_bits(coins.to_bits() + (0,) * pad)
        c52 = SigmaChallenge(tuple(rng.below(1 << 16) for _ in range(config.wi_reps))).to_bytes()
        parts = {"t": coins.t, "s": coins.s, "ev": coins.ev, "beta": SigmaChallenge(coins.beta).bits(),
                 "w41": to_bits(w41, 8 * lens["4.1"]), "c52": to_bits(c52, 8 * lens["5.2"]),
                 "coin": rng.bits(COIN_BITS)}
        return to_bits(m2a) + sum((tuple(parts[f]) for f, _ in fields), ())

    meta = {"abort_step": abort_step, "abort_p": abort_p if abort_step else 0.0, "beta_bias": beta_bias,
            "bottom": bottom, "edges": nedges}
    vm = VerifierModel(name, config, x, state_lens, steps, oracle, meta)
    vm.validate()
    return vm


# -- provers ------------------------------------------------------------------

class WitnesslessProver(HonestProver):
    """Commits to a best-possible colouring of a non-3-colourable graph.

    It passes its WI proof through the trapdoor branch (which any prover can
    satisfy) and answers the sigma challenge honestly; it is caught exactly
    when a challenged edge is monochromatic.
    """

    def __init__(self, config, x, rng):
        col, _ = best_coloring(x)
        super().__init__(config, x.with_witness(col), rng)

    def send_3a(self):
        c = self.config
        alpha, self.aux = sigma_first(self.x, self.coloring, self.rng.child("sigma"), c.lam, c.sigma_reps,
                                      check=False)
        return alpha.to_bytes()

    def send_5_1(self):
        from ..protocol.explain import prover_wi_statement
        from ..proofs import WIProver
        from ..protocol.transport import PartyAbort
        if not self.verifier_wi_ok:
            raise PartyAbort("verifier WI proof rejected")
        st = prover_wi_statement(self.config, self.x, self.cmt1, self.cmt2, self.msgs["2b"])
        w = prover_wi_witness(self.config, self.x, trapdoor=self.z + self.r1 + self.dk.bits() + self.r2
                              + self.y + self.r_enc)
        self._pwi = WIProver(st, w, self.config, self.rng.child("wi-prover"))
        return self._pwi.first()


# -- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class Fixture:
    name: str
    role: str
    doc: str
    build: Callable  # (config, x) -> VerifierModel, or a party factory for provers

    def verifier_model(self, config, x) -> VerifierModel:
        if self.role != "V":
            raise FixtureError("%s is not a verifier fixture" % self.name)
        return _cached_model(self.name, config, x.public())


@lru_cache(maxsize=32)
def _cached_model(name, config, x):
    return _REG[name].build(config, x)


_REG: Dict[str, Fixture] = {}


def register(f: Fixture) -> None:
    if f.name in _REG:
        raise FixtureError("duplicate fixture %s" % f.name)
    _REG[f.name] = f


def get_fixture(name: str) -> Fixture:
    if name not in _REG:
        raise FixtureError("unknown fixture %r (known: %s)" % (name, ", ".join(sorted(_REG))))
    return _REG[name]


def fixture_names(role: str = None):
    return sorted(n for n, f in _REG.items() if role is None or f.role == role)


register(Fixture("honest", "V", "the honest verifier as circuits", lambda c, x: honest_vm(c, x, "honest")))
for _step in VM_STEPS:
    register(Fixture("abort-%s" % _step, "V", "always aborts at step %s" % _step,
                     lambda c, x, s=_step: honest_vm(c, x, "abort-%s" % s, abort_step=s)))
for _p in (10, 25, 50, 90):
    register(Fixture("abort%d" % _p, "V", "aborts at 3b with probability %.2f" % (_p / 100),
                     lambda c, x, p=_p: honest_vm(c, x, "abort%d" % p, abort_step="3b", abort_p=p / 100)))
register(Fixture("biased-beta", "V", "challenges edge 0 with extra probability 1/2",
                 lambda c, x: honest_vm(c, x, "biased-beta", beta_bias=0.5)))
register(Fixture("c-bottom", "V", "evaluates C_bottom at 2(c); under simulation the lock never opens",
                 lambda c, x: honest_vm(c, x, "c-bottom", bottom=True)))

register(Fixture("honest-prover", "P", "the honest prover", lambda c, x: HonestProver))
register(Fixture("witnessless", "P", "best single-colouring cheater, trapdoor WI branch",
                 lambda c, x: WitnesslessProver))


def verifier_factory(name: str, config, x):
    """Party factory for a verifier fixture name ('honest-native' is the native verifier)."""
    if name == "honest-native":
        return HonestVerifier
    return circuit_verifier(get_fixture(name).verifier_model(config, x))


def prover_factory(name: str, config, x):
    return get_fixture(name).build(config, x)


# -- coin-flip parties ----------------------------------------------------------

def _cf():
    from .. import coinflip
    return coinflip


CF_MODELS = {
    "honest-a": ("honest A as circuits", {}),
    "a-abort-3": ("aborts instead of committing to its coins", {"abort_step": "3"}),
    "a-abort-4b": ("aborts instead of evaluating C_{1->a}", {"abort_step": "4b"}),
    "a-abort-5": ("gives no witness for its argument", {"abort_step": "5"}),
    "a-abort-6b": ("aborts instead of revealing", {"abort_step": "6b"}),
    "a-bad-open": ("reveals a with corrupted commitment randomness", {"bad_open": True}),
}

for _name, (_doc, _kw) in CF_MODELS.items():
    register(Fixture(_name, "A", _doc, lambda c, kw=_kw, n=_name: _cf().honest_a_model(c, n, **kw)))
register(Fixture("honest-a-native", "A", "honest A as a native state machine", lambda c: _cf().honest_a))
register(Fixture("honest-b", "B", "honest B", lambda c: _cf().honest_b))
register(Fixture("commit-one-b", "B", "commits to 1 and encrypts r_1 to learn a; its argument fails",
                 lambda c: _cf().CommitOneB))


@lru_cache(maxsize=16)
def coinflip_model(name: str, config):
    f = get_fixture(name)
    if f.role != "A" or name == "honest-a-native":
        raise FixtureError("%s is not a circuit adversary for party A" % name)
    return f.build(config)


def coinflip_party(name: str, config):
    """Party factory ``(config, rng) -> party`` for a coin-flip fixture."""
    f = get_fixture(name)
    if f.role == "A" and name != "honest-a-native":
        return _cf().circuit_a(coinflip_model(name, config))
    if f.role not in ("A", "B"):
        raise FixtureError("%s is not a coin-flip fixture" % name)
    return f.build(config)
