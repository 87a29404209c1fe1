import pytest

from nbzk import coinflip as cf
from nbzk import sfe
from nbzk.bits import from_bits, to_bits
from nbzk.commit import commit
from nbzk.harness import fixtures, runs, stats
from nbzk.protocol.transcript import ABORT, ACCEPT, REJECT
from nbzk.protocol.transport import PartyAbort
from nbzk.rng import Rng

CC = cf.CoinflipConfig()
STEPS = [s for s, _ in cf.SCHEDULE]


def test_honest_outputs():
    lens = CC.lengths()
    for i in range(30):
        out, t = cf.run_coinflip(CC, seed=1, session=i)
        assert out is not None and len(out) == CC.k
        assert t.status == ACCEPT and cf.output_of(t) == out
        assert t.steps() == STEPS
        assert all(len(f.payload) == lens[f.step] for f in t.frames)
        a = to_bits(t.payload("6b"), CC.k)
        b = to_bits(t.payload("6a"), CC.k)
        assert out == tuple(x ^ y for x, y in zip(a, b))
        assert t.meta["b_saw_bottom"] is True


def test_outputs_spread_over_all_values():
    cc = cf.CoinflipConfig(k=3)
    outs = [o for o, _ in (cf.run_coinflip(cc, seed=2, session=i) for i in range(480))]
    vals = [from_bits(o)[0] for o in outs]
    assert stats.uniformity_test(vals, 3).p_value > 0.001


class AbortingB(cf.StepParty):
    def __init__(self, config, rng):
        super().__init__("B", cf.cf_b_step, config, rng)

    def send(self, step):
        if step == "4a":
            raise PartyAbort("refuses")
        return super().send(step)


class LyingB(cf.StepParty):
    def __init__(self, config, rng):
        super().__init__("B", cf.cf_b_step, config, rng)

    def argue(self, step):
        return bytes(len(super().argue(step)))


class BadRevealA(cf.StepParty):
    def __init__(self, config, rng):
        super().__init__("A", cf.cf_a_step, config, rng)

    def send(self, step):
        out = super().send(step)
        if step == "6b":
            out = bytes([out[0] ^ 1]) + out[1:]
        return out


def test_b_abort_gives_bottom():
    out, t = cf.run_coinflip(CC, b_impl=AbortingB, seed=3)
    assert out is None and cf.output_of(t) is None
    assert (t.status, t.abort_step, t.abort_role) == (ABORT, "4a", "B")


def test_rejected_b_argument_gives_bottom():
    out, t = cf.run_coinflip(CC, b_impl=LyingB, seed=4)
    assert out is None and t.status == REJECT
    assert t.payload("2") == cf.REJECT_BIT and t.steps() == ["1", "2"]


def test_wrong_reveal_gives_bottom():
    out, t = cf.run_coinflip(CC, a_impl=BadRevealA, seed=5)
    assert out is None and t.status == REJECT and t.payload("6b") is not None


def test_commit_one_b_is_stopped_by_its_argument():
    out, t = cf.run_coinflip(CC, b_impl=fixtures.coinflip_party("commit-one-b", CC), seed=6)
    assert out is None and t.payload("2") == cf.REJECT_BIT and t.payload("4b") is None


def test_without_the_argument_commit_one_b_learns_a():
    # drive honest A by hand as if F had accepted B's argument
    rng = Rng(7)
    r1 = rng.bits(CC.r_len)
    st = cf.CoinflipState("A", CC, rng.child("A"))
    st, cmt_a = cf.cf_a_step(st, {"1": commit(CC.lam, (1,), r1).digest, "2": cf.ACCEPT_BIT})
    dk = sfe.sfe_gen(CC.lam, rng.child("dk"))
    ct = sfe.sfe_enc(dk, r1, rng).to_bytes()
    st, evct = cf.cf_a_step(st, {"4a": ct})
    assert cf.b_decrypt(CC, dk, evct) == st.secrets["a"]
    assert commit(CC.lam, st.secrets["a"], st.secrets["r_a"]).digest == cmt_a


def test_honest_b_only_sees_bottom():
    for i in range(10):
        _, t = cf.run_coinflip(CC, seed=8, session=i)
        assert t.meta["b_saw_bottom"]


def test_argument_relations():
    _, t = cf.run_coinflip(CC, seed=9)
    msgs = {f.step: f.payload for f in t.frames}
    assert not cf.argument_ok(CC, "2", msgs, b"\x00" * 8)
    assert not cf.argument_ok(CC, "5", msgs, b"\x00" * 8)


@pytest.mark.parametrize("transport", ["queue", "tcp"])
def test_transports_agree(transport):
    _, a = cf.run_coinflip(CC, seed=10, session=1)
    _, b = cf.run_coinflip(CC, transport=transport, seed=10, session=1)
    assert a.lines() == b.lines()


def test_circuit_a_in_real_runs():
    ts = runs.real_coinflip(CC, "honest-a", "honest-b", n=5, seed=11)
    assert all(t.status == ACCEPT for t in ts)
    bad = runs.real_coinflip(CC, "a-bad-open", "honest-b", n=3, seed=11)
    assert all(cf.output_of(t) is None and t.status == REJECT for t in bad)


def test_simulator_forces_target():
    model = fixtures.coinflip_model("honest-a", CC)
    model.validate()
    rng = Rng(12)
    for i in range(20):
        target = rng.bits(CC.k)
        s = cf.cf_simulate(CC, model, target, seed=12, session=i)
        assert s.output == target and not s.failed
        assert s.transcript.simulated and s.transcript.status == ACCEPT
        assert cf.output_of(s.transcript) == target
        assert s.state is not None
    r = cf.cf_simulate(CC, model, seed=13)
    assert r.output == r.target


@pytest.mark.parametrize("name,step", [("a-abort-3", "3"), ("a-abort-4b", "4b"), ("a-abort-5", "5"),
                                       ("a-abort-6b", "6b")])
def test_simulator_against_aborting_a(name, step):
    s = cf.cf_simulate(CC, fixtures.coinflip_model(name, CC), seed=14)
    t = s.transcript
    assert s.output is None and not s.failed
    assert (t.status, t.abort_step, t.abort_role) == (ABORT, step, "A")
    _, real = cf.run_coinflip(CC, fixtures.coinflip_party(name, CC), seed=14)
    assert (real.status, real.abort_step, real.abort_role) == (ABORT, step, "A")


def test_simulator_against_bad_opening():
    s = cf.cf_simulate(CC, fixtures.coinflip_model("a-bad-open", CC), seed=15)
    assert s.output is None and s.transcript.status == REJECT and s.a_prime is not None


def test_config_validation():
    with pytest.raises(ValueError):
        cf.CoinflipConfig(sfe="garbled")
    with pytest.raises(ValueError):
        cf.CoinflipConfig(k=0)
    with pytest.raises(fixtures.FixtureError):
        fixtures.coinflip_model("honest-a-native", CC)
