import numpy as np
import pytest
from scipy import stats as sps

from nbzk import sfe
from nbzk.circuit import CircuitBuilder, identity_circuit, make_circuit
from nbzk.rng import Rng
from oracles import all_inputs, random_circuit

BACKENDS = ("ideal", "garbled")
LAM = 16


def roundtrip(c, x, backend, seed=0, lam=LAM):
    rng = Rng(seed)
    dk = sfe.sfe_gen(lam, rng.child("gen"), backend)
    ct = sfe.sfe_enc(dk, x, rng.child("enc"))
    ev = sfe.sfe_eval(c, ct, rng.child("eval"))
    return sfe.sfe_dec(dk, ev)


@pytest.mark.parametrize("backend", BACKENDS)
def test_gen_deterministic_and_serializable(backend):
    a, b = sfe.sfe_gen(LAM, Rng(1), backend), sfe.sfe_gen(LAM, Rng(1), backend)
    assert a == b
    assert sfe.SfeKey.from_bytes(a.to_bytes()) == a
    assert sfe.SfeKey.from_bits(backend, LAM, a.bits()) == a
    assert sfe.key_valid(a)


@pytest.mark.parametrize("backend,lam,tier", [("ideal", 32, None), ("garbled", 32, "small")])
def test_distinct_seeds_give_distinct_keys(backend, lam, tier):
    keys = {sfe.sfe_gen(lam, Rng(i), backend, tier).secret for i in range(1000)}
    assert len(keys) == 1000


def test_micro_tier_key_collisions_match_birthday_rate():
    # 22-bit key space: about 0.12 expected collisions among 1000 keys
    _, q, _ = sfe.garbled.group("micro")
    keys = [sfe.sfe_gen(LAM, Rng(i), "garbled").secret for i in range(1000)]
    assert 1000 - len(set(keys)) <= 3
    assert all(1 <= k < q for k in keys)


@pytest.mark.parametrize("backend", BACKENDS)
def test_identity_roundtrip_and_fixed_framing(backend):
    rng = Rng(2)
    dk = sfe.sfe_gen(LAM, rng, backend)
    lens = set()
    for _ in range(20):
        x = rng.bits(LAM)
        ct = sfe.sfe_enc(dk, x, rng)
        lens.add(len(ct.to_bytes()))
        ev = sfe.sfe_eval(identity_circuit(LAM), ct, rng)
        assert sfe.sfe_dec(dk, ev) == x
        assert len(ev.to_bytes()) == sfe.ev_len(backend, LAM, LAM, LAM)
    assert lens == {sfe.ct_len(backend, LAM, LAM)}


@pytest.mark.parametrize("backend", BACKENDS)
def test_cc_reward_path(backend):
    rng = Rng(3)
    t, s = rng.bits(LAM), rng.bits(LAM)
    cc = sfe.cc_identity_circuit(t, s)
    assert sfe.decode_bottom(roundtrip(cc, t, backend, 4)) == s
    other = (1 - t[0],) + t[1:]
    y = roundtrip(cc, other, backend, 5)
    assert y == (1,) + (0,) * LAM and sfe.decode_bottom(y) is None


@pytest.mark.parametrize("backend", BACKENDS)
def test_exhaustive_small_circuits(backend):
    rnd = __import__("random").Random(6)
    b = CircuitBuilder(6)
    adder = b.build(b.add(b.inputs[:3], b.inputs[3:]))
    circuits = [adder, random_circuit(rnd, 6, 40, 3), sfe.cc_identity_circuit((1, 0, 1, 1, 0, 0), (1, 1))]
    for c in circuits:
        for i, x in enumerate(all_inputs(6)):
            assert roundtrip(c, x, backend, seed=i, lam=8) == c(x)


@pytest.mark.parametrize("backend", BACKENDS)
def test_decode_errors(backend):
    rng = Rng(7)
    dk = sfe.sfe_gen(LAM, rng, backend)
    ct = sfe.sfe_enc(dk, rng.bits(LAM), rng)
    ev = sfe.sfe_eval(identity_circuit(LAM), ct, rng)
    data = ev.to_bytes()
    with pytest.raises(sfe.SfeDecodeError):
        sfe.parse_ev(data[:-1], backend, LAM, LAM, LAM)
    truncated = sfe.SfeEvaluated(backend, LAM, LAM, ev.body[:-1], ev.budget, ev.tier, LAM)
    with pytest.raises(sfe.SfeDecodeError):
        sfe.sfe_dec(dk, truncated)
    assert sfe.parse_ev(data, backend, LAM, LAM, LAM) == ev
    errors = 0
    for _ in range(100):
        junk = sfe.SfeEvaluated(backend, LAM, LAM, rng.bytes(len(ev.body)), ev.budget, ev.tier, LAM)
        try:
            sfe.sfe_dec(dk, junk)
        except sfe.SfeDecodeError:
            errors += 1
    assert errors == 100


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_output_circuit(backend):
    c = make_circuit(LAM, [], [])
    assert roundtrip(c, (0,) * LAM, backend) == ()


@pytest.mark.parametrize("backend", BACKENDS)
def test_extractor(backend):
    rng = Rng(8)
    for _ in range(5):
        dk = sfe.sfe_gen(LAM, rng, backend)
        x = rng.bits(LAM)
        assert sfe.sfe_extract(sfe.sfe_enc(dk, x, rng).to_bytes(), LAM, LAM, backend) == x
    n = sfe.ct_len(backend, LAM, LAM)
    tag = bytes([sfe.BACKENDS[backend]])
    hits = sum(sfe.sfe_extract(tag + rng.bytes(n - 1), LAM, LAM, backend) is not None for _ in range(100))
    assert hits == 0
    assert sfe.sfe_extract(b"\x00" * n, LAM, LAM, backend) is None


def test_extractor_refuses_large_tier():
    with pytest.raises(sfe.TierTooLarge):
        sfe.sfe_extract(b"", 32, 4, "garbled", "small")


@pytest.mark.parametrize("backend", BACKENDS)
def test_first_flow_hides_plaintext(backend):
    rng = Rng(9)
    n = 10000 if backend == "ideal" else 3000
    hists = []
    for bit in (0, 1):
        blob = b""
        for _ in range(n):
            dk = sfe.sfe_gen(LAM, rng, backend)
            blob += sfe.sfe_enc(dk, (bit,) * LAM, rng).body
        hists.append(np.bincount(np.frombuffer(blob, np.uint8), minlength=256))
    assert sps.chi2_contingency(np.vstack(hists))[1] > 0.01


def test_agreeing_circuits_give_identical_flows_ideal():
    # C0 and C1 agree on the encrypted input; the evaluated flow is then a function of (output, coins)
    rng = Rng(10)
    dk = sfe.sfe_gen(LAM, rng, "ideal")
    x = rng.bits(LAM)
    ct = sfe.sfe_enc(dk, x, rng)
    assert sfe.sfe_extract(ct.to_bytes(), LAM, LAM) == x
    c0 = sfe.cc_identity_circuit(x, (1, 0, 1))
    b = CircuitBuilder(LAM)
    c1 = b.build([b.const(0), b.const(1), b.const(0), b.const(1)])
    assert c0(x) == c1(x)
    h0, h1 = np.zeros(256, int), np.zeros(256, int)
    for i in range(10000):
        coins = rng.bits(sfe.eval_coins_len("ideal", LAM))
        e0 = sfe.sfe_eval(c0, ct, coins=coins).body
        e1 = sfe.sfe_eval(c1, ct, coins=coins).body
        assert e0 == e1
        h0[e0[0]] += 1
        h1[sfe.sfe_eval(c1, ct, rng).body[0]] += 1
    used = (h0 + h1) > 0
    assert sps.chi2_contingency(np.vstack([h0[used], h1[used]]))[1] > 0.01
