import random

import numpy as np
import pytest
from scipy import stats as sps

from nbzk import fhe
from nbzk.bits import from_bits, to_bits
from nbzk.cco import CCProgram, obf_eval, obfuscate
from nbzk.circuit import CircuitBuilder, identity_circuit
from nbzk.fhe import lattice
from nbzk.protocol.config import ProtocolConfig
from nbzk.rng import Rng
from nbzk import sfe
from nbzk.simulator import _sfe_enc_circuit
from oracles import all_inputs, random_circuit

BACKENDS = ("ideal", "lattice")


def keys(backend, seed=0, params=None):
    return fhe.fhe_gen(16, Rng(seed), backend, params)


def nand_chain(n_in, depth):
    b = CircuitBuilder(n_in)
    y = b.inputs[0]
    for i in range(depth):
        y = b.not_(b.and_(y, b.inputs[(i + 1) % n_in]))
    return b.build([y])


@pytest.mark.parametrize("backend", BACKENDS)
def test_encrypt_decrypt(backend):
    kp, rng = keys(backend), Rng(1)
    for _ in range(20):
        x = rng.bits(12)
        ct = fhe.fhe_enc(kp.pk, x, rng)
        assert fhe.fhe_dec(kp.sk, ct) == x
        assert len(ct.to_bytes()) == fhe.ct_len(backend, 12, fhe.public_params(kp.pk))
        assert fhe.fhe_dec(kp.sk, fhe.FheCiphertext.from_bytes(ct.to_bytes())) == x


@pytest.mark.parametrize("backend", BACKENDS)
def test_key_serialization(backend):
    kp = keys(backend, 2)
    pk = fhe.FhePublicKey.from_bytes(kp.pk.to_bytes(), 16)
    assert pk.to_bytes() == kp.pk.to_bytes()
    sk = fhe.secret_key_from_bits(backend, 16, kp.sk.bits(), fhe.public_params(kp.pk))
    assert sk.to_bytes() == kp.sk.to_bytes()
    ct = fhe.fhe_enc(pk, (1, 0, 1), Rng(3))
    assert fhe.fhe_dec(sk, ct) == (1, 0, 1)


def test_nand_chain_depth_10_exact():
    c = nand_chain(4, 10)
    assert c.depth() == 10
    kp, rng = keys("lattice", 4), Rng(5)
    for x in all_inputs(4):
        out = fhe.fhe_eval(kp.pk, c, fhe.fhe_enc(kp.pk, x, rng))
        assert fhe.fhe_dec(kp.sk, out) == c(x)


@pytest.mark.parametrize("backend", BACKENDS)
def test_eval_matches_plain(backend):
    rnd, rng = random.Random(6), Rng(6)
    kp = keys(backend, 6, lattice.MICRO_PIPELINE if backend == "lattice" else None)
    for _ in range(4):
        c = random_circuit(rnd, 5, 25, 3)
        for x in all_inputs(5):
            out = fhe.fhe_eval(kp.pk, c, fhe.fhe_enc(kp.pk, x[:2], rng), fhe.fhe_enc(kp.pk, x[2:], rng))
            assert fhe.fhe_dec(kp.sk, out) == c(x)


@pytest.mark.parametrize("backend", BACKENDS)
def test_compactness(backend):
    kp, rng = keys(backend, 7, lattice.MICRO_PIPELINE if backend == "lattice" else None), Rng(7)
    ct = fhe.fhe_enc(kp.pk, rng.bits(6), rng)
    sizes = set()
    for g in (1, 10, 40):
        b = CircuitBuilder(6)
        y = b.inputs[0]
        for i in range(g):
            y = b.xor(y, b.inputs[1 + i % 5]) if i % 2 else b.not_(y)
        out = fhe.fhe_eval(kp.pk, b.build([y, b.inputs[1]]), ct)
        sizes.add(len(out.to_bytes()))
    assert sizes == {fhe.ct_len(backend, 2, fhe.public_params(kp.pk))}


def test_depth_overflow_and_noise_detection():
    p = lattice.Params()
    kp, rng = keys("lattice", 8, p), Rng(8)
    b = CircuitBuilder(2)
    y = b.inputs[0]
    for _ in range(12):
        y = b.xor(y, b.and_(y, b.inputs[1]))
    deep = b.build([y])
    ct = fhe.fhe_enc(kp.pk, (1, 1), rng)
    with pytest.raises(fhe.DepthOverflow):
        fhe.fhe_eval(kp.pk, deep, ct)
    good = fhe.fhe_enc(kp.pk, (1,), rng)
    _, (c0,) = good.payload
    junk = lattice.Ct(np.random.default_rng(8).integers(0, 1 << 16, c0.mat.shape, dtype=np.uint64), 0.0)
    with pytest.raises(fhe.NoiseOverflow):
        fhe.fhe_dec(kp.sk, fhe.FheCiphertext("lattice", 1, (p, [junk])))


@pytest.mark.parametrize("backend", BACKENDS)
def test_mismatched_inputs_rejected(backend):
    kp, other = keys(backend, 9), keys(backend, 10)
    ct = fhe.fhe_enc(kp.pk, (1, 0), Rng(9))
    with pytest.raises(fhe.FheError):
        fhe.fhe_eval(kp.pk, identity_circuit(3), ct)
    if backend == "ideal":
        with pytest.raises(fhe.FheError):
            fhe.fhe_dec(other.sk, ct)
        with pytest.raises(fhe.FheError):
            fhe.fhe_eval(other.pk, identity_circuit(2), ct)
    with pytest.raises(fhe.FheError):
        fhe.FheCiphertext.from_bytes(b"\x00\x01")


@pytest.mark.parametrize("backend", BACKENDS)
def test_ciphertexts_hide_plaintext(backend):
    kp, rng = keys(backend, 11), Rng(11)
    n = 3000 if backend == "ideal" else 300
    hists = []
    for bit in (0, 1):
        blob = b"".join(fhe.fhe_enc(kp.pk, (bit,) * 4, rng).to_bytes()[1:] for _ in range(n))
        hists.append(np.bincount(np.frombuffer(blob, np.uint8), minlength=256))
    assert sps.chi2_contingency(np.vstack(hists))[1] > 0.01


@pytest.mark.parametrize("backend", BACKENDS)
def test_decryption_inside_compute_and_compare(backend):
    kp, rng = keys(backend, 12), Rng(12)
    u = (0,) + rng.bits(8)
    z = rng.bits(24)
    obf = obfuscate(CCProgram(fhe.fhe_dec_descriptor(kp.sk, 9), u, z), rng)
    assert obf_eval(obf, fhe.fhe_enc(kp.pk, u, rng).bits()) == z
    wrong = (0,) + tuple(1 - b for b in u[1:])
    assert obf_eval(obf, fhe.fhe_enc(kp.pk, wrong, rng).bits()) is None
    assert obf_eval(obf, fhe.fhe_enc(keys(backend, 13).pk, u, rng).bits()) is None
    # a homomorphically computed ciphertext opens the lock as well
    inc = CircuitBuilder(9)
    c = inc.build([inc.inputs[0]] + list(inc.add(inc.inputs[1:], inc.consts((1,) + (0,) * 7))))
    pre = (0,) + to_bits(bytes([(from_bits(u[1:])[0] - 1) % 256]))
    assert obf_eval(obf, fhe.fhe_eval(kp.pk, c, fhe.fhe_enc(kp.pk, pre, rng)).bits()) == z


@pytest.mark.parametrize("backend", BACKENDS)
def test_sfe_encryption_pipeline_under_fhe(backend):
    config = ProtocolConfig(lam=16, fhe=backend)
    rng = Rng(14)
    dk = sfe.sfe_gen(16, rng, "ideal")
    coins = rng.bits(sfe.coins_len("ideal", 16))
    c = _sfe_enc_circuit(config, dk, coins)
    kp = fhe.fhe_gen(16, rng, backend, lattice.MICRO_PIPELINE if backend == "lattice" else None)
    for _ in range(3):
        t = rng.bits(16)
        clear = sfe.sfe_enc(dk, t, coins=coins).to_bytes()
        assert from_bits(c(t))[:len(clear)] == clear
        out = fhe.fhe_eval(kp.pk, c, fhe.fhe_enc(kp.pk, t, rng))
        assert from_bits(fhe.fhe_dec(kp.sk, out)) == from_bits(c(t))
