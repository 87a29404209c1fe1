import numpy as np
import pytest

from nbzk.circuit import eval_batch
from nbzk.commit import (CommitError, commit, commit_many, commit_random, digest_bits, rand_len,
                         relation_circuit, verify_open)
from nbzk.rng import Rng
from nbzk.toyhash import toyhash_batch
from oracles import toyhash_reference

LAM = 16


def test_deterministic_and_matches_hash_of_concatenation():
    x, r = (1, 0, 1), Rng(1).bits(2 * LAM)
    c = commit(LAM, x, r)
    assert c == commit(LAM, x, r)
    assert c.digest == toyhash_reference(list(x) + list(r))
    assert len(c.to_bytes()) == 16 and len(digest_bits(c)) == 128


def test_wrong_randomness_length():
    with pytest.raises(CommitError):
        commit(LAM, (1,), (0,) * (2 * LAM - 1))
    assert rand_len(LAM) == 32


def test_honest_open():
    c, op = commit_random(LAM, (0, 1, 1, 0), Rng(2))
    assert verify_open(c, op.plaintext, op.randomness)
    assert verify_open(c, op.plaintext, op.randomness, lam=LAM)
    assert not verify_open(c, op.plaintext, op.randomness, lam=LAM + 1)


def test_flipped_bits_never_open():
    rng = Rng(3)
    for i in range(1000):
        x, r = rng.bits(8), rng.bits(2 * LAM)
        c = commit(LAM, x, r)
        j, k = i % 8, i % (2 * LAM)
        x2 = x[:j] + (1 - x[j],) + x[j + 1:]
        r2 = r[:k] + (1 - r[k],) + r[k + 1:]
        assert not verify_open(c, x2, r)
        assert not verify_open(c, x, r2)


def test_digest_bits_unbiased_for_both_plaintexts():
    # hiding smoke test: every digest position is within 3 sigma of 1/2
    n = 10000
    rng = Rng(4)
    rands = [rng.bits(2 * LAM) for _ in range(n)]
    sigma = 0.5 / np.sqrt(n)
    for x in ((0,), (1,)):
        cs = commit_many(LAM, [x] * n, rands)
        bits = np.unpackbits(np.frombuffer(b"".join(c.digest for c in cs), np.uint8)).reshape(n, 128)
        assert np.all(np.abs(bits.mean(axis=0) - 0.5) <= 3 * sigma)


def test_commit_many_matches_commit():
    rng = Rng(5)
    xs = [rng.bits(5) for _ in range(20)]
    rs = [rng.bits(2 * LAM) for _ in range(20)]
    assert commit_many(LAM, xs, rs) == [commit(LAM, x, r) for x, r in zip(xs, rs)]


def test_relation_circuit_honest_and_corrupt():
    c = relation_circuit(LAM, 4)
    x, r = (1, 1, 0, 1), Rng(6).bits(2 * LAM)
    d = digest_bits(commit(LAM, x, r))
    assert c(x + r + d) == (1,)
    assert c(x + r + (1 - d[0],) + d[1:]) == (0,)


def test_relation_circuit_agrees_with_verify_open():
    lam, n = 8, 6
    c = relation_circuit(lam, n)
    rng = Rng(7)
    rows, expect = [], []
    for i in range(1000):
        x, r = rng.bits(n), rng.bits(2 * lam)
        cm = commit(lam, x, r)
        if i % 2:
            which = rng.below(3)
            if which == 0:
                x = tuple(1 - v if j == 0 else v for j, v in enumerate(x))
            elif which == 1:
                r = tuple(1 - v if j == 3 else v for j, v in enumerate(r))
            else:
                cm = commit(lam, x, rng.bits(2 * lam))
        rows.append(x + r + digest_bits(cm))
        expect.append(int(verify_open(cm, x, r)))
    assert [o[0] for o in eval_batch(c, rows)] == expect
    assert sum(expect) == 500


def test_relation_circuit_budget():
    with pytest.raises(CommitError):
        relation_circuit(LAM, 5000)


def test_no_collisions_in_2_to_20_openings():
    # binding, tested negatively: 2^20 distinct (x, rand) pairs give 2^20 digests
    n = 1 << 20
    msgs = [i.to_bytes(5, "little") for i in range(n)]
    digests = toyhash_batch(msgs, 8 + 2 * LAM)
    assert len(set(digests)) == n
