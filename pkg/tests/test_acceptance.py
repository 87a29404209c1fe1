"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run alone with ``python3 -m pytest tests/test_acceptance.py -s`` (about twenty
minutes on one core); the lines are also repeated in the terminal summary.
"""

import os
import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from nbzk import coinflip as cf
from nbzk.harness import fixtures, instances, runs, stats
from nbzk.proofs import SigmaChallenge, best_cheat_fraction
from nbzk.protocol.config import SCHEDULE, ProtocolConfig
from nbzk.protocol.transcript import ACCEPT
from nbzk.rng import Rng
from nbzk.simulator import _sim_run, estimate_abort_prob

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = ProtocolConfig(lam=16)


def report(n, ok, detail):
    line = "criterion %d %s  %s" % (n, "PASS" if ok else "FAIL", detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_completeness(c4):
    t0 = time.perf_counter()
    ts = runs.real_zk(CONFIG, c4, n=200, seed=101, transport="queue")
    dt = time.perf_counter() - t0
    acc = sum(t.status == ACCEPT for t in ts)
    report(1, acc == 200 and dt < 60, "%d/200 honest sessions accepted in %.1fs" % (acc, dt))


def test_criterion_02_constant_message_count():
    counts = set()
    for n in range(10, 101, 10):
        x = instances.load_instance("random:%d:%d" % (n, n))
        for t in runs.real_zk(CONFIG, x, n=2, seed=102):
            counts.add(len(t.frames))
            assert t.status == ACCEPT
    report(2, counts == {len(SCHEDULE)},
           "message counts %s over random:10..100 (%d messages per session)" % (sorted(counts), len(SCHEDULE)))


def test_criterion_03_soundness():
    k4 = instances.k4()
    n = 2000
    ts = runs.real_zk(CONFIG, k4, prover="witnessless", n=n, seed=103)
    rate = stats.accept_rate(ts)
    bound = stats.soundness_bound(best_cheat_fraction(k4), CONFIG.sigma_reps, n)
    report(3, rate <= bound, "witnessless prover on K4: accept rate %.4f <= bound %.4f" % (rate, bound))


def _extraction_ok(vm, rng):
    """A complete run whose extracted beta and post-2(c) state match a clear run of the model."""
    r = _sim_run(vm, rng, truncated=False)
    if r.kind != "complete" or r.status[0] != ACCEPT:
        return False
    ex = r.extraction
    st, _, _ = vm.run_step("2a", vm.oracle(rng.child("advice")), r.frames[0].payload)
    clear = vm.run_step("2c", st, ex.ct_p)
    beta = SigmaChallenge.from_bytes(r.frames[5].payload, vm.config.sigma_reps).edges
    return clear == (ex.state, ex.abort, ex.evct) and tuple(r.beta_prime) == beta and ex.ct_p == r.frames[2].payload


def test_criterion_04_extraction(c4):
    t0 = time.perf_counter()
    good = {}
    for name in ("honest", "biased-beta"):
        vm = fixtures.get_fixture(name).verifier_model(CONFIG, c4)
        good[name] = sum(_extraction_ok(vm, Rng(104).child(name, i)) for i in range(500))
    micro = ProtocolConfig(lam=8, fhe="lattice", fhe_logq=64, fhe_n=2)
    mvm = fixtures.get_fixture("honest").verifier_model(micro, c4)
    gates = max(len(c.gates) for c in mvm.steps.values())
    good_l = sum(_extraction_ok(mvm, Rng(204).child(i)) for i in range(20))
    dt = time.perf_counter() - t0
    report(4, all(v == 500 for v in good.values()) and good_l == 20 and gates <= 300 and dt < 600,
           "extraction matches clear runs: honest %d/500, biased-beta %d/500 (ideal); %d/20 lattice "
           "(verifier %d gates) in %.0fs" % (good["honest"], good["biased-beta"], good_l, gates, dt))


def test_criterion_05_stuck(c4):
    vm = fixtures.get_fixture("c-bottom").verifier_model(CONFIG, c4)
    kinds = [_sim_run(vm, Rng(105).child(i), truncated=False).kind for i in range(500)]
    report(5, kinds.count("stuck") == 500, "c-bottom: %d/500 extraction runs stuck" % kinds.count("stuck"))


def test_criterion_06_abort_estimates(c4):
    details, ok = [], True
    for name, p in (("abort10", 0.1), ("abort50", 0.5), ("abort90", 0.9)):
        vm = fixtures.get_fixture(name).verifier_model(CONFIG, c4)
        inside = 0
        for i in range(100):
            e = estimate_abort_prob(vm, Rng(106).child(name, i), 64)
            inside += e is not None and p / 2 <= e.a_prime <= 1.5 * p
        ok &= inside >= 99
        details.append("%s %d/100" % (name, inside))
    report(6, ok, "estimates within [p/2, 3p/2]: " + ", ".join(details))


CRITERION7_FIXTURES = ("honest", "biased-beta", "abort-2a", "abort-3b", "abort50")


def test_criterion_07_indistinguishability(c4):
    n, details, ok = 2000, [], True
    for name in CRITERION7_FIXTURES:
        real = runs.real_zk(CONFIG, c4, name, n=n, seed=107)
        sims = runs.simulated_zk(CONFIG, c4, name, n=n, seed=207, abort_target=8)
        est = stats.tv_distance_estimate(real, [s.transcript for s in sims])
        fail = runs.summarize_sims(sims).fail_rate
        ok &= est.estimate <= 0.05 and fail <= 0.01
        details.append("%s tv=%.3f fail=%.3f" % (name, est.estimate, fail))
    report(7, ok, "N=2000: " + "; ".join(details))


def test_criterion_08_coinflip_uniformity():
    cc = cf.CoinflipConfig(k=8)
    ts = runs.real_coinflip(cc, "honest-a-native", "honest-b", n=5000, seed=108)
    outs = [cf.output_of(t) for t in ts]
    chi = stats.uniformity_test([o for o in outs if o is not None], 8)
    report(8, chi.p_value > 0.01 and None not in outs,
           "5000 honest flips, k=8: chi2=%.1f p=%.3f" % (chi.statistic, chi.p_value))


def test_criterion_09_forcing():
    cc = cf.CoinflipConfig()
    details, ok = [], True
    for name in fixtures.fixture_names("A"):
        if name == "honest-a-native":
            continue
        sims = runs.simulated_coinflip(cc, name, n=100, seed=109)
        non_bottom = [s for s in sims if s.output is not None]
        forced = sum(s.output == s.target for s in non_bottom)
        failed = sum(s.failed for s in sims)
        ok &= forced == len(non_bottom) and failed == 0
        if name == "honest-a":
            ok &= len(non_bottom) == 100
        details.append("%s %d/%d" % (name, forced, len(non_bottom)))
    report(9, ok, "forced/non-bottom: " + ", ".join(details))


PRIMITIVE_SUITES = ("test_bits_rng_hash.py", "test_circuit.py", "test_commit.py", "test_npstmt.py", "test_proofs.py",
                    "test_cco.py", "test_sfe.py", "test_fhe.py")


def test_criterion_10_primitive_suites():
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider"] + [os.path.join(HERE, s)
                                                                              for s in PRIMITIVE_SUITES]
    res = subprocess.run(cmd, capture_output=True, text=True, cwd=os.path.dirname(HERE))
    last = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr[-200:]
    report(10, res.returncode == 0, "primitive suites: %s" % last)


def test_criterion_11_reproducible_files(tmp_path):
    commands = {"zk": ["run-zk", "--n", "5", "--seed", "111", "--transport", "tcp"],
                "sim": ["simulate-zk", "--fixture", "abort50", "--n", "5", "--seed", "111", "--abort-target", "8",
                        "--no-compare"],
                "cf": ["run-coinflip", "--n", "5", "--seed", "111"]}
    blobs = {}
    for tag in ("a", "b"):
        for name, args in commands.items():
            out = tmp_path / ("%s-%s.jsonl" % (name, tag))
            subprocess.run([sys.executable, "-m", "nbzk.harness.cli"] + args + ["--out", str(out)], check=True,
                           capture_output=True)
            blobs[name, tag] = out.read_bytes()
    same = all(blobs[n, "a"] == blobs[n, "b"] and blobs[n, "a"] for n in commands)
    report(11, same, "run-zk, simulate-zk and run-coinflip files byte-identical across two CLI invocations")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
