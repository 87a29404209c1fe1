import math
import random

import numpy as np
import pytest

from nbzk.harness import stats
from nbzk.protocol.transcript import ABORT, ACCEPT, REJECT, Transcript


def tr(status, protocol="zk", abort_step=None, output=None):
    t = Transcript(protocol, {}, "h", 0, meta={"output": output})
    return t.finish(status, abort_step, "V" if abort_step else None)


def coin_ensemble(rnd, n):
    return [tr(ACCEPT if rnd.random() < 0.5 else REJECT) for _ in range(n)]


def test_identical_ensembles():
    e = [tr(ACCEPT)] * 10 + [tr(ABORT, abort_step="3b")] * 5
    est = stats.tv_distance_estimate(e, list(e))
    assert est.estimate == 0 and est.support == 2 and est.within(0.0)


def test_fair_coin_ensembles_close():
    rnd = random.Random(1)
    est = stats.tv_distance_estimate(coin_ensemble(rnd, 10000), coin_ensemble(rnd, 10000))
    assert est.estimate < 0.03
    assert est.radius > est.estimate


def test_disjoint_ensembles():
    est = stats.tv_distance_estimate([tr(ACCEPT)] * 50, [tr(REJECT)] * 70)
    assert est.estimate == 1.0


def test_tv_matches_direct_computation():
    rnd = random.Random(2)
    a = [tr(rnd.choice([ACCEPT, REJECT, ABORT]), abort_step=None) for _ in range(300)]
    b = [tr(rnd.choice([ACCEPT, ACCEPT, REJECT])) for _ in range(200)]
    pa = np.array([sum(t.status == s for t in a) / 300 for s in (ACCEPT, REJECT, ABORT)])
    pb = np.array([sum(t.status == s for t in b) / 200 for s in (ACCEPT, REJECT, ABORT)])
    assert stats.tv_distance_estimate(a, b).estimate == pytest.approx(0.5 * np.abs(pa - pb).sum())


def test_tv_errors():
    with pytest.raises(stats.StatsError):
        stats.tv_distance_estimate([tr(ACCEPT)], [tr(ACCEPT, protocol="coinflip")])
    with pytest.raises(stats.StatsError):
        stats.tv_distance_estimate([], [tr(ACCEPT)])
    with pytest.raises(stats.StatsError):
        stats.features(tr(ACCEPT, protocol="other"))


def test_l1_radius_formula_and_coverage():
    n, delta = 400, 0.05
    assert stats.l1_radius(n, 4, delta) == pytest.approx(math.sqrt(2 * (4 * math.log(2) + math.log(20)) / n))
    assert stats.l1_radius(0, 4, delta) == math.inf
    # the bound must hold empirically for a 4-cell multinomial
    rng = np.random.default_rng(3)
    p = np.array([0.1, 0.2, 0.3, 0.4])
    r = stats.l1_radius(n, 4, delta)
    l1 = np.abs(rng.multinomial(n, p, size=2000) / n - p).sum(axis=1)
    assert (l1 >= r).mean() <= delta


def test_coinflip_features():
    f = stats.coinflip_features(tr(ACCEPT, "coinflip", output="1011"))
    assert f[-1] == "10" and f[1] == ACCEPT
    assert stats.coinflip_features(tr(ABORT, "coinflip", abort_step="3", output=None))[-1] is None


def test_uniformity_argument_checks():
    with pytest.raises(stats.StatsError):
        stats.uniformity_test([0] * 100000, 13)
    with pytest.raises(stats.StatsError):
        stats.uniformity_test([0] * 10, 4)
    with pytest.raises(stats.StatsError):
        stats.uniformity_test([16] * 100, 4)


def test_uniformity_detects_constant_samples():
    assert stats.uniformity_test([3] * 2000, 4).p_value < 1e-10


def test_uniformity_passes_uniform_samples():
    rng = np.random.default_rng(4)
    passes = sum(stats.uniformity_test(rng.integers(0, 256, 5000).tolist(), 8).p_value > 0.01 for _ in range(100))
    assert passes >= 95
    bits = [tuple(int(b) for b in rng.integers(0, 2, 3)) for _ in range(400)]
    assert stats.uniformity_test(bits, 3).n == 400


def test_rates_and_bounds():
    e = [tr(ACCEPT)] * 3 + [tr(ABORT, abort_step="2a")]
    assert stats.accept_rate(e) == 0.75 and stats.abort_rate(e) == 0.25
    assert stats.status_histogram(e) == {"abort@2a/V": 1, "accept": 3}
    q = (5 / 6) ** 18
    assert stats.soundness_bound(5 / 6, 18, 2000) == pytest.approx(q + 3 * math.sqrt(q * (1 - q) / 2000))
    assert stats.soundness_bound(1.0, 5, 10) == 1.0
    with pytest.raises(stats.StatsError):
        stats.accept_rate([])
