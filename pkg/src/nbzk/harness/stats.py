"""Statistics over transcript ensembles: feature TV distance, chi-squared
uniformity, abort rates and binomial bounds."""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

from scipy import stats as sps

from ..proofs import SigmaChallenge
from ..protocol.transcript import ABORT, ACCEPT, Transcript

MAX_UNIFORMITY_K = 12
MIN_EXPECTED = 5


class StatsError(ValueError):
    pass


# -- feature vectors ------------------------------------------------------------

def _first_edge(t: Transcript) -> Optional[int]:
    raw = t.payload("3b")
    if raw is None or len(raw) < 4:
        return None
    reps = len(raw) // 4
    return SigmaChallenge.from_bytes(raw, reps).edges[0]


def zk_features(t: Transcript) -> Tuple:
    """(protocol, status, abort step, abort role, accept bit, beta bucket).

    The beta bucket is the first repetition's challenged edge; the full beta
    has far too many values for a histogram at desk-scale sample sizes.
    """
    return (t.protocol, t.status, t.abort_step, t.abort_role, int(t.status == ACCEPT), _first_edge(t))


def coinflip_features(t: Transcript) -> Tuple:
    """(protocol, status, abort step, abort role, accept bit, low two output bits)."""
    out = (t.meta or {}).get("output")
    bucket = out[:2] if (out and t.status == ACCEPT) else None
    return (t.protocol, t.status, t.abort_step, t.abort_role, int(t.status == ACCEPT), bucket)


FEATURES: Dict[str, Callable[[Transcript], Tuple]] = {"zk": zk_features, "coinflip": coinflip_features}


def features(t: Transcript) -> Tuple:
    try:
        return FEATURES[t.protocol](t)
    except KeyError:
        raise StatsError("no feature map for protocol %r" % t.protocol) from None


# -- TV distance -----------------------------------------------------------------

def l1_radius(n: int, support: int, delta: float) -> float:
    """Radius r with P(||p_hat - p||_1 >= r) <= delta for a multinomial on ``support`` cells.

    Weissman et al.: P(||p_hat - p||_1 >= e) <= (2^support - 2) exp(-n e^2 / 2).
    """
    if n <= 0:
        return float("inf")
    log_cells = support * math.log(2) if support > 1 else 0.0
    return math.sqrt(2 * (log_cells + math.log(1 / delta)) / n)


@dataclass
class TVEstimate:
    estimate: float
    radius: float
    n_a: int
    n_b: int
    support: int
    hist_a: Dict
    hist_b: Dict

    def within(self, bound: float) -> bool:
        return self.estimate <= bound


def tv_from_counts(ca: Counter, cb: Counter) -> float:
    na, nb = sum(ca.values()), sum(cb.values())
    keys = set(ca) | set(cb)
    return 0.5 * sum(abs(ca.get(k, 0) / na - cb.get(k, 0) / nb) for k in keys)


def tv_distance_estimate(ensemble_a: Sequence[Transcript], ensemble_b: Sequence[Transcript],
                         feature: Callable = None, delta: float = 0.05) -> TVEstimate:
    """Empirical TV between the feature histograms, with a (1 - delta) radius.

    The radius splits delta between the two samples and adds the two L1
    radii; TV is half the L1 distance.
    """
    if not ensemble_a or not ensemble_b:
        raise StatsError("empty ensemble")
    tags = {t.protocol for t in ensemble_a} | {t.protocol for t in ensemble_b}
    if len(tags) != 1:
        raise StatsError("mismatched protocol tags: %s" % sorted(tags))
    f = feature or features
    ca, cb = Counter(map(f, ensemble_a)), Counter(map(f, ensemble_b))
    support = len(set(ca) | set(cb))
    radius = 0.5 * (l1_radius(len(ensemble_a), support, delta / 2) + l1_radius(len(ensemble_b), support, delta / 2))
    return TVEstimate(tv_from_counts(ca, cb), radius, len(ensemble_a), len(ensemble_b), support,
                      dict(ca), dict(cb))


# -- uniformity --------------------------------------------------------------------

@dataclass
class ChiSquare:
    statistic: float
    p_value: float
    buckets: int
    n: int


def uniformity_test(samples: Iterable, k: int) -> ChiSquare:
    """Chi-squared test of k-bit samples (ints or bit tuples, LSB first) against uniform."""
    if not 1 <= k <= MAX_UNIFORMITY_K:
        raise StatsError("k must be in 1..%d, got %d" % (MAX_UNIFORMITY_K, k))
    buckets = 1 << k
    counts = [0] * buckets
    n = 0
    for s in samples:
        v = s if isinstance(s, int) else sum(int(b) << i for i, b in enumerate(s))
        if not 0 <= v < buckets:
            raise StatsError("sample %r does not fit in %d bits" % (s, k))
        counts[v] += 1
        n += 1
    if n < MIN_EXPECTED * buckets:
        raise StatsError("need at least %d samples for %d buckets, got %d" % (MIN_EXPECTED * buckets, buckets, n))
    res = sps.chisquare(counts)
    return ChiSquare(float(res.statistic), float(res.pvalue), buckets, n)


# -- rates and bounds ----------------------------------------------------------------

def abort_rate(ensemble: Sequence[Transcript]) -> float:
    if not ensemble:
        raise StatsError("empty ensemble")
    return sum(t.status == ABORT for t in ensemble) / len(ensemble)


def accept_rate(ensemble: Sequence[Transcript]) -> float:
    if not ensemble:
        raise StatsError("empty ensemble")
    return sum(t.status == ACCEPT for t in ensemble) / len(ensemble)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def soundness_bound(per_rep: float, reps: int, n: int) -> float:
    """Acceptance-rate ceiling for a cheater: per_rep^reps plus three binomial sigmas."""
    q = per_rep ** reps
    return q + 3 * binomial_sigma(q, n)


def status_histogram(ensemble: Sequence[Transcript]) -> Dict[str, int]:
    c = Counter()
    for t in ensemble:
        c[t.status if t.status != ABORT else "abort@%s/%s" % (t.abort_step, t.abort_role)] += 1
    return dict(sorted(c.items()))


__all__ = ["zk_features", "coinflip_features", "features", "tv_distance_estimate", "TVEstimate", "l1_radius",
           "uniformity_test", "ChiSquare", "abort_rate", "accept_rate", "soundness_bound", "binomial_sigma",
           "status_histogram", "StatsError", "tv_from_counts"]
