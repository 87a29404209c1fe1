"""Agreement report: runs a compact real-vs-simulated suite and renders figures."""

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..coinflip import CoinflipConfig, output_of  # noqa: E402
from ..protocol.config import ProtocolConfig  # noqa: E402
from ..rng import Rng  # noqa: E402
from ..simulator import estimate_abort_prob  # noqa: E402
from . import fixtures, instances, runs, stats  # noqa: E402

DEFAULT_FIXTURES = ("honest", "biased-beta", "abort-2a", "abort-3b", "abort-5.2", "abort10", "abort50", "abort90")


@dataclass
class FixtureRow:
    fixture: str
    n: int
    real_abort: float
    sim_abort: float
    tv: float
    radius: float
    fail_rate: float


@dataclass
class Report:
    lam: int
    n: int
    seed: int
    rows: List[FixtureRow] = field(default_factory=list)
    estimates: Dict[str, List[float]] = field(default_factory=dict)
    coinflip_p: Optional[float] = None
    coinflip_counts: List[int] = field(default_factory=list)
    figures: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def zk_agreement(config, x, fixture: str, n: int, seed: int, abort_target: int) -> FixtureRow:
    real = runs.real_zk(config, x, fixture, "honest-prover", n, seed)
    sims = runs.simulated_zk(config, x, fixture, n, seed + 1, abort_target=abort_target)
    est = stats.tv_distance_estimate(real, [s.transcript for s in sims])
    summ = runs.summarize_sims(sims)
    return FixtureRow(fixture, n, stats.abort_rate(real), stats.abort_rate([s.transcript for s in sims]),
                      est.estimate, est.radius, summ.fail_rate)


def abort_estimates(config, x, fixture: str, runs_: int, seed: int, abort_target: int = 64) -> List[float]:
    vm = fixtures.get_fixture(fixture).verifier_model(config, x)
    base = Rng(seed).child("report-estimates", fixture)
    out = []
    for i in range(runs_):
        e = estimate_abort_prob(vm, base.child(i), abort_target)
        out.append(e.a_prime if e is not None else float("nan"))
    return out


def fig_agreement(rows: List[FixtureRow], path: str) -> str:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    names = [r.fixture for r in rows]
    pos = range(len(rows))
    ax1.bar([p - 0.2 for p in pos], [r.real_abort for r in rows], 0.4, label="real")
    ax1.bar([p + 0.2 for p in pos], [r.sim_abort for r in rows], 0.4, label="simulated")
    ax1.set_xticks(list(pos))
    ax1.set_xticklabels(names, rotation=45, ha="right")
    ax1.set_ylabel("abort rate")
    ax1.legend()
    ax2.errorbar(list(pos), [r.tv for r in rows], yerr=[r.radius for r in rows], fmt="o", capsize=3)
    ax2.axhline(0.05, color="red", linestyle="--", label="0.05")
    ax2.set_xticks(list(pos))
    ax2.set_xticklabels(names, rotation=45, ha="right")
    ax2.set_ylabel("feature TV estimate")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_estimates(estimates: Dict[str, List[float]], probs: Dict[str, float], path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, vals in estimates.items():
        ax.hist(vals, bins=20, alpha=0.6, label=name)
        p = probs[name]
        ax.axvspan(p / 2, 3 * p / 2, alpha=0.08)
        ax.axvline(p, linestyle=":", color="black")
    ax.set_xlabel("a' (abort-probability estimate)")
    ax.set_ylabel("estimator runs")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_uniformity(counts: List[int], p_value: float, path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(range(len(counts)), counts, width=1.0)
    ax.axhline(sum(counts) / len(counts), color="red", linestyle="--")
    ax.set_xlabel("coin-flip output")
    ax.set_ylabel("count")
    ax.set_title("honest coin flips, chi-squared p = %.3f" % p_value)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def build_report(out_dir: str, lam: int = 16, n: int = 200, seed: int = 0, fixture_names=DEFAULT_FIXTURES,
                 estimator_runs: int = 20, abort_target: int = 8, coinflip_n: int = 1280, k: int = 8,
                 progress=None) -> Report:
    """Run the suite, write figures and report.json into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    say = progress or (lambda msg: None)
    config, x = ProtocolConfig(lam=lam), instances.cycle4()
    rep = Report(lam, n, seed)
    for name in fixture_names:
        say("agreement: %s" % name)
        rep.rows.append(zk_agreement(config, x, name, n, seed, abort_target))
    rep.figures.append(fig_agreement(rep.rows, os.path.join(out_dir, "agreement.png")))

    probs = {"abort10": 0.1, "abort50": 0.5, "abort90": 0.9}
    for name in probs:
        say("estimator: %s" % name)
        rep.estimates[name] = abort_estimates(config, x, name, estimator_runs, seed)
    rep.figures.append(fig_estimates(rep.estimates, probs, os.path.join(out_dir, "estimates.png")))

    say("coin flips")
    cc = CoinflipConfig(lam=lam, k=k)
    outs = [output_of(t) for t in runs.real_coinflip(cc, "honest-a-native", "honest-b", coinflip_n, seed)]
    vals = [sum(b << i for i, b in enumerate(o)) for o in outs if o is not None]
    chi = stats.uniformity_test(vals, k)
    counts = [0] * (1 << k)
    for v in vals:
        counts[v] += 1
    rep.coinflip_p, rep.coinflip_counts = chi.p_value, counts
    rep.figures.append(fig_uniformity(counts, chi.p_value, os.path.join(out_dir, "coinflip.png")))
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(rep.to_json())
    return rep
