"""Command-line entry points (``nbzk --help``)."""

import json
import os
import sys

import click

from ..coinflip import CoinflipConfig, output_of
from ..protocol.config import TIER_ENV, ProtocolConfig
from ..protocol.transcript import read_transcripts, write_transcripts
from ..rng import Rng
from ..simulator import estimate_abort_prob, loop_constants
from . import fixtures, instances, runs, stats


def _config(lam, fhe, sfe, tier) -> ProtocolConfig:
    return ProtocolConfig(lam=lam, fhe=fhe, sfe=sfe, tier=tier or os.environ.get(TIER_ENV, "micro"))


def _fail(msg):
    raise click.ClickException(msg)


def _instance(spec):
    try:
        return instances.load_instance(spec)
    except (OSError, ValueError, KeyError) as exc:
        _fail("cannot read instance %r: %s" % (spec, exc))


def _fixture_check(name, role):
    names = fixtures.fixture_names(role)
    if name not in names and not (role == "V" and name == "honest-native"):
        _fail("unknown %s fixture %r (known: %s)" % (role, name, ", ".join(names)))


def _echo_json(d):
    click.echo(json.dumps(d, sort_keys=True))


zk_options = [
    click.option("--lam", default=16, show_default=True, help="security parameter"),
    click.option("--fhe", type=click.Choice(["ideal", "lattice"]), default="ideal", show_default=True),
    click.option("--sfe", type=click.Choice(["ideal", "garbled"]), default="ideal", show_default=True),
    click.option("--tier", type=click.Choice(["micro", "small"]), default=None,
                 help="parameter tier (default: $%s or micro)" % TIER_ENV),
    click.option("--instance", "instance_spec", default="c4", show_default=True,
                 help="named instance (c4, k4, w5), random:N[:seed], or a JSON file"),
]


def with_options(opts):
    def deco(f):
        for o in reversed(opts):
            f = o(f)
        return f
    return deco


@click.group()
def main():
    """Non-black-box zero knowledge and coin flipping, at desk scale."""


@main.command("run-zk")
@with_options(zk_options)
@click.option("--fixture", default="honest-native", show_default=True, help="verifier fixture")
@click.option("--prover", default="honest-prover", show_default=True, help="prover fixture")
@click.option("--n", "n", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--transport", type=click.Choice(["direct", "queue", "tcp"]), default="queue", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON-lines transcript file")
def run_zk(lam, fhe, sfe, tier, instance_spec, fixture, prover, n, seed, transport, out):
    """Real sessions of a prover fixture against a verifier fixture."""
    _fixture_check(fixture, "V")
    _fixture_check(prover, "P")
    config, x = _config(lam, fhe, sfe, tier), _instance(instance_spec)
    if prover == "honest-prover" and x.witness is None:
        _fail("instance %r has no witness colouring for the honest prover" % instance_spec)
    ts = runs.real_zk(config, x, fixture, prover, n, seed, transport)
    if out:
        write_transcripts(out, ts)
    _echo_json({"command": "run-zk", "n": n, "statuses": stats.status_histogram(ts),
                "accept_rate": stats.accept_rate(ts)})


@main.command("simulate-zk")
@with_options(zk_options)
@click.option("--fixture", default="honest", show_default=True, help="verifier-model fixture")
@click.option("--n", "n", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True, help="oracle / simulator seed")
@click.option("--abort-target", default=64, show_default=True)
@click.option("--paper-constants", is_flag=True, help="use lambda^2 aborts and a 2^lambda cap")
@click.option("--compare/--no-compare", default=True, show_default=True,
              help="also run real sessions and report agreement")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate_zk(lam, fhe, sfe, tier, instance_spec, fixture, n, seed, abort_target, paper_constants, compare, out):
    """Simulated views against a verifier model, with an agreement report."""
    _fixture_check(fixture, "V")
    config, x = _config(lam, fhe, sfe, tier), _instance(instance_spec)
    sims = runs.simulated_zk(config, x, fixture, n, seed, abort_target, paper_constants=paper_constants)
    ts = [s.transcript for s in sims]
    if out:
        write_transcripts(out, ts)
    summ = runs.summarize_sims(sims)
    rep = {"command": "simulate-zk", "fixture": fixture, "n": n, "kinds": summ.kinds, "fail_rate": summ.fail_rate,
           "sim_abort_rate": summ.abort_rate, "statuses": stats.status_histogram(ts)}
    if compare:
        real = runs.real_zk(config, x, fixture, "honest-prover", n, seed, "direct")
        est = stats.tv_distance_estimate(real, ts)
        rep.update(real_abort_rate=stats.abort_rate(real), tv=est.estimate, tv_radius=est.radius)
    _echo_json(rep)


@main.command("run-coinflip")
@click.option("--lam", default=16, show_default=True)
@click.option("--k", default=8, show_default=True, help="number of coins")
@click.option("--a", "a_name", default="honest-a-native", show_default=True, help="party A fixture")
@click.option("--b", "b_name", default="honest-b", show_default=True, help="party B fixture")
@click.option("--n", "n", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--transport", type=click.Choice(["direct", "queue", "tcp"]), default="queue", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def run_coinflip_cmd(lam, k, a_name, b_name, n, seed, transport, out):
    """Real coin-flip sessions."""
    _fixture_check(a_name, "A")
    _fixture_check(b_name, "B")
    cc = CoinflipConfig(lam=lam, k=k)
    ts = runs.real_coinflip(cc, a_name, b_name, n, seed, transport)
    if out:
        write_transcripts(out, ts)
    outs = [output_of(t) for t in ts]
    rep = {"command": "run-coinflip", "n": n, "statuses": stats.status_histogram(ts),
           "bottom": sum(o is None for o in outs)}
    vals = [o for o in outs if o is not None]
    if k <= stats.MAX_UNIFORMITY_K and len(vals) >= stats.MIN_EXPECTED << k:
        chi = stats.uniformity_test(vals, k)
        rep.update(chi2=chi.statistic, p_value=chi.p_value)
    _echo_json(rep)


@main.command("simulate-coinflip")
@click.option("--lam", default=16, show_default=True)
@click.option("--k", default=8, show_default=True)
@click.option("--a", "a_name", default="honest-a", show_default=True, help="circuit adversary for party A")
@click.option("--target", default=None, help="forced output as a bit string (random per run if omitted)")
@click.option("--n", "n", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate_coinflip(lam, k, a_name, target, n, seed, out):
    """The forcing simulator against a circuit adversary for party A."""
    _fixture_check(a_name, "A")
    cc = CoinflipConfig(lam=lam, k=k)
    if target is not None and (len(target) != k or set(target) - {"0", "1"}):
        _fail("--target must be %d characters of 0/1" % k)
    targets = [tuple(int(c) for c in target)] * n if target else None
    try:
        sims = runs.simulated_coinflip(cc, a_name, n, seed, targets)
    except fixtures.FixtureError as exc:
        _fail(str(exc))
    ts = [s.transcript for s in sims]
    if out:
        write_transcripts(out, ts)
    forced = [s.output == s.target for s in sims if s.output is not None]
    _echo_json({"command": "simulate-coinflip", "n": n, "statuses": stats.status_histogram(ts),
                "non_bottom": len(forced), "forced": sum(forced), "failed": sum(s.failed for s in sims)})


@main.command("estimate-abort")
@with_options(zk_options)
@click.option("--fixture", default="abort50", show_default=True)
@click.option("--n", "n", default="auto", show_default=True, help="abort target, or 'auto'")
@click.option("--runs", "n_runs", default=1, show_default=True, help="independent estimator runs")
@click.option("--paper-constants", is_flag=True)
@click.option("--seed", default=0, show_default=True)
def estimate_abort(lam, fhe, sfe, tier, instance_spec, fixture, n, n_runs, paper_constants, seed):
    """Run the abort-probability estimator of the abort simulator."""
    _fixture_check(fixture, "V")
    config, x = _config(lam, fhe, sfe, tier), _instance(instance_spec)
    target, cap = loop_constants(config, 64, 1 << 20, paper_constants)
    if n != "auto":
        try:
            target = int(n)
        except ValueError:
            _fail("--n must be an integer or 'auto'")
    vm = fixtures.get_fixture(fixture).verifier_model(config, x)
    base = Rng(seed).child("cli-estimate", fixture)
    res = []
    for i in range(n_runs):
        e = estimate_abort_prob(vm, base.child(i), target, cap)
        res.append(None if e is None else {"a_prime": e.a_prime, "N": e.N})
    _echo_json({"command": "estimate-abort", "fixture": fixture, "abort_target": target, "iteration_cap": cap,
                "runs": res})


@main.command("compare")
@click.argument("file_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--bound", default=0.05, show_default=True)
def compare(file_a, file_b, bound):
    """Feature-vector TV distance between two transcript files."""
    try:
        a, b = read_transcripts(file_a), read_transcripts(file_b)
        est = stats.tv_distance_estimate(a, b)
    except (ValueError, KeyError, stats.StatsError) as exc:
        _fail(str(exc))
    _echo_json({"command": "compare", "n_a": est.n_a, "n_b": est.n_b, "tv": est.estimate, "radius": est.radius,
                "support": est.support, "within_bound": est.within(bound), "bound": bound})


@main.command("report")
@click.option("--out", "out_dir", default="report", show_default=True, type=click.Path(file_okay=False))
@click.option("--n", "n", default=200, show_default=True, help="sessions per fixture")
@click.option("--estimator-runs", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--k", default=8, show_default=True, help="coins per flip in the uniformity panel")
@click.option("--coinflip-n", default=None, type=int, help="coin flips (default: 5 per output value)")
def report(out_dir, n, estimator_runs, seed, k, coinflip_n):
    """Run a compact agreement suite and render figures (PNG) plus report.json."""
    from .report import build_report
    if not 1 <= k <= stats.MAX_UNIFORMITY_K:
        _fail("--k must be in 1..%d" % stats.MAX_UNIFORMITY_K)
    flips = coinflip_n if coinflip_n is not None else stats.MIN_EXPECTED << k
    if flips < stats.MIN_EXPECTED << k:
        _fail("--coinflip-n must be at least %d for k=%d" % (stats.MIN_EXPECTED << k, k))
    rep = build_report(out_dir, n=n, seed=seed, estimator_runs=estimator_runs, coinflip_n=flips, k=k,
                       progress=lambda m: click.echo(m, err=True))
    for r in rep.rows:
        click.echo("%-12s real-abort %.3f  sim-abort %.3f  tv %.3f  fail %.3f"
                   % (r.fixture, r.real_abort, r.sim_abort, r.tv, r.fail_rate))
    click.echo("coin-flip uniformity p = %.3f" % rep.coinflip_p)
    for f in rep.figures:
        click.echo("wrote %s" % f)


@main.command("selftest")
@click.option("--n", "n", default=20, show_default=True, help="sessions per check")
def selftest(n):
    """Quick property suite; exits non-zero on any failure."""
    from .selftest import run_selftest
    ok = run_selftest(n, echo=click.echo)
    sys.exit(0 if ok else 1)


@main.command("fixtures")
def list_fixtures():
    """List registered adversary fixtures."""
    for role in ("P", "V", "A", "B"):
        for name in fixtures.fixture_names(role):
            click.echo("%s  %-16s %s" % (role, name, fixtures.get_fixture(name).doc))


if __name__ == "__main__":
    main()
