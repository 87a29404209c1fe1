"""A fast property suite behind ``nbzk selftest``."""

from ..coinflip import CoinflipConfig, cf_simulate, run_coinflip
from ..proofs import best_cheat_fraction
from ..protocol.config import ProtocolConfig
from ..protocol.transcript import ACCEPT
from ..rng import Rng
from ..simulator import LinearState, _sim_run
from . import fixtures, instances, runs, stats


def _checks(n):
    config, x = ProtocolConfig(lam=16), instances.cycle4()

    def completeness():
        ts = runs.real_zk(config, x, n=n, seed=1)
        return all(t.status == ACCEPT for t in ts), "%d/%d accepted" % (sum(t.accepted for t in ts), n)

    def soundness():
        g = instances.k4()
        ts = runs.real_zk(config, g, prover="witnessless", n=n, seed=1)
        rate = stats.accept_rate(ts)
        bound = stats.soundness_bound(best_cheat_fraction(g), config.sigma_reps, n)
        return rate <= bound, "accept rate %.3f, bound %.3f" % (rate, bound)

    def extraction():
        vm = fixtures.get_fixture("honest").verifier_model(config, x)
        bad = 0
        for i in range(n):
            r = _sim_run(vm, Rng(2).child(i), truncated=False)
            ok = r.kind == "complete" and r.status[0] == ACCEPT
            bad += not ok
        return bad == 0, "%d/%d extracted runs accepted" % (n - bad, n)

    def stuck():
        vm = fixtures.get_fixture("c-bottom").verifier_model(config, x)
        kinds = [_sim_run(vm, Rng(3).child(i), truncated=True).kind for i in range(min(n, 10))]
        return all(k == "stuck" for k in kinds), "%d/%d stuck" % (kinds.count("stuck"), len(kinds))

    def coinflip():
        cc = CoinflipConfig()
        outs = [run_coinflip(cc, seed=4, session=i)[0] for i in range(n)]
        model = fixtures.coinflip_model("honest-a", cc)
        forced = [cf_simulate(cc, model, seed=5, session=i) for i in range(min(n, 10))]
        ok = all(o is not None for o in outs) and all(s.output == s.target for s in forced)
        return ok, "%d honest outputs, %d forced" % (len(outs), len(forced))

    def reproducible():
        a = [t.to_jsonl() for t in runs.real_zk(config, x, n=2, seed=9)]
        b = [t.to_jsonl() for t in runs.real_zk(config, x, n=2, seed=9)]
        return a == b, "byte-identical" if a == b else "transcripts differ"

    def linear_state():
        s = LinearState((0, 1))
        s.take()
        try:
            s.take()
        except RuntimeError:
            return True, "second read refused"
        return False, "state read twice"

    return [("completeness", completeness), ("soundness", soundness), ("extraction", extraction),
            ("stuck-on-deviation", stuck), ("coin-flip", coinflip), ("reproducibility", reproducible),
            ("no-cloning", linear_state)]


def run_selftest(n: int = 20, echo=print) -> bool:
    ok_all = True
    for name, fn in _checks(n):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, "%s: %s" % (type(exc).__name__, exc)
        ok_all &= ok
        echo("%s %-20s %s" % ("PASS" if ok else "FAIL", name, detail))
    return ok_all
