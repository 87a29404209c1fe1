"""Batch drivers: real and simulated ensembles for both protocols."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .. import coinflip as cf
from ..npstmt import ColoringInstance
from ..protocol.config import ProtocolConfig
from ..protocol.session import run_session
from ..protocol.transcript import Transcript
from ..simulator import SimOutput, simulate
from . import fixtures


def real_zk(config: ProtocolConfig, x: ColoringInstance, verifier: str = "honest-native",
            prover: str = "honest-prover", n: int = 100, seed=0, transport: str = "direct") -> List[Transcript]:
    """``n`` real sessions of a prover fixture against a verifier fixture."""
    vf = fixtures.verifier_factory(verifier, config, x)
    pf = fixtures.prover_factory(prover, config, x)
    return [run_session(config, x, pf, vf, transport, seed=seed, session=i) for i in range(n)]


def simulated_zk(config: ProtocolConfig, x: ColoringInstance, verifier: str, n: int = 100, seed=0,
                 abort_target: int = 64, iteration_cap: int = 1 << 20,
                 paper_constants: bool = False) -> List[SimOutput]:
    vm = fixtures.get_fixture(verifier).verifier_model(config, x)
    return [simulate(vm, seed, i, abort_target, iteration_cap, paper_constants) for i in range(n)]


def real_coinflip(config: cf.CoinflipConfig, adversary: str = "honest-a", b: str = "honest-b", n: int = 100,
                  seed=0, transport: str = "direct") -> List[Transcript]:
    a_impl, b_impl = fixtures.coinflip_party(adversary, config), fixtures.coinflip_party(b, config)
    return [cf.run_coinflip(config, a_impl, b_impl, transport, seed, i)[1] for i in range(n)]


def simulated_coinflip(config: cf.CoinflipConfig, adversary: str = "honest-a", n: int = 100, seed=0,
                       targets=None) -> List[cf.CfSimOutput]:
    model = fixtures.coinflip_model(adversary, config)
    out = []
    for i in range(n):
        target = targets[i] if targets is not None else None
        out.append(cf.cf_simulate(config, model, target, seed, i))
    return out


@dataclass
class SimSummary:
    n: int
    kinds: Dict[str, int] = field(default_factory=dict)
    fail_rate: float = 0.0
    abort_rate: float = 0.0
    mean_iterations: Optional[float] = None


def summarize_sims(outs: List[SimOutput]) -> SimSummary:
    kinds: Dict[str, int] = {}
    iters = []
    for o in outs:
        kinds[o.kind] = kinds.get(o.kind, 0) + 1
        if o.estimate is not None:
            iters.append(o.estimate.N + o.transcript.meta.get("iterations", 0))
    n = len(outs)
    return SimSummary(n, kinds, kinds.get("fail", 0) / n, kinds.get("abort", 0) / n,
                      sum(iters) / len(iters) if iters else None)
