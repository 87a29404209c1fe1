"""Protocol configuration, message schedule and the expected-lengths table."""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Optional

from .. import sfe as sfe_mod
from ..cco import FnDescriptor, obf_size
from ..commit import DIGEST_BYTES
from ..fhe import Params, ct_len as fhe_ct_len
from ..fhe import ideal as fhe_ideal
from ..proofs import alpha_len, beta_len, gamma_len

PROVER, VERIFIER = "P", "V"
ROLE_BYTE = {PROVER: 0x50, VERIFIER: 0x56}
ROLE_OF_BYTE = {v: k for k, v in ROLE_BYTE.items()}

# (step, sender); the verdict frame "7" closes every completed session
SCHEDULE = (
    ("1", PROVER),
    ("2a", VERIFIER),
    ("2b", PROVER),
    ("2c", VERIFIER),
    ("3a", PROVER),
    ("3b", VERIFIER),
    ("4.1", VERIFIER),
    ("4.2", PROVER),
    ("4.3", VERIFIER),
    ("5.1", PROVER),
    ("5.2", VERIFIER),
    ("5.3", PROVER),
    ("6", PROVER),
    ("7", VERIFIER),
)
STEP_BYTE = {"1": 0x10, "2a": 0x21, "2b": 0x22, "2c": 0x23, "3a": 0x31, "3b": 0x32,
             "4.1": 0x41, "4.2": 0x42, "4.3": 0x43, "5.1": 0x51, "5.2": 0x52, "5.3": 0x53,
             "6": 0x60, "7": 0x70}
STEP_OF_BYTE = {v: k for k, v in STEP_BYTE.items()}
STEP_INDEX = {s: i for i, (s, _) in enumerate(SCHEDULE)}
VERIFIER_STEPS = tuple(s for s, r in SCHEDULE if r == VERIFIER and s != "7")

TIER_ENV = "NBZK_TIER"


@dataclass(frozen=True)
class ProtocolConfig:
    lam: int = 16
    sigma_reps: Optional[int] = None
    wi_reps: Optional[int] = None
    fhe: str = "ideal"
    fhe_logq: int = 16
    fhe_n: int = 4
    sfe: str = "ideal"
    sfe_budget: int = sfe_mod.DEFAULT_BUDGET
    tier: str = field(default_factory=lambda: os.environ.get(TIER_ENV, "micro"))
    wi_mode: str = "auto"
    wi_gate_budget: int = 4000

    def __post_init__(self):
        k = math.ceil(self.lam * math.log(3))
        if self.sigma_reps is None:
            object.__setattr__(self, "sigma_reps", k)
        if self.wi_reps is None:
            object.__setattr__(self, "wi_reps", k)
        if self.fhe not in ("ideal", "lattice") or self.sfe not in ("ideal", "garbled"):
            raise ValueError("unknown backend")
        if self.tier not in ("micro", "small"):
            raise ValueError("unknown tier %r" % self.tier)

    @property
    def fhe_params(self) -> Params:
        return Params(self.fhe_logq, self.fhe_n)

    @property
    def sfe_tier(self) -> str:
        return self.tier

    def replace(self, **kw) -> "ProtocolConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()

    # -- derived sizes --------------------------------------------------------

    def t_len(self) -> int:
        return self.lam

    def target_len(self) -> int:
        """Bits of the CC target u = flag || s."""
        return 1 + self.lam

    def fhe_sk_bits(self) -> int:
        if self.fhe == "ideal":
            return fhe_ideal.sk_bits_len(self.lam)
        return 64 * self.fhe_n

    def beta_bits(self) -> int:
        return 8 * beta_len(self.sigma_reps)

    def payload_bits(self) -> int:
        """The CC payload z = sk || beta."""
        return self.fhe_sk_bits() + self.beta_bits()

    def pk_len(self) -> int:
        if self.fhe == "ideal":
            return 1 + fhe_ideal.PK_BYTES
        p = self.fhe_params
        return 3 + 8 * p.m * (p.n + 1)

    def fhe_ct_len(self, nbits: int) -> int:
        return fhe_ct_len(self.fhe, nbits, self.fhe_params)

    def dec_descriptor(self, sk) -> FnDescriptor:
        from ..fhe import fhe_dec_descriptor
        return fhe_dec_descriptor(sk, self.target_len())

    def obf_len(self) -> int:
        name = "fhe-ideal-dec" if self.fhe == "ideal" else "fhe-lattice-dec"
        params = fhe_ideal.PK_BYTES + 4 if self.fhe == "ideal" else 16 + 4
        d = FnDescriptor.native(name, bytes(params), 0, self.target_len())
        return obf_size(d, self.payload_bits())

    def msg2a_parts(self):
        return (self.pk_len(), self.fhe_ct_len(self.t_len()), self.obf_len())

    def ct_p_len(self) -> int:
        return sfe_mod.ct_len(self.sfe, self.lam, self.lam, self.tier)

    def evct_len(self) -> int:
        return sfe_mod.ev_len(self.sfe, self.lam, self.lam, self.target_len(), self.sfe_budget, self.tier)


def message_lengths(config: ProtocolConfig, n_vertices: int, wi_lengths_v, wi_lengths_p) -> Dict[str, int]:
    """Expected byte length of every step's payload for one session."""
    k = config.sigma_reps
    return {
        "1": 2 * DIGEST_BYTES,
        "2a": sum(config.msg2a_parts()),
        "2b": config.ct_p_len(),
        "2c": config.evct_len(),
        "3a": alpha_len(n_vertices, k),
        "3b": beta_len(k),
        "4.1": wi_lengths_v[0],
        "4.2": wi_lengths_v[1],
        "4.3": wi_lengths_v[2],
        "5.1": wi_lengths_p[0],
        "5.2": wi_lengths_p[1],
        "5.3": wi_lengths_p[2],
        "6": gamma_len(k, config.lam),
        "7": 1,
    }


def normalize_message(raw: bytes, expected_len: int) -> bytes:
    """Cut a long message, zero-pad a short one."""
    if len(raw) >= expected_len:
        return bytes(raw[:expected_len])
    return bytes(raw) + bytes(expected_len - len(raw))


def split_2a(config: ProtocolConfig, msg: bytes):
    a, b, _ = config.msg2a_parts()
    return msg[:a], msg[a:a + b], msg[a + b:]
