"""Parallel-repeated 3-colouring sigma protocol and the 3-message WI proof.

Sigma messages (bit-exact):

* alpha: for each repetition, one 16-byte commitment digest per vertex,
  repetition-major.
* beta: one u32 (big-endian) edge index per repetition.
* gamma: for each repetition, the openings of the two endpoints of the
  challenged edge, each ``colour u8 || randomness (ceil(2*lam/8) bytes)``.

Each vertex commitment hides a 2-bit colour under 2*lam bits of randomness.
"""

import itertools
import math
import struct
from dataclasses import dataclass
from typing import Tuple

from .bits import from_bits, nbytes, to_bits
from .commit import DIGEST_BYTES, rand_len
from .npstmt import (ColoringInstance, Statement, StatementError, check_witness_3col,
                     reduce_sat_to_3col)
from .toyhash import toyhash_batch

COLOR_PAIRS = tuple((a, b) for a in range(3) for b in range(3) if a != b)


class ProofError(ValueError):
    pass


def default_reps(lam: int) -> int:
    return math.ceil(lam * math.log(3))


@dataclass(frozen=True)
class SigmaFirst:
    digests: Tuple[Tuple[bytes, ...], ...]

    @property
    def reps(self):
        return len(self.digests)

    def to_bytes(self) -> bytes:
        return b"".join(b"".join(rep) for rep in self.digests)

    @classmethod
    def from_bytes(cls, data: bytes, reps: int, n: int) -> "SigmaFirst":
        if len(data) != reps * n * DIGEST_BYTES:
            raise ProofError("alpha has %d bytes, expected %d" % (len(data), reps * n * DIGEST_BYTES))
        d = DIGEST_BYTES
        return cls(tuple(tuple(data[(i * n + v) * d:(i * n + v + 1) * d] for v in range(n))
                         for i in range(reps)))


@dataclass(frozen=True)
class SigmaChallenge:
    edges: Tuple[int, ...]

    def to_bytes(self) -> bytes:
        return struct.pack(">%dI" % len(self.edges), *self.edges)

    @classmethod
    def from_bytes(cls, data: bytes, reps: int) -> "SigmaChallenge":
        if len(data) != 4 * reps:
            raise ProofError("beta has %d bytes, expected %d" % (len(data), 4 * reps))
        return cls(struct.unpack(">%dI" % reps, data))

    def bits(self):
        return to_bits(self.to_bytes())


@dataclass(frozen=True)
class SigmaResponse:
    # per repetition: ((colour_u, rand_u), (colour_v, rand_v)); rand as int
    openings: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]

    def to_bytes(self, lam: int) -> bytes:
        rb = nbytes(rand_len(lam))
        out = []
        for pair in self.openings:
            for color, r in pair:
                out.append(bytes([color]) + r.to_bytes(rb, "little"))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, reps: int, lam: int) -> "SigmaResponse":
        rb = nbytes(rand_len(lam))
        step = 1 + rb
        if len(data) != reps * 2 * step:
            raise ProofError("gamma has %d bytes, expected %d" % (len(data), reps * 2 * step))
        ops = []
        for i in range(reps):
            pair = []
            for j in range(2):
                off = (2 * i + j) * step
                pair.append((data[off], int.from_bytes(data[off + 1:off + step], "little")))
            ops.append(tuple(pair))
        return cls(tuple(ops))


@dataclass(frozen=True)
class ProverAuxState:
    colors: Tuple[Tuple[int, ...], ...]
    rands: Tuple[Tuple[int, ...], ...]


def alpha_len(n: int, reps: int) -> int:
    return reps * n * DIGEST_BYTES


def beta_len(reps: int) -> int:
    return 4 * reps


def gamma_len(reps: int, lam: int) -> int:
    return reps * 2 * (1 + nbytes(rand_len(lam)))


def _commit_rows(lam: int, colors, rands) -> Tuple[Tuple[bytes, ...], ...]:
    """Commit every vertex of every repetition in one hash batch."""
    rl = rand_len(lam)
    w = nbytes(rl + 2)
    msgs = [(c | (r << 2)).to_bytes(w, "little") for row, rr in zip(colors, rands) for c, r in zip(row, rr)]
    flat = toyhash_batch(msgs, rl + 2)
    out, off = [], 0
    for row in colors:
        out.append(tuple(flat[off:off + len(row)]))
        off += len(row)
    return tuple(out)


def _random_rands(lam, n, rng):
    rl = rand_len(lam)
    rb = nbytes(rl)
    raw = rng.bytes(rb * n)
    mask = (1 << rl) - 1
    return tuple(int.from_bytes(raw[i * rb:(i + 1) * rb], "little") & mask for i in range(n))


def sigma_first(x: ColoringInstance, w, rng, lam: int, reps: int, check: bool = True):
    """Commit to ``reps`` independently re-permuted copies of the colouring ``w``.

    ``check=False`` lets a cheating prover commit to an invalid colouring.
    """
    if check and not check_witness_3col(x.public().with_witness(w)):
        raise ProofError("invalid witness")
    colors, rands, digests = [], [], []
    for _ in range(reps):
        perm = rng.permutation(3)
        row = tuple(perm[c] for c in w)
        rr = _random_rands(lam, x.n, rng)
        colors.append(row)
        rands.append(rr)
    digests = _commit_rows(lam, colors, rands)
    return SigmaFirst(digests), ProverAuxState(tuple(colors), tuple(rands))


def sigma_challenge(x: ColoringInstance, reps: int, rng) -> SigmaChallenge:
    m = len(x.edges)
    if m == 0:
        raise ProofError("graph has no edges")
    return SigmaChallenge(tuple(rng.below(m) for _ in range(reps)))


def sigma_respond(x: ColoringInstance, aux: ProverAuxState, beta: SigmaChallenge) -> SigmaResponse:
    if len(beta.edges) != len(aux.colors):
        raise ProofError("challenge has %d repetitions, state has %d" % (len(beta.edges), len(aux.colors)))
    out = []
    for i, e in enumerate(beta.edges):
        if not 0 <= e < len(x.edges):
            raise ProofError("challenge index %d out of range" % e)
        u, v = x.edges[e]
        out.append(((aux.colors[i][u], aux.rands[i][u]), (aux.colors[i][v], aux.rands[i][v])))
    return SigmaResponse(tuple(out))


def sigma_verify(x: ColoringInstance, alpha: SigmaFirst, beta: SigmaChallenge, gamma: SigmaResponse,
                 lam: int) -> bool:
    reps = len(beta.edges)
    if alpha.reps != reps or len(gamma.openings) != reps:
        return False
    rl = rand_len(lam)
    msgs, expect = [], []
    for i, e in enumerate(beta.edges):
        if not 0 <= e < len(x.edges):
            return False
        if len(alpha.digests[i]) != x.n:
            return False
        (cu, ru), (cv, rv) = gamma.openings[i]
        if cu not in (0, 1, 2) or cv not in (0, 1, 2) or cu == cv:
            return False
        if ru >> rl or rv >> rl:
            return False
        u, v = x.edges[e]
        msgs += [(cu | (ru << 2)).to_bytes(nbytes(rl + 2), "little"),
                 (cv | (rv << 2)).to_bytes(nbytes(rl + 2), "little")]
        expect += [alpha.digests[i][u], alpha.digests[i][v]]
    return toyhash_batch(msgs, rl + 2) == expect


def sigma_simulate(x: ColoringInstance, beta: SigmaChallenge, rng, lam: int, with_aux: bool = False):
    """Special-ZK simulator: an accepting (alpha, gamma) for a known challenge.

    ``with_aux`` also returns the committed colours and randomness, so the
    simulated first message can be opened against another challenge.
    """
    rows, rands, openings = [], [], []
    for e in beta.edges:
        if not 0 <= e < len(x.edges):
            raise ProofError("challenge index %d out of range" % e)
        u, v = x.edges[e]
        colors = [rng.below(3) for _ in range(x.n)]
        cu, cv = COLOR_PAIRS[rng.below(6)]
        colors[u], colors[v] = cu, cv
        rr = _random_rands(lam, x.n, rng)
        rows.append(colors)
        rands.append(rr)
        openings.append(((cu, rr[u]), (cv, rr[v])))
    alpha, gamma = SigmaFirst(_commit_rows(lam, rows, rands)), SigmaResponse(tuple(openings))
    if with_aux:
        return alpha, gamma, ProverAuxState(tuple(map(tuple, rows)), tuple(rands))
    return alpha, gamma


def sigma_sim_first(x: ColoringInstance, rng, lam: int, reps: int) -> SigmaFirst:
    """First-message simulator: alpha distributed as sigma_simulate(x, 0...)[0]."""
    return sigma_simulate(x, SigmaChallenge((0,) * reps), rng, lam)[0]


def best_coloring(x: ColoringInstance):
    """A colouring maximising the number of properly coloured edges (n <= 12)."""
    if x.n > 12:
        raise ProofError("enumeration limited to 12 vertices")
    m = len(x.edges)
    best, arg = -1, None
    for col in itertools.product(range(3), repeat=x.n):
        good = sum(col[u] != col[v] for u, v in x.edges)
        if good > best:
            best, arg = good, col
            if best == m:
                break
    return arg, best


def best_cheat_fraction(x: ColoringInstance) -> float:
    """Exact per-repetition acceptance bound for a prover bound to one colouring.

    Enumerates all 3**n colourings; feasible for n <= 12.
    """
    _, good = best_coloring(x)
    return good / len(x.edges)


# -- WI proof -----------------------------------------------------------------

def wi_mode(stmt: Statement, config) -> str:
    mode = getattr(config, "wi_mode", "auto")
    if mode != "auto":
        return mode
    rel = stmt.relation
    if not rel.has_circuit:
        return "transparent"
    hint = getattr(rel, "size_hint", 0) or len(rel.circuit())
    return "full" if hint <= config.wi_gate_budget else "transparent"


class _WIBase:
    def __init__(self, stmt: Statement, config):
        self.stmt = stmt
        self.lam = config.lam
        self.reps = config.wi_reps
        self.mode = wi_mode(stmt, config)
        self._graph = None

    def graph(self) -> ColoringInstance:
        if self._graph is None:
            self._graph = reduce_sat_to_3col(self.stmt).public()
        return self._graph

    def lengths(self):
        if self.mode == "transparent":
            return (nbytes(self.stmt.relation.witness_len), beta_len(self.reps), 0)
        g = self.graph()
        return (alpha_len(g.n, self.reps), beta_len(self.reps), gamma_len(self.reps, self.lam))


class WIProver(_WIBase):
    """Prover side of the 3-message WI proof: first() then respond(challenge)."""

    def __init__(self, stmt, witness, config, rng):
        super().__init__(stmt, config)
        if not stmt.holds(witness):
            raise StatementError("WI witness does not satisfy the statement")
        self.witness = tuple(witness)
        self.rng = rng
        self._aux = None

    def first(self) -> bytes:
        if self.mode == "transparent":
            return from_bits(self.witness)
        g = reduce_sat_to_3col(self.stmt, self.witness)
        self._graph = g.public()
        alpha, self._aux = sigma_first(self._graph, g.witness, self.rng, self.lam, self.reps)
        return alpha.to_bytes()

    def respond(self, challenge: bytes) -> bytes:
        if self.mode == "transparent":
            return b""
        beta = SigmaChallenge.from_bytes(challenge, self.reps)
        beta = SigmaChallenge(tuple(e % len(self._graph.edges) for e in beta.edges))
        return sigma_respond(self._graph, self._aux, beta).to_bytes(self.lam)


class WIVerifier(_WIBase):
    """Verifier side: challenge(first) then verify(response)."""

    def __init__(self, stmt, config, rng):
        super().__init__(stmt, config)
        self.rng = rng
        self._first = None
        self._beta = None

    def challenge(self, first: bytes) -> bytes:
        self._first = first
        if self.mode == "transparent":
            self._beta = SigmaChallenge(tuple(self.rng.below(1 << 16) for _ in range(self.reps)))
        else:
            self._beta = sigma_challenge(self.graph(), self.reps, self.rng)
        return self._beta.to_bytes()

    def verify(self, response: bytes) -> bool:
        try:
            if self.mode == "transparent":
                wl = self.stmt.relation.witness_len
                return self.stmt.holds(to_bits(self._first, wl))
            g = self.graph()
            alpha = SigmaFirst.from_bytes(self._first, self.reps, g.n)
            gamma = SigmaResponse.from_bytes(response, self.reps, self.lam)
            return sigma_verify(g, alpha, self._beta, gamma, self.lam)
        except (ProofError, ValueError):
            return False

    def check(self, first: bytes, challenge: bytes, response: bytes) -> bool:
        """Verify a whole transcript whose challenge was fixed elsewhere."""
        self._first = first
        try:
            self._beta = SigmaChallenge.from_bytes(challenge, self.reps)
        except ProofError:
            return False
        return self.verify(response)
