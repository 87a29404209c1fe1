"""NP statements, graph 3-colouring, and the circuit-SAT -> 3COL reduction.

Reduction (per-gate gadgets over a Tseitin encoding):

* a palette triangle T=0, F=1, B=2;
* every wire ``w`` of the witness circuit gets a literal pair ``(w, ~w)``
  forming a triangle with B, so ``w`` is coloured T or F and ``~w`` the other;
* NOT gates share vertices (``~a`` is the output literal), constants are
  tied to the palette;
* AND / XOR gates contribute their Tseitin clauses, each realised by the
  textbook two-OR clause gadget (6 fresh vertices, final vertex tied to F and B);
* the output wire is tied to F and B, forcing it true.

The resulting graph is 3-colourable iff some witness satisfies the circuit.
"""

import itertools
import struct
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .bits import Bits
from .circuit import (AND, CONST0, CONST1, NOT, XOR, Circuit, CircuitBuilder,
                      bind_inputs, eval_circuit)

T, F, B = 0, 1, 2


class StatementError(ValueError):
    pass


class NoCircuitForm(StatementError):
    """A primitive has no circuit form at the configured parameters."""


@dataclass(frozen=True)
class ColoringInstance:
    n: int
    edges: Tuple[Tuple[int, int], ...]
    witness: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise StatementError("bad edge (%d, %d)" % (u, v))
        if self.witness is not None and len(self.witness) != self.n:
            raise StatementError("witness length %d != %d" % (len(self.witness), self.n))

    def public(self) -> "ColoringInstance":
        return ColoringInstance(self.n, self.edges)

    def with_witness(self, coloring) -> "ColoringInstance":
        return ColoringInstance(self.n, self.edges, tuple(coloring))

    def to_bytes(self, include_witness: bool = False) -> bytes:
        parts = [b"NB3C", struct.pack(">II", self.n, len(self.edges))]
        parts += [struct.pack(">II", u, v) for u, v in self.edges]
        if include_witness and self.witness is not None:
            parts.append(b"\x01" + bytes(self.witness))
        else:
            parts.append(b"\x00")
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ColoringInstance":
        if data[:4] != b"NB3C":
            raise StatementError("bad magic")
        n, m = struct.unpack_from(">II", data, 4)
        off = 12
        edges = tuple(struct.unpack_from(">II", data, off + 8 * i) for i in range(m))
        off += 8 * m
        witness = None
        if data[off] == 1:
            witness = tuple(data[off + 1:off + 1 + n])
        return cls(n, edges, witness)


def check_witness_3col(g: ColoringInstance) -> bool:
    if g.witness is None:
        raise StatementError("missing witness")
    w = g.witness
    if any(c not in (0, 1, 2) for c in w):
        return False
    return all(w[u] != w[v] for u, v in g.edges)


def coloring_bits(coloring: Sequence[int]) -> Bits:
    """Two bits per vertex, low bit first."""
    out = []
    for c in coloring:
        out += [c & 1, (c >> 1) & 1]
    return tuple(out)


def coloring_from_bits(bits: Sequence[int]) -> Tuple[int, ...]:
    return tuple(bits[2 * i] | (bits[2 * i + 1] << 1) for i in range(len(bits) // 2))


# -- relations ----------------------------------------------------------------

@dataclass
class Relation:
    """An NP relation with a native check and an optional circuit form.

    Both forms take ``instance || witness``; they must agree everywhere.
    """
    name: str
    instance_len: int
    witness_len: int
    check_fn: Callable[[Bits, Bits], bool]
    build_fn: Optional[Callable[[], Circuit]] = None
    # rough gate count, so callers can pick a proof mode without building
    size_hint: int = 0
    _circuit: Optional[Circuit] = field(default=None, repr=False)

    def check(self, instance, witness) -> bool:
        if len(instance) != self.instance_len or len(witness) != self.witness_len:
            return False
        return bool(self.check_fn(tuple(instance), tuple(witness)))

    @property
    def has_circuit(self) -> bool:
        return self.build_fn is not None

    def circuit(self) -> Circuit:
        if self._circuit is None:
            if self.build_fn is None:
                raise NoCircuitForm("relation %r has no circuit form" % self.name)
            c = self.build_fn()
            if c.input_len != self.instance_len + self.witness_len or c.output_len != 1:
                raise StatementError("circuit shape does not match relation %r" % self.name)
            self._circuit = c
        return self._circuit


def circuit_relation(name: str, c: Circuit, instance_len: int) -> Relation:
    if c.output_len != 1:
        raise StatementError("relation circuits have one output")

    def check(i, w):
        return eval_circuit(c, i + w)[0] == 1

    rel = Relation(name, instance_len, c.input_len - instance_len, check, lambda: c)
    rel._circuit = c
    return rel


def or_relation(r0: Relation, r1: Relation, name: str = None) -> Relation:
    """Disjunction: instance i0||i1, witness w0||w1; either branch may hold."""
    def check(i, w):
        i0, i1 = i[:r0.instance_len], i[r0.instance_len:]
        w0, w1 = w[:r0.witness_len], w[r0.witness_len:]
        return r0.check(i0, w0) or r1.check(i1, w1)

    build = None
    if r0.has_circuit and r1.has_circuit:
        def build():
            c0, c1 = r0.circuit(), r1.circuit()
            b = CircuitBuilder(r0.instance_len + r1.instance_len + r0.witness_len + r1.witness_len)
            w = b.inputs
            i0 = w[:r0.instance_len]
            i1 = w[r0.instance_len:r0.instance_len + r1.instance_len]
            rest = w[r0.instance_len + r1.instance_len:]
            w0, w1 = rest[:r0.witness_len], rest[r0.witness_len:]
            o0 = b.embed(c0, i0 + w0)[0]
            o1 = b.embed(c1, i1 + w1)[0]
            return b.build([b.or_(o0, o1)])

    hint = (r0.size_hint + r1.size_hint + 1) if r0.size_hint and r1.size_hint else 0
    return Relation(name or "%s|%s" % (r0.name, r1.name), r0.instance_len + r1.instance_len,
                    r0.witness_len + r1.witness_len, check, build, hint)


def coloring_relation(g: ColoringInstance) -> Relation:
    """x in 3COL for a fixed graph: empty instance, witness = 2 bits per vertex."""
    pub = g.public()

    def check(i, w):
        return check_witness_3col(pub.with_witness(coloring_from_bits(w)))

    def build():
        b = CircuitBuilder(2 * g.n)
        w = b.inputs
        ok = [b.nand(w[2 * v], w[2 * v + 1]) for v in range(g.n)]
        for u, v in g.edges:
            ok.append(b.not_(b.and_(b.xnor(w[2 * u], w[2 * v]), b.xnor(w[2 * u + 1], w[2 * v + 1]))))
        return b.build([b.and_all(ok)])

    return Relation("3col", 0, 2 * g.n, check, build, 4 * g.n + 6 * len(g.edges))


@dataclass(frozen=True)
class Statement:
    relation: Relation
    instance: Bits

    def __post_init__(self):
        if len(self.instance) != self.relation.instance_len:
            raise StatementError("instance has %d bits, relation expects %d"
                                 % (len(self.instance), self.relation.instance_len))

    def holds(self, witness) -> bool:
        return self.relation.check(self.instance, witness)

    def witness_circuit(self) -> Circuit:
        """The relation with the instance hard-wired."""
        return bind_inputs(self.relation.circuit(), self.instance)


# -- reduction ----------------------------------------------------------------

def _or_gadget_table():
    """Colourings of the 6 internal clause-gadget vertices for each literal assignment.

    Gadget for (l1 | l2 | l3): x1~l1, y1~l2, x1~y1, o1~x1, o1~y1;
    x2~o1, y2~l3, x2~y2, o2~x2, o2~y2; o2~F, o2~B.
    Internal order: x1, y1, o1, x2, y2, o2.
    """
    table = {}
    for lits in itertools.product((T, F), repeat=3):
        for cols in itertools.product((T, F, B), repeat=6):
            x1, y1, o1, x2, y2, o2 = cols
            l1, l2, l3 = lits
            if (x1 != l1 and y1 != l2 and x1 != y1 and o1 != x1 and o1 != y1 and
                    x2 != o1 and y2 != l3 and x2 != y2 and o2 != x2 and o2 != y2 and
                    o2 != F and o2 != B):
                table[lits] = cols
                break
    return table


_CLAUSE_TABLE = None


def _clauses(op, a, b, c):
    """Tseitin clauses as ((wire, positive), ...) triples."""
    if op == AND:
        return [((c, False), (a, True), (a, True)),
                ((c, False), (b, True), (b, True)),
                ((c, True), (a, False), (b, False))]
    if op == XOR:
        return [((a, False), (b, False), (c, False)),
                ((a, True), (b, True), (c, False)),
                ((a, True), (b, False), (c, True)),
                ((a, False), (b, True), (c, True))]
    raise ValueError(op)


def reduce_sat_to_3col(s: Statement, w=None) -> ColoringInstance:
    """Graph that is 3-colourable iff the statement has a witness.

    With ``w`` the returned instance carries the coloring induced by it.
    """
    global _CLAUSE_TABLE
    circ = s.witness_circuit()
    values = None
    if w is not None:
        if not s.holds(w):
            raise StatementError("witness does not satisfy the relation")
        words = tuple(w)
        if len(words) != circ.input_len:
            raise StatementError("witness length mismatch")
        values = _wire_values(circ, words)

    nw = circ.num_wires
    edges = [(T, F), (T, B), (F, B)]
    pos = [0] * nw
    neg = [0] * nw
    nv = 3
    n_in = circ.input_len

    def new_pair():
        nonlocal nv
        p, q = nv, nv + 1
        nv += 2
        edges.extend([(p, B), (q, B), (p, q)])
        return p, q

    for i in range(n_in):
        pos[i], neg[i] = new_pair()
    clauses = []
    for g, (op, a, b) in enumerate(circ.gates):
        wi = n_in + g
        if op == NOT:
            pos[wi], neg[wi] = neg[a], pos[a]
            continue
        pos[wi], neg[wi] = new_pair()
        if op == CONST0:
            edges.append((pos[wi], T))
        elif op == CONST1:
            edges.append((pos[wi], F))
        else:
            clauses.extend(_clauses(op, a, b, wi))
    gadget_start = nv
    for clause in clauses:
        lv = [pos[x] if p else neg[x] for x, p in clause]
        x1, y1, o1, x2, y2, o2 = range(nv, nv + 6)
        nv += 6
        edges.extend([(x1, lv[0]), (y1, lv[1]), (x1, y1), (o1, x1), (o1, y1),
                      (x2, o1), (y2, lv[2]), (x2, y2), (o2, x2), (o2, y2), (o2, F), (o2, B)])
    out = circ.outputs[0]
    edges.append((pos[out], F))
    edges = tuple((min(u, v), max(u, v)) for u, v in edges)

    coloring = None
    if values is not None:
        if _CLAUSE_TABLE is None:
            _CLAUSE_TABLE = _or_gadget_table()
        col = [0] * nv
        col[T], col[F], col[B] = T, F, B
        for wi in range(nw):
            v = values[wi]
            col[pos[wi]] = T if v else F
            col[neg[wi]] = F if v else T
        base = gadget_start
        for clause in clauses:
            lits = tuple(T if (values[x] == 1) == p else F for x, p in clause)
            col[base:base + 6] = _CLAUSE_TABLE[lits]
            base += 6
        coloring = tuple(col)
    return ColoringInstance(nv, edges, coloring)


def _wire_values(c: Circuit, inputs) -> List[int]:
    vals = list(inputs)
    for op, a, b in c.gates:
        if op == AND:
            vals.append(vals[a] & vals[b])
        elif op == XOR:
            vals.append(vals[a] ^ vals[b])
        elif op == NOT:
            vals.append(1 - vals[a])
        else:
            vals.append(1 if op == CONST1 else 0)
    return vals


def build_explainability_relation(role: str, prefix, config) -> Statement:
    """Statement that ``role``'s messages in ``prefix`` are honestly generated.

    ``prefix`` is a transcript (or frame list) of the main protocol; see
    :func:`nbzk.protocol.explain.explainability_statement` for the relation.
    """
    from .protocol.explain import explainability_statement
    return explainability_statement(role, prefix, config)
