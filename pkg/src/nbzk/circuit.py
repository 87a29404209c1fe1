"""Boolean circuit IR.

Wires are dense integers: ``0 .. input_len-1`` are inputs and gate ``g``
drives wire ``input_len + g``. Gates are ``(op, a, b)`` triples in
topological order; unary and nullary ops ignore the unused operands (stored
as 0). Outputs are an explicit list of wire indices, so an output may alias
an input wire or another output.

Binary format (version 1, all integers big-endian)::

    magic   b"NBCI"
    version u8  (= 1)
    input_len, output_len, gate_count   u32 each
    gate_count records of 9 bytes:  op u8, a u32, b u32
    output_len records of 4 bytes:  wire u32
"""

import struct
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .bits import Bits

AND, XOR, NOT, CONST0, CONST1 = range(5)
OP_NAMES = ("AND", "XOR", "NOT", "CONST0", "CONST1")
ARITY = (2, 2, 1, 0, 0)

MAGIC = b"NBCI"
VERSION = 1
_HEADER = struct.Struct(">4sBIII")
_GATE = struct.Struct(">BII")

# straight-line compilation above this size makes CPython's compiler slow
_COMPILE_LIMIT = 60000


class CircuitError(ValueError):
    pass


class ArityError(CircuitError):
    pass


@dataclass(frozen=True, eq=False)
class Circuit:
    input_len: int
    outputs: Tuple[int, ...]
    gates: Tuple[Tuple[int, int, int], ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def output_len(self) -> int:
        return len(self.outputs)

    @property
    def num_wires(self) -> int:
        return self.input_len + len(self.gates)

    def __len__(self):
        return len(self.gates)

    def __call__(self, inputs: Sequence[int]) -> Bits:
        return eval_circuit(self, inputs)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.input_len, self.outputs, self.gates) == (other.input_len, other.outputs, other.gates)

    def __hash__(self):
        return hash((self.input_len, self.outputs, len(self.gates)))

    def depth(self) -> int:
        """Multiplicative depth: AND counts 1, XOR counts 1, NOT and constants 0."""
        if "depth" not in self._cache:
            d = [0] * self.num_wires
            n = self.input_len
            for g, (op, a, b) in enumerate(self.gates):
                if op in (AND, XOR):
                    d[n + g] = max(d[a], d[b]) + 1
                elif op == NOT:
                    d[n + g] = d[a]
            self._cache["depth"] = max((d[w] for w in self.outputs), default=0)
        return self._cache["depth"]


def validate_circuit(c: Circuit):
    """Return None when ``c`` is well formed, else a short violation report."""
    if c.input_len < 0:
        return "negative input_len"
    n = c.input_len
    for g, gate in enumerate(c.gates):
        if len(gate) != 3:
            return "fan-in: gate %d has %d operands" % (g, len(gate) - 1)
        op, a, b = gate
        if op not in (AND, XOR, NOT, CONST0, CONST1):
            return "unknown op %r at gate %d" % (op, g)
        here = n + g
        used = (a, b)[:ARITY[op]]
        for w in used:
            if not isinstance(w, int) or w < 0:
                return "bad wire %r at gate %d" % (w, g)
            if w >= here:
                return "not topological: gate %d reads wire %d" % (g, w)
    total = c.num_wires
    for i, w in enumerate(c.outputs):
        if not (0 <= w < total):
            return "undefined output wire %d at position %d" % (w, i)
    return None


def make_circuit(input_len: int, outputs, gates, validate: bool = True) -> Circuit:
    gates = tuple(tuple(g) for g in gates)
    c = Circuit(input_len, tuple(outputs), gates)
    if validate:
        report = validate_circuit(c)
        if report:
            raise CircuitError(report)
    return c


# -- evaluation ---------------------------------------------------------------

def _compile(c: Circuit):
    n = c.input_len
    lines = ["def _f(x, m):"]
    if n:
        lines.append("    " + ", ".join("w%d" % i for i in range(n)) + (", = x" if n == 1 else " = x"))
    for g, (op, a, b) in enumerate(c.gates):
        w = n + g
        if op == AND:
            lines.append("    w%d = w%d & w%d" % (w, a, b))
        elif op == XOR:
            lines.append("    w%d = w%d ^ w%d" % (w, a, b))
        elif op == NOT:
            lines.append("    w%d = w%d ^ m" % (w, a))
        elif op == CONST0:
            lines.append("    w%d = 0" % w)
        else:
            lines.append("    w%d = m" % w)
    lines.append("    return (" + "".join("w%d, " % o for o in c.outputs) + ")")
    ns = {}
    exec(compile("\n".join(lines), "<circuit>", "exec"), ns)
    return ns["_f"]


def _interpret(c: Circuit, x, m):
    w = list(x)
    append = w.append
    for op, a, b in c.gates:
        if op == AND:
            append(w[a] & w[b])
        elif op == XOR:
            append(w[a] ^ w[b])
        elif op == NOT:
            append(w[a] ^ m)
        elif op == CONST0:
            append(0)
        else:
            append(m)
    return tuple(w[o] for o in c.outputs)


def eval_sliced(c: Circuit, words: Sequence[int], mask: int = 1) -> tuple:
    """Bit-sliced evaluation: each input is an int whose bit j is that wire's
    value in instance j; ``mask`` has one bit set per instance."""
    if len(words) != c.input_len:
        raise ArityError("expected %d inputs, got %d" % (c.input_len, len(words)))
    if len(c.gates) > _COMPILE_LIMIT:
        return _interpret(c, words, mask)
    fn = c._cache.get("fn")
    if fn is None:
        # compiling only pays off for circuits evaluated more than once
        uses = c._cache["uses"] = c._cache.get("uses", 0) + 1
        if uses < 2:
            return _interpret(c, words, mask)
        fn = c._cache["fn"] = _compile(c)
    return fn(words, mask)


def eval_circuit(c: Circuit, inputs: Sequence[int]) -> Bits:
    if len(inputs) != c.input_len:
        raise ArityError("expected %d inputs, got %d" % (c.input_len, len(inputs)))
    return eval_sliced(c, tuple(inputs), 1)


def eval_batch(c: Circuit, rows: Sequence[Sequence[int]]) -> List[Bits]:
    """Evaluate many inputs at once through bit-slicing."""
    rows = list(rows)
    if not rows:
        return []
    words = [0] * c.input_len
    for j, row in enumerate(rows):
        if len(row) != c.input_len:
            raise ArityError("row %d has %d bits" % (j, len(row)))
        for i, v in enumerate(row):
            if v:
                words[i] |= 1 << j
    mask = (1 << len(rows)) - 1
    out = eval_sliced(c, words, mask)
    return [tuple((o >> j) & 1 for o in out) for j in range(len(rows))]


def eval_all_inputs(c: Circuit) -> List[Bits]:
    """Outputs for every input, ordered by the input read as an LSB-first int."""
    n = c.input_len
    if n > 20:
        raise CircuitError("exhaustive evaluation limited to 20 inputs")
    count = 1 << n
    mask = (1 << count) - 1
    words = []
    for i in range(n):
        # bit j of the word is bit i of j
        block = ((1 << (1 << i)) - 1) << (1 << i)
        period = (1 << (1 << (i + 1))) - 1
        pattern = block * (mask // period)
        words.append(pattern)
    out = eval_sliced(c, words, mask)
    return [tuple((o >> j) & 1 for o in out) for j in range(count)]


# -- builder ------------------------------------------------------------------

class CircuitBuilder:
    """Incremental construction with constant folding.

    Wire handles are plain ints. Constants are tracked so that gates with a
    known operand fold away, which keeps bound/hard-wired circuits small.
    """

    def __init__(self, input_len: int = 0):
        self.input_len = input_len
        self.gates: List[Tuple[int, int, int]] = []
        self._const = {}
        self._c0 = None
        self._c1 = None

    @property
    def inputs(self) -> List[int]:
        return list(range(self.input_len))

    def _emit(self, op, a=0, b=0) -> int:
        self.gates.append((op, a, b))
        return self.input_len + len(self.gates) - 1

    def const(self, v: int) -> int:
        if v:
            if self._c1 is None:
                self._c1 = self._emit(CONST1)
                self._const[self._c1] = 1
            return self._c1
        if self._c0 is None:
            self._c0 = self._emit(CONST0)
            self._const[self._c0] = 0
        return self._c0

    def value(self, w):
        return self._const.get(w)

    def not_(self, a: int) -> int:
        ca = self._const.get(a)
        if ca is not None:
            return self.const(1 - ca)
        return self._emit(NOT, a)

    def and_(self, a: int, b: int) -> int:
        ca, cb = self._const.get(a), self._const.get(b)
        if ca == 0 or cb == 0:
            return self.const(0)
        if ca == 1:
            return b
        if cb == 1:
            return a
        if a == b:
            return a
        return self._emit(AND, a, b)

    def xor(self, a: int, b: int) -> int:
        ca, cb = self._const.get(a), self._const.get(b)
        if ca is not None and cb is not None:
            return self.const(ca ^ cb)
        if ca == 0:
            return b
        if cb == 0:
            return a
        if ca == 1:
            return self.not_(b)
        if cb == 1:
            return self.not_(a)
        if a == b:
            return self.const(0)
        return self._emit(XOR, a, b)

    def or_(self, a, b):
        return self.not_(self.and_(self.not_(a), self.not_(b)))

    def nand(self, a, b):
        return self.not_(self.and_(a, b))

    def xnor(self, a, b):
        return self.not_(self.xor(a, b))

    def mux(self, sel, if0, if1):
        return self.xor(if0, self.and_(sel, self.xor(if0, if1)))

    def and_all(self, wires: Sequence[int]) -> int:
        wires = list(wires)
        if not wires:
            return self.const(1)
        while len(wires) > 1:
            nxt = [self.and_(wires[i], wires[i + 1]) for i in range(0, len(wires) - 1, 2)]
            if len(wires) % 2:
                nxt.append(wires[-1])
            wires = nxt
        return wires[0]

    def or_all(self, wires):
        return self.not_(self.and_all([self.not_(w) for w in wires]))

    def xor_all(self, wires):
        acc = self.const(0)
        for w in wires:
            acc = self.xor(acc, w)
        return acc

    def equals(self, xs: Sequence[int], ys: Sequence[int]) -> int:
        if len(xs) != len(ys):
            raise ArityError("equals: length mismatch")
        return self.and_all([self.xnor(a, b) for a, b in zip(xs, ys)])

    def equals_const(self, xs: Sequence[int], bits: Sequence[int]) -> int:
        if len(xs) != len(bits):
            raise ArityError("equals_const: length mismatch")
        return self.and_all([x if b else self.not_(x) for x, b in zip(xs, bits)])

    def consts(self, bits: Sequence[int]) -> List[int]:
        return [self.const(b) for b in bits]

    def add(self, xs: Sequence[int], ys: Sequence[int]) -> List[int]:
        """Ripple-carry addition modulo 2**len(xs); little-endian wire lists."""
        out = []
        carry = self.const(0)
        last = len(xs) - 1
        for i, (a, b) in enumerate(zip(xs, ys)):
            t = self.xor(a, b)
            out.append(self.xor(t, carry))
            if i < last:
                carry = self.xor(self.and_(a, b), self.and_(carry, t))
        return out

    def less_than_const(self, xs: Sequence[int], bound: int) -> int:
        """1 iff the little-endian value on ``xs`` is < ``bound``."""
        lt = self.const(0)
        eq = self.const(1)
        for i in reversed(range(len(xs))):
            bit = (bound >> i) & 1
            if bit:
                lt = self.or_(lt, self.and_(eq, self.not_(xs[i])))
                eq = self.and_(eq, xs[i])
            else:
                eq = self.and_(eq, self.not_(xs[i]))
        if bound >> len(xs):
            return self.const(1)
        return lt

    def embed(self, c: Circuit, inputs: Sequence[int]) -> List[int]:
        """Inline ``c`` with its inputs connected to ``inputs``; return its output wires."""
        if len(inputs) != c.input_len:
            raise ArityError("embed: expected %d inputs, got %d" % (c.input_len, len(inputs)))
        wmap = list(inputs)
        for op, a, b in c.gates:
            if op == AND:
                w = self.and_(wmap[a], wmap[b])
            elif op == XOR:
                w = self.xor(wmap[a], wmap[b])
            elif op == NOT:
                w = self.not_(wmap[a])
            else:
                w = self.const(1 if op == CONST1 else 0)
            wmap.append(w)
        return [wmap[o] for o in c.outputs]

    def build(self, outputs: Sequence[int]) -> Circuit:
        return make_circuit(self.input_len, outputs, self.gates)


# -- composition --------------------------------------------------------------

def compose_circuits(outer: Circuit, inner: Circuit) -> Circuit:
    """Circuit computing ``outer(inner(x))``."""
    if inner.output_len != outer.input_len:
        raise ArityError("inner produces %d bits, outer expects %d" % (inner.output_len, outer.input_len))
    b = CircuitBuilder(inner.input_len)
    mid = b.embed(inner, b.inputs)
    return b.build(b.embed(outer, mid))


def bind_inputs(c: Circuit, prefix: Sequence[int]) -> Circuit:
    """Fix the first ``len(prefix)`` inputs of ``c`` to constants."""
    k = len(prefix)
    if k > c.input_len:
        raise ArityError("prefix of %d bits exceeds %d inputs" % (k, c.input_len))
    b = CircuitBuilder(c.input_len - k)
    wires = b.consts(prefix) + b.inputs
    return b.build(b.embed(c, wires))


class BoundCircuit:
    """``base`` with its trailing inputs fixed to ``suffix``.

    Evaluation reuses the base circuit's compiled form; ``materialize`` builds
    the stand-alone circuit when gate-level access is needed.
    """

    def __init__(self, base: Circuit, suffix: Sequence[int]):
        if len(suffix) > base.input_len:
            raise ArityError("suffix of %d bits exceeds %d inputs" % (len(suffix), base.input_len))
        self.base, self.suffix = base, tuple(suffix)

    @property
    def input_len(self) -> int:
        return self.base.input_len - len(self.suffix)

    @property
    def output_len(self) -> int:
        return self.base.output_len

    def __call__(self, inputs: Sequence[int]) -> Bits:
        if len(inputs) != self.input_len:
            raise ArityError("expected %d inputs, got %d" % (self.input_len, len(inputs)))
        return self.base(tuple(inputs) + self.suffix)

    def materialize(self) -> Circuit:
        b = CircuitBuilder(self.input_len)
        return b.build(b.embed(self.base, b.inputs + b.consts(self.suffix)))


def concat_circuits(*cs: Circuit) -> Circuit:
    """Side-by-side circuit: inputs and outputs concatenated in order."""
    b = CircuitBuilder(sum(c.input_len for c in cs))
    outs = []
    pos = 0
    for c in cs:
        outs += b.embed(c, list(range(pos, pos + c.input_len)))
        pos += c.input_len
    return b.build(outs)


def identity_circuit(n: int) -> Circuit:
    return make_circuit(n, range(n), ())


def constant_circuit(input_len: int, bits: Sequence[int]) -> Circuit:
    b = CircuitBuilder(input_len)
    return b.build(b.consts(bits))


# -- serialization ------------------------------------------------------------

def serialize_circuit(c: Circuit) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, c.input_len, c.output_len, len(c.gates))]
    parts.extend(_GATE.pack(op, a, b) for op, a, b in c.gates)
    parts.append(struct.pack(">%dI" % c.output_len, *c.outputs))
    return b"".join(parts)


def deserialize_circuit(data: bytes) -> Circuit:
    if len(data) < _HEADER.size:
        raise CircuitError("truncated header")
    magic, version, n, m, g = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CircuitError("bad magic")
    if version != VERSION:
        raise CircuitError("unsupported version %d" % version)
    need = _HEADER.size + g * _GATE.size + 4 * m
    if len(data) != need:
        raise CircuitError("length %d, expected %d" % (len(data), need))
    off = _HEADER.size
    gates = [_GATE.unpack_from(data, off + i * _GATE.size) for i in range(g)]
    off += g * _GATE.size
    outputs = struct.unpack_from(">%dI" % m, data, off)
    return make_circuit(n, outputs, gates)


def disassemble(c: Circuit) -> str:
    lines = ["; inputs=%d outputs=%d gates=%d" % (c.input_len, c.output_len, len(c.gates))]
    n = c.input_len
    for g, (op, a, b) in enumerate(c.gates):
        args = ("w%d" % a, "w%d" % b)[:ARITY[op]]
        lines.append("w%d = %s %s" % (n + g, OP_NAMES[op], " ".join(args)))
    lines.append("out " + " ".join("w%d" % o for o in c.outputs))
    return "\n".join(lines)


def fingerprint(c: Circuit) -> bytes:
    """16-byte digest of the serialized circuit (cached on the object)."""
    if "fp" not in c._cache:
        import hashlib
        c._cache["fp"] = hashlib.blake2b(serialize_circuit(c), digest_size=16).digest()
    return c._cache["fp"]
