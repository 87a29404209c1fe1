"""Garbled-circuit SFE: Yao with point-and-permute plus a two-message ElGamal OT.

Group: the order-q subgroup of quadratic residues mod a safe prime p = 2q+1,
generator g = 4. The micro tier uses a 24-bit prime so the extractor can
brute-force discrete logs; the small tier uses a 128-bit prime and the
extractor refuses to run.

Receiver key: dk = x_r in Z_q, y = g^x_r. First flow, per input bit s_i::

    c1 = g^k,  c2 = y^k * g^s_i

Sender, per input bit i and candidate value j in {0,1}, with fresh a, b, e::

    A = c1^a * g^b,  B = (c2 * g^-j)^a * y^b * g^e,
    M = H(g^e) XOR (label_i^j || 0^8)

so B / A^x_r = g^e exactly when j = s_i and is random otherwise; the eight
zero bytes let the receiver tell which candidate opened. Garbled tables use
blake2b and are padded with dummy gates to a fixed gate budget, so flow
length depends only on (tier, n, budget, m). The circuit topology travels in
the clear: this backend hides gate contents, not wiring.
"""

import hashlib
import struct

from ..bits import Bits
from ..circuit import AND, CONST0, CONST1, NOT, XOR, Circuit

LABEL = 16
RED = 8
OUT_HASH = 8
GROUPS = {
    "micro": 8413499,
    "small": 170141183460469231731687303715884159587,
}
TIER_IDS = {"micro": 0, "small": 1}
GEN = 4


class GarbledError(ValueError):
    pass


def group(tier):
    p = GROUPS[tier]
    return p, (p - 1) // 2, (p.bit_length() + 7) // 8


def _H(data: bytes, n: int, person: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=n, person=person).digest()


def _enc_int(v, pb):
    return v.to_bytes(pb, "big")


def _color(label: bytes) -> int:
    return label[0] & 1


def gen_key(tier, rng):
    p, q, _ = group(tier)
    return rng.integer(1, q)


def ct_len(tier, n):
    _, _, pb = group(tier)
    return pb + 2 * pb * n


def encrypt(tier, x_r, bits, rng) -> bytes:
    p, q, pb = group(tier)
    y = pow(GEN, x_r, p)
    out = [_enc_int(y, pb)]
    for s in bits:
        k = rng.integer(1, q)
        out.append(_enc_int(pow(GEN, k, p), pb))
        out.append(_enc_int(pow(y, k, p) * pow(GEN, s, p) % p, pb))
    return b"".join(out)


def _parse_ct(tier, n, data):
    p, _, pb = group(tier)
    if len(data) != ct_len(tier, n):
        raise GarbledError("ciphertext has %d bytes, expected %d" % (len(data), ct_len(tier, n)))
    vals = [int.from_bytes(data[i * pb:(i + 1) * pb], "big") for i in range(1 + 2 * n)]
    if any(not 0 < v < p for v in vals):
        raise GarbledError("group element out of range")
    return vals[0], [(vals[1 + 2 * i], vals[2 + 2 * i]) for i in range(n)]


_GATE_REC = struct.Struct(">BII")


def ev_len(tier, n, budget, m):
    _, _, pb = group(tier)
    return n * 2 * (2 * pb + LABEL + RED) + budget * (_GATE_REC.size + 4 * LABEL) + m * (4 + 2 * OUT_HASH)


def _fresh_pair(rng):
    l0 = bytearray(rng.bytes(LABEL))
    l1 = bytearray(rng.bytes(LABEL))
    l1[0] = (l1[0] & 0xFE) | (1 - (l0[0] & 1))
    return bytes(l0), bytes(l1)


def _xb(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _row_key(la, lb, gid):
    return _H(la + lb + struct.pack(">I", gid), LABEL, b"nbzk-gc-row")


def garble_eval(tier, c: Circuit, n: int, ct: bytes, budget: int, rng) -> bytes:
    """Sender's second flow for circuit ``c`` on the receiver's first flow."""
    if c.input_len != n:
        raise GarbledError("circuit takes %d inputs, ciphertext carries %d" % (c.input_len, n))
    if len(c.gates) > budget:
        raise GarbledError("circuit has %d gates, budget is %d" % (len(c.gates), budget))
    p, q, pb = group(tier)
    y, pairs = _parse_ct(tier, n, ct)
    labels = [_fresh_pair(rng) for _ in range(n)]
    out = []
    for i, (c1, c2) in enumerate(pairs):
        for j in (0, 1):
            a, b, e = rng.integer(1, q), rng.integer(1, q), rng.integer(1, q)
            A = pow(c1, a, p) * pow(GEN, b, p) % p
            B = pow(c2 * pow(GEN, q - j if j else 0, p) % p, a, p) * pow(y, b, p) * pow(GEN, e, p) % p
            M = _xb(_H(_enc_int(pow(GEN, e, p), pb), LABEL + RED, b"nbzk-ot"), labels[i][j] + bytes(RED))
            out += [_enc_int(A, pb), _enc_int(B, pb), M]
    for gid, (op, a, b) in enumerate(c.gates):
        table = [b""] * 4
        if op == NOT:
            pair = (labels[a][1], labels[a][0])
            table = [rng.bytes(LABEL) for _ in range(4)]
        elif op in (CONST0, CONST1):
            pair = _fresh_pair(rng)
            table = [pair[1 if op == CONST1 else 0]] + [rng.bytes(LABEL) for _ in range(3)]
        else:
            pair = _fresh_pair(rng)
            for va in (0, 1):
                for vb in (0, 1):
                    la, lb = labels[a][va], labels[b][vb]
                    v = (va & vb) if op == AND else (va ^ vb)
                    table[2 * _color(la) + _color(lb)] = _xb(_row_key(la, lb, gid), pair[v])
        labels.append(pair)
        out.append(_GATE_REC.pack(op, a, b) + b"".join(table))
    for gid in range(len(c.gates), budget):
        out.append(_GATE_REC.pack(AND, 0, 0) + rng.bytes(4 * LABEL))
    for w in c.outputs:
        l0, l1 = labels[w]
        out.append(struct.pack(">I", w) + _H(l0, OUT_HASH, b"nbzk-gc-out") + _H(l1, OUT_HASH, b"nbzk-gc-out"))
    return b"".join(out)


def decrypt(tier, x_r, n, budget, m, ev: bytes) -> Bits:
    p, q, pb = group(tier)
    if len(ev) != ev_len(tier, n, budget, m):
        raise GarbledError("evaluated flow has %d bytes, expected %d" % (len(ev), ev_len(tier, n, budget, m)))
    off = 0
    wires = []
    step = 2 * pb + LABEL + RED
    for i in range(n):
        found = []
        for j in (0, 1):
            rec = ev[off:off + step]
            off += step
            A, B = int.from_bytes(rec[:pb], "big"), int.from_bytes(rec[pb:2 * pb], "big")
            if not (0 < A < p and 0 < B < p):
                raise GarbledError("OT response out of range")
            K = B * pow(A, q - x_r if x_r else 0, p) % p
            plain = _xb(_H(_enc_int(K, pb), LABEL + RED, b"nbzk-ot"), rec[2 * pb:])
            if plain[LABEL:] == bytes(RED):
                found.append(plain[:LABEL])
        if len(found) != 1:
            raise GarbledError("OT response for input %d does not open" % i)
        wires.append(found[0])
    rec_len = _GATE_REC.size + 4 * LABEL
    for gid in range(budget):
        rec = ev[off:off + rec_len]
        off += rec_len
        op, a, b = _GATE_REC.unpack_from(rec)
        table = [rec[_GATE_REC.size + LABEL * r:_GATE_REC.size + LABEL * (r + 1)] for r in range(4)]
        here = n + gid
        if a >= here or (op in (AND, XOR) and b >= here):
            raise GarbledError("gate %d is not topological" % gid)
        if op == NOT:
            wires.append(wires[a])
        elif op in (CONST0, CONST1):
            wires.append(table[0])
        elif op in (AND, XOR):
            la, lb = wires[a], wires[b]
            wires.append(_xb(_row_key(la, lb, gid), table[2 * _color(la) + _color(lb)]))
        else:
            raise GarbledError("unknown gate op %d" % op)
    out = []
    for _ in range(m):
        (w,) = struct.unpack_from(">I", ev, off)
        h0, h1 = ev[off + 4:off + 4 + OUT_HASH], ev[off + 4 + OUT_HASH:off + 4 + 2 * OUT_HASH]
        off += 4 + 2 * OUT_HASH
        if w >= len(wires):
            raise GarbledError("output wire out of range")
        h = _H(wires[w], OUT_HASH, b"nbzk-gc-out")
        if h == h0:
            out.append(0)
        elif h == h1:
            out.append(1)
        else:
            raise GarbledError("output label does not decode")
    return tuple(out)


def _dlog(tier, h):
    """Baby-step giant-step discrete log base GEN (micro tier only)."""
    p, q, _ = group(tier)
    m = int(q ** 0.5) + 1
    table = {}
    e = 1
    for j in range(m):
        table.setdefault(e, j)
        e = e * GEN % p
    step = pow(GEN, (q - m) % q, p)
    gamma = h
    for i in range(m):
        if gamma in table:
            return (i * m + table[gamma]) % q
        gamma = gamma * step % p
    return None


def extract(tier, n, data: bytes):
    """Unbounded extractor: the plaintext bits of a first flow, or None."""
    if tier != "micro":
        raise GarbledError("extraction is only available at the micro tier")
    try:
        y, pairs = _parse_ct(tier, n, data)
    except GarbledError:
        return None
    p, q, _ = group(tier)
    if pow(y, q, p) != 1:
        return None
    x_r = _dlog(tier, y)
    if x_r is None:
        return None
    bits = []
    for c1, c2 in pairs:
        if pow(c1, q, p) != 1:
            return None
        gs = c2 * pow(c1, (q - x_r) % q, p) % p
        if gs == 1:
            bits.append(0)
        elif gs == GEN:
            bits.append(1)
        else:
            return None
    return tuple(bits)
