"""Independent reference implementations used as test oracles."""

from nbzk.circuit import AND, CONST0, CONST1, NOT, XOR, make_circuit


def naive_eval(c, x):
    """Reference interpreter: a plain loop over the gate list."""
    w = list(x)
    for op, a, b in c.gates:
        if op == AND:
            w.append(w[a] & w[b])
        elif op == XOR:
            w.append(w[a] ^ w[b])
        elif op == NOT:
            w.append(1 - w[a])
        elif op == CONST0:
            w.append(0)
        elif op == CONST1:
            w.append(1)
        else:
            raise AssertionError(op)
    return tuple(w[o] for o in c.outputs)


def random_circuit(rnd, n_in, n_gates, n_out):
    gates = []
    for g in range(n_gates):
        here = n_in + g
        op = rnd.choice((AND, AND, XOR, XOR, NOT, CONST0, CONST1))
        a = rnd.randrange(here) if here else 0
        b = rnd.randrange(here) if here else 0
        if op in (CONST0, CONST1) or (here == 0):
            gates.append((op if here else CONST1, 0, 0))
        elif op == NOT:
            gates.append((op, a, 0))
        else:
            gates.append((op, a, b))
    total = n_in + n_gates
    outs = [rnd.randrange(total) for _ in range(n_out)]
    return make_circuit(n_in, outs, gates)


def all_inputs(n):
    for v in range(1 << n):
        yield tuple((v >> i) & 1 for i in range(n))


def toyhash_reference(bits):
    """ToyHash from its written description, over a list of bits."""
    mask = (1 << 64) - 1
    rot = lambda v, r: ((v << r) | (v >> (64 - r))) & mask  # noqa: E731
    n = len(bits)
    padded = list(bits) + [1]
    padded += [0] * (-len(padded) % 128)
    s = [0x6A09E667F3BCC908 ^ n, 0xBB67AE8584CAA73B, 0x3C6EF372FE94F82B, 0xA54FF53A5F1D36F1]
    for k in range(0, len(padded), 128):
        blk = padded[k:k + 128]
        s[0] ^= sum(v << i for i, v in enumerate(blk[:64]))
        s[1] ^= sum(v << i for i, v in enumerate(blk[64:]))
        for r in range(12):
            s[0] = (s[0] + s[1]) & mask; s[3] = rot(s[3] ^ s[0], 32)
            s[2] = (s[2] + s[3]) & mask; s[1] = rot(s[1] ^ s[2], 40)
            s[0] = (s[0] + s[1]) & mask; s[3] = rot(s[3] ^ s[0], 48)
            s[2] = (s[2] + s[3]) & mask; s[1] = rot(s[1] ^ s[2], 1)
            s[0] ^= (0x243F6A8885A308D3 + r * 0x9E3779B97F4A7C15) & mask
    return s[0].to_bytes(8, "little") + s[1].to_bytes(8, "little")


def bits_of(data, n=None):
    out = [(data[i // 8] >> (i % 8)) & 1 for i in range(8 * len(data))]
    return out if n is None else out[:n]


def proper_coloring(edges, col):
    return all(col[u] != col[v] for u, v in edges)


def three_colorable(n, edges):
    """Exact 3-colourability through a CNF encoding and an off-the-shelf SAT solver."""
    from pysat.solvers import Minisat22

    var = lambda v, c: 3 * v + c + 1  # noqa: E731
    with Minisat22() as s:
        for v in range(n):
            s.add_clause([var(v, c) for c in range(3)])
        for u, v in edges:
            for c in range(3):
                s.add_clause([-var(u, c), -var(v, c)])
        return s.solve()
