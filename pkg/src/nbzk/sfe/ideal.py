"""Ideal (plaintext-tracking) SFE backend.

Insecure by design: every ciphertext is masked under keys derived from a
fixed harness key, so the harness (and anyone reading this file) can open it.
What it does give is exact circuit privacy and, because every step is linear
once the randomness is fixed, tiny circuit forms for enc and dec. Those are
what the simulator runs under FHE.

Bit layouts (``lam`` = security parameter, ``n`` = plaintext bits)::

    ct   = rho_x (lam) || rho_k (lam) || x ^ ex(rho_x) ^ Kx (n) || dk ^ ex(rho_k) ^ Kk (lam) || tag (lam)
    tag  = fold(x || dk) ^ Kt
    ev   = rho (lam) || y ^ ex(rho) ^ ex(dk) ^ Ko (m) || fold(y || dk) ^ Kt'

``ex(v)`` repeats ``v`` cyclically to the needed length and ``fold`` XORs
together the bits with equal index mod ``lam``.
"""

from functools import lru_cache

from ..bits import to_bits
from ..circuit import CircuitBuilder
from ..toyhash import keystream

HARNESS_KEY = b"nbzk/sfe-ideal/harness-key/v1"


@lru_cache(maxsize=None)
def harness_bits(label: str, n: int):
    return to_bits(keystream(HARNESS_KEY + label.encode(), (n + 7) // 8), n)


def _ex(v, n):
    return tuple(v[i % len(v)] for i in range(n))


def _fold(v, lam):
    out = [0] * lam
    for i, b in enumerate(v):
        out[i % lam] ^= b
    return tuple(out)


def _xor(*vs):
    return tuple(sum(t) & 1 for t in zip(*vs))


def ct_bits_len(lam, n):
    return n + 4 * lam


def ev_bits_len(lam, m):
    return m + 2 * lam


def enc_bits(lam, dk, x, rho_x, rho_k):
    n = len(x)
    xm = _xor(x, _ex(rho_x, n), harness_bits("x", n))
    km = _xor(dk, _ex(rho_k, lam), harness_bits("k", lam))
    tag = _xor(_fold(tuple(x) + tuple(dk), lam), harness_bits("t", lam))
    return tuple(rho_x) + tuple(rho_k) + xm + km + tag


def open_ct(lam, n, ct):
    """Recover (x, dk) and whether the tag verifies."""
    if len(ct) != ct_bits_len(lam, n):
        return None, None, False
    rho_x, rho_k = ct[:lam], ct[lam:2 * lam]
    xm, km, tag = ct[2 * lam:2 * lam + n], ct[2 * lam + n:3 * lam + n], ct[3 * lam + n:]
    x = _xor(xm, _ex(rho_x, n), harness_bits("x", n))
    dk = _xor(km, _ex(rho_k, lam), harness_bits("k", lam))
    ok = _xor(_fold(x + dk, lam), harness_bits("t", lam)) == tuple(tag)
    return x, dk, ok


def eval_bits(lam, dk, y, rho):
    m = len(y)
    ym = _xor(y, _ex(rho, m), _ex(dk, m), harness_bits("o", m))
    tag = _xor(_fold(tuple(y) + tuple(dk), lam), harness_bits("u", lam))
    return tuple(rho) + ym + tag


def dec_bits(lam, dk, ev, m, check=True):
    if len(ev) != ev_bits_len(lam, m):
        return None
    rho, ym, tag = ev[:lam], ev[lam:lam + m], ev[lam + m:]
    y = _xor(ym, _ex(rho, m), _ex(dk, m), harness_bits("o", m))
    if check and _xor(_fold(y + tuple(dk), lam), harness_bits("u", lam)) != tuple(tag):
        return None
    return y


# -- circuit forms ------------------------------------------------------------

def _xor_const(b, wires, consts):
    return [b.not_(w) if c else w for w, c in zip(wires, consts)]


def enc_circuit(lam, n, dk, rho_x, rho_k):
    """x -> ct with dk and the encryption randomness hard-wired."""
    b = CircuitBuilder(n)
    x = b.inputs
    xm = _xor_const(b, x, _xor(_ex(rho_x, n), harness_bits("x", n)))
    km = b.consts(_xor(dk, _ex(rho_k, lam), harness_bits("k", lam)))
    tconst = _xor(_fold((0,) * n + tuple(dk), lam), harness_bits("t", lam))
    tag = []
    for j in range(lam):
        acc = b.const(tconst[j])
        for i in range(j, n, lam):
            acc = b.xor(acc, x[i])
        tag.append(acc)
    return b.build(b.consts(rho_x) + b.consts(rho_k) + xm + km + tag)


def eval_gadget(b, lam, n, ct_wires, rho_wires, fn):
    """Emit the evaluation of ``fn`` (builder, x wires -> y wires) on a ciphertext.

    Returns the evaluated-flow wires.
    """
    rho_x, rho_k = ct_wires[:lam], ct_wires[lam:2 * lam]
    xm, km = ct_wires[2 * lam:2 * lam + n], ct_wires[2 * lam + n:3 * lam + n]
    kx, kk = harness_bits("x", n), harness_bits("k", lam)
    x = _xor_const(b, [b.xor(w, rho_x[i % lam]) for i, w in enumerate(xm)], kx)
    dk = _xor_const(b, [b.xor(w, rho_k[i]) for i, w in enumerate(km)], kk)
    v = list(x) + list(dk)
    want = _xor_const(b, [b.xor_all([v[i] for i in range(j, len(v), lam)]) for j in range(lam)],
                      harness_bits("t", lam))
    bad = b.not_(b.equals(want, ct_wires[3 * lam + n:4 * lam + n]))
    # a forged first flow is answered with all-ones key and output, as natively
    dk = [b.or_(w, bad) for w in dk]
    y = [b.or_(w, bad) for w in fn(b, x)]
    m = len(y)
    ym = _xor_const(b, [b.xor(b.xor(w, rho_wires[i % lam]), dk[i % lam]) for i, w in enumerate(y)],
                    harness_bits("o", m))
    v = y + dk
    tag = []
    for j in range(lam):
        tag.append(b.xor_all([v[i] for i in range(j, len(v), lam)]))
    tag = _xor_const(b, tag, harness_bits("u", lam))
    return list(rho_wires) + ym + tag


def eval_circuit(lam, n, fn, m=None):
    """(ct || rho) -> ev for a fixed function ``fn``."""
    b = CircuitBuilder(ct_bits_len(lam, n) + lam)
    w = b.inputs
    return b.build(eval_gadget(b, lam, n, w[:ct_bits_len(lam, n)], w[ct_bits_len(lam, n):], fn))


def dec_circuit(lam, m, dk):
    """ev -> y with dk hard-wired. The output tag is not checked here."""
    b = CircuitBuilder(ev_bits_len(lam, m))
    w = b.inputs
    rho, ym = w[:lam], w[lam:lam + m]
    consts = _xor(_ex(dk, m), harness_bits("o", m))
    return b.build(_xor_const(b, [b.xor(v, rho[i % lam]) for i, v in enumerate(ym)], consts))
