"""Named graph instances, a seeded generator and a JSON instance format.

File format::

    {"n": 4, "edges": [[0, 1], [1, 2], [2, 3], [0, 3]], "witness": [0, 1, 0, 1]}

``witness`` is optional.
"""

import json
from typing import Optional

from ..npstmt import ColoringInstance, check_witness_3col
from ..rng import Rng


def cycle4() -> ColoringInstance:
    return ColoringInstance(4, ((0, 1), (1, 2), (2, 3), (0, 3)), (0, 1, 0, 1))


def k4() -> ColoringInstance:
    """The complete graph on four vertices: not 3-colourable."""
    return ColoringInstance(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))


def wheel5() -> ColoringInstance:
    """Odd wheel W_5 (hub plus a 5-cycle): not 3-colourable."""
    rim = [(i, i % 5 + 1) for i in range(1, 6)]
    return ColoringInstance(6, tuple([(0, i) for i in range(1, 6)] + rim))


NAMED = {"c4": cycle4, "k4": k4, "w5": wheel5}


def random_colorable(n: int, seed=0, degree: float = 3.0) -> ColoringInstance:
    """A 3-colourable graph with a planted colouring and about ``degree * n / 2`` edges."""
    rng = Rng(seed).child("instance", n)
    col = tuple(rng.below(3) for _ in range(n))
    target = max(n - 1, int(degree * n / 2))
    edges = set()
    # a spanning path keeps the graph connected wherever the colouring allows
    order = rng.permutation(n)
    for u, v in zip(order, order[1:]):
        if col[u] != col[v]:
            edges.add((min(u, v), max(u, v)))
    tries = 0
    while len(edges) < target and tries < 50 * target:
        tries += 1
        u, v = rng.below(n), rng.below(n)
        if u != v and col[u] != col[v]:
            edges.add((min(u, v), max(u, v)))
    g = ColoringInstance(n, tuple(sorted(edges)), col)
    assert check_witness_3col(g)
    return g


def load_instance(spec: str) -> ColoringInstance:
    """A named instance, ``random:N[:seed]``, or a path to a JSON instance file."""
    if spec in NAMED:
        return NAMED[spec]()
    if spec.startswith("random:"):
        parts = spec.split(":")
        return random_colorable(int(parts[1]), int(parts[2]) if len(parts) > 2 else 0)
    with open(spec) as fh:
        d = json.load(fh)
    w: Optional[tuple] = tuple(d["witness"]) if d.get("witness") is not None else None
    return ColoringInstance(int(d["n"]), tuple(tuple(e) for e in d["edges"]), w)


def dump_instance(x: ColoringInstance, path: str) -> None:
    d = {"n": x.n, "edges": [list(e) for e in x.edges],
         "witness": list(x.witness) if x.witness is not None else None}
    with open(path, "w") as fh:
        json.dump(d, fh)
