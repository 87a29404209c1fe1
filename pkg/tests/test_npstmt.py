import itertools
import random

import pytest

from nbzk import sfe
from nbzk.circuit import CONST0, CONST1, CircuitBuilder, eval_all_inputs, make_circuit
from nbzk.harness.instances import cycle4, k4, random_colorable, wheel5
from nbzk.npstmt import (ColoringInstance, Statement, StatementError, build_explainability_relation,
                         check_witness_3col, circuit_relation, coloring_bits, coloring_from_bits,
                         coloring_relation, or_relation, reduce_sat_to_3col)
from nbzk.protocol.config import ProtocolConfig
from nbzk.protocol.explain import VerifierCoins, verifier_msg_2a, verifier_msg_2c, verifier_msg_3b
from nbzk.rng import Rng
from oracles import all_inputs, proper_coloring, random_circuit, three_colorable


def triangle(coloring=None):
    return ColoringInstance(3, ((0, 1), (1, 2), (0, 2)), coloring)


def statement_of(c, instance=()):
    return Statement(circuit_relation("test", c, len(instance)), tuple(instance))


def test_check_witness_triangle():
    assert check_witness_3col(triangle((0, 1, 2)))
    assert not check_witness_3col(triangle((0, 0, 1)))
    with pytest.raises(StatementError):
        check_witness_3col(triangle())


def test_check_witness_agrees_with_edge_scan():
    rnd = random.Random(1)
    for _ in range(1000):
        n = rnd.randrange(2, 9)
        edges = tuple({(u, v) for u, v in ((rnd.randrange(n), rnd.randrange(n)) for _ in range(2 * n)) if u < v})
        col = tuple(rnd.randrange(3) for _ in range(n))
        assert check_witness_3col(ColoringInstance(n, edges, col)) == proper_coloring(edges, col)


def test_instance_validation_and_bytes():
    with pytest.raises(StatementError):
        ColoringInstance(2, ((0, 2),))
    g = cycle4()
    assert ColoringInstance.from_bytes(g.to_bytes(include_witness=True)) == g
    assert ColoringInstance.from_bytes(g.to_bytes()) == g.public()
    assert coloring_from_bits(coloring_bits((2, 0, 1))) == (2, 0, 1)


def test_named_instances():
    assert check_witness_3col(cycle4())
    assert not three_colorable(k4().n, k4().edges)
    assert not three_colorable(wheel5().n, wheel5().edges)
    g = random_colorable(30, seed=3)
    assert check_witness_3col(g) and len(g.edges) >= 29


def test_reduce_trivially_true():
    c = make_circuit(0, [0], [(CONST1, 0, 0)])
    g = reduce_sat_to_3col(statement_of(c), ())
    assert check_witness_3col(g)


def test_reduce_constant_false_is_not_colorable():
    c = make_circuit(0, [0], [(CONST0, 0, 0)])
    g = reduce_sat_to_3col(statement_of(c))
    assert g.n <= 12
    assert not three_colorable(g.n, g.edges)


def and_relation():
    b = CircuitBuilder(2)
    return b.build([b.and_(*b.inputs)])


def test_reduce_and_gate():
    # instance bit x, witness bit y, relation x AND y
    s1 = statement_of(and_relation(), (1,))
    g = reduce_sat_to_3col(s1, (1,))
    assert check_witness_3col(g)
    s0 = statement_of(and_relation(), (0,))
    g0 = reduce_sat_to_3col(s0)
    assert not three_colorable(g0.n, g0.edges)
    with pytest.raises(StatementError):
        reduce_sat_to_3col(s0, (1,))


def truth_table_circuit(n, table):
    """DNF circuit for an arbitrary n-input boolean function."""
    b = CircuitBuilder(n)
    terms = []
    for x in all_inputs(n):
        if table[x]:
            lits = [w if v else b.not_(w) for w, v in zip(b.inputs, x)]
            terms.append(b.and_all(lits))
    return b.build([b.or_all(terms) if terms else b.const(0)])


def test_reduction_exhaustive_on_two_bit_functions():
    for bits in itertools.product((0, 1), repeat=4):
        table = dict(zip(all_inputs(2), bits))
        c = truth_table_circuit(2, table)
        s = statement_of(c)
        g = reduce_sat_to_3col(s)
        assert three_colorable(g.n, g.edges) == any(bits)
        for w in all_inputs(2):
            if table[w]:
                assert check_witness_3col(reduce_sat_to_3col(s, w))


def test_reduction_on_random_four_input_relations():
    rnd = random.Random(5)
    for _ in range(40):
        c = random_circuit(rnd, 4, 8, 1)
        for inst in all_inputs(1):
            s = statement_of(c, inst)
            sat = [w for w in all_inputs(3) if c(inst + w)[0]]
            g = reduce_sat_to_3col(s)
            assert three_colorable(g.n, g.edges) == bool(sat)
            for w in sat:
                assert check_witness_3col(reduce_sat_to_3col(s, w))


def test_or_relation_and_coloring_relation():
    g = cycle4()
    col = coloring_relation(g)
    good, bad = coloring_bits(g.witness), coloring_bits((0, 0, 0, 0))
    assert col.check((), good) and not col.check((), bad)
    for w in (good, bad, coloring_bits((2, 1, 2, 0))):
        assert col.circuit()(w) == (int(col.check((), w)),)
    orr = or_relation(col, col)
    assert orr.check((), good + bad) and orr.check((), bad + good) and not orr.check((), bad + bad)
    assert orr.circuit()(bad + good) == (1,)


# -- explainability -------------------------------------------------------------

@pytest.fixture(scope="module")
def honest_prefix():
    config, x = ProtocolConfig(lam=8), cycle4()
    coins = VerifierCoins.sample(config, x, Rng(1))
    msgs = {"x": x}
    msgs["2a"] = verifier_msg_2a(config, coins)[0]
    msgs["2b"] = sfe.sfe_enc(sfe.sfe_gen(8, Rng(2)), (0,) * 8, Rng(3)).to_bytes()
    msgs["2c"] = verifier_msg_2c(config, coins, msgs["2b"])
    msgs["3b"] = verifier_msg_3b(coins)
    return config, msgs, coins


def test_honest_prefix_is_explainable(honest_prefix):
    config, msgs, coins = honest_prefix
    st = build_explainability_relation("V", msgs, config)
    assert st.holds(coins.to_bits())
    assert st.relation.circuit()(st.instance + coins.to_bits()) == (1,)


def test_flipped_byte_is_not_explained(honest_prefix):
    config, msgs, coins = honest_prefix
    for step in ("2a", "2c", "3b"):
        bad = dict(msgs)
        bad[step] = bytes([msgs[step][0] ^ 1]) + msgs[step][1:]
        st = build_explainability_relation("V", bad, config)
        assert not st.holds(coins.to_bits())
        assert st.relation.circuit()(st.instance + coins.to_bits()) == (0,)


def _free_sixteen(st, coins):
    """Relation circuit with all but the 16 bits of (t, s) fixed."""
    w = coins.to_bits()
    b = CircuitBuilder(16)
    out = b.embed(st.relation.circuit(), b.consts(st.instance) + b.inputs + b.consts(w[16:]))
    return eval_all_inputs(b.build(out))


def test_brute_force_explainability(honest_prefix):
    config, msgs, coins = honest_prefix
    st = build_explainability_relation("V", msgs, config)
    sat = [i for i, o in enumerate(_free_sixteen(st, coins)) if o[0]]
    true_ts = sum(v << i for i, v in enumerate(coins.t + coins.s))
    assert sat == [true_ts]
    bad = dict(msgs)
    bad["2c"] = msgs["2c"][:-1] + bytes([msgs["2c"][-1] ^ 0x80])
    st_bad = build_explainability_relation("V", bad, config)
    assert not any(o[0] for o in _free_sixteen(st_bad, coins))


def test_explainability_needs_instance(honest_prefix):
    config, msgs, _ = honest_prefix
    with pytest.raises(StatementError):
        build_explainability_relation("V", {k: v for k, v in msgs.items() if k != "x"}, config)
    with pytest.raises(StatementError):
        build_explainability_relation("P", msgs, config)
