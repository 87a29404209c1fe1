import random

import pytest
from hypothesis import given, settings, strategies as st

from nbzk.circuit import (AND, NOT, XOR, ArityError, BoundCircuit, Circuit, CircuitBuilder, CircuitError,
                          bind_inputs, compose_circuits, constant_circuit, deserialize_circuit, disassemble,
                          eval_all_inputs, eval_batch, eval_circuit, identity_circuit, make_circuit,
                          serialize_circuit, validate_circuit)
from oracles import all_inputs, naive_eval, random_circuit


def xor_circuit():
    return make_circuit(2, [2], [(XOR, 0, 1)])


def adder(width):
    b = CircuitBuilder(2 * width)
    return b.build(b.add(b.inputs[:width], b.inputs[width:]))



def as_int(bits):
    return sum(v << i for i, v in enumerate(bits))


def test_xor_gate():
    assert eval_circuit(xor_circuit(), (1, 0)) == (1,)
    assert [xor_circuit()(x)[0] for x in all_inputs(2)] == [0, 1, 1, 0]


def test_identity():
    c = identity_circuit(8)
    x = (1, 0, 1, 1, 0, 0, 1, 0)
    assert c(x) == x


def test_random_circuits_match_reference_interpreter(rnd):
    for _ in range(20):
        c = random_circuit(rnd, 8, 50, 6)
        table = eval_all_inputs(c)
        assert table == [naive_eval(c, x) for x in all_inputs(8)]


def test_batch_and_single_agree(rnd):
    c = random_circuit(rnd, 10, 80, 4)
    rows = [tuple(rnd.randrange(2) for _ in range(10)) for _ in range(70)]
    assert eval_batch(c, rows) == [eval_circuit(c, r) for r in rows]


def test_arity_mismatch():
    with pytest.raises(ArityError):
        eval_circuit(xor_circuit(), (1,))


def test_validate_wellformed_adder():
    assert validate_circuit(adder(4)) is None


def test_validate_not_topological():
    c = Circuit(2, (3,), ((AND, 0, 3), (XOR, 0, 1)))
    assert validate_circuit(c).startswith("not topological")
    with pytest.raises(CircuitError):
        make_circuit(2, [3], [(AND, 0, 3), (XOR, 0, 1)])


def test_validate_fan_in():
    c = Circuit(3, (3,), ((AND, 0, 1, 2),))
    assert validate_circuit(c).startswith("fan-in")


def test_validate_undefined_output():
    assert "undefined output" in validate_circuit(Circuit(2, (9,), ((AND, 0, 1),)))


def test_compose_not_not():
    n = make_circuit(1, [1], [(NOT, 0, 0)])
    assert compose_circuits(n, n)((1,)) == (1,)


def test_compose_identity_is_neutral(rnd):
    c = random_circuit(rnd, 6, 30, 3)
    assert eval_all_inputs(compose_circuits(identity_circuit(3), c)) == eval_all_inputs(c)
    assert eval_all_inputs(compose_circuits(c, identity_circuit(6))) == eval_all_inputs(c)


def test_adder_after_incrementer():
    # inner: (a, b) -> (a+1, b); outer adds; all mod 16
    b = CircuitBuilder(8)
    inc = b.add(b.inputs[:4], b.consts([1, 0, 0, 0]))
    inner = b.build(inc[:4] + b.inputs[4:])
    c = compose_circuits(adder(4), inner)
    for x in all_inputs(8):
        a, y = as_int(x[:4]), as_int(x[4:])
        assert as_int(c(x)) == ((a + 1) + y) % 16


def test_compose_arity():
    with pytest.raises(ArityError):
        compose_circuits(adder(4), identity_circuit(3))


def test_bind_and():
    c = bind_inputs(make_circuit(2, [2], [(AND, 0, 1)]), (0,))
    assert c.input_len == 1
    assert [c((v,)) for v in (0, 1)] == [(0,), (0,)]


def test_bind_full_input_is_constant():
    c = adder(3)
    x = (1, 1, 0, 1, 0, 1)
    k = bind_inputs(c, x)
    assert k.input_len == 0 and k(()) == c(x)
    assert all(op not in (AND, XOR) for op, _, _ in k.gates)


def test_bind_prefix_too_long():
    with pytest.raises(ArityError):
        bind_inputs(identity_circuit(2), (0, 1, 1))


def test_bound_circuit_matches_bind(rnd):
    c = random_circuit(rnd, 7, 40, 3)
    suffix = (1, 0, 1)
    bc = BoundCircuit(c, suffix)
    m = bc.materialize()
    for x in all_inputs(4):
        assert bc(x) == m(x) == naive_eval(c, x + suffix)


def test_serialization_roundtrip(rnd):
    c = random_circuit(rnd, 5, 25, 4)
    data = serialize_circuit(c)
    assert data[:4] == b"NBCI"
    assert len(data) == 17 + 9 * 25 + 4 * 4
    assert deserialize_circuit(data) == c
    with pytest.raises(CircuitError):
        deserialize_circuit(data[:-1])
    assert disassemble(c).startswith("; inputs=5 outputs=4 gates=25")


def test_constant_circuit():
    assert constant_circuit(3, (1, 0))((0, 1, 1)) == (1, 0)


def test_builder_derived_gates():
    b = CircuitBuilder(2)
    x, y = b.inputs
    c = b.build([b.or_(x, y), b.nand(x, y), b.xnor(x, y), b.mux(x, y, b.not_(y))])
    for v in all_inputs(2):
        p, q = v
        assert c(v) == (p | q, 1 - (p & q), 1 - (p ^ q), (1 - q) if p else q)


def test_depth_of_nand_chain():
    b = CircuitBuilder(2)
    w = b.inputs[0]
    for _ in range(10):
        w = b.nand(w, b.inputs[1])
    assert b.build([w]).depth() == 10


# -- property laws over random small circuits ---------------------------------

circuits = st.builds(lambda seed, n, g, m: random_circuit(random.Random(seed), n, g, m),
                     st.integers(0, 2 ** 32), st.integers(1, 6), st.integers(1, 30), st.integers(1, 4))


@settings(max_examples=120, deadline=None)
@given(c=circuits)
def test_law_eval_matches_reference(c):
    assert eval_all_inputs(c) == [naive_eval(c, x) for x in all_inputs(c.input_len)]


@settings(max_examples=120, deadline=None)
@given(c=circuits, seed=st.integers(0, 2 ** 32), data=st.data())
def test_law_compose(c, seed, data):
    outer = random_circuit(random.Random(seed), c.output_len, 15, 2)
    comp = compose_circuits(outer, c)
    for x in all_inputs(c.input_len):
        assert comp(x) == naive_eval(outer, naive_eval(c, x))


@settings(max_examples=120, deadline=None)
@given(c=circuits, data=st.data())
def test_law_bind(c, data):
    k = data.draw(st.integers(0, c.input_len))
    prefix = tuple(data.draw(st.lists(st.integers(0, 1), min_size=k, max_size=k)))
    bound = bind_inputs(c, prefix)
    assert bound.input_len == c.input_len - k
    for x in all_inputs(bound.input_len):
        assert bound(x) == naive_eval(c, prefix + x)
