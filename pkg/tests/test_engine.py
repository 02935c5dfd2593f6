import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from immunization import engine, graphs
from immunization.engine import ModelParams, Protocol, SimState
from immunization.errors import FormatError

import oracles
from conftest import ALL_PARAMS, star_protocol


def test_state_codes_and_names():
    p = ModelParams(2, 3)
    assert p.period == 5
    assert [p.name(c) for c in range(6)] == ["R", "Y1", "Y2", "Y3", "G1", "G2"]
    assert p.is_green(4) and not p.is_green(3)
    with pytest.raises(ValueError):
        ModelParams(0, 1)


def test_transition_table_on_single_edge():
    # vertex 0 runs through every class while vertex 1 stays red
    g = graphs.path(2)
    p = ModelParams(2, 2)
    state = SimState.initial(2)
    seq = []
    for a in [{0}, set(), set(), set(), set(), set()]:
        state = engine.step(g, state, a, p)
        seq.append(state.codes[0])
    # G2 -> G1 -> infected Y2 -> Y1 -> R -> R
    assert seq == [4, 3, 2, 1, 0, 0]


def test_pending_green_sees_reds_after_phase_one():
    # Y1 neighbour turns red in the same step and infects the G1 vertex
    g = graphs.path(2)
    p = ModelParams(1, 1)
    after = engine.step(g, SimState((2, 1), 0), set(), p)
    assert after.codes == (1, 0)
    # an immunized neighbour in this step protects it
    after = engine.step(g, SimState((2, 0), 0), {1}, p)
    assert after.codes == (2, 2)


def test_star_example_trace():
    g = graphs.star(3)
    trace = engine.run(g, star_protocol(3))
    assert engine.clears(trace)
    assert trace.code(3, 0) == 1  # x is yellow at time 3
    assert engine.color_classes(trace, 3).yellow[0] == frozenset({0})
    assert engine.format_trace(trace).splitlines()[3] == "t 3 R:3 Y1:0 G1:1,2"


def test_vectorised_run_matches_reference_step():
    g = graphs.grid(3)
    rng = np.random.default_rng(7)
    for params in ALL_PARAMS:
        steps = [set(rng.choice(9, size=rng.integers(0, 4), replace=False).tolist()) for _ in range(12)]
        proto = Protocol(params, tuple(steps))
        trace = engine.run(g, proto)
        ref = oracles.engine_reference_run(g, proto)
        assert [tuple(int(c) for c in row) for row in trace.codes] == ref


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10**6), st.sampled_from(ALL_PARAMS), st.integers(1, 10))
def test_run_matches_independent_oracle(n, seed, params, length):
    h = nx.gnp_random_graph(n, 0.5, seed=seed)
    g = oracles.from_nx(h)
    rng = np.random.default_rng(seed)
    steps = [set(rng.choice(n, size=rng.integers(0, n + 1), replace=False).tolist()) for _ in range(length)]
    proto = Protocol(params, tuple(steps))
    trace = engine.run(g, proto)
    assert [tuple(int(c) for c in row) for row in trace.codes] == oracles.simulate(g, steps, params)


def test_simulator_matches_run():
    g = graphs.petersen()
    proto = Protocol(ModelParams(1, 2), ({0, 1}, {2}, set(), {3, 4, 5}))
    sim = engine.Simulator(g, proto.params)
    for a in proto.steps:
        sim.advance(a)
    assert np.array_equal(sim.codes, engine.run(g, proto).codes[-1])


def test_all_at_once_clears_and_empty_protocol_does_not():
    g = graphs.cycle(5)
    assert engine.clears(engine.run(g, Protocol(ModelParams(), (set(range(5)),))))
    assert not engine.clears(engine.run(g, Protocol(ModelParams(), ())))


def test_out_of_range_vertex_rejected():
    with pytest.raises(ValueError):
        engine.run(graphs.star(3), Protocol(ModelParams(), ({99},)))


def test_trace_accessors():
    g = graphs.star(3)
    trace = engine.run(g, star_protocol(3))
    assert len(trace) == 6 and trace.length == 5
    assert trace.red(0) == frozenset(range(4))
    assert trace.green(5) == frozenset(range(4))
    with pytest.raises(IndexError):
        engine.color_classes(trace, 6)
    with pytest.raises(ValueError):
        engine.protocol_width(Protocol(ModelParams(), ()))


@pytest.mark.parametrize("params", ALL_PARAMS)
def test_pack_round_trip(params):
    rng = np.random.default_rng(1)
    codes = tuple(int(c) for c in rng.integers(0, params.r + params.s + 1, size=9))
    packed = engine.pack_state(codes, params)
    assert engine.unpack_state(packed, 9, params) == codes
    # little-endian: vertex 0 is the lowest digit
    assert engine.pack_state((1, 0, 0), params) == 1


def test_protocol_format_round_trip():
    proto = Protocol(ModelParams(2, 1), ({3, 1}, set(), {0}))
    text = engine.format_protocol(proto)
    assert text == "rs 2 1\na 1 3\na\na 0\n"
    assert engine.parse_protocol(text) == proto


@pytest.mark.parametrize("text, line", [
    ("a 1\n", 1),
    ("rs 1 1\na x\n", 2),
    ("rs 1 0\n", 1),
    ("rs 1 1\nq 2\n", 2),
    ("rs 1 1\na -3\n", 2),
])
def test_protocol_parse_errors(text, line):
    with pytest.raises(FormatError) as info:
        engine.parse_protocol(text)
    assert f"line {line}" in str(info.value)
