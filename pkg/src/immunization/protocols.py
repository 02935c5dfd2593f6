"""Protocol classification (minimal, monotone, cautious), minimisation, subgraph restriction, and
the two conversions between protocols and path decompositions.

Time indices are 1-based: ``A_t`` is ``protocol.steps[t - 1]`` and trace row ``t`` is the state
after step ``t``.
"""

from __future__ import annotations

import math
from typing import Iterable

from . import engine
from .engine import ModelParams, Protocol, Trace
from .graphs import Edge, Graph, subgraph
from .pathdecomp import PathDecomposition, validate, width


def _red_sets(trace: Trace) -> list[frozenset[int]]:
    return [trace.red(t) for t in range(len(trace))]


def _unneeded(g: Graph, trace: Trace, reds: list[frozenset[int]], t: int) -> set[int]:
    """Vertices of ``A_{t+1}`` that are green at ``t`` and see no red neighbour while still protected.

    A vertex in ``G(l)`` at time ``t`` needs a neighbour in ``R_{t+l} .. R_{t+r}`` (clipped at ``N``)
    to justify immunizing it again at ``t + 1``.
    """
    params = trace.params
    last = trace.length
    out = set()
    for v in trace.protocol.step_set(t + 1):
        code = trace.code(t, v)
        if not params.is_green(code):
            continue
        level = code - params.s
        window = range(t + level, min(t + params.r, last) + 1)
        nbrs = g.adjacency[v]
        if not any(w in reds[tau] for tau in window for w in nbrs):
            out.add(v)
    return out


def is_minimal(g: Graph, protocol: Protocol) -> bool:
    trace = engine.run(g, protocol)
    reds = _red_sets(trace)
    return all(not _unneeded(g, trace, reds, t) for t in range(1, len(protocol)))


def minimize(g: Graph, protocol: Protocol) -> Protocol:
    """Drop unnecessary immunizations, last step first; the result clears and is minimal.

    The protocol is re-simulated before every decision because each removal lowers green levels
    further along.
    """
    if not engine.clears(engine.run(g, protocol)):
        raise ValueError("protocol does not clear the graph")
    steps = list(protocol.steps)
    n_steps = len(steps)
    if n_steps == 0:
        return protocol
    params = protocol.params
    if n_steps >= 2:
        trace = engine.run(g, protocol)
        steps[-1] = steps[-1] - trace.green(n_steps - 1)
    for k in range(n_steps - 2, 0, -1):
        current = Protocol(params, tuple(steps))
        trace = engine.run(g, current)
        drop = _unneeded(g, trace, _red_sets(trace), k)
        if drop:
            steps[k] = steps[k] - drop
    return Protocol(params, tuple(steps))


def restrict(protocol: Protocol, g: Graph, vertices: Iterable[int],
             edges: Iterable[Edge] | None = None) -> tuple[Graph, Protocol]:
    """Restrict ``protocol`` to a subgraph of ``g``.

    The subgraph is given by host vertex ids (and optionally a host edge subset; default induced)
    and is returned relabelled to ``0..k-1`` in increasing host-id order, together with the
    restricted protocol in the new ids.
    """
    h, host_ids = subgraph(g, vertices, edges)
    index = {v: i for i, v in enumerate(host_ids)}
    steps = tuple(frozenset(index[v] for v in a if v in index) for a in protocol.steps)
    return h, Protocol(protocol.params, steps)


def is_monotone(g: Graph, protocol: Protocol) -> bool:
    """No vertex is red at any time after it was first immunized."""
    trace = engine.run(g, protocol)
    first = {}
    for t, a in enumerate(protocol.steps, 1):
        for v in a:
            first.setdefault(v, t)
    reds = _red_sets(trace)
    return all(v not in reds[t] for v, t0 in first.items() for t in range(t0 + 1, len(trace)))


def is_monotone_via_yellow(g: Graph, protocol: Protocol) -> bool:
    """Every ``Y(1)`` vertex at time ``j < N`` is immunized at ``j + 1`` (vacuous at ``j = N``)."""
    trace = engine.run(g, protocol)
    for j in range(1, len(protocol)):
        about_to_turn = engine.color_classes(trace, j).yellow[0]
        if not about_to_turn <= protocol.step_set(j + 1):
            return False
    return True


def is_cautious(g: Graph, protocol: Protocol) -> bool:
    """Clears, and each vertex recurs within every ``r + s`` steps between its first and last immunization."""
    if not protocol.steps or not engine.clears(engine.run(g, protocol)):
        return False
    gap = protocol.params.period
    last = {}
    for t, a in enumerate(protocol.steps, 1):
        for v in a:
            if v in last and t - last[v] > gap:
                return False
            last[v] = t
    return True


def section_capacity(pd_width: int, params: ModelParams) -> int:
    return math.ceil((1 + pd_width) / params.period)


def protocol_from_decomposition(g: Graph, pd: PathDecomposition, params: ModelParams) -> Protocol:
    """Immunize bag by bag, cycling twice through ``r + s`` sections of each bag.

    A vertex keeps its section while it stays in consecutive bags, so it is immunized exactly every
    ``r + s`` steps. New vertices go, in increasing id, to the least-loaded section (lowest index on
    ties).
    """
    report = validate(g, pd)
    if not report.ok:
        raise ValueError(f"not a path decomposition: {report.describe()}")
    period = params.period
    cap = section_capacity(width(pd), params)
    steps: list[frozenset[int]] = []
    section_of: dict[int, int] = {}
    prev: frozenset[int] = frozenset()
    for bag in pd.bags:
        sections: list[set[int]] = [set() for _ in range(period)]
        for v in bag & prev:
            sections[section_of[v]].add(v)
        for v in sorted(bag - prev):
            i = min(range(period), key=lambda j: (len(sections[j]), j))
            sections[i].add(v)
            section_of[v] = i
        assert all(len(sec) <= cap for sec in sections)
        cycle = [frozenset(sec) for sec in sections]
        steps.extend(cycle)
        steps.extend(cycle)
        prev = bag
    return Protocol(params, tuple(steps))


def decomposition_from_cautious(g: Graph, protocol: Protocol) -> PathDecomposition:
    """Bags are unions of ``r + s`` consecutive immunization sets.

    When the protocol is shorter than ``r + s`` a single bag holding every immunized vertex is
    returned.
    """
    if not is_cautious(g, protocol):
        raise ValueError("protocol is not cautious")
    period = protocol.params.period
    steps = protocol.steps
    if len(steps) < period:
        return PathDecomposition([frozenset().union(*steps)])
    return PathDecomposition(
        frozenset().union(*steps[i:i + period]) for i in range(len(steps) - period + 1)
    )
