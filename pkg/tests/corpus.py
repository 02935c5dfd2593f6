"""Seeded corpus of clearing protocols on connected graphs with at most 6 vertices."""

from __future__ import annotations

import functools
import random

from immunization import engine, pathdecomp, protocols, solver
from immunization.engine import Protocol

import oracles
from conftest import ALL_PARAMS


@functools.lru_cache(maxsize=None)
def clearing_corpus(seed: int = 2024):
    """List of ``(graph, protocol, source)``; every protocol clears its graph."""
    rng = random.Random(seed)
    out = []
    small = oracles.connected_graphs(5, min_n=2)
    six = oracles.connected_graphs(6, min_n=6)
    for params in ALL_PARAMS:
        for g in small + six:
            pd = pathdecomp.pathwidth(g)[1]
            out.append((g, protocols.protocol_from_decomposition(g, pd, params), "decomposition"))
        for g in small:
            res = solver.immunization_number(g, params)
            witness = res.upper.protocol
            out.append((g, witness, "solver"))
            for _ in range(2):
                steps = tuple(a | {v for v in range(g.n) if rng.random() < 0.25} for a in witness.steps)
                out.append((g, Protocol(params, steps), "superset"))
        for g in rng.sample(six, 30):
            proto = _random_clearing(g, params, rng)
            if proto is not None:
                out.append((g, proto, "random"))
    minimized = [(g, protocols.minimize(g, p), "minimized") for g, p, _ in out[::3]]
    out.extend(minimized)
    for g, p, _ in out:
        assert engine.clears(engine.run(g, p))
    return out


def _random_clearing(g, params, rng, tries: int = 30):
    for _ in range(tries):
        steps = []
        sim = engine.Simulator(g, params)
        for _ in range(4 * g.n):
            a = set(rng.sample(range(g.n), rng.randint(1, min(3, g.n))))
            steps.append(frozenset(a))
            sim.advance(a)
            if all(sim.is_green(v) for v in range(g.n)):
                return Protocol(params, tuple(steps))
    return None


def red_never_early(g, proto) -> bool:
    """A vertex immunized at ``t`` is not red at any of ``t .. t + r + s - 1``."""
    trace = engine.run(g, proto)
    horizon = proto.params.period - 1
    for t, a in enumerate(proto.steps, 1):
        for tau in range(t, min(t + horizon, trace.length) + 1):
            if a & trace.red(tau):
                return False
    return True


def restriction_clears(g, proto, rng) -> bool:
    keep = [v for v in range(g.n) if rng.random() < 0.7] or [0]
    chosen = {v: True for v in keep}
    edges = [e for e in g.edges if e[0] in chosen and e[1] in chosen and rng.random() < 0.8]
    h, sub = protocols.restrict(proto, g, keep, edges)
    return engine.clears(engine.run(h, sub))


def minimize_ok(g, proto) -> bool:
    out = protocols.minimize(g, proto)
    return (len(out) == len(proto)
            and all(b <= a for a, b in zip(proto.steps, out.steps))
            and engine.clears(engine.run(g, out))
            and protocols.is_minimal(g, out))


def theorem_violations(entries, seed: int = 7) -> dict[str, int]:
    rng = random.Random(seed)
    bad = {name: 0 for name in ("cautious=>monotone", "minimal&monotone=>cautious",
                                "monotone<=>yellow", "no-early-red", "restriction", "minimize")}
    for g, proto, _ in entries:
        cautious = protocols.is_cautious(g, proto)
        monotone = protocols.is_monotone(g, proto)
        minimal = protocols.is_minimal(g, proto)
        bad["cautious=>monotone"] += cautious and not monotone
        bad["minimal&monotone=>cautious"] += minimal and monotone and not cautious
        bad["monotone<=>yellow"] += monotone != protocols.is_monotone_via_yellow(g, proto)
        bad["no-early-red"] += not red_never_early(g, proto)
        bad["restriction"] += not restriction_clears(g, proto, rng)
        bad["minimize"] += not minimize_ok(g, proto)
    return bad
