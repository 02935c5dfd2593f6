"""Exact simulation of the (r, s) immunization dynamics.

Per-vertex state codes (portable, also used for hashing solver states)::

    0            red (contagious)
    1 .. s       yellow Y(1) .. Y(s)   (Y(i): i steps of latency left)
    s+1 .. s+r   green  G(1) .. G(r)   (G(i): i steps of protection left)

One time-step with immunization set ``A`` is a two-phase update. Phase 1 handles every transition
that does not look at neighbours: immunized vertices become ``G(r)``, red stays red, ``Y(1)``
becomes red, the other yellow and green levels count down, and unimmunized ``G(1)`` vertices are
set aside. Phase 2 infects each set-aside ``G(1)`` vertex that has a neighbour among the vertices
that are red after phase 1 (it becomes ``Y(s)``); the rest stay ``G(1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError
from .graphs import Graph

RED = 0


@dataclass(frozen=True)
class ModelParams:
    """Protective period ``r`` and latency ``s``, both at least one time-step."""

    r: int = 1
    s: int = 1

    def __post_init__(self):
        if self.r < 1 or self.s < 1:
            raise ValueError(f"r and s must be >= 1, got r={self.r}, s={self.s}")

    @property
    def period(self) -> int:
        return self.r + self.s

    def yellow(self, level: int) -> int:
        return level

    def green(self, level: int) -> int:
        return self.s + level

    def is_green(self, code: int) -> bool:
        return code > self.s

    def name(self, code: int) -> str:
        if code == RED:
            return "R"
        if code <= self.s:
            return f"Y{code}"
        return f"G{code - self.s}"


@dataclass(frozen=True)
class Protocol:
    params: ModelParams
    steps: tuple[frozenset[int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(frozenset(a) for a in self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def width(self) -> int:
        return protocol_width(self)

    def step_set(self, t: int) -> frozenset[int]:
        """``A_t`` for ``1 <= t <= N`` (1-based, as in the model)."""
        return self.steps[t - 1]

    def vertices(self) -> frozenset[int]:
        return frozenset().union(*self.steps) if self.steps else frozenset()


@dataclass(frozen=True)
class SimState:
    codes: tuple[int, ...]
    t: int = 0

    @classmethod
    def initial(cls, n: int) -> "SimState":
        return cls((RED,) * n, 0)


@dataclass(frozen=True)
class ColorClasses:
    """Partition of the vertices at one time-step. ``yellow[i]`` is ``Y(i+1)``, ``green[i]`` is ``G(i+1)``."""

    t: int
    red: frozenset[int]
    yellow: tuple[frozenset[int], ...]
    green: tuple[frozenset[int], ...]

    @property
    def all_yellow(self) -> frozenset[int]:
        return frozenset().union(*self.yellow)

    @property
    def all_green(self) -> frozenset[int]:
        return frozenset().union(*self.green)


class Trace:
    """States ``0..N`` produced by a protocol on a graph. Row ``t`` of ``codes`` is the state at ``t``."""

    def __init__(self, graph: Graph, protocol: Protocol, codes: np.ndarray):
        self.graph = graph
        self.protocol = protocol
        self.codes = codes
        self.codes.setflags(write=False)

    @property
    def params(self) -> ModelParams:
        return self.protocol.params

    @property
    def length(self) -> int:
        """Number of time-steps ``N``; the trace holds ``N + 1`` states."""
        return self.codes.shape[0] - 1

    def __len__(self) -> int:
        return self.codes.shape[0]

    def state(self, t: int) -> SimState:
        return SimState(tuple(int(c) for c in self.codes[t]), t)

    @property
    def states(self) -> list[SimState]:
        return [self.state(t) for t in range(len(self))]

    def red(self, t: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.codes[t] == RED).tolist())

    def green(self, t: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.codes[t] > self.params.s).tolist())

    def code(self, t: int, v: int) -> int:
        return int(self.codes[t, v])


def check_protocol(graph: Graph, protocol: Protocol) -> None:
    """Raise ``ValueError`` if some immunization set names a vertex outside the graph."""
    for t, a in enumerate(protocol.steps, 1):
        bad = [v for v in a if not 0 <= v < graph.n]
        if bad:
            raise ValueError(f"step {t} immunizes vertex {min(bad)}, graph has {graph.n} vertices")


def step(graph: Graph, state: SimState, immunize: Iterable[int], params: ModelParams) -> SimState:
    """Advance one time-step, straight from the transition table."""
    a = frozenset(immunize)
    for v in a:
        if not 0 <= v < graph.n:
            raise ValueError(f"vertex {v} is not in the graph")
    if len(state.codes) != graph.n:
        raise ValueError("state does not belong to this graph")
    r, s = params.r, params.s
    g1 = s + 1
    new = list(state.codes)
    pending = []
    for v, c in enumerate(state.codes):
        if v in a:
            new[v] = s + r
        elif c == RED or c == 1:
            new[v] = RED
        elif c == g1:
            pending.append(v)
        else:  # Y(i), i >= 2, or G(i), i >= 2
            new[v] = c - 1
    for v in pending:
        if any(new[w] == RED for w in graph.adjacency[v]):
            new[v] = s  # Y(s)
    return SimState(tuple(new), state.t + 1)


def _advance(adj, codes: np.ndarray, a: np.ndarray, r: int, s: int) -> np.ndarray:
    """Vectorised :func:`step` on a code array with a boolean immunization mask."""
    new = codes.copy()
    new[codes == 1] = RED
    countdown = ((codes >= 2) & (codes <= s)) | ((codes >= s + 2) & (codes <= s + r))
    new[countdown] -= 1
    pending = (codes == s + 1) & ~a
    new[a] = s + r
    red = (new == RED).astype(np.int32)
    hit = adj @ red
    new[pending & (hit > 0)] = s
    return new


class Simulator:
    """Incremental vectorised simulation, for callers that build a protocol step by step."""

    def __init__(self, graph: Graph, params: ModelParams):
        self.graph = graph
        self.params = params
        self.adj = graph.adjacency_matrix
        self.codes = np.zeros(graph.n, dtype=np.int16)
        self.t = 0

    def advance(self, immunize: Iterable[int]) -> np.ndarray:
        a = np.zeros(self.graph.n, dtype=bool)
        idx = list(immunize)
        if idx:
            a[idx] = True
        self.codes = _advance(self.adj, self.codes, a, self.params.r, self.params.s)
        self.t += 1
        return self.codes

    def code(self, v: int) -> int:
        return int(self.codes[v])

    def is_green(self, v: int) -> bool:
        return int(self.codes[v]) > self.params.s


def run(graph: Graph, protocol: Protocol) -> Trace:
    """Simulate ``protocol`` from the all-red state; the result holds states ``0..N``."""
    check_protocol(graph, protocol)
    params = protocol.params
    n = graph.n
    out = np.zeros((len(protocol) + 1, n), dtype=np.int16)
    adj = graph.adjacency_matrix
    a = np.zeros(n, dtype=bool)
    for t, immunize in enumerate(protocol.steps, 1):
        a[:] = False
        if immunize:
            a[list(immunize)] = True
        out[t] = _advance(adj, out[t - 1], a, params.r, params.s)
    return Trace(graph, protocol, out)


def clears(trace: Trace) -> bool:
    """True iff every vertex is green at the final time-step."""
    return bool(np.all(trace.codes[-1] > trace.params.s))


def protocol_width(protocol: Protocol) -> int:
    if not protocol.steps:
        raise ValueError("width of an empty protocol is undefined")
    return max(len(a) for a in protocol.steps)


def color_classes(trace: Trace, t: int) -> ColorClasses:
    if not 0 <= t < len(trace):
        raise IndexError(f"time {t} outside 0..{trace.length}")
    row = trace.codes[t]
    s, r = trace.params.s, trace.params.r

    def members(code):
        return frozenset(np.flatnonzero(row == code).tolist())

    return ColorClasses(
        t,
        members(RED),
        tuple(members(i) for i in range(1, s + 1)),
        tuple(members(s + i) for i in range(1, r + 1)),
    )


def pack_state(codes: Sequence[int], params: ModelParams) -> int:
    """Pack a code vector little-endian in base ``r + s + 1`` (vertex 0 is the lowest digit)."""
    base = params.r + params.s + 1
    out = 0
    for c in reversed(codes):
        out = out * base + int(c)
    return out


def unpack_state(value: int, n: int, params: ModelParams) -> tuple[int, ...]:
    base = params.r + params.s + 1
    codes = []
    for _ in range(n):
        value, c = divmod(value, base)
        codes.append(c)
    return tuple(codes)


# ---------------------------------------------------------------------------
# text formats


def format_protocol(protocol: Protocol) -> str:
    lines = [f"rs {protocol.params.r} {protocol.params.s}"]
    for a in protocol.steps:
        lines.append(" ".join(["a", *map(str, sorted(a))]))
    return "\n".join(lines) + "\n"


def parse_protocol(text: str) -> Protocol:
    params = None
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "rs":
            if params is not None:
                raise FormatError("duplicate 'rs' line", lineno)
            if len(parts) != 3:
                raise FormatError("expected 'rs <r> <s>'", lineno)
            try:
                params = ModelParams(int(parts[1]), int(parts[2]))
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
        elif parts[0] == "a":
            if params is None:
                raise FormatError("'a' line before 'rs' line", lineno)
            ids = []
            for tok in parts[1:]:
                try:
                    v = int(tok)
                except ValueError:
                    raise FormatError(f"expected a vertex id, got {tok!r}", lineno) from None
                if v < 0:
                    raise FormatError(f"negative vertex id {v}", lineno)
                ids.append(v)
            steps.append(frozenset(ids))
        else:
            raise FormatError(f"unknown line type {parts[0]!r}", lineno)
    if params is None:
        raise FormatError("missing 'rs <r> <s>' line")
    return Protocol(params, tuple(steps))


def format_trace(trace: Trace) -> str:
    lines = []
    for t in range(len(trace)):
        cc = color_classes(trace, t)
        parts = [f"t {t}", "R:" + _ids(cc.red)]
        parts.extend(f"Y{i}:" + _ids(ys) for i, ys in enumerate(cc.yellow, 1))
        parts.extend(f"G{i}:" + _ids(gs) for i, gs in enumerate(cc.green, 1))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _ids(vs) -> str:
    return ",".join(map(str, sorted(vs)))
