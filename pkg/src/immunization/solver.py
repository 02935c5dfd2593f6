"""Exact immunization numbers and machine-checkable bounds.

The exact search is a breadth-first reachability over whole-graph states, starting from all-red,
with every immunization set of size at most ``k`` (the empty set included) as a move. Moves are
tried by size, then in colex order, and the first parent to reach a state is kept, so witnesses
are deterministic and of minimum length.

Internally a state is the tuple of bitmasks ``(R, Y(1)..Y(s), G(1)..G(r))``; this is a bijection
with the engine's per-vertex code vector (see :func:`engine.pack_state`).

Lower bounds for ``r = s = 1`` also come from neighbourhood boundaries: if some ``p`` has every
set ``S`` with ``p - w + 1 <= |S| <= p`` satisfying ``|N(S) - S| >= 2w``, no width-``w`` protocol
clears the graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from . import config, engine
from .engine import ModelParams, Protocol
from .errors import BudgetExhausted, FormatError
from .graphs import Graph, colex_subsets, from_mask, is_caterpillar, min_boundary
from .pathdecomp import PathDecomposition, format_decomposition, parse_decomposition, pathwidth, validate
from .protocols import protocol_from_decomposition, section_capacity

CLEARED = "cleared"
IMPOSSIBLE = "impossible"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class WidthDecision:
    verdict: str
    k: int
    witness: Protocol | None = None
    states: int = 0
    budget: int | None = None

    @property
    def cleared(self) -> bool:
        return self.verdict == CLEARED


@dataclass(frozen=True)
class Certificate:
    """Evidence for a bound on the immunization number.

    ``kind == "lower"``: no protocol of width ``<= width`` clears the graph (so ``i > width``).
    ``kind == "upper"``: some protocol of width ``<= width`` clears it (so ``i <= width``).

    ``method`` is one of ``trivial`` (lower, width 0), ``boundary`` (lower, uses ``p``),
    ``non-caterpillar`` (lower, width 1), ``exhaustive`` (lower, full search), ``protocol`` and
    ``decomposition`` (upper).
    """

    kind: str
    params: ModelParams
    width: int
    method: str
    p: int | None = None
    protocol: Protocol | None = None
    decomposition: PathDecomposition | None = None
    notes: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SolveResult:
    """``number`` is ``None`` when every width up to the requested maximum was refuted."""

    number: int | None
    upper: Certificate | None
    lower: Certificate


# ---------------------------------------------------------------------------
# bitmask kernel


class _Kernel:
    def __init__(self, g: Graph, params: ModelParams):
        self.n = g.n
        self.r = params.r
        self.s = params.s
        self.full = (1 << g.n) - 1
        self.nbhd = g.neighborhood_of_mask

    def initial(self):
        return (self.full,) + (0,) * (self.s + self.r)

    def successor(self, state, a):
        s, r = self.s, self.r
        keep = self.full & ~a
        ys = state[1:1 + s]
        gs = state[1 + s:]
        red = (state[0] | ys[0]) & keep
        new_y = [ys[i + 1] & keep for i in range(s - 1)] + [0]
        new_g = [gs[i + 1] & keep for i in range(r - 1)] + [0]
        new_g[r - 1] |= a
        pending = gs[0] & keep
        infected = pending & self.nbhd(red) if pending and red else 0
        new_y[s - 1] |= infected
        new_g[0] |= pending & ~infected
        return (red, *new_y, *new_g)

    def is_goal(self, state) -> bool:
        return not any(state[:1 + self.s])

    def to_codes(self, state) -> tuple[int, ...]:
        codes = [0] * self.n
        for code, mask in enumerate(state):
            for v in from_mask(mask):
                codes[v] = code
        return tuple(codes)

    def from_codes(self, codes) -> tuple[int, ...]:
        masks = [0] * (1 + self.s + self.r)
        for v, c in enumerate(codes):
            masks[c] |= 1 << v
        return tuple(masks)


def _moves(n: int, k: int) -> list[int]:
    out = []
    for size in range(0, min(k, n) + 1):
        out.extend(colex_subsets(n, size))
    return out


def clearable_with_width(g: Graph, params: ModelParams, k: int, max_states: int | None = None,
                         ) -> WidthDecision:
    """Decide whether some protocol of width ``<= k`` clears ``g``, by exhaustive BFS."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if max_states is None:
        max_states = config.max_states()
    kernel = _Kernel(g, params)
    start = kernel.initial()
    if kernel.is_goal(start):  # empty graph
        return WidthDecision(CLEARED, k, Protocol(params, ()), 1)
    moves = _moves(g.n, k)
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for a in moves:
            nxt = kernel.successor(state, a)
            if nxt in parent:
                continue
            parent[nxt] = (state, a)
            if kernel.is_goal(nxt):
                return WidthDecision(CLEARED, k, _witness(parent, nxt, params), len(parent))
            if len(parent) >= max_states:
                return WidthDecision(EXHAUSTED, k, None, len(parent), max_states)
            queue.append(nxt)
    return WidthDecision(IMPOSSIBLE, k, None, len(parent))


def _witness(parent, state, params) -> Protocol:
    steps = []
    while parent[state] is not None:
        state, a = parent[state]
        steps.append(from_mask(a))
    steps.reverse()
    return Protocol(params, tuple(steps))


# ---------------------------------------------------------------------------
# boundary refutations (r = s = 1)


def _require_unit(params: ModelParams | None):
    if params is not None and (params.r, params.s) != (1, 1):
        raise ValueError("boundary lower bounds are only established for r = s = 1")


class _BoundaryCache:
    """Memoised ``min |N(S) - S| >= floor`` tests per subset size, sharing one subset budget."""

    def __init__(self, g: Graph, budget: int | None):
        self.g = g
        self.budget = config.max_subsets() if budget is None else budget
        self.spent = 0
        self.known: dict[int, int] = {}  # size -> exact minimum, or a value below the asked floor

    def at_least(self, size: int, bound: int) -> bool:
        if size in self.known:
            value, exact = self.known[size]
            if exact or value < bound:
                return value >= bound
        remaining = self.budget - self.spent
        if remaining <= 0:
            raise BudgetExhausted("boundary enumeration", self.budget, self.spent)
        res = min_boundary(self.g, size, floor=bound - 1, budget=remaining)
        self.spent += res.examined
        self.known[size] = (res.value, res.exact)
        return res.value >= bound


def refute_width_one(g: Graph, max_subsets: int | None = None) -> int | None:
    """Smallest ``p`` in ``1..n-1`` with every ``p``-set having boundary ``>= 2``, else ``None``.

    Such a ``p`` shows that no width-1 protocol clears ``g`` when ``r = s = 1``.
    """
    cache = _BoundaryCache(g, max_subsets)
    for p in range(1, g.n):
        if cache.at_least(p, 2):
            return p
    return None


def refute_width(g: Graph, w: int, max_subsets: int | None = None, params: ModelParams | None = None,
                 ) -> int | None:
    """Smallest ``p`` in ``w+1..n-1`` such that no ``S`` with ``p-w+1 <= |S| <= p`` has boundary
    ``<= 2w - 1``; ``None`` if there is none. A hit proves ``i(g) > w`` for ``r = s = 1``.
    """
    _require_unit(params)
    if w < 1:
        raise ValueError("w must be >= 1")
    cache = _BoundaryCache(g, max_subsets)
    for p in range(w + 1, g.n):
        if all(cache.at_least(size, 2 * w) for size in range(p - w + 1, p + 1)):
            return p
    return None


def boundary_refutes(g: Graph, w: int, p: int, max_subsets: int | None = None) -> bool:
    """Check one candidate ``p`` for :func:`refute_width` exhaustively (no early exit)."""
    if not (w >= 1 and w + 1 <= p <= g.n - 1):
        return False
    budget = config.max_subsets() if max_subsets is None else max_subsets
    spent = 0
    for size in range(p - w + 1, p + 1):
        res = min_boundary(g, size, budget=budget - spent)
        spent += res.examined
        if res.value < 2 * w:
            return False
    return True


# ---------------------------------------------------------------------------
# numbers and bounds


def upper_bound_pathwidth(g: Graph, params: ModelParams, max_vertices: int | None = None,
                          ) -> tuple[int, Certificate]:
    """``ceil((1 + pw) / (r + s))`` with the constructed protocol as evidence (checked by simulation)."""
    pw, pd = pathwidth(g, max_vertices)
    bound = section_capacity(pw, params)
    protocol = protocol_from_decomposition(g, pd, params)
    if not engine.clears(engine.run(g, protocol)) or engine.protocol_width(protocol) > bound:
        raise AssertionError("decomposition protocol failed its own check")
    cert = Certificate("upper", params, bound, "protocol", protocol=protocol, decomposition=pd,
                       notes={"pathwidth": pw})
    return bound, cert


def lower_bound(g: Graph, params: ModelParams, max_subsets: int | None = None) -> Certificate:
    """Best lower bound available without a full search.

    For ``r = s = 1`` this is the largest ``w`` refuted by boundaries or the caterpillar test;
    otherwise the trivial ``i > 0``.
    """
    best = Certificate("lower", params, 0, "trivial")
    if (params.r, params.s) != (1, 1) or g.n < 2:
        return best
    if g.m and not is_caterpillar(g):
        best = Certificate("lower", params, 1, "non-caterpillar")
    p = refute_width_one(g, max_subsets)
    if p is not None:
        best = Certificate("lower", params, 1, "boundary", p=p)
    w = 2
    while w + 1 <= g.n - 1:
        p = refute_width(g, w, max_subsets)
        if p is None:
            break
        best = Certificate("lower", params, w, "boundary", p=p)
        w += 1
    return best


def immunization_number(g: Graph, params: ModelParams, max_states: int | None = None,
                        max_subsets: int | None = None, max_width: int | None = None,
                        ) -> SolveResult:
    """Exact ``i_{r,s}(g)``: step ``k`` up from 1, skipping widths refuted by boundaries.

    The returned lower certificate covers width ``number - 1``. With ``max_width`` the search
    stops there; if nothing up to it clears, ``number`` and ``upper`` are ``None``.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    lower = Certificate("lower", params, 0, "trivial")
    unit = (params.r, params.s) == (1, 1)
    top = g.n if max_width is None else min(g.n, max_width)
    for k in range(1, top + 1):
        if unit and k < g.n:
            p = refute_width_one(g, max_subsets) if k == 1 else refute_width(g, k, max_subsets)
            if p is not None:
                lower = Certificate("lower", params, k, "boundary", p=p)
                continue
        decision = clearable_with_width(g, params, k, max_states)
        if decision.verdict == CLEARED:
            upper = Certificate("upper", params, k, "protocol", protocol=decision.witness)
            return SolveResult(k, upper, lower)
        if decision.verdict == EXHAUSTED:
            raise BudgetExhausted(f"state search at width {k}", decision.budget, decision.states)
        lower = Certificate("lower", params, k, "exhaustive", notes={"states": decision.states})
    if top < g.n:
        return SolveResult(None, None, lower)
    raise AssertionError("immunizing every vertex at once always clears")


# ---------------------------------------------------------------------------
# certificate checking


def check_certificate(g: Graph, cert: Certificate, max_states: int | None = None,
                      max_subsets: int | None = None) -> bool:
    """Re-verify a certificate from its evidence alone."""
    params = cert.params
    if cert.kind == "upper":
        if cert.method == "protocol":
            if cert.protocol is None or cert.protocol.params != params:
                return False
            try:
                trace = engine.run(g, cert.protocol)
            except ValueError:
                return False
            return bool(cert.protocol.steps) and engine.clears(trace) \
                and engine.protocol_width(cert.protocol) <= cert.width
        if cert.method == "decomposition":
            pd = cert.decomposition
            if pd is None or not pd.bags or not validate(g, pd).ok:
                return False
            if section_capacity(pd.width, params) > cert.width:
                return False
            protocol = protocol_from_decomposition(g, pd, params)
            return engine.clears(engine.run(g, protocol))
        return False
    if cert.kind != "lower":
        return False
    if cert.method == "trivial":
        return cert.width == 0 and g.n >= 1
    unit = (params.r, params.s) == (1, 1)
    if cert.method == "non-caterpillar":
        return unit and cert.width == 1 and g.m > 0 and not is_caterpillar(g)
    if cert.method == "boundary":
        if not unit or cert.p is None:
            return False
        if cert.width == 1:
            if not 1 <= cert.p <= g.n - 1:
                return False
            res = min_boundary(g, cert.p, budget=max_subsets)
            return res.value >= 2
        return boundary_refutes(g, cert.width, cert.p, max_subsets)
    if cert.method == "exhaustive":
        return not _naive_reachable(g, params, cert.width, max_states)
    return False


def _naive_reachable(g: Graph, params: ModelParams, k: int, max_states: int | None) -> bool:
    """Depth-first closure over per-vertex code vectors with the reference :func:`engine.step`."""
    if max_states is None:
        max_states = config.max_states()
    moves = [frozenset(c) for size in range(min(k, g.n) + 1) for c in combinations(range(g.n), size)]
    start = engine.SimState.initial(g.n)
    seen = {start.codes}
    stack = [start]
    while stack:
        state = stack.pop()
        for a in moves:
            nxt = engine.step(g, state, a, params)
            codes = nxt.codes
            if all(params.is_green(c) for c in codes):
                return True
            if codes not in seen:
                if len(seen) >= max_states:
                    raise BudgetExhausted("certificate re-check", max_states, len(seen))
                seen.add(codes)
                stack.append(engine.SimState(codes, 0))
    return False


# ---------------------------------------------------------------------------
# text form


def format_certificate(cert: Certificate) -> str:
    lines = [
        f"certificate {cert.kind}",
        f"rs {cert.params.r} {cert.params.s}",
        f"width {cert.width}",
        f"method {cert.method}",
    ]
    if cert.p is not None:
        lines.append(f"p {cert.p}")
    for key in sorted(cert.notes):
        lines.append(f"note {key} {cert.notes[key]}")
    if cert.protocol is not None:
        lines.append("protocol")
        lines.extend(engine.format_protocol(cert.protocol).splitlines()[1:])
    if cert.decomposition is not None:
        lines.append("decomposition")
        lines.extend(format_decomposition(cert.decomposition).splitlines())
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> Certificate:
    fields: dict = {"notes": {}}
    section = None
    steps: list[str] = []
    bags: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "certificate":
                fields["kind"] = parts[1]
            elif tag == "rs":
                fields["params"] = ModelParams(int(parts[1]), int(parts[2]))
            elif tag == "width":
                fields["width"] = int(parts[1])
            elif tag == "method":
                fields["method"] = parts[1]
            elif tag == "p":
                fields["p"] = int(parts[1])
            elif tag == "note":
                fields["notes"][parts[1]] = " ".join(parts[2:])
            elif tag in ("protocol", "decomposition"):
                section = tag
            elif tag == "a" and section == "protocol":
                steps.append(line)
            elif tag == "b" and section == "decomposition":
                bags.append(line)
            else:
                raise FormatError(f"unexpected line {line!r}", lineno)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed {tag!r} line", lineno) from None
    for key in ("kind", "params", "width", "method"):
        if key not in fields:
            raise FormatError(f"certificate is missing its {key!r} line")
    params = fields["params"]
    if steps:
        fields["protocol"] = engine.parse_protocol(f"rs {params.r} {params.s}\n" + "\n".join(steps))
    if bags:
        fields["decomposition"] = parse_decomposition("\n".join(bags))
    return Certificate(**fields)
