"""Path decompositions: validation, width, and exact pathwidth.

Pathwidth is computed as vertex separation number: the minimum over vertex orderings of the
largest number of prefix vertices that still have a neighbour outside the prefix. The dynamic
program runs over all vertex subsets, so it is exponential in ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import BudgetExhausted, FormatError
from .graphs import Graph


@dataclass(frozen=True)
class PathDecomposition:
    bags: tuple[frozenset[int], ...]

    def __init__(self, bags: Iterable[Iterable[int]]):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in bags))

    def __len__(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return width(self)


@dataclass(frozen=True)
class ValidationReport:
    edges_covered: bool
    consecutive: bool
    vertices_covered: bool
    members_in_graph: bool
    uncovered_edge: tuple[int, int] | None = None
    split_vertex: int | None = None
    missing_vertex: int | None = None
    foreign_vertex: int | None = None

    @property
    def ok(self) -> bool:
        return self.edges_covered and self.consecutive and self.vertices_covered and self.members_in_graph

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "valid"
        problems = []
        if not self.members_in_graph:
            problems.append(f"vertex {self.foreign_vertex} is not in the graph")
        if not self.edges_covered:
            problems.append(f"edge {self.uncovered_edge[0]}-{self.uncovered_edge[1]} is in no bag")
        if not self.consecutive:
            problems.append(f"bags containing vertex {self.split_vertex} are not consecutive")
        if not self.vertices_covered:
            problems.append(f"vertex {self.missing_vertex} is in no bag")
        return "; ".join(problems)


def validate(g: Graph, pd: PathDecomposition) -> ValidationReport:
    """Check edge coverage, consecutiveness and vertex coverage; report the first violation of each."""
    foreign = sorted(v for bag in pd.bags for v in bag if not 0 <= v < g.n)
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    count: dict[int, int] = {}
    for i, bag in enumerate(pd.bags):
        for v in bag:
            first.setdefault(v, i)
            last[v] = i
            count[v] = count.get(v, 0) + 1
    split = [v for v in sorted(first) if last[v] - first[v] + 1 != count[v]]
    missing = [v for v in g.vertices if v not in first]
    uncovered = None
    for u, v in g.sorted_edges():
        if not any(u in bag and v in bag for bag in pd.bags):
            uncovered = (u, v)
            break
    return ValidationReport(
        edges_covered=uncovered is None,
        consecutive=not split,
        vertices_covered=not missing,
        members_in_graph=not foreign,
        uncovered_edge=uncovered,
        split_vertex=split[0] if split else None,
        missing_vertex=missing[0] if missing else None,
        foreign_vertex=foreign[0] if foreign else None,
    )


def width(pd: PathDecomposition) -> int:
    if not pd.bags:
        raise ValueError("width of an empty decomposition is undefined")
    return max(len(b) for b in pd.bags) - 1


def vertex_separation(g: Graph, order: Sequence[int]) -> int:
    """Largest number of prefix vertices with a neighbour outside the prefix, over all prefixes."""
    pos = {v: i for i, v in enumerate(order)}
    best = 0
    for i in range(len(order)):
        prefix = order[: i + 1]
        size = sum(1 for u in prefix if any(pos[w] > i for w in g.adjacency[u]))
        best = max(best, size)
    return best


def decomposition_from_order(g: Graph, order: Sequence[int]) -> PathDecomposition:
    """Bag ``i`` is ``v_i`` plus the earlier vertices that still have a neighbour at position ``>= i``."""
    pos = {v: i for i, v in enumerate(order)}
    reach = [max([pos[v]] + [pos[w] for w in g.adjacency[v]]) for v in order]
    bags = []
    for i, v in enumerate(order):
        bags.append(frozenset([v] + [u for j, u in enumerate(order[:i]) if reach[j] >= i]))
    return PathDecomposition(bags)


def pathwidth(g: Graph, max_vertices: int | None = None) -> tuple[int, PathDecomposition]:
    """Exact pathwidth with a witness decomposition of matching width.

    Raises :class:`BudgetExhausted` when ``g`` has more than ``max_vertices`` vertices.
    """
    if max_vertices is None:
        max_vertices = config.max_pathwidth_vertices()
    n = g.n
    if n > max_vertices:
        raise BudgetExhausted("pathwidth dynamic program", f"{max_vertices} vertices", f"n={n}")
    if n == 0:
        return 0, PathDecomposition([])
    order = _optimal_order(g)
    pd = decomposition_from_order(g, order)
    return width(pd), pd


def _optimal_order(g: Graph) -> list[int]:
    n = g.n
    full = (1 << n) - 1
    subsets = np.arange(1 << n, dtype=np.int64)
    # |{v in S : N(v) not inside S}| for every S
    border = np.zeros(1 << n, dtype=np.int16)
    for v, nb in enumerate(g.neighbor_masks):
        inside = (subsets >> v) & 1
        escapes = (nb & ~subsets & full) != 0
        border += (inside.astype(bool) & escapes).astype(np.int16)
    popcount = np.zeros(1 << n, dtype=np.int8)
    for v in range(n):
        popcount += ((subsets >> v) & 1).astype(np.int8)
    by_size = np.argsort(popcount, kind="stable")
    starts = np.searchsorted(popcount[by_size], np.arange(n + 2))

    # rest[S]: best achievable separation for the remaining vertices once S is the current prefix
    big = np.int16(n + 1)
    rest = np.full(1 << n, big, dtype=np.int16)
    rest[full] = 0
    for k in range(n - 1, -1, -1):
        level = by_size[starts[k]:starts[k + 1]]
        cand = np.full(level.shape, big, dtype=np.int16)
        for v in range(n):
            missing = ((level >> v) & 1) == 0
            nxt = rest[level[missing] | (1 << v)]
            cand[missing] = np.minimum(cand[missing], nxt)
        rest[level] = np.maximum(cand, border[level])

    # forward walk: at each prefix append the lowest id that keeps the optimum
    order = []
    s = 0
    while s != full:
        target = rest[s]
        for v in range(n):
            if not s >> v & 1 and rest[s | (1 << v)] <= target:
                order.append(v)
                s |= 1 << v
                break
    return order


def format_decomposition(pd: PathDecomposition) -> str:
    return "".join(" ".join(["b", *map(str, sorted(b))]) + "\n" for b in pd.bags)


def parse_decomposition(text: str) -> PathDecomposition:
    bags = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "b":
            raise FormatError(f"unknown line type {parts[0]!r}", lineno)
        ids = []
        for tok in parts[1:]:
            try:
                ids.append(int(tok))
            except ValueError:
                raise FormatError(f"expected a vertex id, got {tok!r}", lineno) from None
        bags.append(ids)
    return PathDecomposition(bags)
