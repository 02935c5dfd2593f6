"""Simple undirected graphs on dense integer ids, named families, and boundary computations.

Vertex numbering per family (fixed so that protocol files are reproducible):

* ``path(n)``: ``0 - 1 - ... - n-1``.
* ``cycle(n)``: ``i ~ i+1 (mod n)``.
* ``star(m)``: centre ``0`` (label ``x``), leaves ``1..m`` (labels ``a1..am``).
* ``spider()``: the claw with each edge subdivided once. Centre ``0``, middle vertices ``1, 2, 3``,
  leaves ``4, 5, 6`` with leaf ``3 + i`` attached to middle vertex ``i``.
* ``caterpillar(counts)``: spine ``0..L-1`` as a path, then the leaves of spine vertex 0, of spine
  vertex 1, and so on.
* ``grid(n)``: ``P_n x P_n`` row-major, vertex ``(row, col)`` has id ``row * n + col``.
* ``petersen()``: the 2-subsets of ``{1..5}`` in lexicographic order (``12, 13, ..., 45``), adjacent
  when disjoint. Labels are the subsets written as two digits.
* ``mary_tree(m, d)``: complete m-ary tree of depth d in heap order: root ``0``, children of ``i`` are
  ``i*m + 1 .. i*m + m``.
* ``hatted_mary_tree(m, d)``: ``mary_tree(m, d)`` plus a stem leaf on the root, with the last id.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from . import config
from .errors import BudgetExhausted, FormatError

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``labels`` optionally maps ids to display names. Connectivity is *not* enforced here; the
    generators always produce connected graphs and :func:`parse_graph` rejects disconnected input
    unless asked not to.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)
    labels: Mapping[int, str] = field(default_factory=dict, compare=True)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {u}-{v} has an endpoint outside 0..{self.n - 1}")
            norm.add(_norm_edge(u, v))
        object.__setattr__(self, "edges", frozenset(norm))
        labels = dict(self.labels)
        for k in labels:
            if not 0 <= k < self.n:
                raise ValueError(f"label for unknown vertex {k}")
        object.__setattr__(self, "labels", labels)

    __hash__ = None  # labels are a dict

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << u for u in nb) for nb in self.adjacency)

    @cached_property
    def adjacency_matrix(self):
        """Sparse 0/1 adjacency matrix (scipy CSR), used by the vectorised simulator."""
        from scipy.sparse import csr_matrix

        rows = [u for u, v in self.edges] + [v for u, v in self.edges]
        cols = [v for u, v in self.edges] + [u for u, v in self.edges]
        return csr_matrix(([1] * len(rows), (rows, cols)), shape=(self.n, self.n), dtype="int32")

    @cached_property
    def neighborhood_of_mask(self):
        """A function mapping a vertex bitmask ``S`` to the bitmask of ``N(S)``."""
        return _ChunkedNeighborhood(self.neighbor_masks)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edges

    def label(self, v: int) -> str:
        return self.labels.get(v, str(v))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def is_connected(self) -> bool:
        return self.n <= 1 or len(_bfs_order(self, 0)) == self.n

    def is_tree(self) -> bool:
        return self.n >= 1 and self.m == self.n - 1 and self.is_connected()

    def relabel(self, labels: Mapping[int, str]) -> "Graph":
        return Graph(self.n, self.edges, dict(labels))


class _ChunkedNeighborhood:
    """Byte-chunk lookup tables so that ``N(S)`` costs ``n / 8`` table reads."""

    def __init__(self, masks: tuple[int, ...]):
        self.tables = []
        for base in range(0, len(masks), 8):
            chunk = masks[base:base + 8]
            table = [0] * (1 << len(chunk))
            for bits in range(1, len(table)):
                low = bits & -bits
                table[bits] = table[bits ^ low] | chunk[low.bit_length() - 1]
            self.tables.append(table)

    def __call__(self, mask: int) -> int:
        out = 0
        for table in self.tables:
            if mask & 0xFF:
                out |= table[mask & 0xFF]
            mask >>= 8
            if not mask:
                break
        return out


def _bfs_order(g: Graph, root: int) -> list[int]:
    seen = {root}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def to_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


# ---------------------------------------------------------------------------
# families


def path(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return Graph(n, frozenset(_norm_edge(i, (i + 1) % n) for i in range(n)))


def star(m: int) -> Graph:
    if m < 1:
        raise ValueError("star needs m >= 1")
    labels = {0: "x", **{i: f"a{i}" for i in range(1, m + 1)}}
    return Graph(m + 1, frozenset((0, i) for i in range(1, m + 1)), labels)


def spider() -> Graph:
    """The claw ``K_{1,3}`` with every edge subdivided once (7 vertices)."""
    edges = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 5), (3, 6)]
    labels = {0: "x", 1: "u1", 2: "u2", 3: "u3", 4: "v1", 5: "v2", 6: "v3"}
    return Graph(7, frozenset(edges), labels)


def caterpillar(leaf_counts: Iterable[int]) -> Graph:
    counts = list(leaf_counts)
    if not counts or any(c < 0 for c in counts):
        raise ValueError("caterpillar needs a non-empty spine and non-negative leaf counts")
    spine = len(counts)
    edges = [(i, i + 1) for i in range(spine - 1)]
    nxt = spine
    for i, c in enumerate(counts):
        for _ in range(c):
            edges.append((i, nxt))
            nxt += 1
    return Graph(nxt, frozenset(edges))


def grid(n: int) -> Graph:
    if n < 1:
        raise ValueError("grid needs n >= 1")
    edges = []
    for r in range(n):
        for c in range(n):
            v = r * n + c
            if c + 1 < n:
                edges.append((v, v + 1))
            if r + 1 < n:
                edges.append((v, v + n))
    return Graph(n * n, frozenset(edges))


def petersen() -> Graph:
    subsets = list(itertools.combinations(range(1, 6), 2))
    edges = [
        (i, j)
        for i, j in itertools.combinations(range(10), 2)
        if not set(subsets[i]) & set(subsets[j])
    ]
    labels = {i: f"{a}{b}" for i, (a, b) in enumerate(subsets)}
    return Graph(10, frozenset(edges), labels)


def mary_tree(m: int, d: int) -> Graph:
    if m < 1 or d < 0:
        raise ValueError("mary_tree needs m >= 1 and d >= 0")
    n = sum(m ** i for i in range(d + 1))
    edges = [((v - 1) // m, v) for v in range(1, n)]
    return Graph(n, frozenset(edges))


def hatted_mary_tree(m: int, d: int) -> Graph:
    """``mary_tree(m, d)`` with a stem leaf attached to the root; the stem is vertex ``n - 1``."""
    base = mary_tree(m, d)
    stem = base.n
    return Graph(base.n + 1, base.edges | {(0, stem)}, {stem: "stem"})


def stem_of(hatted: Graph) -> int:
    return hatted.n - 1


def heap_id(m: int, node: tuple[int, ...]) -> int:
    """Heap-order id of the tree node reached from the root by child indices ``node``."""
    v = 0
    for j in node:
        v = v * m + j + 1
    return v


FAMILIES = {
    "path": (path, 1),
    "cycle": (cycle, 1),
    "star": (star, 1),
    "spider": (spider, 0),
    "caterpillar": (caterpillar, None),
    "grid": (grid, 1),
    "petersen": (petersen, 0),
    "mary-tree": (mary_tree, 2),
    "hatted-mary-tree": (hatted_mary_tree, 2),
}


def generate(family: str, *params: int) -> Graph:
    """Build a named family, e.g. ``generate("grid", 4)`` or ``generate("caterpillar", 3, 1, 2)``."""
    try:
        fn, arity = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    if arity is None:
        return fn(params)
    if len(params) != arity:
        raise ValueError(f"{family} takes {arity} parameter(s), got {len(params)}")
    return fn(*params)


# ---------------------------------------------------------------------------
# transformations


def subdivide_edge(g: Graph, edge: Edge, k: int) -> Graph:
    """Replace ``edge`` by a path with ``k`` new interior vertices.

    New ids are ``n, n+1, ...`` starting next to the lower-id endpoint of ``edge``.
    """
    u, v = _norm_edge(*edge)
    if not g.has_edge(u, v):
        raise ValueError(f"{u}-{v} is not an edge")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return g
    chain = [u, *range(g.n, g.n + k), v]
    edges = set(g.edges)
    edges.discard((u, v))
    edges.update(_norm_edge(a, b) for a, b in zip(chain, chain[1:]))
    return Graph(g.n + k, frozenset(edges), g.labels)


def subgraph(g: Graph, vertices: Iterable[int], edges: Iterable[Edge] | None = None):
    """Return ``(h, host_ids)`` where ``h`` is the subgraph relabelled to ``0..k-1``.

    ``host_ids[i]`` is the vertex of ``g`` that became ``i``; relabelling preserves order.
    ``edges`` defaults to the induced edge set. The result may be disconnected.
    """
    vs = sorted(set(vertices))
    for v in vs:
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} is not in the graph")
    index = {v: i for i, v in enumerate(vs)}
    if edges is None:
        chosen = [e for e in g.edges if e[0] in index and e[1] in index]
    else:
        chosen = []
        for a, b in edges:
            e = _norm_edge(a, b)
            if e not in g.edges:
                raise ValueError(f"{a}-{b} is not an edge of the host graph")
            if a not in index or b not in index:
                raise ValueError(f"edge {a}-{b} has an endpoint outside the chosen vertices")
            chosen.append(e)
    h = Graph(
        len(vs),
        frozenset((index[a], index[b]) for a, b in chosen),
        {index[v]: name for v, name in g.labels.items() if v in index},
    )
    return h, vs


# ---------------------------------------------------------------------------
# predicates


def is_caterpillar(g: Graph) -> bool:
    """True iff ``g`` is a tree and deleting its leaves leaves a path (possibly empty)."""
    if not g.is_tree():
        return False
    if g.n <= 2:
        return True
    inner = [v for v in g.vertices if g.degree(v) > 1]
    inner_set = set(inner)
    # the inner vertices induce a subtree; it is a path iff no inner vertex has 3 inner neighbours
    return all(sum(1 for w in g.adjacency[v] if w in inner_set) <= 2 for v in inner)


# ---------------------------------------------------------------------------
# boundaries


def boundary(g: Graph, s: Iterable[int]) -> frozenset[int]:
    """Vertices outside ``s`` with a neighbour in ``s`` (``N(S) - S``)."""
    mask = to_mask(s)
    if mask >> g.n:
        raise ValueError("set contains a vertex outside the graph")
    return from_mask(g.neighborhood_of_mask(mask) & ~mask)


def colex_subsets(n: int, k: int):
    """Bitmasks of all k-subsets of ``0..n-1`` in colexicographic order (Gosper's hack)."""
    if k == 0:
        yield 0
        return
    if k > n:
        return
    x = (1 << k) - 1
    limit = 1 << n
    while x < limit:
        yield x
        c = x & -x
        y = x + c
        x = (((x ^ y) >> 2) // c) | y


@dataclass(frozen=True)
class IsoperimetricResult:
    """Minimum boundary over k-subsets, with one minimiser and the number of subsets examined.

    ``exact`` is False when the scan stopped early because the running minimum reached ``floor``;
    ``value`` is then an upper bound that is ``<= floor``.
    """

    k: int
    value: int
    witness: frozenset
    examined: int
    exact: bool


def min_boundary(g: Graph, k: int, floor: int | None = None, budget: int | None = None,
                 ) -> IsoperimetricResult:
    """Scan all k-subsets in colex order for the smallest ``|N(S) - S|``.

    Stops early once the running minimum is ``<= floor``. Raises :class:`BudgetExhausted` if more
    than ``budget`` subsets would be needed.
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"k must lie in 1..{g.n}")
    if budget is None:
        budget = config.max_subsets()
    nb = g.neighborhood_of_mask
    best = None
    best_mask = 0
    examined = 0
    for mask in colex_subsets(g.n, k):
        if examined >= budget:
            raise BudgetExhausted(f"isoperimetric scan (k={k})", budget, examined)
        examined += 1
        size = (nb(mask) & ~mask).bit_count()
        if best is None or size < best:
            best, best_mask = size, mask
            if floor is not None and best <= floor:
                return IsoperimetricResult(k, best, from_mask(best_mask), examined,
                                           exact=examined == math.comb(g.n, k) or best == 0)
    return IsoperimetricResult(k, best, from_mask(best_mask), examined, exact=True)


def isoperimetric_value(g: Graph, k: int, budget: int | None = None) -> int:
    """Exact ``min |N(S) - S|`` over all ``S`` with ``|S| = k``."""
    return min_boundary(g, k, budget=budget).value


# ---------------------------------------------------------------------------
# text format


def format_graph(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"e {u} {v}" for u, v in g.sorted_edges())
    lines.extend(f"label {v} {g.labels[v]}" for v in sorted(g.labels))
    return "\n".join(lines) + "\n"


def parse_graph(text: str, allow_disconnected: bool = False) -> Graph:
    n = None
    edges = []
    labels = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "n":
            if n is not None:
                raise FormatError("duplicate 'n' line", lineno)
            if len(parts) != 2:
                raise FormatError("expected 'n <count>'", lineno)
            n = _parse_int(parts[1], lineno)
            if n < 0:
                raise FormatError("vertex count must be non-negative", lineno)
        elif tag == "e":
            if n is None:
                raise FormatError("'e' line before 'n' line", lineno)
            if len(parts) != 3:
                raise FormatError("expected 'e <u> <v>'", lineno)
            u, v = _parse_int(parts[1], lineno), _parse_int(parts[2], lineno)
            if not (0 <= u < n and 0 <= v < n):
                raise FormatError(f"edge endpoint out of range 0..{n - 1}", lineno)
            if u == v:
                raise FormatError("self-loop", lineno)
            e = _norm_edge(u, v)
            if e in edges:
                raise FormatError(f"duplicate edge {u}-{v}", lineno)
            edges.append(e)
        elif tag == "label":
            if n is None:
                raise FormatError("'label' line before 'n' line", lineno)
            if len(parts) != 3:
                raise FormatError("expected 'label <id> <name>'", lineno)
            v = _parse_int(parts[1], lineno)
            if not 0 <= v < n:
                raise FormatError(f"label for vertex out of range 0..{n - 1}", lineno)
            labels[v] = parts[2]
        else:
            raise FormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise FormatError("missing 'n <count>' line")
    g = Graph(n, frozenset(edges), labels)
    if not allow_disconnected and not g.is_connected():
        raise FormatError("graph is disconnected (pass allow_disconnected to accept it)")
    return g


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"expected an integer, got {token!r}", lineno) from None
