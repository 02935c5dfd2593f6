"""Width-2 protocols for subdivided trees and a subdivided 4x4 grid (``r = s = 1``).

A *rooted piece* is a graph with a designated leaf and a width-2 clearing protocol that immunizes
the leaf only in its last step. Pieces are merged by joining their leaves to the first piece's leaf
``l1`` with long paths and hanging a new leaf (the stem) on ``l1``. The merged protocol is
assembled block by block:

* an ``H_k`` block replays piece ``k``'s protocol;
* a ``P_k`` block re-clears the infected interior of path ``P_k``, sweeping from the ``l_k`` end
  toward ``l1`` two vertices per step, with ``l1`` spending one slot whenever it is about to turn
  red. In blocks that run before ``H_1`` is cleared, a red ``l1`` is swept last.

Block order: ``H_2 P_2 H_1 P_2`` for two pieces, and for ``k`` pieces ``H_k P_k`` followed by the
order for ``k - 1`` pieces with an extra ``P_k`` after every ``P_{k-1}``. A final step immunizes
the stem and ``l1``.

Sweeps never pad with idle steps: an empty set lets the infection keep spreading, so padding would
change the dynamics, not only the length. Every assembled protocol is re-simulated and checked
(clears, width at most 2, stem only in the last step, length within the proven bound) before it is
returned; a failure raises :class:`ConstructionError`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import engine
from .engine import ModelParams, Protocol, Simulator
from .errors import ConstructionError
from .graphs import Graph, grid, hatted_mary_tree, heap_id, subdivide_edge

UNIT = ModelParams(1, 1)


@dataclass(frozen=True)
class RootedPiece:
    graph: Graph
    leaf: int
    protocol: Protocol
    embedding: Mapping = field(default_factory=dict, compare=False)

    @property
    def steps(self) -> int:
        return len(self.protocol)


@dataclass(frozen=True)
class MergedResult:
    """A merged graph with its stem and protocol.

    ``blocks`` lists ``(name, first_step, last_step)`` for every ``H_k``/``P_k`` block in order
    (1-based, inclusive; empty blocks have ``last_step == first_step - 1``). ``embedding`` maps
    tree nodes (or original tree vertices) to host ids.
    """

    graph: Graph
    stem: int
    protocol: Protocol
    steps_used: int
    blocks: tuple[tuple[str, int, int], ...] = ()
    embedding: Mapping = field(default_factory=dict, compare=False)

    def as_piece(self) -> RootedPiece:
        return RootedPiece(self.graph, self.stem, self.protocol, self.embedding)


def merged_time_bound(m: int, s: int) -> int:
    """``s((m+3)2^(m-2) - 1)``: the proven length bound for merging ``m`` pieces of length ``<= s``."""
    if m < 2 or s < 1:
        raise ValueError("merged_time_bound needs m >= 2 and s >= 1")
    return s * ((m + 3) * 2 ** (m - 2) - 1)


def check_piece(piece: RootedPiece) -> None:
    g, leaf, proto = piece.graph, piece.leaf, piece.protocol
    if proto.params != UNIT:
        raise ConstructionError("pieces must use r = s = 1")
    if not 0 <= leaf < g.n or g.degree(leaf) != 1:
        raise ConstructionError(f"vertex {leaf} is not a leaf of the piece")
    if not proto.steps:
        raise ConstructionError("piece protocol is empty")
    if engine.protocol_width(proto) > 2:
        raise ConstructionError("piece protocol has width above 2")
    if leaf not in proto.steps[-1] or any(leaf in a for a in proto.steps[:-1]):
        raise ConstructionError("the piece leaf must be immunized in the last step only")
    if not engine.clears(engine.run(g, proto)):
        raise ConstructionError("piece protocol does not clear its graph")


def _verify(g: Graph, stem: int, proto: Protocol, bound: int | None, what: str) -> None:
    if not engine.clears(engine.run(g, proto)):
        raise ConstructionError(f"{what}: assembled protocol does not clear the graph")
    if engine.protocol_width(proto) > 2:
        raise ConstructionError(f"{what}: assembled protocol has width above 2")
    if stem not in proto.steps[-1] or any(stem in a for a in proto.steps[:-1]):
        raise ConstructionError(f"{what}: stem is not immunized in the last step only")
    if bound is not None and len(proto) > bound:
        raise ConstructionError(f"{what}: {len(proto)} steps exceed the bound {bound}")


# ---------------------------------------------------------------------------
# small pieces


def base_piece(m: int) -> RootedPiece:
    """``hatted_mary_tree(m, 1)`` (root 0, children ``1..m``, stem ``m+1``) with the stem as leaf.

    Protocol: for ``m <= 2`` all children, then root and stem. For ``m >= 3`` two children first,
    then the root together with one more child per step (the root must stay green or it reinfects
    the children), then root and stem.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    g = hatted_mary_tree(m, 1)
    root, stem = 0, m + 1
    children = list(range(1, m + 1))
    if m <= 2:
        steps = [frozenset(children), frozenset({root, stem})]
    else:
        steps = [frozenset(children[:2])]
        steps.extend(frozenset({root, c}) for c in children[2:])
        steps.append(frozenset({root, stem}))
    embedding = {(): root, **{(i,): c for i, c in enumerate(children)}, "stem": stem}
    piece = RootedPiece(g, stem, Protocol(UNIT, tuple(steps)), embedding)
    check_piece(piece)
    return piece


def leaf_piece() -> RootedPiece:
    """A single edge ``0 - 1`` with leaf ``1``, cleared in one step."""
    g = Graph(2, frozenset({(0, 1)}))
    return RootedPiece(g, 1, Protocol(UNIT, (frozenset({0, 1}),)), {(): 0, "stem": 1})


def extend_stem(piece: RootedPiece) -> MergedResult:
    """Hang a new leaf on the piece's leaf: replay, then immunize the new leaf with the old one."""
    check_piece(piece)
    g = piece.graph
    stem = g.n
    h = Graph(g.n + 1, g.edges | {(piece.leaf, stem)})
    steps = piece.protocol.steps + (frozenset({stem, piece.leaf}),)
    proto = Protocol(UNIT, steps)
    _verify(h, stem, proto, piece.steps + 1, "single-child extension")
    emb = {(0,) + k if isinstance(k, tuple) else k: v for k, v in piece.embedding.items()}
    emb.pop("stem", None)
    emb[()] = piece.leaf
    emb["stem"] = stem
    blocks = (("H1", 1, piece.steps),)
    return MergedResult(h, stem, proto, len(proto), blocks, emb)


# ---------------------------------------------------------------------------
# merging


def block_order(m: int) -> list[str]:
    """Clearing order of the pieces and paths when merging ``m`` pieces."""
    if m < 2:
        raise ValueError("block_order needs m >= 2")
    order = ["H2", "P2", "H1", "P2"]
    for k in range(3, m + 1):
        prev = f"P{k - 1}"
        nxt = [f"H{k}", f"P{k}"]
        for name in order:
            nxt.append(name)
            if name == prev:
                nxt.append(f"P{k}")
        order = nxt
    return order


def merge_two(p1: RootedPiece, p2: RootedPiece) -> MergedResult:
    """Join two pieces by a path with ``s_1`` interior vertices; length at most ``s_2 + 3 s_1``."""
    return _merge([p1, p2], [p1.steps], p2.steps + 3 * p1.steps, "merge_two")


def merge_many(pieces: Sequence[RootedPiece]) -> MergedResult:
    """Join ``m >= 2`` pieces; path ``P_k`` gets ``2^(k-2) s`` interior vertices, ``s`` the longest piece."""
    if len(pieces) < 2:
        raise ValueError("merge_many needs at least two pieces")
    s = max(p.steps for p in pieces)
    lengths = [2 ** (k - 2) * s for k in range(2, len(pieces) + 1)]
    return _merge(list(pieces), lengths, merged_time_bound(len(pieces), s), "merge_many")


def _merge(pieces: list[RootedPiece], path_lengths: list[int], bound: int, what: str):
    for p in pieces:
        check_piece(p)
    m = len(pieces)

    # vertex layout: H_1, ..., H_m, then interiors of P_2..P_m (each listed from l_1 outward), stem
    offsets = []
    edges = []
    n = 0
    for p in pieces:
        offsets.append(n)
        edges.extend((u + n, v + n) for u, v in p.graph.edges)
        n += p.graph.n
    leaves = [p.leaf + off for p, off in zip(pieces, offsets)]
    l1 = leaves[0]
    interiors: dict[int, list[int]] = {}
    for k, length in zip(range(2, m + 1), path_lengths):
        chain = list(range(n, n + length))
        n += length
        interiors[k] = chain
        full = [l1, *chain, leaves[k - 1]]
        edges.extend(zip(full, full[1:]))
    stem = n
    n += 1
    edges.append((l1, stem))
    g = Graph(n, frozenset(edges))

    sim = Simulator(g, UNIT)
    steps: list[frozenset[int]] = []
    blocks = []

    def advance(a):
        steps.append(frozenset(a))
        sim.advance(a)

    h1_done = False
    for name in block_order(m):
        k = int(name[1:])
        first = len(steps) + 1
        if name[0] == "H":
            off = offsets[k - 1]
            for a in pieces[k - 1].protocol.steps:
                advance({v + off for v in a})
            h1_done = h1_done or k == 1
        else:
            outward = interiors[k]
            todo = [v for v in reversed(outward) if not sim.is_green(v)]
            if not h1_done and sim.code(l1) == engine.RED:
                todo.append(l1)
            while todo:
                a = set()
                if sim.code(l1) == 1:  # Y(1): would turn red at the next step
                    a.add(l1)
                while len(a) < 2 and todo:
                    a.add(todo.pop(0))
                advance(a)
            if any(not sim.is_green(v) for v in outward):
                raise ConstructionError(f"{what}: {name} left infected interior vertices")
        blocks.append((name, first, len(steps)))
    advance({stem, l1})
    proto = Protocol(UNIT, tuple(steps))
    _verify(g, stem, proto, bound, what)

    embedding = {}
    for i, (p, off) in enumerate(zip(pieces, offsets)):
        for key, v in p.embedding.items():
            if isinstance(key, tuple):
                embedding[(i,) + key] = v + off
    embedding[()] = l1
    embedding["stem"] = stem
    return MergedResult(g, stem, proto, len(proto), tuple(blocks), embedding)


# ---------------------------------------------------------------------------
# trees


def contract_chains(g: Graph, terminals) -> set[tuple[int, int]]:
    """Edges between terminals joined by paths whose inner vertices are non-terminals of degree 2.

    Raises :class:`ConstructionError` if some non-terminal does not have degree 2.
    """
    terms = set(terminals)
    for v in g.vertices:
        if v not in terms and g.degree(v) != 2:
            raise ConstructionError(f"vertex {v} is neither a terminal nor a chain vertex")
    out = set()
    for t in terms:
        for w in g.adjacency[t]:
            prev, cur = t, w
            while cur not in terms:
                a, b = g.adjacency[cur]
                prev, cur = cur, (b if a == prev else a)
            out.add((min(t, cur), max(t, cur)))
    return out


def build_subdivided_hatted_tree(m: int, d: int, max_vertices: int = 200_000) -> MergedResult:
    """A subdivision of ``hatted_mary_tree(m, d)`` with a verified width-2 protocol, stem last.

    ``embedding`` maps each node (tuple of child indices) and ``"stem"`` to its host vertex. The
    result is checked by contracting degree-2 chains back to the hatted tree.
    """
    if m < 1 or d < 1:
        raise ValueError("need m >= 1 and d >= 1")
    if estimate_hatted_size(m, d) > max_vertices:
        raise ConstructionError(f"subdivided hatted tree ({m}, {d}) exceeds {max_vertices} vertices")
    piece = base_piece(m)
    result = MergedResult(piece.graph, piece.leaf, piece.protocol, piece.steps,
                          (("base", 1, piece.steps),), piece.embedding)
    for _ in range(d - 1):
        p = result.as_piece()
        result = extend_stem(p) if m == 1 else merge_many([p] * m)
    _check_hatted(result, m, d)
    return result


def _check_hatted(result: MergedResult, m: int, d: int) -> None:
    target = hatted_mary_tree(m, d)
    emb = result.embedding
    to_target = {v: (target.n - 1 if key == "stem" else heap_id(m, key)) for key, v in emb.items()}
    if len(to_target) != target.n:
        raise ConstructionError("embedding does not cover the hatted tree")
    got = {tuple(sorted((to_target[u], to_target[v])))
           for u, v in contract_chains(result.graph, to_target)}
    if got != set(target.edges):
        raise ConstructionError("contracted host is not the hatted tree")


def estimate_hatted_size(m: int, d: int) -> int:
    """Vertex count of :func:`build_subdivided_hatted_tree` computed from the proven length bounds."""
    size, steps = m + 2, max(2, m)
    for _ in range(d - 1):
        if m == 1:
            size, steps = size + 1, steps + 1
        else:
            size = m * size + steps * (2 ** (m - 1) - 1) + 1
            steps = merged_time_bound(m, steps)
    return size


def _rooted_children(t: Graph, root: int) -> dict[int, list[int]]:
    children = {v: [] for v in t.vertices}
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in t.adjacency[u]:
            if w not in seen:
                seen.add(w)
                children[u].append(w)
                queue.append(w)
    return children


def _dims(children, root) -> tuple[int, int]:
    """(max child count, height) of the rooted tree."""
    best_m, height = 0, 0
    stack = [(root, 0)]
    while stack:
        u, depth = stack.pop()
        best_m = max(best_m, len(children[u]))
        height = max(height, depth)
        stack.extend((c, depth + 1) for c in children[u])
    return best_m, height


def _estimate_direct(children, u) -> int:
    kids = children[u]
    if not kids:
        return 1
    s = max(_estimate_direct(children, c) for c in kids)
    if len(kids) == 1:
        return s + 1
    return merged_time_bound(len(kids), s)


def tree_subdivision_protocol(t: Graph, method: str = "auto", max_host: int = 50_000,
                              ) -> tuple[Graph, Protocol]:
    """A subdivision ``T'`` of tree ``t`` with a width-2 clearing protocol.

    ``T'`` keeps ``t``'s vertices as ``0..n-1``; subdivision vertices follow, edge by edge in
    sorted edge order, each chain listed from its lower-id endpoint.

    ``method="hatted"`` embeds ``t`` in ``hatted_mary_tree(m, d)`` (``m`` the largest child count,
    ``d`` the height under the chosen root), builds that host, and restricts its protocol.
    ``method="direct"`` merges pieces over ``t``'s own rooted structure, which gives a far smaller
    host. ``"auto"`` uses the hatted host when its estimated size is at most ``max_host``. The root
    is the vertex minimising the estimate for the chosen method (lowest id on ties).
    """
    if not t.is_tree():
        raise ValueError("input graph is not a tree")
    if t.n == 1:
        return t, Protocol(UNIT, (frozenset({0}),))
    if method not in ("auto", "hatted", "direct"):
        raise ValueError(f"unknown method {method!r}")

    rooted = {v: _rooted_children(t, v) for v in t.vertices}
    hatted_cost = {v: estimate_hatted_size(*_hat_dims(rooted[v], v)) for v in t.vertices}
    if method == "auto":
        method = "hatted" if min(hatted_cost.values()) <= max_host else "direct"
    if method == "hatted":
        root = min(t.vertices, key=lambda v: (hatted_cost[v], v))
        children = rooted[root]
        m, d = _hat_dims(children, root)
        host = build_subdivided_hatted_tree(m, d, max_vertices=max(max_host, hatted_cost[root]))
        image = {}
        stack = [(root, ())]
        while stack:
            u, node = stack.pop()
            image[u] = host.embedding[node]
            stack.extend((c, node + (i,)) for i, c in enumerate(children[u]))
    else:
        root = min(t.vertices, key=lambda v: (_estimate_direct(rooted[v], v), v))
        host = _direct(t, rooted[root], root)
        image = {v: host.embedding[v] for v in t.vertices}
    return _restrict_to_tree(t, host, image)


def _hat_dims(children, root):
    m, d = _dims(children, root)
    return max(m, 1), max(d, 1)


def _direct(t: Graph, children, root) -> MergedResult:
    """Merge bottom-up over the rooted tree; node ``u`` lands on its first child's piece leaf."""
    order = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(children[u])
    done: dict[int, RootedPiece] = {}
    for u in reversed(order):
        kids = children[u]
        if not kids:
            piece = leaf_piece()
            done[u] = RootedPiece(piece.graph, piece.leaf, piece.protocol, {u: 0, "stem": 1})
            continue
        subs = [_relabel_embedding(done.pop(c)) for c in kids]
        res = extend_stem(subs[0]) if len(kids) == 1 else merge_many(subs)
        emb = {k: v for k, v in res.embedding.items() if k != ()}
        emb = {(k[-1] if isinstance(k, tuple) else k): v for k, v in emb.items()}
        emb[u] = res.embedding[()]
        done[u] = RootedPiece(res.graph, res.stem, res.protocol, emb)
    final = done[root]
    return MergedResult(final.graph, final.leaf, final.protocol, final.steps, (), final.embedding)


def _relabel_embedding(piece: RootedPiece) -> RootedPiece:
    # merge keeps tuple keys only; wrap vertex keys so they survive and unwrap afterwards
    emb = {((k,) if k != "stem" else k): v for k, v in piece.embedding.items()}
    return RootedPiece(piece.graph, piece.leaf, piece.protocol, emb)


def _host_path(g: Graph, a: int, b: int) -> list[int]:
    """The unique path from ``a`` to ``b`` in the tree ``g``."""
    parent = {a: a}
    queue = deque([a])
    while queue and b not in parent:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    chain = [b]
    while chain[-1] != a:
        chain.append(parent[chain[-1]])
    return chain[::-1]


def _restrict_to_tree(t: Graph, host: MergedResult, image: dict[int, int]) -> tuple[Graph, Protocol]:
    g = host.graph
    new_id = {image[v]: v for v in t.vertices}
    edges = []
    nxt = t.n
    for u, v in t.sorted_edges():
        chain = _host_path(g, image[u], image[v])
        for w in chain[1:-1]:
            if w in new_id:
                raise ConstructionError("two tree edges share a host chain vertex")
            new_id[w] = nxt
            nxt += 1
        ids = [new_id[w] for w in chain]
        edges.extend(zip(ids, ids[1:]))
    sub = Graph(nxt, frozenset(edges))
    steps = tuple(frozenset(new_id[v] for v in a if v in new_id) for a in host.protocol.steps)
    proto = Protocol(UNIT, steps)
    if not engine.clears(engine.run(sub, proto)):
        raise ConstructionError("restricted protocol does not clear the subdivided tree")
    if engine.protocol_width(proto) > 2:
        raise ConstructionError("restricted protocol has width above 2")
    if contract_chains(sub, range(t.n)) != set(t.edges):
        raise ConstructionError("subdivided tree does not contract back to the input")
    return sub, proto


# ---------------------------------------------------------------------------
# subdivided grid


GRID_LETTERS = "abcdefghijklmnop"


def grid_letter_ids() -> dict[str, int]:
    """Letters of the 4x4 grid drawing: column ``x`` holds ``4x..4x+3`` bottom to top, id ``4x + y``."""
    return {ch: i for i, ch in enumerate(GRID_LETTERS)}


GRID_TABLE = ["ef", "ab", "cf", "dh", "cf", "gh", "fl", "gk", "fl", "jk", "lp", "jk", "po", "jn", "im"]


def build_subdivided_grid_example() -> tuple[Graph, Protocol]:
    """The 4x4 grid with edge ``e-i`` replaced by a path ``w_1..w_30`` (``w_1`` next to ``i``).

    Ids: letters ``a..p`` are ``0..15``; ``w_j`` is ``16 + (30 - j)``. The protocol clears ``w``
    in pairs from ``w_1``, then follows the 15-step table for the grid vertices, then sweeps the
    reinfected path from ``w_29`` back toward ``i``, re-immunizing ``i`` every other step.
    """
    ids = grid_letter_ids()
    e, i = ids["e"], ids["i"]
    g = subdivide_edge(grid(4), (e, i), 30)
    g = Graph(g.n, g.edges, {**{v: ch for ch, v in ids.items()},
                             **{16 + (30 - j): f"w{j}" for j in range(1, 31)}})

    def w(j):
        return 16 + (30 - j)

    steps = [frozenset({w(2 * q - 1), w(2 * q)}) for q in range(1, 16)]
    steps.extend(frozenset(ids[c] for c in pair) for pair in GRID_TABLE)
    # tail: (w29, w28), (w27, i), (w26, w25), (w24, i), ... down to w1
    rest = [w(j) for j in range(29, 0, -1)]
    with_i = False
    while rest:
        if with_i:
            steps.append(frozenset({rest.pop(0), i}))
        else:
            steps.append(frozenset(rest[:2]))
            del rest[:2]
        with_i = not with_i
    proto = Protocol(UNIT, tuple(steps))
    trace = engine.run(g, proto)
    if not engine.clears(trace) or engine.protocol_width(proto) != 2:
        raise ConstructionError("subdivided grid protocol failed verification")
    return g, proto


def path_vertex(j: int) -> int:
    """Id of ``w_j`` in :func:`build_subdivided_grid_example`."""
    if not 1 <= j <= 30:
        raise ValueError("j must lie in 1..30")
    return 16 + (30 - j)


def green_letters(trace: engine.Trace, t: int) -> str:
    """Grid letters green at time ``t``, in alphabetical order."""
    row = trace.codes[t]
    return "".join(ch for ch, v in grid_letter_ids().items() if row[v] > trace.params.s)


__all__ = [
    "RootedPiece", "MergedResult", "merged_time_bound", "base_piece", "leaf_piece", "extend_stem",
    "block_order", "merge_two", "merge_many", "build_subdivided_hatted_tree", "contract_chains",
    "estimate_hatted_size", "tree_subdivision_protocol", "build_subdivided_grid_example",
    "path_vertex", "green_letters", "grid_letter_ids",
]
