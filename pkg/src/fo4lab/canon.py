"""Canonical labelling by ordered-partition refinement with backtracking.

The search individualises a vertex of the first smallest non-singleton cell,
refines to an equitable partition and compares leaf certificates; the
maximal certificate wins.  Automorphisms discovered at leaves prune sibling
branches (orbits of the pointwise stabiliser of the current prefix) and allow
backjumping to the node where a leaf path diverged from the first or best
path.  The certificate is exact: two inputs get equal certificates iff they
are isomorphic (respecting vertex colours).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations
from typing import Hashable, Sequence

from .graphs import Graph, bits, popcount

__all__ = [
    "DEFAULT_MAX_N",
    "canonical_labeling",
    "canonical_form",
    "rooted_canonical_form",
    "colored_canonical_form",
    "canonical_graph",
    "rooted_canonical_graph",
    "automorphism_orbits",
    "rooted_isomorphisms",
    "all_graphs",
]

DEFAULT_MAX_N = 16


def _refine(g: Graph, cells: list[list[int]]) -> list[list[int]]:
    """Coarsest equitable refinement; cell order depends only on invariants."""
    cells = [list(c) for c in cells]
    while True:
        cell_masks = []
        for c in cells:
            m = 0
            for v in c:
                m |= 1 << v
            cell_masks.append(m)
        new_cells: list[list[int]] = []
        changed = False
        for c in cells:
            if len(c) == 1:
                new_cells.append(c)
                continue
            sig = {v: tuple(popcount(g.adj[v] & m) for m in cell_masks) for v in c}
            keys = sorted(set(sig.values()))
            if len(keys) == 1:
                new_cells.append(c)
                continue
            changed = True
            for key in keys:
                new_cells.append([v for v in c if sig[v] == key])
        cells = new_cells
        if not changed:
            return cells


def _certificate(g: Graph, order: Sequence[int]) -> tuple[int, ...]:
    pos = [0] * g.n
    for i, v in enumerate(order):
        pos[v] = i
    rows = []
    for v in order:
        r = 0
        for w in bits(g.adj[v]):
            r |= 1 << (g.n - 1 - pos[w])
        rows.append(r)
    return tuple(rows)


class _Search:
    def __init__(self, g: Graph):
        self.g = g
        self.first_path: list[int] | None = None
        self.first_cert = None
        self.first_order = None
        self.best_path: list[int] | None = None
        self.best_cert = None
        self.best_order: list[int] | None = None
        self.autos: list[list[int]] = []

    def _record_auto(self, order_a, order_b):
        # maps the vertex at position i of order_a to the vertex at position i of order_b
        perm = [0] * self.g.n
        for a, b in zip(order_a, order_b):
            perm[a] = b
        if any(perm[v] != v for v in range(self.g.n)):
            self.autos.append(perm)

    def _orbits_fixing(self, prefix: list[int]) -> list[int]:
        parent = list(range(self.g.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for perm in self.autos:
            if all(perm[p] == p for p in prefix):
                for v, w in enumerate(perm):
                    rv, rw = find(v), find(w)
                    if rv != rw:
                        parent[max(rv, rw)] = min(rv, rw)
        return [find(v) for v in range(self.g.n)]

    @staticmethod
    def _common(a: list[int], b: list[int]) -> int:
        i = 0
        while i < len(a) and i < len(b) and a[i] == b[i]:
            i += 1
        return i

    def run(self, cells: list[list[int]], path: list[int]) -> int | None:
        """Explore the subtree; return a depth to backjump to, or None."""
        cells = _refine(self.g, cells)
        target = None
        for idx, c in enumerate(cells):
            if len(c) > 1 and (target is None or len(c) < len(cells[target])):
                target = idx
        if target is None:
            order = [c[0] for c in cells]
            cert = _certificate(self.g, order)
            if self.first_path is None:
                self.first_path, self.first_cert, self.first_order = list(path), cert, order
                self.best_path, self.best_cert, self.best_order = list(path), cert, order
                return None
            if cert == self.first_cert:
                self._record_auto(self.first_order, order)
                return self._common(self.first_path, path)
            if cert == self.best_cert:
                self._record_auto(self.best_order, order)
                return self._common(self.best_path, path)
            if cert > self.best_cert:
                self.best_path, self.best_cert, self.best_order = list(path), cert, order
            return None
        depth = len(path)
        cell = cells[target]
        tried: list[int] = []
        orb, seen_autos = None, -1
        for v in cell:
            if tried:
                if seen_autos != len(self.autos):
                    orb, seen_autos = self._orbits_fixing(path), len(self.autos)
                if any(orb[v] == orb[t] for t in tried):
                    continue
            tried.append(v)
            child = cells[:target] + [[v], [w for w in cell if w != v]] + cells[target + 1 :]
            jump = self.run(child, path + [v])
            if jump is not None and jump < depth:
                return jump
        return None


def _initial_cells(n: int, colors: Sequence[Hashable] | None) -> list[list[int]]:
    if colors is None:
        return [list(range(n))] if n else []
    if len(colors) != n:
        raise ValueError("one colour per vertex is required")
    keys = sorted(set(colors), key=repr)
    return [[v for v in range(n) if colors[v] == k] for k in keys]


def canonical_labeling(
    g: Graph, colors: Sequence[Hashable] | None = None, max_n: int = DEFAULT_MAX_N
) -> tuple[list[int], tuple]:
    """Canonical order of the vertices and its certificate.

    ``order[i]`` is the vertex placed at canonical position ``i``.  Colours
    are compared by ``repr`` and must be preserved by isomorphisms.
    """
    if g.n > max_n:
        raise ValueError(f"graph has {g.n} vertices, above the canonical-form bound {max_n}")
    cells = _initial_cells(g.n, colors)
    if g.n == 0:
        return [], (0, (), ())
    s = _Search(g)
    s.run(cells, [])
    color_seq = tuple(repr(colors[v]) for v in s.best_order) if colors is not None else ()
    return s.best_order, (g.n, color_seq, s.best_cert)


def canonical_form(g: Graph, max_n: int = DEFAULT_MAX_N) -> tuple:
    return canonical_labeling(g, None, max_n)[1]


def colored_canonical_form(g: Graph, colors: Sequence[Hashable], max_n: int = DEFAULT_MAX_N) -> tuple:
    return canonical_labeling(g, colors, max_n)[1]


def rooted_canonical_form(g: Graph, root: int, max_n: int = DEFAULT_MAX_N) -> tuple:
    """Certificate invariant under isomorphisms that fix the root."""
    if not 0 <= root < g.n:
        raise ValueError("root out of range")
    colors = [0] * g.n
    colors[root] = -1
    return canonical_labeling(g, colors, max_n)[1]


def canonical_graph(g: Graph, max_n: int = DEFAULT_MAX_N) -> tuple[Graph, list[int]]:
    """The canonical relabelled copy and the order used to build it."""
    order, _ = canonical_labeling(g, None, max_n)
    perm = [0] * g.n
    for i, v in enumerate(order):
        perm[v] = i
    return g.relabel(perm), order


def rooted_canonical_graph(g: Graph, root: int, max_n: int = DEFAULT_MAX_N) -> tuple[Graph, list[int]]:
    """Canonical copy with the root at position 0."""
    colors = [0] * g.n
    colors[root] = -1
    order, _ = canonical_labeling(g, colors, max_n)
    perm = [0] * g.n
    for i, v in enumerate(order):
        perm[v] = i
    return g.relabel(perm), order


def automorphism_orbits(g: Graph, max_n: int = DEFAULT_MAX_N) -> list[int]:
    """Orbit id of each vertex (smallest vertex with the same rooted certificate)."""
    if g.n > max_n:
        raise ValueError(f"graph has {g.n} vertices, above the canonical-form bound {max_n}")
    if g.n == 0:
        return []
    # automorphisms met by one search already merge part of each orbit
    s = _Search(g)
    s.run([list(range(g.n))], [])
    part = s._orbits_fixing([])
    certs: dict[tuple, int] = {}
    rep_id: dict[int, int] = {}
    for v in range(g.n):
        r = part[v]
        if r not in rep_id:
            rep_id[r] = certs.setdefault(rooted_canonical_form(g, r, max_n), r)
    return [rep_id[part[v]] for v in range(g.n)]


def rooted_isomorphisms(g1: Graph, r1: int, g2: Graph, r2: int, limit: int | None = None) -> list[list[int]]:
    """All isomorphisms ``g1 -> g2`` sending ``r1`` to ``r2`` (as image lists)."""
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return []
    n = g1.n
    deg1 = [g1.degree(v) for v in range(n)]
    deg2 = [g2.degree(v) for v in range(n)]
    if sorted(deg1) != sorted(deg2) or deg1[r1] != deg2[r2]:
        return []
    order = [r1] + sorted((v for v in range(n) if v != r1), key=lambda v: -deg1[v])
    # prefer vertices adjacent to already-placed ones
    placed = [r1]
    rest = [v for v in order if v != r1]
    order = [r1]
    while rest:
        m = 0
        for p in placed:
            m |= g1.adj[p]
        rest.sort(key=lambda v: (not (m >> v) & 1, -deg1[v]))
        nxt = rest.pop(0)
        order.append(nxt)
        placed.append(nxt)
    img = [-1] * n
    used = 0
    out: list[list[int]] = []

    def rec(i: int):
        nonlocal used
        if limit is not None and len(out) >= limit:
            return
        if i == n:
            out.append(list(img))
            return
        v = order[i]
        cands = [r2] if i == 0 else [w for w in range(n) if not (used >> w) & 1 and deg2[w] == deg1[v]]
        for w in cands:
            ok = True
            for u in order[:i]:
                if g1.has_edge(v, u) != g2.has_edge(w, img[u]):
                    ok = False
                    break
            if ok:
                img[v] = w
                used |= 1 << w
                rec(i + 1)
                used &= ~(1 << w)
                img[v] = -1

    rec(0)
    return out


@lru_cache(maxsize=None)
def _graphs_on(n: int) -> tuple[Graph, ...]:
    if n == 0:
        return (Graph.empty(0),)
    if n == 1:
        return (Graph.empty(1),)
    seen: dict[tuple, Graph] = {}
    for base in _graphs_on(n - 1):
        for nb in range(1 << (n - 1)):
            adj = list(base.adj) + [nb]
            for w in bits(nb):
                adj[w] |= 1 << (n - 1)
            g = Graph(n, tuple(adj))
            cg, _ = canonical_graph(g, max_n=max(n, DEFAULT_MAX_N))
            key = cg.adj
            if key not in seen:
                seen[key] = cg
    return tuple(sorted(seen.values(), key=lambda g: (g.num_edges, g.adj)))


def all_graphs(n: int) -> list[Graph]:
    """One canonical representative of every isomorphism class on ``n`` vertices."""
    return list(_graphs_on(n))


def _brute_rooted_equal(g1: Graph, r1: int, g2: Graph, r2: int) -> bool:
    # exhaustive oracle for small graphs; kept here for reuse in tests
    if g1.n != g2.n:
        return False
    others1 = [v for v in range(g1.n) if v != r1]
    others2 = [v for v in range(g2.n) if v != r2]
    for p in permutations(others2):
        img = {r1: r2, **dict(zip(others1, p))}
        if all(g1.has_edge(u, v) == g2.has_edge(img[u], img[v]) for u in range(g1.n) for v in range(u)):
            return True
    return False
