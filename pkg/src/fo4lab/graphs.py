"""Finite simple graphs with bitset adjacency, nested pairs and graph I/O.

Vertices are ``0..n-1``.  A vertex subset is a Python ``int`` used as a bitset
(bit ``v`` set means ``v`` is in the set).  Graphs are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "Graph",
    "RootedPair",
    "VertexMap",
    "bits",
    "mask_of",
    "popcount",
    "induced_subgraph",
    "is_extension",
    "to_graph6",
    "from_graph6",
    "to_dot",
    "write_rooted",
    "read_rooted",
    "disjoint_union",
    "attach",
]


def popcount(x: int) -> int:
    return x.bit_count()


def bits(mask: int) -> list[int]:
    """Vertices of a bitset in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0 or len(self.adj) != self.n:
            raise ValueError("adjacency length does not match vertex count")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"vertex {v} has a neighbour out of range")
            if (row >> v) & 1:
                raise ValueError(f"self-loop at vertex {v}")
            for w in bits(row):
                if not (self.adj[w] >> v) & 1:
                    raise ValueError(f"asymmetric adjacency between {v} and {w}")

    # construction -------------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << v) for v in range(n)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        return cls.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    # queries ------------------------------------------------------------
    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def num_edges(self) -> int:
        return sum(popcount(r) for r in self.adj) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adj[u] >> v) & 1)

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return bits(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bits(self.adj[u] >> (u + 1) << (u + 1))]

    def edges_within(self, mask: int) -> int:
        """Number of edges with both endpoints in ``mask``."""
        total = 0
        for v in bits(mask):
            total += popcount(self.adj[v] & mask)
        return total // 2

    def is_connected_on(self, mask: int) -> bool:
        """Whether the subgraph induced on ``mask`` is connected (empty counts as connected)."""
        if not mask:
            return True
        seen = mask & -mask
        frontier = seen
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= self.adj[v]
            nxt &= mask & ~seen
            seen |= nxt
            frontier = nxt
        return seen == mask

    def component_of(self, v: int, mask: int) -> int:
        seen = 1 << v
        frontier = seen
        while frontier:
            nxt = 0
            for w in bits(frontier):
                nxt |= self.adj[w]
            nxt &= mask & ~seen
            seen |= nxt
            frontier = nxt
        return seen

    # transformations ----------------------------------------------------
    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph in which old vertex ``v`` becomes ``perm[v]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("relabelling must be a permutation of the vertices")
        adj = [0] * self.n
        for v in range(self.n):
            row = 0
            for w in bits(self.adj[v]):
                row |= 1 << perm[w]
            adj[perm[v]] = row
        return Graph(self.n, tuple(adj))

    def add_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        return Graph.from_edges(self.n, list(self.edges()) + list(edges))

    def remove_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        drop = {frozenset(e) for e in edges}
        return Graph.from_edges(self.n, [e for e in self.edges() if frozenset(e) not in drop])

    def add_vertices(self, k: int) -> "Graph":
        return Graph(self.n + k, self.adj + (0,) * k)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()})"


def induced_subgraph(g: Graph, s: Iterable[int] | int) -> tuple[Graph, list[int]]:
    """Subgraph induced on ``s``.

    Returns the new graph and the index map ``old_of_new`` (new vertex ``i`` is
    old vertex ``old_of_new[i]``; order is increasing in the old labels).
    """
    if isinstance(s, int):
        verts = bits(s)
        if s >> g.n:
            raise ValueError("vertex subset out of range")
    else:
        verts = sorted(set(s))
        for v in verts:
            if not 0 <= v < g.n:
                raise ValueError(f"vertex {v} out of range for n={g.n}")
    pos = {v: i for i, v in enumerate(verts)}
    adj = []
    for v in verts:
        row = 0
        for w in bits(g.adj[v]):
            if w in pos:
                row |= 1 << pos[w]
        adj.append(row)
    return Graph(len(verts), tuple(adj)), verts


@dataclass(frozen=True)
class RootedPair:
    """A nested pair (G, H) with H the subgraph of G induced on ``h``."""

    g: Graph
    h: int

    def __post_init__(self):
        if self.h >> self.g.n:
            raise ValueError("H is not a subset of V(G)")

    @classmethod
    def of(cls, g: Graph, h_vertices: Iterable[int]) -> "RootedPair":
        return cls(g, mask_of(h_vertices))

    @property
    def new_mask(self) -> int:
        return self.g.full_mask & ~self.h

    @property
    def v_ext(self) -> int:
        return self.g.n - popcount(self.h)

    @property
    def e_ext(self) -> int:
        return self.g.num_edges - self.g.edges_within(self.h)

    def h_graph(self) -> Graph:
        return induced_subgraph(self.g, self.h)[0]


@dataclass(frozen=True)
class VertexMap:
    """Total injective map ``source -> target`` given as ``images[v]``."""

    source: Graph
    target: Graph
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source.n:
            raise ValueError("map is not total")
        if len(set(self.images)) != len(self.images):
            raise ValueError("map is not injective")
        if any(not 0 <= t < self.target.n for t in self.images):
            raise ValueError("image out of range")

    def preserves_edges(self) -> bool:
        s, t, im = self.source, self.target, self.images
        return all(t.has_edge(im[u], im[v]) for u, v in s.edges())

    def is_induced_isomorphism(self) -> bool:
        s, t, im = self.source, self.target, self.images
        if s.n != t.n:
            return False
        return all(
            s.has_edge(u, v) == t.has_edge(im[u], im[v]) for u, v in combinations(range(s.n), 2)
        )


def is_extension(
    pattern: Graph,
    k: int,
    host: Graph,
    labels: Sequence[int],
    strict: bool = False,
    generalised: bool = False,
) -> bool:
    """Whether ``host`` restricted to ``labels`` is a (G,H)-extension.

    ``pattern`` is G with H its first ``k`` vertices, so vertex ``i`` of the
    pattern corresponds to host vertex ``labels[i]``.  Pairs inside H are
    ignored.  In the generalised case the first ``k`` labels may repeat; a
    pattern edge to any root that is identified with a host vertex counts as
    an edge to that host vertex.
    """
    ell = pattern.n
    if len(labels) != ell:
        raise ValueError("labelling length does not match the pattern")
    if not 0 <= k <= ell:
        raise ValueError("root count out of range")
    roots, new = labels[:k], labels[k:]
    if len(set(new)) != len(new) or set(new) & set(roots):
        return False
    if not generalised and len(set(roots)) != k:
        return False
    for i in range(k, ell):
        xi = labels[i]
        for j in range(ell):
            if j == i:
                continue
            xj = labels[j]
            if j < k:
                want = any(pattern.has_edge(i, jj) for jj in range(k) if labels[jj] == xj)
            else:
                want = pattern.has_edge(i, j)
            have = host.has_edge(xi, xj)
            if want and not have:
                return False
            if strict and have and not want:
                return False
    return True


def disjoint_union(*graphs: Graph) -> tuple[Graph, list[int]]:
    """Disjoint union; returns the graph and the offset of each summand."""
    offsets, adj, off = [], [], 0
    for g in graphs:
        offsets.append(off)
        adj.extend(row << off for row in g.adj)
        off += g.n
    return Graph(off, tuple(adj)), offsets


def attach(g: Graph, k: int, edges: Iterable[tuple[int, int]]) -> tuple[Graph, list[int]]:
    """Add ``k`` new vertices and ``edges``; endpoints ``>= g.n`` name new vertices."""
    h = g.add_vertices(k)
    return h.add_edges(edges), list(range(g.n, g.n + k))


# graph6 -------------------------------------------------------------------


def _encode_n(n: int) -> str:
    if n < 63:
        return chr(n + 63)
    if n < 258048:
        return "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    return "~~" + "".join(chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0))


def to_graph6(g: Graph) -> str:
    """Standard graph6 string (no ``>>graph6<<`` header)."""
    out = [_encode_n(g.n)]
    acc, nbits = 0, 0
    for j in range(1, g.n):
        row = g.adj[j]
        for i in range(j):
            acc = (acc << 1) | ((row >> i) & 1)
            nbits += 1
            if nbits == 6:
                out.append(chr(acc + 63))
                acc, nbits = 0, 0
    if nbits:
        out.append(chr((acc << (6 - nbits)) + 63))
    return "".join(out)


def from_graph6(text: str) -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    data = [ord(c) - 63 for c in s]
    if not data or any(not 0 <= d < 64 for d in data):
        raise ValueError("invalid graph6 string")
    if data[0] < 63:
        n, body = data[0], data[1:]
    elif len(data) > 1 and data[1] < 63:
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        body = data[4:]
    else:
        n = 0
        for d in data[2:8]:
            n = (n << 6) | d
        body = data[8:]
    need = n * (n - 1) // 2
    if len(body) != (need + 5) // 6:
        raise ValueError("graph6 body has the wrong length")
    adj = [0] * n
    pos = 0
    for j in range(1, n):
        for i in range(j):
            if (body[pos // 6] >> (5 - pos % 6)) & 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            pos += 1
    return Graph(n, tuple(adj))


def to_dot(g: Graph, name: str = "G", root: int | None = None) -> str:
    lines = [f"graph {name} {{"]
    for v in range(g.n):
        lines.append(f"  {v} [shape=doublecircle];" if v == root else f"  {v};")
    for u, v in g.edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_rooted(g: Graph, root: int) -> str:
    """Rooted graph as a graph6 line followed by a root-index line."""
    if not 0 <= root < g.n:
        raise ValueError("root out of range")
    return f"{to_graph6(g)}\n{root}\n"


def read_rooted(text: str) -> tuple[Graph, int]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise ValueError("rooted graph needs a graph6 line and a root line")
    g = from_graph6(lines[0])
    root = int(lines[1])
    if not 0 <= root < g.n:
        raise ValueError("root out of range")
    return g, root
