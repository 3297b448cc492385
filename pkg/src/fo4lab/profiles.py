"""Bad neighbourhoods of a vertex, template-extension profiles and witness graphs.

A *family* is anything with ``layers_of(g, root)``, ``lookup``-free
membership and the ``admits(n, e)`` / ``max_vertices()`` prefilters:
``GSetRegistry`` (enumerated) or ``GSetOracle`` (lazy).

Conventions:

* vertex sets are bitmasks of the host graph;
* a template is a labelled graph whose first ``nu`` vertices are roots and
  whose last three vertices are added;
* a specification is an ``int`` bitmask over the admissible index triples
  (1-based, lexicographic, triples lying inside the roots skipped);
* ``T(U)`` is ``(T_1, T_2)``, each a sorted tuple of
  ``(index tuple, sorted specifications)`` over nonempty coordinates, and is
  quotiented over all canonical orders of ``U`` by taking the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterator, Sequence

from .canon import rooted_canonical_graph, rooted_isomorphisms
from .extcalc import HypothesisError, PairKind, classify_masks, rho_max_flow
from .graphs import Graph, bits, induced_subgraph, mask_of, popcount, to_graph6
from .gset import GSetRegistry

__all__ = [
    "Template",
    "NeutralTemplates",
    "TEMPLATES",
    "K1",
    "K2",
    "TICK",
    "neighbourhood_set",
    "delta",
    "extensions",
    "zeta",
    "theta_domain",
    "specification",
    "connected_subsets",
    "BadSubgraph",
    "find_u_bad",
    "zero_neighbourhood",
    "ProfileTable",
    "profile",
    "format_profile",
    "kt_star_neighbourhood",
    "kt_maximal",
    "WitnessResult",
    "build_witness",
]

DENSITY_CAP = Fraction(5, 3)


# templates --------------------------------------------------------------------


@dataclass(frozen=True)
class Template:
    name: str
    graph: Graph  # roots are 0..nu-1, added vertices follow
    nu: int

    @property
    def added(self) -> int:
        return self.graph.n - self.nu

    @property
    def root_mask(self) -> int:
        return (1 << self.nu) - 1


def _template(name: str, nu: int, edges, expect: PairKind) -> Template:
    n = nu + 3 if name != "tick" else nu + 1
    t = Template(name, Graph.from_edges(n, edges), nu)
    kind = classify_masks(t.graph, t.root_mask, Fraction(3, 5)).kind
    if kind is not expect:
        raise AssertionError(f"template {name} classifies as {kind.value}, expected {expect.value}")
    return t


# three roots; a path t1 - w - t3 with t1, w, t3 hanging off the roots in order
K1 = _template("K1", 3, [(3, 0), (4, 1), (5, 2), (3, 4), (4, 5)], PairKind.NEUTRAL)
# two roots; a path a - c - d - b plus e joined to c and d
K2 = _template("K2", 2, [(0, 2), (2, 3), (3, 1), (4, 3), (4, 2)], PairKind.NEUTRAL)
TICK = _template("tick", 2, [(2, 0), (2, 1)], PairKind.RIGID)


@dataclass(frozen=True)
class NeutralTemplates:
    k1_t1: Template = K1
    k2_t2: Template = K2
    kstar_tstar: Template = TICK

    def by_index(self, j: int) -> Template:
        if j == 1:
            return self.k1_t1
        if j == 2:
            return self.k2_t2
        raise ValueError("template index must be 1 or 2")


TEMPLATES = NeutralTemplates()


# neighbourhood sets -----------------------------------------------------------


def neighbourhood_set(g: Graph, constraints: Sequence[tuple[int, bool]]) -> int:
    """Vertices outside the constraints adjacent exactly to the positive ones."""
    vs = [v for v, _ in constraints]
    if len(set(vs)) != len(vs):
        raise ValueError("constraint vertices must be distinct")
    out = g.full_mask & ~mask_of(vs)
    for v, positive in constraints:
        out &= g.adj[v] if positive else ~g.adj[v]
    return out & g.full_mask


def delta(g: Graph, constraints: Sequence[tuple[int, bool]]) -> int:
    return 1 if neighbourhood_set(g, constraints) else 0


# template extensions ----------------------------------------------------------


def _plan(t: Template):
    # per added vertex: root positions it is joined to, earlier added vertices it is joined to
    plan = []
    for i in range(t.nu, t.graph.n):
        to_roots = tuple(r for r in range(t.nu) if t.graph.has_edge(i, r))
        to_prev = tuple(j - t.nu for j in range(t.nu, i) if t.graph.has_edge(i, j))
        not_prev = tuple(j - t.nu for j in range(t.nu, i) if not t.graph.has_edge(i, j))
        plan.append((to_roots, to_prev, not_prev))
    return plan


_PLANS = {t.name: _plan(t) for t in (K1, K2, TICK)}


def extensions(g: Graph, roots: Sequence[int], template: Template, allowed: int, strict: bool = True) -> Iterator[tuple[int, ...]]:
    """Images of the added template vertices forming a generalised extension.

    Roots may repeat; a template edge to any root identified with a host
    vertex requires that host edge.  Added vertices are distinct, avoid the
    roots and lie in ``allowed``.  With ``strict`` the host has no other
    edges among the roots and added vertices.
    """
    if len(roots) != template.nu:
        raise ValueError(f"template {template.name} takes {template.nu} roots, got {len(roots)}")
    plan = _PLANS.get(template.name) or _plan(template)
    root_set = mask_of(roots)
    want = []
    for to_roots, _, _ in plan:
        m = 0
        for r in to_roots:
            m |= 1 << roots[r]
        want.append(m)
    free = allowed & ~root_set & g.full_mask
    img: list[int] = []

    def rec(i: int, used: int):
        if i == len(plan):
            yield tuple(img)
            return
        to_roots, to_prev, not_prev = plan[i]
        if to_roots:
            cand = g.adj[roots[to_roots[0]]] & free & ~used
        elif to_prev:
            cand = g.adj[img[to_prev[0]]] & free & ~used
        else:
            cand = free & ~used
        for x in bits(cand):
            row = g.adj[x]
            if strict:
                if row & root_set != want[i]:
                    continue
            elif row & want[i] != want[i]:
                continue
            if any(not (row >> img[j]) & 1 for j in to_prev):
                continue
            if strict and any((row >> img[j]) & 1 for j in not_prev):
                continue
            img.append(x)
            yield from rec(i + 1, used | (1 << x))
            img.pop()

    yield from rec(0, 0)


def zeta(g: Graph, u_mask: int, roots: Sequence[int], template: Template = K1) -> int:
    """1 iff a strict generalised extension of ``roots`` lives outside U minus the roots."""
    if any(not (u_mask >> r) & 1 for r in roots):
        raise ValueError("roots must lie in U")
    allowed = g.full_mask & ~u_mask
    return 1 if next(extensions(g, roots, template, allowed), None) is not None else 0


def theta_domain(nu: int) -> list[tuple[int, int, int]]:
    """Admissible 1-based index triples for an extension with ``nu`` roots."""
    return [s for s in product(range(1, nu + 4), repeat=3) if max(s) > nu]


_DOMAINS = {nu: theta_domain(nu) for nu in (1, 2, 3)}


def specification(g: Graph, u_mask: int, order: Sequence[int]) -> int:
    """Specification of an extension given in canonical order (roots, added)."""
    nu = len(order) - 3
    if nu not in _DOMAINS:
        raise ValueError("canonical order must list the roots and three added vertices")
    if len(set(order[nu:])) != 3:
        raise ValueError("added vertices must be distinct")
    k_mask = u_mask | mask_of(order)
    allowed = g.full_mask & ~k_mask
    out = 0
    for i, s in enumerate(_DOMAINS[nu]):
        trip = (order[s[0] - 1], order[s[1] - 1], order[s[2] - 1])
        if next(extensions(g, trip, K1, allowed), None) is not None:
            out |= 1 << i
    return out


def _theta_sets(g: Graph, u_mask: int, roots: Sequence[int], template: Template) -> frozenset[int]:
    """Specifications of all strict generalised extensions of ``roots`` outside U.

    An extension is identified with its vertex set; when several labellings
    realise the same set the smallest specification represents it.
    """
    allowed = g.full_mask & ~u_mask
    per_set: dict[int, int] = {}
    for img in extensions(g, roots, template, allowed):
        key = mask_of(img)
        th = specification(g, u_mask, tuple(roots) + img)
        old = per_set.get(key)
        if old is None or th < old:
            per_set[key] = th
    return frozenset(per_set.values())


# bad subgraphs ------------------------------------------------------------------


def connected_subsets(g: Graph, allowed: int, max_size: int) -> Iterator[int]:
    """Every connected vertex set inside ``allowed`` with at most ``max_size`` vertices, once."""
    if max_size < 1:
        return
    for v in bits(allowed):
        higher = allowed & ~((1 << (v + 1)) - 1)

        def grow(sub: int, closed: int, ext: int, size: int):
            yield sub
            if size == max_size:
                return
            while ext:
                low = ext & -ext
                ext ^= low
                w = low.bit_length() - 1
                fresh = g.adj[w] & higher & ~closed
                yield from grow(sub | low, closed | fresh, ext | fresh, size + 1)

        start = 1 << v
        nb = g.adj[v] & higher
        yield from grow(start, start | nb, nb, 1)


@dataclass(frozen=True)
class BadSubgraph:
    key: object  # registry member index, or canonical graph6 for a lazy family
    layers: frozenset
    vertices: int  # bitmask in the host graph
    reference: Graph = field(compare=False, repr=False)  # member labelling, root 0


def _origin(family, sub: Graph, root: int):
    if isinstance(family, GSetRegistry):
        m = family.lookup(sub, root)
        if m is None:
            return None
        return family.index_of(m), family.layers_of(sub, root), m.graph
    layers = family.layers_of(sub, root)
    if not layers:
        return None
    ref, _ = rooted_canonical_graph(sub, root, max_n=max(16, sub.n))
    return to_graph6(ref), layers, ref


def _member_shape(family, g: Graph, mask: int) -> bool:
    return family.admits(popcount(mask), g.edges_within(mask))


def _spans_member(g: Graph, mask: int, u: int, family) -> bool:
    """Whether some spanning subgraph of g[mask], rooted at u, is a member."""
    sub, old = induced_subgraph(g, mask)
    root = old.index(u)
    n, e = sub.n, sub.num_edges
    rest = sub.full_mask & ~(1 << root)
    edges = sub.edges()
    for d in range(0, e + 1):
        if not family.admits(n, e - d):
            if e - d < 0 or 3 * (e - d) < 5 * (n - 1):
                break
            continue
        for drop in combinations(edges, d):
            h = sub.remove_edges(drop) if d else sub
            if h.is_connected_on(rest) and family.layers_of(h, root):
                return True
    return False


def _is_maximal(g: Graph, mask: int, u: int, family, limit: int) -> bool:
    """No strictly larger vertex set around u carries a spanning member."""
    allowed = g.full_mask & ~(1 << u)
    core = mask & ~(1 << u)
    seen = {core}
    frontier = [core]
    while frontier:
        nxt = []
        for c in frontier:
            if popcount(c) + 1 >= limit:
                continue
            around = 0
            for v in bits(c):
                around |= g.adj[v]
            for w in bits(around & allowed & ~c):
                bigger = c | (1 << w)
                if bigger in seen:
                    continue
                seen.add(bigger)
                nxt.append(bigger)
                if _spans_member(g, bigger | (1 << u), u, family):
                    return False
        frontier = nxt
    return True


def find_u_bad(g: Graph, u: int, family) -> list[BadSubgraph]:
    """All induced member copies rooted at ``u`` that no larger member copy contains."""
    if not 0 <= u < g.n:
        raise ValueError("vertex out of range")
    limit = min(family.max_vertices(), g.n)
    allowed = g.full_mask & ~(1 << u)
    near = g.adj[u]
    out = []
    for c in connected_subsets(g, allowed, limit - 1):
        if not c & near:
            continue
        mask = c | (1 << u)
        if not _member_shape(family, g, mask):
            continue
        sub, old = induced_subgraph(g, mask)
        hit = _origin(family, sub, old.index(u))
        if hit is None:
            continue
        if not _is_maximal(g, mask, u, family, limit):
            continue
        key, layers, ref = hit
        out.append(BadSubgraph(key, layers, mask, ref))
    out.sort(key=lambda b: (bits(b.vertices), str(b.key)))
    return out


def zero_neighbourhood(g: Graph, u: int, bad: Sequence[BadSubgraph]) -> int:
    out = g.full_mask
    for b in bad:
        out &= ~b.vertices
    return out


# profiles ---------------------------------------------------------------------


def canonical_orders(g: Graph, b: BadSubgraph, u: int) -> list[list[int]]:
    """Orders (u_1, ..., u_v) of U matching the member labelling, u_1 = u."""
    sub, old = induced_subgraph(g, b.vertices)
    isos = rooted_isomorphisms(b.reference, 0, sub, old.index(u))
    return [[old[img[i]] for i in range(len(img))] for img in isos]


def _coordinate_sets(g: Graph, u_mask: int) -> tuple[dict, dict]:
    """For each template, host root tuple -> set of specifications (nonempty only)."""
    verts = bits(u_mask)
    out = []
    for t in (K1, K2):
        table = {}
        for roots in product(verts, repeat=t.nu):
            s = _theta_sets(g, u_mask, roots, t)
            if s:
                table[roots] = s
        out.append(table)
    return out[0], out[1]


def _encode(tables, order: Sequence[int]):
    pos = {v: i + 1 for i, v in enumerate(order)}
    enc = []
    for table in tables:
        enc.append(
            tuple(sorted((tuple(pos[v] for v in roots), tuple(sorted(s))) for roots, s in table.items()))
        )
    return tuple(enc)


def profile_vector(g: Graph, b: BadSubgraph, u: int):
    """T(U) and a canonical order attaining it."""
    tables = _coordinate_sets(g, b.vertices)
    best = None
    for order in canonical_orders(g, b, u):
        enc = _encode(tables, order)
        if best is None or enc < best[0]:
            best = (enc, order)
    if best is None:
        raise AssertionError("a bad subgraph has no canonical order")
    return best


@dataclass(frozen=True)
class ProfileTable:
    u: int
    bad: tuple[BadSubgraph, ...]
    u0: int
    vectors: tuple  # T(U) for each entry of ``bad``
    orders: tuple  # the canonical order attaining each vector

    @property
    def profiles(self) -> dict:
        """Member key -> set of T(U) over the u-bad copies of that member."""
        out: dict = {}
        for b, vec in zip(self.bad, self.vectors):
            out.setdefault(b.key, set()).add(vec)
        return {k: frozenset(v) for k, v in out.items()}

    def by_layer(self) -> dict[int, list[BadSubgraph]]:
        out: dict[int, list[BadSubgraph]] = {}
        for b in self.bad:
            for i in sorted(b.layers):
                out.setdefault(i, []).append(b)
        return out


def profile(g: Graph, u: int, family) -> ProfileTable:
    bad = find_u_bad(g, u, family)
    vecs, orders = [], []
    for b in bad:
        vec, order = profile_vector(g, b, u)
        vecs.append(vec)
        orders.append(tuple(order))
    return ProfileTable(u, tuple(bad), zero_neighbourhood(g, u, bad), tuple(vecs), tuple(orders))


def format_profile(table: ProfileTable) -> str:
    """Line records, sorted, for diffing the profiles of two vertices."""
    lines = [f"vertex u={table.u}", f"zero u0={','.join(map(str, bits(table.u0)))}"]
    for b in table.bad:
        lines.append(
            f"bad member={b.key} layers={','.join(map(str, sorted(b.layers)))} "
            f"vertices={','.join(map(str, bits(b.vertices)))}"
        )
    entries = []
    for key, vecs in table.profiles.items():
        for vec in vecs:
            body = []
            for j, coords in enumerate(vec, start=1):
                for idx, thetas in coords:
                    body.append(
                        f"  spec j={j} tuple={','.join(map(str, idx))} "
                        f"thetas={','.join(format(t, 'x') for t in thetas)}"
                    )
            entries.append((str(key), body))
    entries.sort()
    for key, body in entries:
        lines.append(f"entry member={key} coordinates={len(body)}")
        lines.extend(body)
    return "\n".join(lines) + "\n"


# tick neighbourhoods and template maximality ---------------------------------


def kt_star_neighbourhood(g: Graph, seed: int, order: int | None = None) -> int:
    """Repeatedly add vertices with at least two neighbours in the current set."""
    if not seed:
        raise ValueError("seed must be nonempty")
    w = seed
    step = 0
    while order is None or step < order:
        add = 0
        for v in bits(g.full_mask & ~w):
            if popcount(g.adj[v] & w) >= 2:
                add |= 1 << v
        if not add:
            break
        w |= add
        step += 1
    return w


@dataclass(frozen=True)
class MaximalityWitness:
    t_tilde: tuple[int, ...]  # images of the template roots
    k_tilde: tuple[int, ...]  # images of the added template vertices


def kt_maximal(g: Graph, g_mask: int, h_mask: int, template: Template) -> tuple[bool, MaximalityWitness | None]:
    """(K,T)-maximality of the pair (G~, H~) inside ``g``."""
    if h_mask & ~g_mask:
        raise ValueError("H~ must be inside G~")
    if template.nu > popcount(g_mask):
        raise ValueError("template has more roots than G~ has vertices")
    outside = g.full_mask & ~g_mask
    for t_set in combinations(bits(g_mask), template.nu):
        t_mask = mask_of(t_set)
        if not t_mask & ~h_mask:
            continue
        rest = g_mask & ~t_mask
        allowed = 0
        for v in bits(outside):
            if not g.adj[v] & rest:
                allowed |= 1 << v
        for roots in permutations(t_set):
            img = next(extensions(g, roots, template, allowed, strict=False), None)
            if img is not None:
                return False, MaximalityWitness(tuple(roots), img)
    return True, None


# witness graphs -----------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.n = 1
        self.edges: set[tuple[int, int]] = set()
        self._graph: Graph | None = None

    def new(self, k: int) -> list[int]:
        out = list(range(self.n, self.n + k))
        self.n += k
        self._graph = None
        return out

    def join(self, u: int, v: int):
        if u != v:
            self.edges.add((min(u, v), max(u, v)))
            self._graph = None

    def graph(self) -> Graph:
        if self._graph is None:
            self._graph = Graph.from_edges(self.n, self.edges)
        return self._graph

    def attach(self, roots: Sequence[int], t: Template) -> list[int]:
        new = self.new(t.added)
        image = list(roots) + new
        for a, b in t.graph.edges():
            if a < t.nu and b < t.nu:
                continue
            self.join(image[a], image[b])
        return new


@dataclass(frozen=True)
class WitnessResult:
    z: Graph
    root: int
    copies: tuple[int, ...]  # vertex masks of the step-2a copies
    rho_max: Fraction
    source: ProfileTable
    image: ProfileTable

    @property
    def sparse(self) -> bool:
        return self.rho_max < DENSITY_CAP

    @property
    def same_profiles(self) -> bool:
        return self.source.profiles == self.image.profiles

    @property
    def copies_are_bad(self) -> bool:
        return sorted(b.vertices for b in self.image.bad) == sorted(self.copies)


def build_witness(a: Graph, x1: int, family) -> WitnessResult:
    """A graph Z around a fresh root z1 = 0 realising every profile entry of x1."""
    rho = rho_max_flow(a) if a.n else Fraction(0)
    if rho >= DENSITY_CAP:
        raise HypothesisError("the source graph contains a subgraph of density at least 5/3")
    src = profile(a, x1, family)
    for b1, b2 in combinations(src.bad, 2):
        if b1.vertices & b2.vertices != 1 << x1:
            raise HypothesisError("two bad subgraphs of x1 share more than x1")
    z = _Builder()
    copies = []
    # one copy per distinct vector of each member
    chosen: dict = {}
    for b, vec in zip(src.bad, src.vectors):
        chosen.setdefault((str(b.key), vec), b)
    # all copies first, so extensions already present among them are reused
    placed = []
    for (_, vec), b in sorted(chosen.items(), key=lambda kv: kv[0]):
        ref = b.reference
        place = [0] + z.new(ref.n - 1)
        for p, q in ref.edges():
            z.join(place[p], place[q])
        copies.append(mask_of(place))
        placed.append((vec, place))
    # extensions rooted only at z1 are themselves small members around z1 and
    # are usually realised inside another copy; they go last
    jobs = []
    for (vec, place), copy_mask in zip(placed, copies):
        for t, coords in zip((K1, K2), vec):
            for idx, thetas in coords:
                roots = tuple(place[i - 1] for i in idx)
                for th in thetas:
                    jobs.append((all(r == 0 for r in roots), copy_mask, roots, t, th))
    jobs.sort(key=lambda job: job[0])
    for _, copy_mask, roots, t, th in jobs:
        if th in _theta_sets(z.graph(), copy_mask, roots, t):
            continue
        added = z.attach(roots, t)
        order = roots + tuple(added)
        k_mask = copy_mask | mask_of(added)
        for i, s in enumerate(_DOMAINS[t.nu]):
            if not (th >> i) & 1:
                continue
            trip = tuple(order[c - 1] for c in s)
            if zeta(z.graph(), k_mask, trip):
                continue
            z.attach(trip, K1)
    zg = z.graph()
    img = profile(zg, 0, family)
    rho_z = rho_max_flow(zg) if zg.num_edges else Fraction(0)
    return WitnessResult(zg, 0, tuple(copies), rho_z, src, img)
