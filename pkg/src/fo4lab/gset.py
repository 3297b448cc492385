"""The layered family of rooted bad-neighbourhood graphs.

Every member is a rooted graph with root 0.  Layer 0 holds small neutral or
rigid extensions of the root whose non-root part is connected; layer i
holds i-bad extensions of layer i-1 members.  All members have maximal
density below the density cap (5/3).

Two independent routes decide membership:

* ``enumerate_g`` builds the layers bottom-up and keeps one representative
  per rooted isomorphism class;
* ``GSetOracle`` answers "which layers contain this rooted graph?" lazily by
  searching for an induced chain inside the graph itself.

Members of a layer store their construction labelling: layer-j prefixes
``0..chain[j]-1`` are the chain G_0 < G_1 < ... < G_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .canon import rooted_canonical_form
from .extcalc import HypothesisError, PairKind, classify_masks, format_rational, parse_rational, rho_max_bruteforce, rho_max_flow
from .graphs import Graph, RootedPair, bits, induced_subgraph, popcount, read_rooted, to_graph6, write_rooted

__all__ = [
    "ALPHA",
    "GSetParams",
    "InfeasibleError",
    "GMember",
    "GSetRegistry",
    "GReport",
    "Bridge",
    "is_gamma_bad",
    "enumerate_g0",
    "enumerate_g",
    "verify_g_properties",
    "property6_check",
    "merge_at_root",
    "save_registry",
    "load_registry",
    "GSetOracle",
    "excess",
]

ALPHA = Fraction(3, 5)
FULL_SIZE_BOUND = 176


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class GSetParams:
    v0_bound: int = 10
    bad_bounds: tuple[int, ...] = (15, 30, 60)
    density_cap: Fraction = Fraction(5, 3)
    max_layer: int = 4
    allow_infeasible: bool = False

    def __post_init__(self):
        if self.v0_bound < 1 or not self.bad_bounds or min(self.bad_bounds) < 1:
            raise ValueError("bounds must be positive")
        if self.max_layer < 0:
            raise ValueError("max_layer must be non-negative")
        if self.density_cap <= 0:
            raise ValueError("density cap must be positive")

    def bad_bound(self, gamma: int) -> int:
        """Cap on v(K,T) for a gamma-bad pair; the last listed value repeats."""
        if gamma < 1:
            raise ValueError("gamma must be positive")
        return self.bad_bounds[min(gamma, len(self.bad_bounds)) - 1]

    def size_bound(self, layer: int) -> int:
        return 1 + self.v0_bound + sum(self.bad_bound(g) for g in range(1, layer + 1))

    def feasible(self) -> bool:
        used = [self.bad_bound(g) for g in range(1, self.max_layer + 1)]
        return self.v0_bound <= 6 and all(b <= 4 for b in used)

    def complexity_estimate(self) -> str:
        # labelled candidate count for the largest single extension step
        k = self.v0_bound
        worst = math.comb(k * (k + 1) // 2, (5 * k + 2) // 3)
        for g in range(1, self.max_layer + 1):
            b = self.bad_bound(g)
            n = self.size_bound(g - 1) + b
            slots = b * (n - b) + b * (b - 1) // 2
            worst = max(worst, math.comb(slots, 5 * b // 3 + 1))
        return f"about 10^{len(str(worst)) - 1} labelled candidates per base graph"

    @classmethod
    def full_scale(cls) -> "GSetParams":
        return cls()

    @classmethod
    def reduced(cls, v0_bound: int = 4, bound: int = 3, max_layer: int = 2) -> "GSetParams":
        return cls(v0_bound=v0_bound, bad_bounds=(bound,), max_layer=max_layer)

    @classmethod
    def from_file(cls, path: str | Path) -> "GSetParams":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        kw: dict = {}
        for key, val in values.items():
            if key == "v0_bound":
                kw[key] = int(val)
            elif key == "bad_bounds":
                kw[key] = tuple(int(x) for x in val.split(","))
            elif key == "density_cap":
                kw[key] = parse_rational(val)
            elif key == "max_layer":
                kw[key] = int(val)
            elif key == "allow_infeasible":
                kw[key] = val.lower() in ("1", "true", "yes")
            else:
                raise ValueError(f"unknown parameter {key!r}")
        return cls(**kw)

    def to_text(self) -> str:
        return (
            f"v0_bound={self.v0_bound}\n"
            f"bad_bounds={','.join(map(str, self.bad_bounds))}\n"
            f"density_cap={format_rational(self.density_cap)}\n"
            f"max_layer={self.max_layer}\n"
            f"allow_infeasible={'true' if self.allow_infeasible else 'false'}\n"
        )


def excess(g: Graph) -> Fraction:
    """f(G) = v(G) - (3/5) e(G)."""
    return g.n - ALPHA * g.num_edges


def _rho_max(g: Graph) -> Fraction:
    return rho_max_bruteforce(g) if g.n <= 16 else rho_max_flow(g)


def _path_condition(g: Graph, t_mask: int, root: int) -> bool:
    """Each vertex outside T reaches T - {root} in G - root."""
    target = t_mask & ~(1 << root)
    if not target:
        return False
    allowed = g.full_mask & ~(1 << root)
    reach = target
    frontier = target
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= g.adj[v]
        nxt &= allowed & ~reach
        reach |= nxt
        frontier = nxt
    return (g.full_mask & ~t_mask) & ~reach == 0


def is_gamma_bad(pair: RootedPair, gamma: int, params: GSetParams, root: int = 0) -> bool:
    """(K, T) is rigid at 3/5, small enough for gamma, and joined to T - root."""
    if not (pair.h >> root) & 1:
        raise ValueError("root is not a vertex of T")
    if pair.h == pair.g.full_mask:
        raise ValueError("T must be a proper subgraph of K")
    if popcount(pair.h) < 2:
        return False
    if pair.v_ext > params.bad_bound(gamma):
        return False
    if classify_masks(pair.g, pair.h, ALPHA).kind is not PairKind.RIGID:
        return False
    return _path_condition(pair.g, pair.h, root)


@dataclass(frozen=True)
class GMember:
    graph: Graph  # construction labelling, root 0
    layer: int
    chain: tuple[int, ...]  # prefix sizes of G_0, ..., G_layer
    cert: tuple = field(compare=False, repr=False)

    @property
    def root(self) -> int:
        return 0

    @property
    def f(self) -> Fraction:
        return excess(self.graph)


def _make_member(g: Graph, layer: int, chain: tuple[int, ...]) -> GMember:
    return GMember(g, layer, chain, rooted_canonical_form(g, 0))


def _better(a: GMember, b: GMember) -> bool:
    return (to_graph6(a.graph), a.chain) < (to_graph6(b.graph), b.chain)


def _candidate_extensions(base: Graph, b: int, e_lo: int, e_hi: int):
    """Labelled graphs adding ``b`` vertices and ``e_lo..e_hi`` edges to ``base``.

    Every new vertex has degree at least 2 (needed for both rigid and
    neutral extensions when any subset of new vertices can be removed).
    """
    n0 = base.n
    n = n0 + b
    slots = [(u, v) for v in range(n0, n) for u in range(v)]
    e_hi = min(e_hi, len(slots))
    for e in range(max(e_lo, 0), e_hi + 1):
        for chosen in combinations(range(len(slots)), e):
            deg = [0] * b
            for idx in chosen:
                u, v = slots[idx]
                deg[v - n0] += 1
                if u >= n0:
                    deg[u - n0] += 1
            if min(deg) < 2:
                continue
            adj = list(base.adj) + [0] * b
            for idx in chosen:
                u, v = slots[idx]
                adj[u] |= 1 << v
                adj[v] |= 1 << u
            yield Graph(n, tuple(adj))


def _excess_window(base_v: int, base_e: int, b: int, cap: Fraction, rigid_only: bool) -> tuple[int, int]:
    """Edge counts for a b-vertex extension that can be rigid (or neutral) and sparse enough."""
    # f(G', G) < 0 (rigid) or <= 0 (neutral): 5b - 3e < 0 / <= 0
    lo = (5 * b) // 3 + 1 if rigid_only else -(-5 * b // 3)
    # density of G' below the cap
    n = base_v + b
    limit = cap * n - base_e  # e_new < limit
    hi = math.ceil(limit) - 1
    return lo, hi


def enumerate_g0(params: GSetParams) -> list[GMember]:
    """Layer 0: one member per rooted class, root 0, sorted deterministically."""
    found: dict[tuple, GMember] = {}
    root = Graph.empty(1)
    for k in range(1, params.v0_bound + 1):
        lo, hi = _excess_window(1, 0, k, params.density_cap, rigid_only=False)
        for g in _candidate_extensions(root, k, lo, hi):
            if not g.is_connected_on(g.full_mask & ~1):
                continue
            kind = classify_masks(g, 1, ALPHA, bound=max(12, k)).kind
            if kind not in (PairKind.NEUTRAL, PairKind.RIGID):
                continue
            if _rho_max(g) >= params.density_cap:
                continue
            m = _make_member(g, 0, (g.n,))
            old = found.get(m.cert)
            if old is None or _better(m, old):
                found[m.cert] = m
    return sorted(found.values(), key=lambda m: (m.graph.n, to_graph6(m.graph)))


def _extend_layer(prev: list[GMember], layer: int, params: GSetParams) -> list[GMember]:
    found: dict[tuple, GMember] = {}
    bound = params.bad_bound(layer)
    for base in prev:
        g0 = base.graph
        base_mask = g0.full_mask
        for b in range(1, bound + 1):
            lo, hi = _excess_window(g0.n, g0.num_edges, b, params.density_cap, rigid_only=True)
            if lo > hi:
                continue
            for g in _candidate_extensions(g0, b, lo, hi):
                if not _path_condition(g, base_mask, 0):
                    continue
                if classify_masks(g, base_mask, ALPHA, bound=max(12, b)).kind is not PairKind.RIGID:
                    continue
                if _rho_max(g) >= params.density_cap:
                    continue
                m = _make_member(g, layer, base.chain + (g.n,))
                old = found.get(m.cert)
                if old is None or _better(m, old):
                    found[m.cert] = m
    return sorted(found.values(), key=lambda m: (m.graph.n, to_graph6(m.graph)))


@dataclass
class GSetRegistry:
    params: GSetParams
    layers: list[list[GMember]]
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {}
        self._shapes = set()
        for layer in self.layers:
            for m in layer:
                self._index.setdefault(m.cert, []).append(m)
                self._shapes.add((m.graph.n, m.graph.num_edges))

    def admits(self, n: int, e: int) -> bool:
        """Whether some member has ``n`` vertices and ``e`` edges."""
        return (n, e) in self._shapes

    @property
    def members(self) -> list[GMember]:
        """Distinct rooted classes, each listed once at its lowest layer."""
        out, seen = [], set()
        for layer in self.layers:
            for m in layer:
                if m.cert not in seen:
                    seen.add(m.cert)
                    out.append(m)
        return out

    @property
    def kappa(self) -> int:
        return len(self._index)

    def max_vertices(self) -> int:
        return max((m.graph.n for m in self.members), default=1)

    def layers_of(self, g: Graph, root: int) -> frozenset[int]:
        if g.n > self.max_vertices():
            return frozenset()
        cert = rooted_canonical_form(g, root)
        return frozenset(m.layer for m in self._index.get(cert, []))

    def contains(self, g: Graph, root: int) -> bool:
        return bool(self.layers_of(g, root))

    def lookup(self, g: Graph, root: int) -> GMember | None:
        if g.n > self.max_vertices():
            return None
        hits = self._index.get(rooted_canonical_form(g, root))
        return hits[0] if hits else None

    def index_of(self, member: GMember) -> int:
        for i, m in enumerate(self.members):
            if m.cert == member.cert:
                return i
        raise KeyError("not a registry member")


def enumerate_g(params: GSetParams, layers: int | None = None) -> GSetRegistry:
    top = params.max_layer if layers is None else layers
    if not params.feasible() and not params.allow_infeasible:
        raise InfeasibleError(
            "parameters are outside the desk-scale window "
            f"({params.complexity_estimate()}); set allow_infeasible to run anyway"
        )
    built = [enumerate_g0(params)]
    for i in range(1, top + 1):
        built.append(_extend_layer(built[-1], i, params))
    return GSetRegistry(params, built)


# verification ---------------------------------------------------------------


@dataclass
class GReport:
    rows: list[tuple[int, int, str, bool]] = field(default_factory=list)  # (member, layer, property, ok)

    def add(self, member: int, layer: int, prop: str, ok: bool):
        self.rows.append((member, layer, prop, ok))

    @property
    def failures(self) -> list[tuple[int, int, str, bool]]:
        return [r for r in self.rows if not r[3]]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        props: dict[str, list[int]] = {}
        for _, _, prop, ok in self.rows:
            props.setdefault(prop, [0, 0])[0 if ok else 1] += 1
        return "\n".join(f"{p}: {v[0]} pass, {v[1]} fail" for p, v in sorted(props.items()))


def _chain_ok(m: GMember, params: GSetParams) -> bool:
    g = m.graph
    prefix = [(1 << c) - 1 for c in m.chain]
    if prefix[-1] != g.full_mask or len(m.chain) != m.layer + 1:
        return False
    g0, _ = induced_subgraph(g, prefix[0])
    if g0.n - 1 > params.v0_bound or g0.n < 2:
        return False
    if classify_masks(g0, 1, ALPHA).kind not in (PairKind.NEUTRAL, PairKind.RIGID):
        return False
    if not g0.is_connected_on(g0.full_mask & ~1):
        return False
    for j in range(1, len(prefix)):
        gj, _ = induced_subgraph(g, prefix[j])
        if not is_gamma_bad(RootedPair(gj, prefix[j - 1]), j, params):
            return False
        if _rho_max(gj) >= params.density_cap:
            return False
    return True


def verify_g_properties(reg: GSetRegistry) -> GReport:
    report = GReport()
    params = reg.params
    seen: dict[int, set] = {}
    idx = 0
    for layer in reg.layers:
        for m in layer:
            g, i = m.graph, m.layer
            report.add(idx, i, "f_bound", excess(g) <= 1 - Fraction(i, 5))
            report.add(idx, i, "density", _rho_max(g) < params.density_cap)
            report.add(idx, i, "size", g.n <= min(params.size_bound(i), FULL_SIZE_BOUND))
            if i >= 1:
                report.add(idx, i, "rigid_over_root", classify_masks(g, 1, ALPHA, bound=g.n).kind is PairKind.RIGID)
            report.add(idx, i, "connected_without_root", g.is_connected_on(g.full_mask & ~1))
            report.add(idx, i, "chain", _chain_ok(m, params))
            certs = seen.setdefault(i, set())
            report.add(idx, i, "distinct", m.cert not in certs)
            certs.add(m.cert)
            idx += 1
    return report


# property 6 -------------------------------------------------------------------


def merge_at_root(g1: Graph, r1: int, g2: Graph, r2: int) -> tuple[Graph, list[int], list[int]]:
    """Union of two rooted graphs sharing only the root (new root 0).

    Returns the merged graph and the vertex maps of g1 and g2 into it.
    """
    map1 = [0] * g1.n
    nxt = 1
    for v in range(g1.n):
        if v != r1:
            map1[v] = nxt
            nxt += 1
    map2 = [0] * g2.n
    for v in range(g2.n):
        if v != r2:
            map2[v] = nxt
            nxt += 1
    edges = [(map1[u], map1[v]) for u, v in g1.edges()] + [(map2[u], map2[v]) for u, v in g2.edges()]
    return Graph.from_edges(nxt, edges), map1, map2


@dataclass(frozen=True)
class Bridge:
    """A pair (K~, T~) glued onto a merged graph.

    ``anchors[i]`` is the merged-graph vertex identified with the i-th vertex
    of T~ (in increasing order); new vertices of K~ are appended.
    """

    pair: RootedPair
    anchors: tuple[int, ...]

    def glue(self, merged: Graph) -> tuple[Graph, int]:
        t_vertices = bits(self.pair.h)
        if len(t_vertices) != len(self.anchors) or len(set(self.anchors)) != len(self.anchors):
            raise ValueError("anchors must list distinct images of the vertices of T~")
        new_vertices = bits(self.pair.new_mask)
        image = dict(zip(t_vertices, self.anchors))
        for i, v in enumerate(new_vertices):
            image[v] = merged.n + i
        edges = list(merged.edges())
        for u, v in self.pair.g.edges():
            if (self.pair.h >> u) & 1 and (self.pair.h >> v) & 1:
                continue
            edges.append((image[u], image[v]))
        g = Graph.from_edges(merged.n + len(new_vertices), set(tuple(sorted(e)) for e in edges))
        new_mask = ((1 << len(new_vertices)) - 1) << merged.n
        return g, new_mask


@dataclass(frozen=True)
class Property6Result:
    graph: Graph
    rho_max: Fraction
    layers: frozenset
    holds: bool


def property6_check(
    g1: Graph, r1: int, g2: Graph, r2: int, bridge: Bridge, family: "GSetOracle | GSetRegistry"
) -> Property6Result:
    """Glue a rigid bridge between two members and test: dense, or a member again."""
    if not family.contains(g1, r1) or not family.contains(g2, r2):
        raise HypothesisError("both graphs must be members of the family")
    if classify_masks(bridge.pair.g, bridge.pair.h, ALPHA).kind is not PairKind.RIGID:
        raise HypothesisError("bridge pair is not 3/5-rigid")
    if bridge.pair.v_ext > 5:
        raise HypothesisError("bridge adds more than 5 vertices")
    merged, map1, map2 = merge_at_root(g1, r1, g2, r2)
    k, new_mask = bridge.glue(merged)
    side1 = 0
    for v in map1:
        side1 |= 1 << v
    side2 = 0
    for v in map2:
        side2 |= 1 << v
    side1 &= ~1
    side2 &= ~1
    allowed = k.full_mask & ~1
    for v in bits(new_mask):
        comp = k.component_of(v, allowed)
        if not comp & side1 or not comp & side2:
            raise HypothesisError(f"new vertex {v} has no path to both members avoiding the root")
    rho = rho_max_flow(k)
    layers = family.layers_of(k, 0) if rho < Fraction(5, 3) else frozenset()
    return Property6Result(k, rho, layers, rho >= Fraction(5, 3) or bool(layers))


# persistence -----------------------------------------------------------------


def save_registry(reg: GSetRegistry, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = ["# rooted graph family manifest"]
    lines += [f"param.{ln}" for ln in reg.params.to_text().splitlines()]
    idx = 0
    for layer in reg.layers:
        for m in layer:
            name = f"m{idx:04d}.g6"
            (d / name).write_text(write_rooted(m.graph, 0))
            lines.append(
                f"member={idx} layer={m.layer} file={name} root=0 "
                f"chain={','.join(map(str, m.chain))} f={format_rational(m.f)} "
                f"rhomax={format_rational(_rho_max(m.graph))}"
            )
            idx += 1
    (d / "manifest.txt").write_text("\n".join(lines) + "\n")


def load_registry(directory: str | Path) -> GSetRegistry:
    d = Path(directory)
    param_lines, entries = [], []
    for raw in (d / "manifest.txt").read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("param."):
            param_lines.append(line[len("param.") :])
            continue
        fields = dict(tok.split("=", 1) for tok in line.split())
        entries.append(fields)
    tmp = d / ".params.tmp"
    tmp.write_text("\n".join(param_lines) + "\n")
    try:
        params = GSetParams.from_file(tmp)
    finally:
        tmp.unlink()
    layers: list[list[GMember]] = [[] for _ in range(params.max_layer + 1)]
    for e in entries:
        g, root = read_rooted((d / e["file"]).read_text())
        if root != 0:
            raise ValueError("registry members must be rooted at vertex 0")
        layer = int(e["layer"])
        chain = tuple(int(x) for x in e["chain"].split(","))
        while len(layers) <= layer:
            layers.append([])
        layers[layer].append(_make_member(g, layer, chain))
    return GSetRegistry(params, layers)


# lazy membership ---------------------------------------------------------------


class GSetOracle:
    """Layer membership of a rooted graph decided from the definition.

    Layer 0: at most ``v0_bound`` non-root vertices, neutral or rigid over
    the root, connected without the root, sparse.  Layer i: some induced
    P containing the root with G[P] in layer i-1 and (G, G[P]) i-bad, and G
    sparse.  Results are memoised by rooted canonical form.
    """

    def __init__(self, params: GSetParams):
        self.params = params
        self._memo: dict[tuple, frozenset] = {}

    def max_vertices(self) -> int:
        return self.params.size_bound(self.params.max_layer)

    def admits(self, n: int, e: int) -> bool:
        # members satisfy f(G) <= 1 (so 3e >= 5(n-1)) and lie below the density cap
        return 3 * e >= 5 * (n - 1) and e < self.params.density_cap * n

    def contains(self, g: Graph, root: int) -> bool:
        return bool(self.layers_of(g, root))

    def layers_of(self, g: Graph, root: int) -> frozenset[int]:
        if g.n < 2 or g.n > self.max_vertices():
            return frozenset()
        if root != 0:
            perm = list(range(g.n))
            perm[0], perm[root] = root, 0
            g = g.relabel(perm)
        return self._layers(g)

    def _layers(self, g: Graph) -> frozenset[int]:
        cert = rooted_canonical_form(g, 0, max_n=max(16, g.n))
        hit = self._memo.get(cert)
        if hit is not None:
            return hit
        out = self._compute(g)
        self._memo[cert] = out
        return out

    def _compute(self, g: Graph) -> frozenset[int]:
        p = self.params
        if not g.is_connected_on(g.full_mask & ~1):
            return frozenset()
        if _rho_max(g) >= p.density_cap:
            return frozenset()
        out = set()
        if g.n - 1 <= p.v0_bound and classify_masks(g, 1, ALPHA, bound=g.n).kind in (
            PairKind.NEUTRAL,
            PairKind.RIGID,
        ):
            out.add(0)
        others = g.full_mask & ~1
        for i in range(1, p.max_layer + 1):
            bound = p.bad_bound(i)
            found = False
            for b in range(1, min(bound, g.n - 2) + 1):
                for drop in combinations(bits(others), b):
                    dmask = sum(1 << v for v in drop)
                    keep = g.full_mask & ~dmask
                    if not g.is_connected_on(keep & ~1):
                        continue
                    if not _path_condition(g, keep, 0):
                        continue
                    if classify_masks(g, keep, ALPHA, bound=max(12, b)).kind is not PairKind.RIGID:
                        continue
                    sub, _ = induced_subgraph(g, keep)
                    if i - 1 in self._layers(sub):
                        found = True
                        break
                if found:
                    break
            if found:
                out.add(i)
        return frozenset(out)
