"""Exact extension calculus: excess values, pair classes and maximal density.

Everything is exact.  For ``alpha = p/q`` the excess of an extension with
``v`` new vertices and ``e`` new edges is ``v - alpha * e``; internally the
integer ``q * v - p * e`` is compared against zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .graphs import Graph, RootedPair, bits, induced_subgraph, popcount

__all__ = [
    "Rational",
    "parse_rational",
    "format_rational",
    "PairKind",
    "PairClass",
    "HypothesisError",
    "f_alpha",
    "f_value",
    "classify_pair",
    "classify_masks",
    "rho_max_bruteforce",
    "rho_max_flow",
    "compose_rigid",
    "claim1_predicate",
    "CLASSIFY_BOUND",
]

Rational = Fraction
CLASSIFY_BOUND = 12
BRUTE_BOUND = 25


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q``, an integer or a finite decimal into a reduced fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class PairKind(Enum):
    SAFE = "safe"
    RIGID = "rigid"
    NEUTRAL = "neutral"
    NONE = "none"


@dataclass(frozen=True)
class PairClass:
    kind: PairKind
    witness: int | None = None  # vertex mask of an intermediate S when kind is NONE

    def __str__(self) -> str:
        if self.kind is PairKind.NONE:
            return f"none witness={bits(self.witness or 0)}"
        return self.kind.value


class HypothesisError(ValueError):
    """The inputs do not satisfy the hypotheses of a checked statement."""


def _as_fraction(alpha) -> Fraction:
    return alpha if isinstance(alpha, Fraction) else Fraction(alpha)


def f_value(v: int, e: int, alpha) -> Fraction:
    return Fraction(v) - _as_fraction(alpha) * e


def f_alpha(pair: RootedPair, alpha) -> Fraction:
    return f_value(pair.v_ext, pair.e_ext, alpha)


def _ext_edge_table(g: Graph, h_mask: int) -> tuple[list[int], list[int]]:
    """Edge counts e(S, H) for every subset of the new vertices.

    Returns the list of new vertices and ``table[m]`` = number of edges of
    G[H + S] not inside H, where ``m`` indexes subsets of the new vertices.
    """
    new = bits(g.full_mask & ~h_mask)
    k = len(new)
    to_h = [popcount(g.adj[v] & h_mask) for v in new]
    inner = [0] * k
    for i, v in enumerate(new):
        row = 0
        for j, w in enumerate(new):
            if (g.adj[v] >> w) & 1:
                row |= 1 << j
        inner[i] = row
    table = [0] * (1 << k)
    for m in range(1, 1 << k):
        low = m & -m
        i = low.bit_length() - 1
        rest = m ^ low
        table[m] = table[rest] + to_h[i] + popcount(inner[i] & rest)
    return new, table


def classify_masks(g: Graph, h_mask: int, alpha, bound: int = CLASSIFY_BOUND) -> PairClass:
    """Classify (G, G[h_mask]) at ``alpha``."""
    alpha = _as_fraction(alpha)
    if h_mask >> g.n:
        raise ValueError("H is not a subset of V(G)")
    k = g.n - popcount(h_mask)
    if k == 0:
        raise ValueError("H = G cannot be classified")
    if k > bound:
        raise ValueError(f"v(G,H) = {k} exceeds the classification bound {bound}")
    p, q = alpha.numerator, alpha.denominator
    new, table = _ext_edge_table(g, h_mask)
    full = (1 << k) - 1
    weight = [q * popcount(m) - p * table[m] for m in range(full + 1)]

    def to_vertices(m: int) -> int:
        out = h_mask
        for i in bits(m):
            out |= 1 << new[i]
        return out

    # safe: every nonempty S has positive excess over H
    first_nonpos = next((m for m in range(1, full + 1) if weight[m] <= 0), None)
    if first_nonpos is None:
        return PairClass(PairKind.SAFE)
    # rigid: f(G,S) = weight[full] - weight[S] < 0 for every S != G
    wf = weight[full]
    first_bad_rigid = next((m for m in range(full) if wf >= weight[m]), None)
    if first_bad_rigid is None:
        return PairClass(PairKind.RIGID)
    if wf == 0:
        bad = next((m for m in range(1, full) if weight[m] <= 0), None)
        if bad is None:
            return PairClass(PairKind.NEUTRAL)
        return PairClass(PairKind.NONE, to_vertices(bad))
    # witness: a set violating safety; if the only such set is G itself
    # (so wf <= 0 but wf != 0) report the rigidity violator instead
    if first_nonpos != full:
        return PairClass(PairKind.NONE, to_vertices(first_nonpos))
    return PairClass(PairKind.NONE, to_vertices(first_bad_rigid))


def classify_pair(pair: RootedPair, alpha, bound: int = CLASSIFY_BOUND) -> PairClass:
    return classify_masks(pair.g, pair.h, alpha, bound)


# maximal density -----------------------------------------------------------


def _subset_edge_counts(g: Graph) -> np.ndarray:
    n = g.n
    counts = np.zeros(1 << n, dtype=np.int32)
    adj = np.array(g.adj, dtype=np.int64)
    for v in range(n):
        lo = 1 << v
        # subsets whose highest vertex is v: built from subsets of 0..v-1
        prev = np.arange(lo, dtype=np.int64)
        counts[lo : 2 * lo] = counts[:lo] + np.bitwise_count(prev & adj[v]).astype(np.int32)
    return counts


def rho_max_bruteforce(g: Graph) -> Fraction:
    """Maximum of e/v over nonempty vertex subsets, by full enumeration."""
    if g.n == 0:
        raise ValueError("maximal density of the empty graph is undefined")
    if g.n > BRUTE_BOUND:
        raise ValueError(f"{g.n} vertices exceeds the enumeration bound {BRUTE_BOUND}")
    counts = _subset_edge_counts(g)
    sizes = np.bitwise_count(np.arange(1 << g.n, dtype=np.int64))
    best = Fraction(0)
    # best density for each size, then compare exactly
    for v in range(1, g.n + 1):
        e = int(counts[sizes == v].max())
        best = max(best, Fraction(e, v))
    return best


def _denser_than(g: Graph, edges: list[tuple[int, int]], a: int, b: int) -> bool:
    """Whether some nonempty S has e(S)/v(S) > a/b, by one minimum cut.

    Network: source -> v with capacity b*m, v -> sink with
    b*m + 2a - b*deg(v), and capacity b on each edge in both directions
    (m = number of edges).  The cut around S costs
    b*m*n + 2*(a*|S| - b*e(S)), so a cut below b*m*n exposes a denser set.
    """
    n = g.n
    m = len(edges)
    s, t = n, n + 1
    rows, cols, caps = [], [], []
    for v in range(n):
        rows.append(s)
        cols.append(v)
        caps.append(b * m)
        rows.append(v)
        cols.append(t)
        caps.append(b * m + 2 * a - b * g.degree(v))
    for u, v in edges:
        rows += [u, v]
        cols += [v, u]
        caps += [b, b]
    if max(caps) >= 2**31:
        raise ValueError("graph too large for 32-bit flow capacities")
    cap = csr_matrix(
        (np.array(caps, dtype=np.int32), (np.array(rows), np.array(cols))), shape=(n + 2, n + 2)
    )
    flow = maximum_flow(cap, s, t).flow_value
    return flow < b * m * n


def rho_max_flow(g: Graph) -> Fraction:
    """Maximum subgraph density by min-cut decisions over candidate ratios.

    Candidates are the fractions e/v with 1 <= v <= n and e bounded by both
    v(v-1)/2 and e(G); the answer is the smallest candidate c for which no
    set is strictly denser than c.
    """
    if g.n == 0:
        raise ValueError("maximal density of the empty graph is undefined")
    edges = g.edges()
    m = len(edges)
    if m == 0:
        return Fraction(0)
    cands = sorted(
        {Fraction(e, v) for v in range(1, g.n + 1) for e in range(0, min(m, v * (v - 1) // 2) + 1)}
    )
    # the density of the whole graph is a lower bound
    lo = cands.index(Fraction(m, g.n))
    hi = len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        c = cands[mid]
        if _denser_than(g, edges, c.numerator, c.denominator):
            lo = mid + 1
        else:
            hi = mid
    return cands[lo]


# composition and the neutral-extension claim -------------------------------


def compose_rigid(g_prime: Graph, g_mask: int, h_mask: int, alpha) -> PairClass:
    """Classify (G', H) for nested H < G < G' given as vertex masks of ``g_prime``."""
    if h_mask & ~g_mask or g_mask & ~g_prime.full_mask:
        raise ValueError("pairs are not nested")
    if h_mask == g_mask or g_mask == g_prime.full_mask:
        raise ValueError("nesting must be strict")
    return classify_masks(g_prime, h_mask, alpha)


def claim1_predicate(g: Graph, u_mask: int, w_mask: int, alpha) -> bool:
    """Re-check the neutral-over-safe composition statement on one instance.

    Hypotheses: W < U <= G as vertex sets, (G, U) neutral, (U, W) safe (for
    empty W: maximal density of U below 1/alpha) and at least one edge
    between V(G) - V(U) and V(U) - V(W).  Raises ``HypothesisError`` if a
    hypothesis fails; returns whether (G, W) is safe.
    """
    alpha = _as_fraction(alpha)
    if w_mask & ~u_mask or u_mask & ~g.full_mask:
        raise HypothesisError("vertex sets are not nested")
    if w_mask == u_mask:
        raise HypothesisError("W must be a proper subset of U")
    if u_mask == g.full_mask:
        raise HypothesisError("U must be a proper subset of G")
    if classify_masks(g, u_mask, alpha).kind is not PairKind.NEUTRAL:
        raise HypothesisError("(G, U) is not neutral")
    if w_mask:
        sub, old = induced_subgraph(g, u_mask)
        pos = {v: i for i, v in enumerate(old)}
        sub_w = 0
        for v in bits(w_mask):
            sub_w |= 1 << pos[v]
        if classify_masks(sub, sub_w, alpha).kind is not PairKind.SAFE:
            raise HypothesisError("(U, W) is not safe")
    else:
        sub, _ = induced_subgraph(g, u_mask)
        if rho_max_flow(sub) >= 1 / alpha:
            raise HypothesisError("maximal density of U is not below 1/alpha")
    outside = g.full_mask & ~u_mask
    inner = u_mask & ~w_mask
    if not any(g.adj[v] & inner for v in bits(outside)):
        raise HypothesisError("no edge between V(G) - V(U) and V(U) - V(W)")
    if w_mask:
        return classify_masks(g, w_mask, alpha).kind is PairKind.SAFE
    return classify_masks(g, 0, alpha, bound=BRUTE_BOUND).kind is PairKind.SAFE


def nested_subsets(mask: int) -> Iterable[int]:
    """All subsets of ``mask`` (including 0 and ``mask``)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask
