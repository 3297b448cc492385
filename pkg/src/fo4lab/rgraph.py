"""Seeded sampling of G(n, n^-alpha) and Monte-Carlo probes over an alpha grid.

Every sample draws from its own stream, seeded by
``SeedSequence([seed, cell, sample, side])``, so results do not depend on
evaluation order.  Probability estimates come with a Wald 95% half-width
``1.96 * sqrt(phat * (1 - phat) / M)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .efgame import duplicator_wins
from .extcalc import HypothesisError, PairKind, classify_pair, parse_rational
from .graphs import Graph, RootedPair, bits
from .logic import Formula, evaluate, quantifier_depth
from .profiles import Template, kt_maximal

__all__ = [
    "SampleSpec",
    "EdgeSample",
    "ProbeResult",
    "GridCell",
    "sample_gnp",
    "sample",
    "has_clique",
    "DETECTORS",
    "probe_sentence",
    "probe_ehr",
    "probe_maximal_extension",
    "wald_halfwidth",
    "read_grid",
    "write_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("alpha_num", "alpha_den", "n", "m", "samples", "successes", "phat", "halfwidth")
Z95 = 1.96
# rough per-cell operation budget used to refuse hopeless cells
WORK_BUDGET = 5e9
DENSE_PAIRS = 1 << 20


def edge_probability(n: int, alpha: Fraction) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return math.exp(-float(alpha) * math.log(n))


@dataclass(frozen=True)
class SampleSpec:
    n: int
    alpha: Fraction
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 < self.p <= 1:
            raise ValueError(f"edge probability {self.p} out of range")

    @property
    def p(self) -> float:
        return edge_probability(self.n, Fraction(self.alpha))


@dataclass(frozen=True)
class EdgeSample:
    """Edges (u < v) in lexicographic order."""

    n: int
    u: np.ndarray
    v: np.ndarray

    @property
    def num_edges(self) -> int:
        return int(self.u.size)

    def forward(self) -> list[set[int]]:
        out: list[set[int]] = [set() for _ in range(self.n)]
        for a, b in zip(self.u.tolist(), self.v.tolist()):
            out[a].add(b)
        return out

    def to_graph(self) -> Graph:
        adj = [0] * self.n
        for a, b in zip(self.u.tolist(), self.v.tolist()):
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return Graph(self.n, tuple(adj))


def _pair_of_index(n: int, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # row i starts at i*n - i*(i+1)/2 in the lexicographic order of pairs
    i = np.arange(n, dtype=np.int64)
    starts = i * n - i * (i + 1) // 2
    rows = np.searchsorted(starts, k, side="right") - 1
    cols = k - starts[rows] + rows + 1
    return rows, cols


def sample_gnp(n: int, p: float, rng: np.random.Generator, method: str = "auto") -> EdgeSample:
    """G(n, p): geometric skips over the pair order, or one Bernoulli draw per pair."""
    if not 0 <= p <= 1:
        raise ValueError(f"edge probability {p} out of range")
    total = n * (n - 1) // 2
    if method == "auto":
        method = "bernoulli" if total <= DENSE_PAIRS or p > 0.25 else "skip"
    if p == 0 or total == 0:
        idx = np.zeros(0, dtype=np.int64)
    elif p == 1:
        idx = np.arange(total, dtype=np.int64)
    elif method == "bernoulli":
        idx = np.flatnonzero(rng.random(total) < p).astype(np.int64)
    elif method == "skip":
        parts = []
        pos = -1
        mean = total * p
        chunk = int(mean + 6 * math.sqrt(mean) + 16)
        while True:
            gaps = rng.geometric(p, size=chunk)
            run = pos + np.cumsum(gaps)
            parts.append(run[run < total])
            if run[-1] >= total:
                break
            pos = int(run[-1])
        idx = np.concatenate(parts).astype(np.int64)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    u, v = _pair_of_index(n, idx)
    return EdgeSample(n, u, v)


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def sample(spec: SampleSpec, method: str = "auto") -> EdgeSample:
    return sample_gnp(spec.n, spec.p, _rng(spec.seed), method)


# detectors ------------------------------------------------------------------


def has_clique(fwd: Sequence[set[int]], k: int) -> bool:
    """Whether the graph with forward neighbour sets ``fwd`` contains K_k."""
    if k <= 1:
        return len(fwd) >= k

    def grow(cands: set[int], need: int) -> bool:
        if need == 0:
            return True
        if len(cands) < need:
            return False
        for w in sorted(cands):
            if grow(cands & fwd[w], need - 1):
                return True
        return False

    return any(len(f) >= k - 1 and grow(f, k - 1) for f in fwd)


def _clique_detector(k: int) -> Callable[[EdgeSample], bool]:
    return lambda s: has_clique(s.forward(), k)


DETECTORS: dict[str, Callable[[EdgeSample], bool]] = {
    "triangle": _clique_detector(3),
    "k4": _clique_detector(4),
    "k5": _clique_detector(5),
}


# results --------------------------------------------------------------------


def wald_halfwidth(successes: int, samples: int) -> float:
    if samples <= 0:
        raise ValueError("sample count must be positive")
    ph = successes / samples
    return Z95 * math.sqrt(ph * (1 - ph) / samples)


@dataclass(frozen=True)
class GridCell:
    alpha: Fraction
    n: int
    m: int | None = None


@dataclass(frozen=True)
class ProbeResult:
    alpha: Fraction
    n: int
    m: int | None
    samples: int
    successes: int | None  # None marks an infeasible cell
    note: str = ""

    def __post_init__(self):
        if self.successes is not None and not 0 <= self.successes <= self.samples:
            raise ValueError("success count out of range")

    @property
    def feasible(self) -> bool:
        return self.successes is not None

    @property
    def phat(self) -> float | None:
        return None if self.successes is None else self.successes / self.samples

    @property
    def halfwidth(self) -> float | None:
        return None if self.successes is None else wald_halfwidth(self.successes, self.samples)

    def row(self) -> list[str]:
        na = "NA"
        return [
            str(self.alpha.numerator),
            str(self.alpha.denominator),
            str(self.n),
            "" if self.m is None else str(self.m),
            str(self.samples),
            na if self.successes is None else str(self.successes),
            na if self.phat is None else f"{self.phat:.6f}",
            na if self.halfwidth is None else f"{self.halfwidth:.6f}",
        ]


def write_csv(results: Iterable[ProbeResult], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow(r.row())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_grid(path: str | Path) -> list[GridCell]:
    """Lines ``alpha n [m]``; ``#`` starts a comment."""
    cells = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'alpha n [m]'")
        alpha = parse_rational(line[0])
        if alpha <= 0:
            raise ValueError(f"{path}:{lineno}: alpha must be positive")
        n = int(line[1])
        m = int(line[2]) if len(line) == 3 else None
        cells.append(GridCell(alpha, n, m))
    return cells


def _as_cells(grid: Iterable) -> list[GridCell]:
    out = []
    for c in grid:
        if isinstance(c, GridCell):
            out.append(c)
        else:
            out.append(GridCell(Fraction(c[0]), int(c[1]), int(c[2]) if len(c) > 2 else None))
    return out


# probes ---------------------------------------------------------------------


def _run_cells(cells, samples, trial, cost) -> list[ProbeResult]:
    if samples <= 0:
        raise ValueError("sample count must be positive")
    out = []
    for ci, cell in enumerate(cells):
        work = cost(cell) * samples
        if work > WORK_BUDGET:
            out.append(ProbeResult(cell.alpha, cell.n, cell.m, samples, None, f"estimated work {work:.2g}"))
            continue
        hits = sum(1 for si in range(samples) if trial(ci, si, cell))
        out.append(ProbeResult(cell.alpha, cell.n, cell.m, samples, hits))
    return out


def probe_sentence(detector: str | Formula, grid, samples: int, seed: int) -> list[ProbeResult]:
    """Frequency of a property: a built-in clique detector or an FO sentence."""
    cells = _as_cells(grid)
    if isinstance(detector, Formula):
        depth = quantifier_depth(detector)

        def check(s: EdgeSample) -> bool:
            return evaluate(detector, s.to_graph())

        def cost(c: GridCell) -> float:
            return float(c.n) ** max(depth, 1) * 10

    else:
        if detector not in DETECTORS:
            raise ValueError(f"unknown detector {detector!r}")
        check = DETECTORS[detector]

        def cost(c: GridCell) -> float:
            # about ten operations per sampled edge, measured on the clique detectors
            return c.n * c.n * edge_probability(c.n, c.alpha) * 5

    def trial(ci: int, si: int, c: GridCell) -> bool:
        s = sample_gnp(c.n, edge_probability(c.n, c.alpha), _rng(seed, ci, si, 0))
        return check(s)

    return _run_cells(cells, samples, trial, cost)


def probe_ehr(grid, k: int, samples: int, seed: int) -> list[ProbeResult]:
    """Frequency of Duplicator winning the k-round game on independent samples."""
    cells = _as_cells(grid)
    if any(c.m is None for c in cells):
        raise ValueError("game probes need cells 'alpha n m'")

    def cost(c: GridCell) -> float:
        if max(c.n, c.m) > 64:
            return math.inf
        return float(c.n * c.m) ** max(k - 1, 0) * (c.n + c.m) * 20

    def trial(ci: int, si: int, c: GridCell) -> bool:
        x = sample_gnp(c.n, edge_probability(c.n, c.alpha), _rng(seed, ci, si, 0)).to_graph()
        y = sample_gnp(c.m, edge_probability(c.m, c.alpha), _rng(seed, ci, si, 1)).to_graph()
        return duplicator_wins(x, y, k)

    return _run_cells(cells, samples, trial, cost)


def _strict_extensions(g: Graph, pair: RootedPair, roots: Sequence[int]):
    """Images of the new pattern vertices giving a strict (G,H)-extension of ``roots``."""
    pat = pair.g
    hs = bits(pair.h)
    new = bits(pair.new_mask)
    root_img = dict(zip(hs, roots))
    root_set = 0
    for r in roots:
        root_set |= 1 << r
    img: dict[int, int] = {}

    def rec(i: int, used: int):
        if i == len(new):
            yield tuple(img[x] for x in new)
            return
        a = new[i]
        want_roots = 0
        for h in hs:
            if pat.has_edge(a, h):
                want_roots |= 1 << root_img[h]
        prev = new[:i]
        if want_roots:
            cand = g.adj[(want_roots & -want_roots).bit_length() - 1]
        elif any(pat.has_edge(a, b) for b in prev):
            cand = g.adj[img[next(b for b in prev if pat.has_edge(a, b))]]
        else:
            cand = g.full_mask
        cand &= ~root_set & ~used
        for x in bits(cand):
            row = g.adj[x]
            if row & root_set != want_roots:
                continue
            if any(bool((row >> img[b]) & 1) != pat.has_edge(a, b) for b in prev):
                continue
            img[a] = x
            yield from rec(i + 1, used | (1 << x))
            del img[a]

    yield from rec(0, 0)


def probe_maximal_extension(
    pair: RootedPair, template: Template, grid, samples: int, seed: int, alpha=None
) -> list[ProbeResult]:
    """Frequency that random roots have a strict extension maximal for the template.

    ``alpha`` defaults to each cell's own value; the pair must be safe there.
    """
    cells = _as_cells(grid)
    r = bin(pair.h).count("1")
    for c in cells:
        a = c.alpha if alpha is None else Fraction(alpha)
        if classify_pair(pair, a).kind is not PairKind.SAFE:
            raise HypothesisError(f"pair is not safe at alpha = {a}")

    def cost(c: GridCell) -> float:
        return float(c.n) ** (pair.v_ext + 1) * 50

    def trial(ci: int, si: int, c: GridCell) -> bool:
        rng = _rng(seed, ci, si, 0)
        g = sample_gnp(c.n, edge_probability(c.n, c.alpha), rng).to_graph()
        if g.n < r:
            return False
        roots = [int(x) for x in rng.choice(g.n, size=r, replace=False)]
        h_mask = 0
        for x in roots:
            h_mask |= 1 << x
        for img in _strict_extensions(g, pair, roots):
            g_mask = h_mask
            for x in img:
                g_mask |= 1 << x
            if kt_maximal(g, g_mask, h_mask, template)[0]:
                return True
        return False

    return _run_cells(cells, samples, trial, cost)
