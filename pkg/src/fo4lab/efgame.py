"""Exact solver for the k-round Ehrenfeucht game on two graphs.

The game value is computed by memoised minimax.  Two memo modes exist:
``raw`` keys positions by the literal move tuples and explores every move;
``reduced`` keys positions by the set of matched pairs, skips repeated
moves, restricts the first move to automorphism orbit representatives and
decides the final round by comparing realised one-vertex types.  Both modes
must agree; ``raw`` is the reference.

A Spoiler win is turned into a sentence of quantifier depth at most k that
is true in X and false in Y.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum

from .canon import automorphism_orbits
from .graphs import Graph
from .logic import Adj, Eq, Exists, Forall, Formula, Not, conj, disj

__all__ = [
    "GameState",
    "Winner",
    "GameOutcome",
    "partial_iso_holds",
    "solve",
    "duplicator_wins",
    "synthesize_distinguisher",
    "equivalence_classes",
    "MAX_ROUNDS",
    "MAX_VERTICES",
]

MAX_ROUNDS = 6
MAX_VERTICES = 64


@dataclass(frozen=True)
class GameState:
    x_tuple: tuple[int, ...]
    y_tuple: tuple[int, ...]
    rounds_left: int

    def __post_init__(self):
        if len(self.x_tuple) != len(self.y_tuple):
            raise ValueError("move tuples must have equal length")
        if self.rounds_left < 0:
            raise ValueError("rounds_left must be non-negative")


class Winner(Enum):
    SPOILER = "spoiler"
    DUPLICATOR = "duplicator"


@dataclass(frozen=True)
class GameOutcome:
    winner: Winner
    trace: str | None = None
    formula: Formula | None = None

    def __post_init__(self):
        if self.formula is not None and self.winner is not Winner.SPOILER:
            raise ValueError("a distinguishing formula only accompanies a Spoiler win")


def _iso(xs, ys, x: Graph, y: Graph) -> bool:
    n = len(xs)
    for s in range(n):
        for t in range(s):
            if (xs[s] == xs[t]) != (ys[s] == ys[t]):
                return False
            if x.has_edge(xs[s], xs[t]) != y.has_edge(ys[s], ys[t]):
                return False
    return True


def partial_iso_holds(state: GameState, x: Graph, y: Graph) -> bool:
    for v in state.x_tuple:
        if not 0 <= v < x.n:
            raise ValueError("vertex of X out of range")
    for v in state.y_tuple:
        if not 0 <= v < y.n:
            raise ValueError("vertex of Y out of range")
    return _iso(state.x_tuple, state.y_tuple, x, y)


def _check_bounds(x: Graph, y: Graph, k: int, max_rounds: int):
    if k < 0:
        raise ValueError("round count must be non-negative")
    if k > max_rounds:
        raise ValueError(f"{k} rounds exceeds the bound {max_rounds}")
    if max(x.n, y.n) > MAX_VERTICES:
        raise ValueError(f"graphs above {MAX_VERTICES} vertices are not supported")


class _Solver:
    def __init__(self, x: Graph, y: Graph, reduced: bool):
        self.x, self.y = x, y
        self.reduced = reduced
        self.memo: dict = {}
        if reduced:
            ox = automorphism_orbits(x, max_n=MAX_VERTICES) if x.n else []
            oy = automorphism_orbits(y, max_n=MAX_VERTICES) if y.n else []
            self.first_x = sorted(set(ox))
            self.first_y = sorted(set(oy))

    def _type_set(self, g: Graph, tup) -> set[int]:
        out = set()
        for v in range(g.n):
            code = 0
            for s in tup:
                code = (code << 2) | ((v == s) << 1) | ((g.adj[v] >> s) & 1)
            out.add(code)
        return out

    def wins(self, xs: tuple, ys: tuple, r: int) -> bool:
        """Whether Duplicator wins from this position."""
        if not _iso(xs, ys, self.x, self.y):
            return False
        if r == 0:
            return True
        if self.reduced:
            pairs = tuple(sorted(set(zip(xs, ys))))
            key = (pairs, r)
            if key in self.memo:
                return self.memo[key]
            xs, ys = tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)
            if r == 1:
                res = self._type_set(self.x, xs) == self._type_set(self.y, ys)
            else:
                res = self._reduced_search(xs, ys, r)
        else:
            key = (xs, ys, r)
            if key in self.memo:
                return self.memo[key]
            res = self._raw_search(xs, ys, r)
        self.memo[key] = res
        return res

    def _raw_search(self, xs, ys, r) -> bool:
        x, y = self.x, self.y
        for a in range(x.n):
            if not any(self.wins(xs + (a,), ys + (b,), r - 1) for b in range(y.n)):
                return False
        for b in range(y.n):
            if not any(self.wins(xs + (a,), ys + (b,), r - 1) for a in range(x.n)):
                return False
        return True

    def _reduced_search(self, xs, ys, r) -> bool:
        x, y = self.x, self.y
        if xs:
            moves_x = [a for a in range(x.n) if a not in xs]
            moves_y = [b for b in range(y.n) if b not in ys]
            replies_y = moves_y
            replies_x = moves_x
        else:
            moves_x, moves_y = self.first_x, self.first_y
            replies_y, replies_x = range(y.n), range(x.n)
        for a in moves_x:
            if not any(self.wins(xs + (a,), ys + (b,), r - 1) for b in replies_y if b not in ys):
                return False
        for b in moves_y:
            if not any(self.wins(xs + (a,), ys + (b,), r - 1) for a in replies_x if a not in xs):
                return False
        return True


def duplicator_wins(x: Graph, y: Graph, k: int, reduced: bool = True, max_rounds: int = MAX_ROUNDS) -> bool:
    _check_bounds(x, y, k, max_rounds)
    return _Solver(x, y, reduced).wins((), (), k)


def _names(i: int) -> str:
    return f"x{i + 1}"


def _distinguishing_atom(xs, ys, x: Graph, y: Graph) -> Formula:
    # an atom (or its negation) true of xs in X and false of ys in Y
    for s in range(len(xs)):
        for t in range(s):
            ex, ey = xs[s] == xs[t], ys[s] == ys[t]
            if ex != ey:
                atom = Eq(_names(s), _names(t))
                return atom if ex else Not(atom)
            ax, ay = x.has_edge(xs[s], xs[t]), y.has_edge(ys[s], ys[t])
            if ax != ay:
                atom = Adj(_names(s), _names(t))
                return atom if ax else Not(atom)
    raise AssertionError("position is a partial isomorphism")


def _dedup(items: list[Formula]) -> list[Formula]:
    seen, out = set(), []
    for f in items:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


class _Synth:
    def __init__(self, solver: _Solver):
        self.s = solver
        self.memo: dict = {}

    def build(self, xs, ys, r) -> Formula:
        key = (xs, ys, r)
        if key in self.memo:
            return self.memo[key]
        x, y, s = self.s.x, self.s.y, self.s
        if not _iso(xs, ys, x, y):
            out = _distinguishing_atom(xs, ys, x, y)
        else:
            var = _names(len(xs))
            out = None
            for a in range(x.n):
                if not any(s.wins(xs + (a,), ys + (b,), r - 1) for b in range(y.n)):
                    parts = [self.build(xs + (a,), ys + (b,), r - 1) for b in range(y.n)]
                    out = Exists(var, conj(_dedup(parts), Eq(var, var)))
                    break
            if out is None:
                for b in range(y.n):
                    if not any(s.wins(xs + (a,), ys + (b,), r - 1) for a in range(x.n)):
                        parts = [self.build(xs + (a,), ys + (b,), r - 1) for a in range(x.n)]
                        out = Forall(var, disj(_dedup(parts), Not(Eq(var, var))))
                        break
            if out is None:
                raise AssertionError("Spoiler has no winning move at a Spoiler-won position")
        self.memo[key] = out
        return out


def _trace(solver: _Solver, xs, ys, r, depth: int, lines: list[str]):
    x, y = solver.x, solver.y
    pad = "  " * depth
    if r == 0 or not _iso(xs, ys, x, y):
        return
    if solver.wins(xs, ys, r):
        # one winning reply to every Spoiler move
        for side, moves in (("X", range(x.n)), ("Y", range(y.n))):
            for m in moves:
                if side == "X":
                    reply = next(b for b in range(y.n) if solver.wins(xs + (m,), ys + (b,), r - 1))
                    nxs, nys = xs + (m,), ys + (reply,)
                    lines.append(f"{pad}spoiler X:{m} -> duplicator Y:{reply}")
                else:
                    reply = next(a for a in range(x.n) if solver.wins(xs + (a,), ys + (m,), r - 1))
                    nxs, nys = xs + (reply,), ys + (m,)
                    lines.append(f"{pad}spoiler Y:{m} -> duplicator X:{reply}")
                _trace(solver, nxs, nys, r - 1, depth + 1, lines)
        return
    for a in range(x.n):
        if not any(solver.wins(xs + (a,), ys + (b,), r - 1) for b in range(y.n)):
            lines.append(f"{pad}spoiler X:{a}")
            for b in range(y.n):
                lines.append(f"{pad}  duplicator Y:{b}" + ("" if _iso(xs + (a,), ys + (b,), x, y) else " (loses)"))
                _trace(solver, xs + (a,), ys + (b,), r - 1, depth + 2, lines)
            return
    for b in range(y.n):
        if not any(solver.wins(xs + (a,), ys + (b,), r - 1) for a in range(x.n)):
            lines.append(f"{pad}spoiler Y:{b}")
            for a in range(x.n):
                lines.append(f"{pad}  duplicator X:{a}" + ("" if _iso(xs + (a,), ys + (b,), x, y) else " (loses)"))
                _trace(solver, xs + (a,), ys + (b,), r - 1, depth + 2, lines)
            return


def solve(
    x: Graph,
    y: Graph,
    k: int,
    reduced: bool = True,
    trace: bool = False,
    synthesize: bool = False,
    max_rounds: int = MAX_ROUNDS,
) -> GameOutcome:
    """Decide the k-round game; optionally attach a move tree and a distinguisher."""
    _check_bounds(x, y, k, max_rounds)
    solver = _Solver(x, y, reduced)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        dup = solver.wins((), (), k)
        text = None
        if trace:
            lines: list[str] = []
            _trace(solver, (), (), k, 0, lines)
            text = "\n".join(lines)
        formula = None
        if not dup and synthesize:
            formula = _Synth(solver).build((), (), k)
    finally:
        sys.setrecursionlimit(limit)
    return GameOutcome(Winner.DUPLICATOR if dup else Winner.SPOILER, text, formula)


def synthesize_distinguisher(x: Graph, y: Graph, k: int, max_rounds: int = MAX_ROUNDS) -> Formula | None:
    """A sentence of depth <= k true in ``x`` and false in ``y``, or None if none exists."""
    return solve(x, y, k, synthesize=True, max_rounds=max_rounds).formula


def equivalence_classes(graphs: list[Graph], k: int, reduced: bool = True) -> list[list[int]]:
    """Partition of indices by Duplicator winning the k-round game."""
    classes: list[list[int]] = []
    for i, g in enumerate(graphs):
        for cls in classes:
            if duplicator_wins(graphs[cls[0]], g, k, reduced):
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes
