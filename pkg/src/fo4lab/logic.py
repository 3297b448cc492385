"""First-order sentences over the graph vocabulary {=, ~}.

Surface syntax (ASCII)::

    formula := implies
    implies := or ( '->' implies )?          right associative
    or      := and ( '|' and )*
    and     := unary ( '&' unary )*
    unary   := '!' unary | quant | atom | '(' formula ')'
    quant   := ('A' | 'E') var '.' formula    scope extends maximally right
    atom    := var '=' var | var '~' var

Variables are lowercase identifiers (letters, digits, underscore).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

from .graphs import Graph

__all__ = [
    "Formula",
    "Eq",
    "Adj",
    "Not",
    "And",
    "Or",
    "Implies",
    "Forall",
    "Exists",
    "FormulaSyntaxError",
    "UnboundVariableError",
    "parse",
    "pretty",
    "quantifier_depth",
    "free_variables",
    "evaluate",
    "is_monotone",
    "read_formula_file",
    "sentence_corpus",
    "conj",
    "disj",
]


class Formula:
    """Base class of formula nodes."""

    @cached_property
    def depth(self) -> int:
        return quantifier_depth(self)

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Adj(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnboundVariableError(ValueError):
    pass


_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<arrow>->)|(?P<op>[&|!().=~])|(?P<quant>[AE])|(?P<var>[a-z][a-z0-9_]*)"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            out.append(_Tok(kind, tok, line, pos - line_start + 1))
        else:
            for i, ch in enumerate(tok):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.take()
        if t.text != text:
            found = t.text or "end of input"
            raise FormulaSyntaxError(f"expected {text!r}, found {found!r}", t.line, t.col)
        return t

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "arrow":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek().text == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek().text == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        t = self.peek()
        if t.text == "!":
            self.take()
            return Not(self.unary())
        if t.kind == "quant":
            self.take()
            v = self.take()
            if v.kind != "var":
                raise FormulaSyntaxError("expected a variable after quantifier", v.line, v.col)
            self.expect(".")
            body = self.formula()
            return Forall(v.text, body) if t.text == "A" else Exists(v.text, body)
        if t.text == "(":
            self.take()
            inner = self.formula()
            self.expect(")")
            return inner
        if t.kind == "var":
            self.take()
            op = self.take()
            if op.text not in ("=", "~"):
                raise FormulaSyntaxError("expected '=' or '~'", op.line, op.col)
            right = self.take()
            if right.kind != "var":
                raise FormulaSyntaxError("expected a variable", right.line, right.col)
            return Eq(t.text, right.text) if op.text == "=" else Adj(t.text, right.text)
        found = t.text or "end of input"
        raise FormulaSyntaxError(f"unexpected {found!r}", t.line, t.col)


def parse(text: str, allow_free: bool = False) -> Formula:
    """Parse a formula; by default it must be a sentence."""
    p = _Parser(text)
    f = p.formula()
    t = p.peek()
    if t.kind != "eof":
        raise FormulaSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
    if not allow_free:
        free = free_variables(f)
        if free:
            raise UnboundVariableError(f"unbound variable(s): {', '.join(sorted(free))}")
    return f


def free_variables(f: Formula) -> frozenset[str]:
    if isinstance(f, (Eq, Adj)):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_variables(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Eq, Adj)):
        return 0
    if isinstance(f, Not):
        return quantifier_depth(f.body)
    if isinstance(f, (And, Or, Implies)):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    if isinstance(f, (Forall, Exists)):
        return 1 + quantifier_depth(f.body)
    raise TypeError(f"not a formula: {f!r}")


def pretty(f: Formula) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(f, Eq):
        return f"{f.left}={f.right}"
    if isinstance(f, Adj):
        return f"{f.left}~{f.right}"
    if isinstance(f, Not):
        return "!" + _operand(f.body)
    if isinstance(f, (And, Or, Implies)):
        op = {And: " & ", Or: " | ", Implies: " -> "}[type(f)]
        return "(" + _operand(f.left) + op + _operand(f.right) + ")"
    if isinstance(f, (Forall, Exists)):
        q = "A" if isinstance(f, Forall) else "E"
        return f"{q}{f.var}.{pretty(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula) -> str:
    s = pretty(f)
    return f"({s})" if isinstance(f, (Forall, Exists)) else s


def conj(parts: Iterable[Formula], empty: Formula) -> Formula:
    items = list(parts)
    if not items:
        return empty
    out = items[0]
    for p in items[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula], empty: Formula) -> Formula:
    items = list(parts)
    if not items:
        return empty
    out = items[0]
    for p in items[1:]:
        out = Or(out, p)
    return out


# evaluation ---------------------------------------------------------------


def _compile(f: Formula, slots: dict[str, int]) -> Callable[[list[int], Graph], bool]:
    if isinstance(f, Eq):
        a, b = slots[f.left], slots[f.right]
        return lambda env, g: env[a] == env[b]
    if isinstance(f, Adj):
        a, b = slots[f.left], slots[f.right]
        return lambda env, g: bool((g.adj[env[a]] >> env[b]) & 1)
    if isinstance(f, Not):
        body = _compile(f.body, slots)
        return lambda env, g: not body(env, g)
    if isinstance(f, And):
        l, r = _compile(f.left, slots), _compile(f.right, slots)
        return lambda env, g: l(env, g) and r(env, g)
    if isinstance(f, Or):
        l, r = _compile(f.left, slots), _compile(f.right, slots)
        return lambda env, g: l(env, g) or r(env, g)
    if isinstance(f, Implies):
        l, r = _compile(f.left, slots), _compile(f.right, slots)
        return lambda env, g: (not l(env, g)) or r(env, g)
    if isinstance(f, (Forall, Exists)):
        inner = dict(slots)
        slot = len(slots)
        inner[f.var] = slot
        body = _compile(f.body, inner)
        universal = isinstance(f, Forall)

        def run(env, g):
            env.append(0)
            try:
                for v in range(g.n):
                    env[slot] = v
                    if body(env, g) != universal:
                        return not universal
                return universal
            finally:
                env.pop()

        return run
    raise TypeError(f"not a formula: {f!r}")


def evaluate(f: Formula, g: Graph, assignment: dict[str, int] | None = None) -> bool:
    """Truth value of ``f`` in ``g`` by nested iteration over vertices."""
    assignment = assignment or {}
    missing = free_variables(f) - assignment.keys()
    if missing:
        raise UnboundVariableError(f"unbound variable(s): {', '.join(sorted(missing))}")
    names = sorted(assignment)
    slots = {name: i for i, name in enumerate(names)}
    for name in names:
        if not 0 <= assignment[name] < g.n:
            raise ValueError(f"assignment of {name} out of range")
    fn = _compile(f, slots)
    return fn([assignment[name] for name in names], g)


def is_monotone(f: Formula) -> bool:
    """Syntactic test: every adjacency atom occurs positively.

    Such sentences are preserved when edges are added on a fixed vertex set.
    """

    def walk(node: Formula, positive: bool) -> bool:
        if isinstance(node, Adj):
            return positive
        if isinstance(node, Eq):
            return True
        if isinstance(node, Not):
            return walk(node.body, not positive)
        if isinstance(node, (And, Or)):
            return walk(node.left, positive) and walk(node.right, positive)
        if isinstance(node, Implies):
            return walk(node.left, not positive) and walk(node.right, positive)
        return walk(node.body, positive)

    return walk(f, True)


def read_formula_file(path: str | Path) -> list[Formula]:
    """One sentence per line; '#' starts a comment; blank lines are skipped."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            out.append(parse(text))
        except FormulaSyntaxError as exc:
            raise FormulaSyntaxError(f"{path}: {exc.args[0]}", lineno, exc.column) from None
    return out


# corpus -------------------------------------------------------------------

_VARS = ("x", "y", "z", "t")

_CURATED = {
    1: [
        "Ex.(x=x)",
        "Ax.(x=x)",
        "Ex.(x~x)",
        "Ax.!(x~x)",
        "Ex.!(x=x)",
    ],
    2: [
        "Ex.Ay.(x=y | x~y)",
        "Ex.Ey.(x~y)",
        "Ax.Ay.(x~y | x=y)",
        "Ex.Ey.!(x=y)",
        "Ax.Ey.(x~y)",
        "Ex.Ay.!(x~y)",
        "Ex.Ey.(!(x=y) & !(x~y))",
        "Ax.Ay.!(x~y)",
        "Ax.Ay.(x=y)",
        "Ax.Ey.(x=y | x~y)",
    ],
    3: [
        "Ex.Ey.Ez.(x~y & y~z & x~z)",
        "Ex.Ey.Ez.(x~y & y~z & !(x=z))",
        "Ex.Ey.Ez.(!(x=y) & !(y=z) & !(x=z))",
        "Ex.Ey.Ez.(!(x=y) & !(y=z) & !(x=z) & !(x~y) & !(y~z) & !(x~z))",
        "Ax.Ay.(!(x=y) -> Ez.(z~x & z~y))",
        "Ax.Ay.(x~y -> Ez.(z~x & z~y))",
        "Ex.Ey.(!(x=y) & Az.(z=x | z=y | z~x | z~y))",
        "Ax.Ay.(x~y -> Ez.(!(z=x) & !(z=y) & (z~x | z~y)))",
        "Ex.Ey.Ez.(x~y & x~z & !(y=z) & !(y~z))",
        "Ax.Ey.Ez.(!(y=z) & x~y & x~z)",
        "Ex.Ay.Az.(y~x & z~x -> y=z)",
        "Ax.Ey.Ez.(x~y & y~z & x~z)",
        "Ax.Ay.Az.(x~y & y~z & !(x=z) -> x~z)",
    ],
    4: [
        "Ax.Ey.Ez.(x~y & y~z & (Et.x~z))",
        "Ex.Ey.Ez.Et.(x~y & x~z & x~t & y~z & y~t & z~t)",
        "Ex.Ey.Ez.Et.(!(x=y) & !(x=z) & !(x=t) & !(y=z) & !(y=t) & !(z=t))",
        "Ex.Ey.Ez.Et.(!(x=y) & !(x=z) & !(x=t) & !(y=z) & !(y=t) & !(z=t) & !(x~y) & !(x~z) & !(x~t) & !(y~z) & !(y~t) & !(z~t))",
        "Ex.Ey.Ez.Et.(x~y & y~z & z~t & t~x & !(x=z) & !(y=t))",
        "Ex.Ey.Ez.Et.(x~y & y~z & z~t & !(x=z) & !(y=t) & !(x=t))",
        "Ax.Ay.Az.(!(x=y) & !(y=z) & !(x=z) -> Et.(t~x & t~y & t~z))",
        "Ex.Ey.Ez.Et.(t~x & t~y & t~z & !(x=y) & !(y=z) & !(x=z))",
        "Ax.Ay.(x~y -> Ez.Et.(z~x & t~y & !(z=y) & !(t=x) & !(z=t)))",
    ],
}

_MATRICES_2 = ["x~y", "x=y", "x~y | x=y", "!(x~y) & !(x=y)", "x~y -> x=y"]
_MATRICES_3 = [
    "x~y & y~z",
    "x~y & y~z & x~z",
    "!(x=y) & !(x=z) & !(y=z)",
    "x~y -> (x~z & y~z)",
    "(x~z | y~z) & !(x=y)",
]
_MATRICES_4 = [
    "x~y & y~z & z~t",
    "x~t & y~t & z~t & !(x=y)",
    "(x~y & z~t) -> (x~z | y~t)",
]


def _prefixed(matrix: str, nvars: int) -> list[str]:
    out = []
    for code in range(1 << nvars):
        prefix = "".join(("A" if (code >> i) & 1 else "E") + _VARS[i] + "." for i in range(nvars))
        out.append(f"{prefix}({matrix})")
    return out


def _corpus_texts(depth: int) -> list[str]:
    texts = list(_CURATED[depth])
    if depth == 1:
        texts += [
            "(Ex.(x=x)) & (Ay.(y=y))",
            "(Ex.(x=x)) | (Ey.(y~y))",
            "Ax.(x=x -> !(x~x))",
            "!(Ex.(x=x))",
            "Ax.(x~x -> x=x)",
            "(Ex.(x=x)) -> (Ey.(y~y))",
            "Ex.!(x~x)",
            "Ax.(x~x)",
            "!(Ax.(x=x)) | (Ey.(y=y))",
            "Ex.(x=x & !(x~x))",
            "Ax.(x=x | x~x)",
            "!(Ex.(x~x)) & (Ey.(y=y))",
            "Ex.(x~x | !(x=x))",
            "Ax.!(x=x)",
            "(Ex.(x=x)) & !(Ey.(y~y))",
        ]
    elif depth == 2:
        for m in _MATRICES_2:
            texts += _prefixed(m, 2)
    elif depth == 3:
        for m in _MATRICES_3:
            texts += _prefixed(m, 3)
    elif depth == 4:
        for m in _MATRICES_4:
            texts += _prefixed(m, 4)
    seen, out = set(), []
    for t in texts:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def sentence_corpus(k: int) -> list[Formula]:
    """Deterministic list of sentences of every depth 1..k (at least 20 each)."""
    if not 1 <= k <= 4:
        raise ValueError("corpus depth must be between 1 and 4")
    out = []
    for d in range(1, k + 1):
        for text in _corpus_texts(d):
            f = parse(text)
            if quantifier_depth(f) != d:
                raise AssertionError(f"corpus sentence {text!r} has depth {quantifier_depth(f)}")
            out.append(f)
    return out
