"""Command-line front end: ``fo4lab <subcommand> ...``.

Graph arguments are graph6 strings or paths to files whose first line is a
graph6 string (an optional second line names a root vertex).  ``--config``
reads ``key=value`` lines that become defaults for the chosen subcommand.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .efgame import Winner, solve
from .extcalc import HypothesisError, classify_masks, f_value, format_rational, parse_rational, rho_max_bruteforce, rho_max_flow
from .graphs import Graph, RootedPair, from_graph6, mask_of, popcount, to_graph6, write_rooted
from .gset import GSetOracle, GSetParams, InfeasibleError, enumerate_g, load_registry, save_registry, verify_g_properties
from .logic import FormulaSyntaxError, parse, pretty, quantifier_depth, read_formula_file
from .profiles import TEMPLATES, build_witness, format_profile, profile
from .rgraph import GridCell, SampleSpec, probe_ehr, probe_maximal_extension, probe_sentence, sample, write_csv, read_grid


def _graph_arg(text: str) -> tuple[Graph, int | None]:
    p = Path(text)
    if p.exists():
        lines = [ln.strip() for ln in p.read_text().splitlines() if ln.strip()]
        if not lines:
            raise ValueError(f"{text}: empty graph file")
        root = int(lines[1]) if len(lines) > 1 else None
        return from_graph6(lines[0]), root
    return from_graph6(text), None


def _vertex_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _family(args):
    if args.registry:
        return load_registry(args.registry)
    if args.gset_params:
        return GSetOracle(GSetParams.from_file(args.gset_params))
    raise ValueError("pass --registry <dir> or --gset-params <file>")


# subcommands ------------------------------------------------------------------


def cmd_sample(args) -> int:
    s = sample(SampleSpec(args.n, args.alpha, args.seed), args.method)
    _emit(to_graph6(s.to_graph()) + "\n", args.out)
    return 0


def cmd_classify_pair(args) -> int:
    g, _ = _graph_arg(args.graph)
    h = mask_of(_vertex_list(args.h))
    c = classify_masks(g, h, args.alpha, bound=max(12, g.n))
    v = g.n - popcount(h)
    e = g.num_edges - g.edges_within(h)
    lines = [f"class={c.kind.value}", f"v={v} e={e} f={format_rational(f_value(v, e, args.alpha))}"]
    if c.witness is not None:
        lines.append("witness=" + ",".join(str(x) for x in range(g.n) if (c.witness >> x) & 1))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_rhomax(args) -> int:
    g, _ = _graph_arg(args.graph)
    if args.method == "brute":
        val = rho_max_bruteforce(g)
    elif args.method == "flow":
        val = rho_max_flow(g)
    else:
        val, other = rho_max_flow(g), rho_max_bruteforce(g)
        if val != other:
            raise AssertionError(f"density routes disagree: {val} vs {other}")
    _emit(f"rho_max={format_rational(val)}\n", args.out)
    return 0


def cmd_eval_fo(args) -> int:
    g, _ = _graph_arg(args.graph)
    if args.formula_file:
        formulas = read_formula_file(args.formula_file)
    elif args.formula:
        formulas = [parse(args.formula)]
    else:
        raise ValueError("pass --formula or --formula-file")
    from .logic import evaluate

    lines = [f"{'true' if evaluate(f, g) else 'false'}\tdepth={quantifier_depth(f)}\t{pretty(f)}" for f in formulas]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_ehr(args) -> int:
    x, _ = _graph_arg(args.x)
    y, _ = _graph_arg(args.y)
    res = solve(x, y, args.k, reduced=not args.raw, trace=args.trace)
    text = f"winner={res.winner.value}\n"
    if res.trace:
        text += res.trace + "\n"
    _emit(text, args.out)
    return 0


def cmd_synthesize(args) -> int:
    x, _ = _graph_arg(args.x)
    y, _ = _graph_arg(args.y)
    res = solve(x, y, args.k, synthesize=True)
    if res.winner is Winner.DUPLICATOR:
        text = "none\n"
    else:
        text = f"depth={quantifier_depth(res.formula)}\n{pretty(res.formula)}\n"
    _emit(text, args.out)
    return 0


def cmd_gset_enum(args) -> int:
    if args.gset_params:
        params = GSetParams.from_file(args.gset_params)
    else:
        params = GSetParams(v0_bound=args.v0, bad_bounds=(args.bound,), max_layer=args.layers)
    if args.allow_infeasible:
        params = GSetParams(params.v0_bound, params.bad_bounds, params.density_cap, params.max_layer, True)
    reg = enumerate_g(params)
    report = verify_g_properties(reg)
    if args.out:
        save_registry(reg, args.out)
    lines = [f"layer {i}: {len(layer)} members" for i, layer in enumerate(reg.layers)]
    lines.append(f"distinct classes: {reg.kappa}")
    lines.append(report.summary())
    lines.append("verification " + ("passed" if report.ok else "FAILED"))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0 if report.ok else 1


def cmd_profile(args) -> int:
    g, root = _graph_arg(args.graph)
    u = args.u if args.u is not None else (root or 0)
    table = profile(g, u, _family(args))
    _emit(format_profile(table), args.out)
    return 0


def cmd_witness(args) -> int:
    a, root = _graph_arg(args.graph)
    x1 = args.u if args.u is not None else (root or 0)
    res = build_witness(a, x1, _family(args))
    if args.out:
        Path(args.out).write_text(write_rooted(res.z, res.root))
    lines = [
        f"z={to_graph6(res.z)} root={res.root} vertices={res.z.n} edges={res.z.num_edges}",
        f"copies={len(res.copies)}",
        f"rho_max={format_rational(res.rho_max)} sparse={str(res.sparse).lower()}",
        f"profiles_equal={str(res.same_profiles).lower()}",
        f"copies_are_bad={str(res.copies_are_bad).lower()}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0 if res.sparse and res.same_profiles else 1


def _cells(args) -> list[GridCell]:
    if args.grid:
        return read_grid(args.grid)
    if args.alpha is None or args.n is None:
        raise ValueError("pass --grid or both --alpha and --n")
    return [GridCell(args.alpha, args.n, args.m)]


def cmd_probe(args) -> int:
    cells = _cells(args)
    if args.detector == "ehr":
        res = probe_ehr(cells, args.k, args.samples, args.seed)
    elif args.detector == "maximal":
        # pendant edge over one root, tick template
        pair = RootedPair(Graph.from_edges(2, [(0, 1)]), 1)
        res = probe_maximal_extension(pair, TEMPLATES.kstar_tstar, cells, args.samples, args.seed)
    elif args.detector == "formula":
        if not args.formula:
            raise ValueError("--detector formula needs --formula")
        res = probe_sentence(parse(args.formula), cells, args.samples, args.seed)
    else:
        res = probe_sentence(args.detector, cells, args.samples, args.seed)
    _emit(write_csv(res), args.out)
    return 0


# parser -----------------------------------------------------------------------


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fo4lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="key=value defaults for the subcommand")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write the result here instead of stdout")
        return sp

    sp = add("sample", cmd_sample, "draw G(n, n^-alpha) and print graph6")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=parse_rational, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--method", choices=("auto", "skip", "bernoulli"), default="auto")

    sp = add("classify-pair", cmd_classify_pair, "classify (G, G[H]) as safe, rigid, neutral or none")
    sp.add_argument("graph")
    sp.add_argument("--h", required=True, help="comma-separated vertices of H")
    sp.add_argument("--alpha", type=parse_rational, default=Fraction(3, 5))

    sp = add("rhomax", cmd_rhomax, "maximal subgraph density")
    sp.add_argument("graph")
    sp.add_argument("--method", choices=("flow", "brute", "both"), default="flow")

    sp = add("eval-fo", cmd_eval_fo, "evaluate FO sentences on a graph")
    sp.add_argument("graph")
    sp.add_argument("--formula")
    sp.add_argument("--formula-file")

    for name, func, text in (
        ("ehr", cmd_ehr, "decide the k-round Ehrenfeucht game"),
        ("synthesize", cmd_synthesize, "a depth-k sentence separating two graphs"),
    ):
        sp = add(name, func, text)
        sp.add_argument("x")
        sp.add_argument("y")
        sp.add_argument("--k", type=int, required=True)
        if name == "ehr":
            sp.add_argument("--trace", action="store_true")
            sp.add_argument("--raw", action="store_true", help="use the unreduced reference solver")

    sp = add("gset-enum", cmd_gset_enum, "enumerate and verify the layered family")
    sp.add_argument("--gset-params")
    sp.add_argument("--v0", type=int, default=4)
    sp.add_argument("--bound", type=int, default=3)
    sp.add_argument("--layers", type=int, default=2)
    sp.add_argument("--allow-infeasible", action="store_true")

    for name, func, text in (
        ("profile", cmd_profile, "bad subgraphs and profile of a vertex"),
        ("witness", cmd_witness, "build a witness graph realising a vertex profile"),
    ):
        sp = add(name, func, text)
        sp.add_argument("graph")
        sp.add_argument("--u", type=int)
        sp.add_argument("--registry", help="directory written by gset-enum")
        sp.add_argument("--gset-params", help="use lazy membership with these parameters")

    sp = add("probe", cmd_probe, "Monte-Carlo probe over an alpha grid, CSV output")
    sp.add_argument("--detector", choices=("triangle", "k4", "k5", "formula", "ehr", "maximal"), default="triangle")
    sp.add_argument("--formula")
    sp.add_argument("--grid")
    sp.add_argument("--alpha", type=parse_rational)
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        cfg = _read_config(pre.config)
        sub = parser._subparsers._group_actions[0].choices[pre.command]
        known = {a.dest: a for a in sub._actions}
        for key, val in cfg.items():
            if key not in known:
                parser.error(f"config key {key!r} is not an option of {pre.command}")
            if known[key].nargs == 0:
                cfg[key] = val.lower() in ("1", "true", "yes")
        sub.set_defaults(**cfg)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, HypothesisError, InfeasibleError, FormulaSyntaxError) as exc:
        print(f"fo4lab {args.command}: {exc}", file=sys.stderr)
        return 2
