"""Classify rooted pairs and compare the two maximal-density routes."""

from fractions import Fraction

from fo4lab.extcalc import classify_pair, f_alpha, format_rational, rho_max_bruteforce, rho_max_flow
from fo4lab.graphs import Graph, RootedPair
from fo4lab.profiles import K1, K2, TICK

alpha = Fraction(3, 5)
examples = {
    "pendant edge": RootedPair(Graph.from_edges(2, [(0, 1)]), 0b01),
    "tick (two roots, common neighbour)": RootedPair(TICK.graph, TICK.root_mask),
    "K2 template": RootedPair(K2.graph, K2.root_mask),
    "K1 template": RootedPair(K1.graph, K1.root_mask),
    "K4 minus an edge over {0,1}": RootedPair(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]), 0b0011),
}
print(f"alpha = {alpha}")
for name, pair in examples.items():
    print(f"  {name}: f = {format_rational(f_alpha(pair, alpha))}, class = {classify_pair(pair, alpha)}")

print("maximal subgraph density")
for name, g in [("C5", Graph.cycle(5)), ("K4", Graph.complete(4)), ("Petersen", Graph.from_edges(10, [
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
    (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)]))]:
    flow, brute = rho_max_flow(g), rho_max_bruteforce(g)
    print(f"  {name}: flow {format_rational(flow)}, subsets {format_rational(brute)}")
