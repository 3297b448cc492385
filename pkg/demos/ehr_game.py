"""Play the Ehrenfeucht game on small graphs and print the sentences that separate them."""

from fo4lab.efgame import Winner, equivalence_classes, solve
from fo4lab.graphs import Graph
from fo4lab.logic import evaluate, pretty, quantifier_depth

pairs = [
    ("P4", Graph.path(4), "C4", Graph.cycle(4)),
    ("C5", Graph.cycle(5), "C6", Graph.cycle(6)),
    ("K3", Graph.complete(3), "P3", Graph.path(3)),
]

for xname, x, yname, y in pairs:
    print(f"{xname} vs {yname}")
    for k in (1, 2, 3):
        res = solve(x, y, k, synthesize=True)
        line = f"  k={k}: {res.winner.value}"
        if res.winner is Winner.SPOILER:
            f = res.formula
            line += f"  depth {quantifier_depth(f)}: {pretty(f)}"
            assert evaluate(f, x) and not evaluate(f, y)
        print(line)

# empty graphs only differ in size, so k rounds separate sizes below k
empties = [Graph.from_edges(n, []) for n in range(1, 7)]
for k in (2, 3, 4):
    groups = equivalence_classes(empties, k)
    print(f"empty graphs on 1..6 vertices, k={k}:", [[empties[i].n for i in grp] for grp in groups])
