"""Estimate small-clique probabilities at the threshold and compare with the Poisson limit."""

import math
from fractions import Fraction

from fo4lab.rgraph import probe_sentence, write_csv

cells = [("triangle", 3, Fraction(1), 400), ("k4", 4, Fraction(2, 3), 600)]
for detector, k, alpha, n in cells:
    (res,) = probe_sentence(detector, [(alpha, n)], 400, seed=1)
    target = 1 - math.exp(-1 / math.factorial(k))
    print(f"{detector} at alpha={alpha}, n={n}: phat {res.phat:.3f} +- {res.halfwidth:.3f}, limit {target:.4f}")

print(write_csv(probe_sentence("k5", [(Fraction(61, 100), 500)], 100, seed=2)), end="")
