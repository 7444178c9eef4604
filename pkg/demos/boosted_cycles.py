"""
Boosted cycles
==============

A cycle starts from a run 1^k, defers some matching decisions with
indicator symbols, and ends at a run of length X*.  On average X* is about
k - 2, which is what keeps the buffer short.
"""
import numpy as np

from shufflesq.boosted import BitStream, boosted_cycle, cycle_statistics, run_boosted
from shufflesq.words import Rng, random_word

# the small hand example: start from 111 and read 0110111010
states = []
res = boosted_cycle(BitStream("1110110111010", start=3), 3, drop_leftmost="needed",
                    observer=states.append, verify=True)
for ps in states:
    print(f"t={ps.t:2d} {ps.phase:10s} W={ps.W}")
print("X* =", res.X_star, "cycle length =", res.T - 3)

# drift and spread of one cycle at k = 30
st = cycle_statistics(30, 100_000, Rng(1))
dX = st["X_star"] - 30
print("mean dX", dX.mean(), "mean dX^2", np.mean(dX.astype(float) ** 2))

# a whole word
run = run_boosted(random_word(5000, rng=Rng(2)))
print("cycles:", len(run.records), "max X:", max(r.X for r in run.records))
