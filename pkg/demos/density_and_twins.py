"""
How many words are shuffle squares?
===================================

Exact counts by semi-length, the fraction of all words they make up, and
how often a random word is at most two letters away from one.
"""
from math import comb

from shufflesq.experiments import density_experiment, lt_experiment
from shufflesq.kary import count_shuffle_squares

for n in range(1, 9):
    c = count_shuffle_squares(2, n)
    print(n, c, comb(2 * n, n), c / 4 ** n)

r = density_experiment(12, trials=2000, seed=3)
print(r.line(), r.extra)

for n in (8, 12, 16):
    r = lt_experiment(n, trials=2000, seed=4)
    print(r.line())
