"""
Larger alphabets
================

Over three or more letters the greedy algorithm already finds many shuffle
squares, and paired indicators boost it further.
"""
import math

from shufflesq.kary import (alpha_bound, count_shuffle_squares, greedy_lower_bound, greedy_success_count,
                            kary_boosted_run, sample_mu)
from shufflesq.words import Rng

for n in range(5):
    print(n, count_shuffle_squares(3, n), greedy_success_count(3, n), greedy_lower_bound(3, n))

s = sample_mu(3, 16, 0.5, Rng(5))
final = kary_boosted_run(s)
print(s, [str(x) for x in final.W], final.pairs_made)

for k in (4, 6, 10):
    print(k, alpha_bound(k), alpha_bound(k, math.sqrt(k) + math.sqrt(k - 1)))
