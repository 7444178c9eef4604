"""
The greedy thread is a reflected random walk
============================================

The greedy buffer always has at most two runs, and its length moves by one
at every step.  Exact occupancy tables reproduce the binomial law of a
reflected walk, and ratios of table entries converge to limits c(w).
"""
import math

from shufflesq.greedy import check_monotonicity, estimate_c, greedy_trace, qtable_iter, walk_level_prob

th = greedy_trace("100011100")
print([str(b) for b in th.states])

# exact table at t = 60 against the walk law
q = list(qtable_iter(60, L=60))[-1]
for k in (0, 2, 10):
    print(k, q.level(k), walk_level_prob(60, k))
print("monotone:", check_monotonicity(q))

# c(01): compare with pi^2/6 - 1
est = estimate_c("01", 2000)
print(est.estimate, math.pi ** 2 / 6 - 1)
for t, r in zip(est.checkpoints, est.ratios):
    print(f"  t={t:5d}  ratio={r:.6f}")
