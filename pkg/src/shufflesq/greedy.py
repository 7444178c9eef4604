"""The greedy buffer thread and its exact occupancy distribution.

The greedy thread always shortens the buffer when it can.  Its state is a
two-run word ``lead^a (1-lead)^b``, so the distribution over states at time
``t`` fits in two ``(a, b)`` arrays, one per leading letter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numba
import numpy as np

from .words import (APPEND, EMPTY, EMPTY_KEY, MATCH, Sigma2Buffer, _gen, as_word,
                    sigma2_encode, sigma2_words)

__all__ = [
    "greedy_step", "GreedyThread", "greedy_trace", "QTable", "qtable_iter",
    "qtable_evolve", "default_truncation", "check_monotonicity",
    "greedy_word_distribution", "estimate_c", "simulate_greedy", "walk_level_prob",
]


def greedy_step(b: Sigma2Buffer, letter: int) -> Sigma2Buffer:
    if b.a == 0:
        return Sigma2Buffer(letter, 1, 0)
    if letter != b.lead:
        return Sigma2Buffer(b.lead, b.a, b.b + 1)
    if b.a > 1:
        return Sigma2Buffer(b.lead, b.a - 1, b.b)
    if b.b:
        return Sigma2Buffer(1 - b.lead, b.b, 0)
    return EMPTY


@dataclass
class GreedyThread:
    moves: list = field(default_factory=list)
    states: list = field(default_factory=lambda: [EMPTY])

    def lengths(self) -> list:
        return [len(b) for b in self.states]

    def __len__(self):
        return len(self.moves)


def greedy_trace(s, init=EMPTY) -> GreedyThread:
    b = init if isinstance(init, Sigma2Buffer) else sigma2_encode(init)
    th = GreedyThread([], [b])
    for c in as_word(s):
        nb = greedy_step(b, c)
        th.moves.append(MATCH if len(nb) < len(b) else APPEND)
        th.states.append(nb)
        b = nb
    return th


def simulate_greedy(t: int, trials: int, rng=None, init=EMPTY):
    """Run ``trials`` independent greedy threads for ``t`` uniform steps.

    Returns the final ``(lead, a, b)`` arrays.
    """
    g = _gen(rng)
    lead = np.full(trials, init.lead, dtype=np.int64)
    a = np.full(trials, init.a, dtype=np.int64)
    b = np.full(trials, init.b, dtype=np.int64)
    for _ in range(t):
        c = g.integers(0, 2, size=trials)
        empty = a == 0
        match = ~empty & (c == lead)
        grow = ~empty & ~match
        b[grow] += 1
        a[match] -= 1
        flip = match & (a == 0) & (b > 0)
        a[flip] = b[flip]
        b[flip] = 0
        lead[flip] = 1 - lead[flip]
        lead[match & (a == 0)] = 0
        lead[empty] = c[empty]
        a[empty] = 1
    return lead, a, b


# -- exact occupancy tables ----------------------------------------------------

def default_truncation(t_max: int) -> int:
    return math.ceil(6 * math.sqrt(t_max * math.log(t_max + 2)))


@dataclass
class QTable:
    """Greedy state distribution at time ``t``.

    ``P1[a, b]`` holds the weight of ``1^a 0^b`` and ``P0[a, b]`` that of
    ``0^a 1^b``.  In exact mode the arrays hold integer counts over
    ``2 ** t`` inputs; in float mode they hold probabilities.
    """

    t: int
    L: int
    eps: object
    P1: np.ndarray
    P0: np.ndarray
    lost: object
    exact: bool = True

    @property
    def denom(self) -> int:
        return 1 << self.t if self.exact else 1

    def _scale(self, x):
        return Fraction(int(x), self.denom) if self.exact else float(x)

    def count(self, w) -> object:
        """Raw weight of ``w`` (an integer count in exact mode)."""
        w = w if isinstance(w, Sigma2Buffer) else sigma2_encode(w)
        if w.a == 0:
            return self.eps
        if w.a + w.b > self.L:
            return 0
        arr = self.P1 if w.lead == 1 else self.P0
        return arr[w.a, w.b]

    def prob(self, w):
        return self._scale(self.count(w))

    def level_count(self, k: int):
        if k == 0:
            return self.eps
        if k > self.L:
            return 0
        tot = 0
        for a in range(1, k + 1):
            tot += self.P1[a, k - a] + self.P0[a, k - a]
        return tot

    def level(self, k: int):
        """Probability the greedy buffer has length ``k``."""
        return self._scale(self.level_count(k))

    @property
    def probs(self) -> dict:
        out = {}
        for k in range(self.t % 2 if self.eps == 0 else 0, self.L + 1):
            for w in sigma2_words(k):
                x = self.count(w)
                if x:
                    out[w] = self._scale(x)
        return out

    def total(self):
        tot = self.eps + self.lost + self.P1.sum() + self.P0.sum()
        return self._scale(tot)

    def rows(self) -> Iterator[tuple]:
        for w, p in self.probs.items():
            yield self.t, w.lead, w.a, w.b, p


def _new_side(X, Y, E, L, s):
    """Next-step weights for the lead-1 array ``X`` with mirror array ``Y``."""
    N = np.zeros_like(X)
    N[1:s, 0:s] = X[2:s + 1, 0:s]
    N[1:s, 1:s] += X[1:s, 0:s - 1]
    N[1:s, 0] += Y[1, 1:s]
    N[1, 0] += E
    return N


def qtable_iter(t_max: int, init=EMPTY, L: Optional[int] = None, exact: bool = True) -> Iterator[QTable]:
    """Yield ``q_0, ..., q_{t_max}`` for the greedy thread started at ``init``.

    Weight that would push the buffer past length ``L`` is moved to ``lost``
    and stays there.
    """
    init = init if isinstance(init, Sigma2Buffer) else sigma2_encode(init)
    if L is None:
        L = max(2, min(default_truncation(max(t_max, 1)), t_max + len(init)))
    if L < 2 or len(init) > L:
        raise ValueError("truncation length must be >= 2 and >= |init|")
    size = L + 3
    dtype = object if exact else np.float64
    zero = 0 if exact else 0.0
    one = 1 if exact else 1.0
    P1 = np.zeros((size, size), dtype=dtype)
    P0 = np.zeros((size, size), dtype=dtype)
    E = zero
    if init.a == 0:
        E = one
    elif init.lead == 1:
        P1[init.a, init.b] = one
    else:
        P0[init.a, init.b] = one
    symmetric = init.a == 0
    lost = zero
    A, B = np.indices((size, size))
    over = A + B > L
    yield QTable(0, L, E, P1, P0, lost, exact)
    for t in range(1, t_max + 1):
        s = min(len(init) + t, L + 1) + 1
        N1 = _new_side(P1, P0, E, L, s)
        N0 = N1 if symmetric else _new_side(P0, P1, E, L, s)
        E = P1[1, 0] + P0[1, 0]
        spill = N1[over].sum() + (N1[over].sum() if symmetric else N0[over].sum())
        N1[over] = zero
        if not symmetric:
            N0[over] = zero
        if exact:
            lost = 2 * lost + spill
        else:
            N1 *= 0.5
            if not symmetric:
                N0 *= 0.5
            E *= 0.5
            lost = lost + 0.5 * spill
        P1, P0 = N1, N0
        yield QTable(t, L, E, P1, P0, lost, exact)


def qtable_evolve(t_max: int, init=EMPTY, L: Optional[int] = None, exact: bool = True) -> list:
    return list(qtable_iter(t_max, init, L, exact))


def walk_level_prob(t: int, k: int) -> Fraction:
    """Closed form for ``P[|greedy_t| = k]``: the reflected simple walk."""
    if (t + k) % 2 or k > t:
        return Fraction(0)
    c = math.comb(t, (t + k) // 2)
    return Fraction(c if k == 0 else 2 * c, 1 << t)


def _chain_pairs(t: int, top: int):
    """Consecutive pairs of the ordering ``eps >= 10 >= 11 >= 1000 >= ...``
    (or ``1 >= 100 >= 110 >= 111 >= ...`` for odd ``t``), up to length ``top``."""
    chain = []
    for ell in range(t % 2, top + 1, 2):
        if ell == 0:
            chain.append(EMPTY)
            continue
        for a in range(1, ell + 1):
            chain.append(Sigma2Buffer(1, a, ell - a))
    return list(zip(chain, chain[1:]))


def check_monotonicity(q: QTable, details: bool = False):
    """Check the monotone ordering of greedy probabilities and the averaged
    two-sided bounds against neighbouring levels."""
    top = q.L if q.lost == 0 else q.L - 2
    top = min(top, q.t)
    failures = []
    tol = 0 if q.exact else 1e-12
    for hi, lo in _chain_pairs(q.t, top):
        if q.count(hi) < q.count(lo) - tol:
            failures.append(("chain", str(hi), str(lo)))
    for k in range(3, top + 1):
        if (q.t + k) % 2:
            continue
        below = q.level_count(k - 2)
        above = q.level_count(k + 2) if k + 2 <= top else 0
        for w in sigma2_words(k):
            x = q.count(w)
            if below < 2 * (k - 2) * x - tol:
                failures.append(("upper", str(w)))
            if 2 * (k + 2) * x < above - tol:
                failures.append(("lower", str(w)))
    ok = not failures
    return (ok, failures) if details else ok


# -- greedy on arbitrary binary words -----------------------------------------

def greedy_word_distribution(n: int, start=EMPTY_KEY) -> list:
    """Exact ``[q_0(.; v), ..., q_n(.; v)]`` as dicts from packed words to
    probabilities, for any initial binary word ``v`` (not only two-run ones)."""
    dist = [{start: Fraction(1)}]
    for _ in range(n):
        nxt = {}
        for key, p in dist[-1].items():
            half = p / 2
            for c in (0, 1):
                m = key.bit_length() - 1
                nk = key >> 1 if m and key & 1 == c else key + ((1 + c) << m)
                nxt[nk] = nxt.get(nk, 0) + half
        dist.append(nxt)
    return dist


# -- limit ratios ---------------------------------------------------------------

@numba.njit(cache=True)
def _sym_step(P, E, L, s):
    # one step of the symmetric (started from the empty word) float table
    N = np.zeros_like(P)
    for a in range(1, s):
        for b in range(0, s - a):
            if a + b > L:
                break
            v = P[a + 1, b]
            if b >= 1:
                v += P[a, b - 1]
            else:
                v += P[1, a]
            N[a, b] = 0.5 * v
    N[1, 0] += 0.5 * E
    return N, P[1, 0]


@dataclass
class CEstimate:
    w: str
    estimate: float
    checkpoints: list
    ratios: list
    last_delta: float
    lost_mass: float
    L: int

    def to_dict(self):
        return {"w": self.w, "estimate": self.estimate, "checkpoints": self.checkpoints,
                "ratios": self.ratios, "last_delta": self.last_delta,
                "lost_mass": self.lost_mass, "L": self.L}


def estimate_c(w, t_max: int, n_checkpoints: int = 8, L: Optional[int] = None) -> CEstimate:
    """Estimate ``lim q_{2t+|w|}(w) / q_{2t}(eps)``.

    Ratios are taken at geometrically spaced ``t`` up to ``t_max`` and
    extrapolated with ``r_t = c + a / sqrt(t)`` fitted on the last three.
    """
    w = w if isinstance(w, Sigma2Buffer) else sigma2_encode(w)
    k = len(w)
    T = 2 * t_max + k
    if L is None:
        L = math.ceil(6 * math.sqrt(T)) + k
    checkpoints = sorted({int(round(x)) for x in np.geomspace(max(1, t_max // 2 ** (n_checkpoints - 1)),
                                                              t_max, n_checkpoints)})
    eps_at = {2 * c: None for c in checkpoints}
    w_at = {2 * c + k: None for c in checkpoints}
    P = np.zeros((L + 3, L + 3))
    E = 1.0
    for t in range(T + 1):
        if t in eps_at:
            eps_at[t] = E
        if t in w_at:
            w_at[t] = E if k == 0 else P[w.a, w.b]
        if t == T:
            break
        s = min(t + 1, L + 1) + 1
        P, E = _sym_step(P, E, L, s)
    lost = 1.0 - (E + 2.0 * P.sum())
    ratios = [w_at[2 * c + k] / eps_at[2 * c] for c in checkpoints]
    xs = np.array([1 / math.sqrt(c) for c in checkpoints[-3:]])
    coef = np.polyfit(xs, np.array(ratios[-3:]), 1)
    est = float(coef[-1])
    return CEstimate(str(w), est, checkpoints, [float(r) for r in ratios],
                     float(ratios[-1] - ratios[-2]) if len(ratios) > 1 else 0.0,
                     float(max(lost, 0.0)), L)
