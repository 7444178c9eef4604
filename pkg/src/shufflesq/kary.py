"""Shuffle squares over larger alphabets.

Buffers are plain tuples of letters.  The boosted k-ary algorithm keeps
paired indicators ``Indicator(a, tau)``: the letter ``a`` sits in exactly one
of the two marked positions, and either choice gives a real buffer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .errors import DomainError, InvariantViolation, TooLarge
from .words import Indicator, _gen, as_word, kary_resolutions

__all__ = [
    "kary_greedy_step", "kary_buffer_sets", "kary_recognize", "KaryState",
    "kary_boosted_step", "kary_boosted_run", "count_shuffle_squares",
    "shuffle_square_counts", "greedy_success_count", "greedy_lower_bound",
    "alpha_bound", "alpha_objective", "sample_mu", "check_supermultiplicative",
]


def kary_greedy_step(b, letter: int) -> tuple:
    b = tuple(b)
    if b and b[0] == letter:
        return b[1:]
    return b + (letter,)


def _step_set(B, c, cap=None) -> set:
    out = set()
    for w in B:
        if w and w[0] == c and (cap is None or len(w) - 1 <= cap):
            out.add(w[1:])
        if cap is None or len(w) + 1 <= cap:
            out.add(w + (c,))
    return out


def kary_buffer_sets(s, limit: int = 1 << 21) -> list:
    """``[B_0, ..., B_n]`` for a word over any alphabet, buffers as tuples."""
    letters = s.letters if hasattr(s, "letters") else tuple(s)
    hist = [{()}]
    for c in letters:
        B = _step_set(hist[-1], c)
        if len(B) > limit:
            raise TooLarge(f"k-ary buffer set exceeded {limit} elements")
        hist.append(B)
    return hist


def kary_recognize(s) -> bool:
    letters = s.letters if hasattr(s, "letters") else tuple(s)
    n = len(letters)
    if n % 2:
        return False
    B = {()}
    for t, c in enumerate(letters):
        B = _step_set(B, c, n - t - 1)
        if not B:
            return False
    return () in B


# -- boosted k-ary algorithm ------------------------------------------------------

@dataclass
class KaryState:
    """Quasi-buffer plus the indicator-generation bookkeeping.

    ``last_match`` is ``(a, b, t)`` after a head ``a`` followed by letter
    ``b != a`` was matched at time ``t``; ``pending`` counts the letters
    outside ``{a, b}`` read since then.
    """

    W: tuple = ()
    last_match: Optional[tuple] = None
    pending: int = 0
    pairs_made: int = 0
    boosts: int = 0

    def resolutions(self):
        return set(kary_resolutions(self.W))

    def check_pairs(self):
        seen = {}
        for j, s in enumerate(self.W):
            if isinstance(s, Indicator):
                seen.setdefault(s, []).append(j)
        for ind, where in seen.items():
            if len(where) != 2:
                raise InvariantViolation(f"indicator {ind} occurs {len(where)} times")
            nxt = self.W[where[0] + 1]
            if isinstance(nxt, Indicator) or nxt == ind.letter:
                raise InvariantViolation(f"indicator {ind} not followed by a different letter")


def _match_head(W: tuple, t: int):
    """Drop the letter head; returns the new buffer and a trigger if the
    next symbol is a different letter."""
    a = W[0]
    rest = W[1:]
    if rest and not isinstance(rest[0], Indicator) and rest[0] != a:
        return rest, (a, rest[0], t)
    return rest, None


def kary_boosted_step(state: KaryState, letter: int, t: int, check: bool = True) -> KaryState:
    """Advance the boosted k-ary quasi-buffer by the letter read at time ``t``."""
    W = state.W
    lm, pend = state.last_match, state.pending
    pairs, boosts = state.pairs_made, state.boosts
    if lm is not None:
        a, b, t_match = lm
        if letter not in (a, b):
            pend += 1
            W = W + (letter,)
            nxt = KaryState(W, lm, pend, pairs, boosts)
            if check:
                nxt.check_pairs()
            return nxt
        if letter == a and pend > 0:
            # b u1 c1..cr a  ->  b u1 (a,t) c1..cr (a,t)
            ind = Indicator(a, t_match)
            cut = len(W) - pend
            W = W[:cut] + (ind,) + W[cut:] + (ind,)
            nxt = KaryState(W, None, 0, pairs + 1, boosts)
            if check:
                nxt.check_pairs()
            return nxt
        lm, pend = None, 0
    trigger = None
    if not W:
        W = (letter,)
    elif isinstance(W[0], Indicator):
        ind = W[0]
        a, b = ind.letter, W[1]
        j = W.index(ind, 1)
        u2, u3 = W[2:j], W[j + 1:]
        if letter == a:
            W, trigger = _match_head((a, b) + u2 + u3, t)
            boosts += 1
        elif letter == b:
            W, trigger = _match_head((b,) + u2 + (a,) + u3, t)
            boosts += 1
        else:
            W = W + (letter,)
    elif W[0] == letter:
        W, trigger = _match_head(W, t)
    else:
        W = W + (letter,)
    nxt = KaryState(W, trigger, 0, pairs, boosts)
    if check:
        nxt.check_pairs()
    return nxt


def kary_boosted_run(s, check: bool = True, trace: bool = False):
    """Run the boosted k-ary algorithm over ``s``; returns the final state
    (and every intermediate state when ``trace`` is set)."""
    letters = s.letters if hasattr(s, "letters") else tuple(s)
    st = KaryState()
    states = [st]
    for t, c in enumerate(letters, start=1):
        st = kary_boosted_step(st, c, t, check)
        if trace:
            states.append(st)
    return (st, states) if trace else st


# -- counting ---------------------------------------------------------------------

def count_shuffle_squares(k: int, n: int, budget: float = 1e8) -> int:
    """Exact number of shuffle squares in ``[k]^(2n)``.

    Words sharing a prefix share their buffer set, so the count is a
    memoised recursion over (pruned buffer set, time).
    """
    if k < 1 or n < 0:
        raise DomainError("need k >= 1 and n >= 0")
    if float(k) ** (2 * n) > budget:
        raise TooLarge(f"{k}^{2 * n} words exceed the enumeration budget")
    N = 2 * n

    @lru_cache(maxsize=None)
    def count(B, t):
        if t == N:
            return 1 if () in B else 0
        cap = N - t - 1
        total = 0
        for c in range(k):
            nb = frozenset(_step_set(B, c, cap))
            if nb:
                total += count(nb, t + 1)
        return total

    result = count(frozenset({()}), 0)
    count.cache_clear()
    if result < greedy_lower_bound(k, n):
        raise InvariantViolation("count below the greedy lower bound")
    return result


def shuffle_square_counts(k: int, n_max: int, budget: float = 1e8) -> dict:
    counts = {n: count_shuffle_squares(k, n, budget) for n in range(n_max + 1)}
    if not check_supermultiplicative(counts):
        raise InvariantViolation("counts are not supermultiplicative")
    return counts


def check_supermultiplicative(counts: dict) -> bool:
    return all(counts[a + b] >= counts[a] * counts[b]
               for a in counts for b in counts if a + b in counts)


def greedy_success_count(k: int, n: int) -> int:
    """Number of words in ``[k]^(2n)`` on which the k-ary greedy thread ends empty.

    Only the buffer length matters: from the empty buffer every letter
    appends, otherwise one letter matches and ``k - 1`` append.
    """
    N = 2 * n
    ways = [1] + [0] * N
    for _ in range(N):
        nxt = [0] * (N + 1)
        for h, c in enumerate(ways):
            if not c:
                continue
            if h == 0:
                nxt[1] += k * c
            else:
                nxt[h - 1] += c
                if h + 1 <= N:
                    nxt[h + 1] += (k - 1) * c
        ways = nxt
    return ways[0]


def greedy_lower_bound(k: int, n: int) -> int:
    """``C(2n, n) (k-1)^n / (n+1)``, rounded up."""
    num = math.comb(2 * n, n) * (k - 1) ** n
    return -(-num // (n + 1))


# -- twins threshold ---------------------------------------------------------------

def alpha_objective(alpha: float, k: int, b: float) -> float:
    return alpha * math.log(b / (alpha * k)) + (1 - alpha) * math.log((k - 1) / (k * (1 - alpha)))


def alpha_bound(k: int, b: Optional[float] = None, tol: float = 1e-9) -> Optional[float]:
    """Smallest ``alpha`` in ``(2/k, 1)`` with a negative objective, or None.

    The objective is concave in ``alpha``, so the negative region near 1 is
    an interval; its left end is found by bisection.
    """
    if k < 2:
        raise DomainError("alphabet size must be at least 2")
    if b is None:
        b = math.sqrt(k) + math.sqrt(k - 1)
    if b <= 0:
        raise DomainError("growth constant must be positive")
    lo_end = 2.0 / k
    f = lambda a: alpha_objective(a, k, b)
    if lo_end < 1 and f(lo_end) < 0:
        return lo_end
    # the maximiser of the concave objective
    peak = b / (b + k - 1)
    start = max(peak, lo_end)
    hi = 1.0 - 1e-15
    if f(hi) >= 0:
        return None
    lo = start
    if f(lo) < 0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            hi = mid
        else:
            lo = mid
    return hi


# -- a non-uniform input family -------------------------------------------------------

def sample_mu(k: int, length: int, bias: float = 0.0, rng=None) -> tuple:
    """Draw a word while running the boosted algorithm, tilting letters toward
    the ones that create or spend indicator pairs.

    With probability ``bias`` the next letter is chosen to help the algorithm
    (continue or complete a pending pair, or resolve an indicator head);
    otherwise it is uniform.  ``bias = 0`` is the uniform distribution.
    """
    g = _gen(rng)
    st = KaryState()
    out = []
    for t in range(1, length + 1):
        c = int(g.integers(0, k))
        if bias > 0 and g.random() < bias:
            if st.last_match is not None:
                a, b, _ = st.last_match
                others = [x for x in range(k) if x not in (a, b)]
                if st.pending > 0 or not others:
                    c = a
                else:
                    c = others[int(g.integers(0, len(others)))]
            elif st.W and isinstance(st.W[0], Indicator):
                c = st.W[0].letter if g.random() < 0.5 else st.W[1]
            elif st.W:
                c = st.W[0]
        out.append(c)
        st = kary_boosted_step(st, c, t, check=False)
    return tuple(out)
