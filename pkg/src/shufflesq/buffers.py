"""Exact buffer sets of binary words.

``B_t(s)`` is the set of words ``w`` for which some split ``(A1, A2)`` of the
first ``t`` positions has ``s(A1) = s(A2) w``.  It evolves one letter at a
time: every buffer either gets the letter appended, or, when its head equals
the letter, loses its head.  A word is a shuffle square iff the empty word
survives to the end.

Buffers are packed ints (see :mod:`shufflesq.words`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import NoStitchFound, NotShuffleSquare, OddParity, TooLarge
from .words import (APPEND, EMPTY_KEY, MATCH, Partition, Word, as_word, key_is_sigma2,
                    key_len, key_of, key_reverse, pack, partition_from_moves, unpack)

__all__ = [
    "APPEND", "MATCH", "BufferSet", "buffer_step", "evolve", "recognize",
    "extract_partition", "min_sigma2", "lt", "min_deletions", "delta_exact",
    "verify_decomposition", "detect_A", "detect_E", "two_sided_partition",
    "enumerate_buffer_sets", "brute_force_is_shuffle_square",
]

# the five short buffers whose absence defines the event A_t
_NEAR_EMPTY = tuple(pack(w) for w in ((), (0,), (1,), (0, 1), (1, 0)))


@dataclass
class BufferSet:
    """Buffers at time ``t`` with the move and parent that first produced each."""

    t: int = 0
    elements: dict = field(default_factory=lambda: {EMPTY_KEY: None})

    def __contains__(self, w):
        return key_of(w) in self.elements

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def words(self) -> set:
        return {Word(unpack(key)) for key in self.elements}


def buffer_step(B: BufferSet, letter: int, max_len: Optional[int] = None) -> BufferSet:
    """Advance ``B`` by one letter.

    Matches are inserted before appends so a buffer reachable both ways keeps
    the match as its recorded predecessor.  Buffers longer than ``max_len``
    are dropped.
    """
    out = {}
    for key in B.elements:
        if key > 1 and key & 1 == letter:
            nk = key >> 1
            if max_len is None or nk.bit_length() - 1 <= max_len:
                out[nk] = (MATCH, key)
    for key in B.elements:
        n = key.bit_length() - 1
        if max_len is None or n + 1 <= max_len:
            out.setdefault(key + ((1 + letter) << n), (APPEND, key))
    return BufferSet(B.t + 1, out)


def evolve(s, init=EMPTY_KEY, target_len: Optional[int] = None, limit: int = 1 << 22) -> list:
    """Return ``[B_0, ..., B_n]`` starting from the single buffer ``init``.

    With ``target_len`` set, buffers that can no longer shrink to that length
    by the end of ``s`` are pruned.  ``limit`` caps the size of any one set.
    """
    letters = as_word(s).letters
    n = len(letters)
    hist = [BufferSet(0, {key_of(init): None})]
    for t, c in enumerate(letters):
        cap = None if target_len is None else target_len + (n - t - 1)
        B = buffer_step(hist[-1], c, cap)
        if len(B) > limit:
            raise TooLarge(f"buffer set exceeded {limit} elements at t={t + 1}")
        hist.append(B)
    return hist


def backtrack(hist: list, end_key: int) -> list:
    """Moves of the recorded buffer thread ending at ``end_key``."""
    moves = []
    key = end_key
    for B in reversed(hist[1:]):
        move, key = B.elements[key]
        moves.append(move)
    moves.reverse()
    return moves


def recognize(s) -> bool:
    """True iff ``s`` splits into two identical subwords."""
    letters = as_word(s).letters
    n = len(letters)
    if n % 2:
        return False
    cur = {EMPTY_KEY}
    for t, c in enumerate(letters):
        cap = n - t - 1
        nxt = set()
        for key in cur:
            m = key.bit_length() - 1
            if m and key & 1 == c:
                nxt.add(key >> 1)
            if m < cap:
                nxt.add(key + ((1 + c) << m))
        if not nxt:
            return False
        cur = nxt
    return EMPTY_KEY in cur


def extract_partition(s) -> Partition:
    """A witness split ``(A1, A2)`` with ``s(A1) = s(A2)``; indices are 1-based."""
    s = as_word(s)
    if len(s) % 2:
        raise NotShuffleSquare("odd length")
    hist = evolve(s, target_len=0)
    if EMPTY_KEY not in hist[-1].elements:
        raise NotShuffleSquare(str(s))
    p = partition_from_moves(backtrack(hist, EMPTY_KEY))
    assert p.check(s)
    return p


def brute_force_is_shuffle_square(s) -> bool:
    """Reference check by trying every balanced split containing position 1."""
    import itertools

    letters = as_word(s).letters
    n = len(letters)
    if n % 2:
        return False
    if n == 0:
        return True
    for rest in itertools.combinations(range(1, n), n // 2 - 1):
        a1 = (0,) + rest
        a2 = [i for i in range(n) if i not in a1]
        if all(letters[i] == letters[j] for i, j in zip(a1, a2)):
            return True
    return False


def min_sigma2(B) -> int:
    """Shortest buffer in ``B`` with at most two runs."""
    keys = B.elements if isinstance(B, BufferSet) else B
    best = min((k.bit_length() - 1 for k in keys if key_is_sigma2(k)), default=None)
    assert best is not None, "buffer set without a two-run element"
    return best


def detect_A(B) -> bool:
    keys = B.elements if isinstance(B, BufferSet) else B
    return not any(k in keys for k in _NEAR_EMPTY)


def detect_E(B, k: int) -> bool:
    return detect_A(B) and min_sigma2(B) <= k


# -- longest twins --------------------------------------------------------------

def min_deletions(s, budget: int) -> Optional[int]:
    """Fewest deletions turning ``s`` into a shuffle square, or None if more
    than ``budget`` are needed."""
    letters = as_word(s).letters
    n = len(letters)
    cur = {EMPTY_KEY: 0}
    for t, c in enumerate(letters):
        rem = n - t - 1
        nxt = {}
        get = nxt.get
        for key, d in cur.items():
            m = key.bit_length() - 1
            if m <= rem and d < budget and get(key, budget + 1) > d + 1:
                nxt[key] = d + 1
            if m < rem:
                nk = key + ((1 + c) << m)
                if get(nk, budget + 1) > d:
                    nxt[nk] = d
            if m and key & 1 == c:
                nk = key >> 1
                if get(nk, budget + 1) > d:
                    nxt[nk] = d
        cur = nxt
    return cur.get(EMPTY_KEY)


def lt(s, limit: int = 28) -> int:
    """Length of the longest twins: the largest ``m`` such that ``s`` has two
    disjoint identical subwords of length ``m``."""
    s = as_word(s)
    n = len(s)
    if n > limit:
        raise TooLarge(f"exact LT limited to length {limit}")
    budget = n % 2
    while True:
        d = min_deletions(s, budget)
        if d is not None:
            return (n - d) // 2
        budget += 2


# -- exact probabilities by enumeration ----------------------------------------

def enumerate_buffer_sets(t: int):
    """Yield ``(prefix, depth, buffer keys)`` for every prefix of length ``<= t``
    in depth-first order."""
    stack = [((), frozenset((EMPTY_KEY,)))]
    while stack:
        prefix, keys = stack.pop()
        yield prefix, len(prefix), keys
        if len(prefix) == t:
            continue
        for c in (1, 0):
            nxt = set()
            for key in keys:
                m = key.bit_length() - 1
                nxt.add(key + ((1 + c) << m))
                if m and key & 1 == c:
                    nxt.add(key >> 1)
            stack.append((prefix + (c,), frozenset(nxt)))


def delta_exact(n: int, t: int, v, w, limit: int = 16) -> Fraction:
    """``P[v in B_t and w not in B_t]`` for a uniform random word."""
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    if n > limit:
        raise TooLarge(f"exact enumeration limited to n={limit}")
    kv, kw = key_of(v), key_of(w)
    hits = 0
    for _, depth, keys in enumerate_buffer_sets(t):
        if depth == t and kv in keys and kw not in keys:
            hits += 1
    return Fraction(hits, 2 ** t)


def verify_decomposition(n: int, v="", limit: int = 12, form: str = "general") -> Fraction:
    """``P[v in B_n]`` minus the first-divergence decomposition of it.

    ``form="general"`` sums over all ``delta_t(jwj, w)`` weighted by greedy
    probabilities run on reversed words from ``rev(v)``; ``form="sigma2"``
    (only for ``v`` empty) keeps just the two-run terms and folds the 0/1
    symmetry.  Both are exact identities, so the result should be 0.
    """
    from .greedy import greedy_word_distribution

    if n > limit:
        raise TooLarge(f"exact decomposition limited to n={limit}")
    kv = key_of(v)
    if form == "sigma2" and kv != EMPTY_KEY:
        raise ValueError("the two-run form only applies to the empty word")

    hits = 0
    # gaps[t][u] = number of length-t prefixes with u = jwj in B_t but w not in B_t
    gaps = [dict() for _ in range(n)]
    for _, depth, keys in enumerate_buffer_sets(n):
        if depth == n:
            hits += kv in keys
            continue
        counter = gaps[depth]
        for u in keys:
            m = u.bit_length() - 1
            if m >= 2 and (u & 1) == (u >> (m - 1)) & 1:
                w = ((u >> 1) & ((1 << (m - 2)) - 1)) | (1 << (m - 2))
                if w not in keys:
                    counter[u] = counter.get(u, 0) + 1
    lhs = Fraction(hits, 2 ** n)

    start = key_reverse(kv)
    qrev = greedy_word_distribution(n, start)  # qrev[m][x] = q_m(x; rev v)

    def back_q(m, x):
        return qrev[m].get(key_reverse(x), 0)

    rhs = back_q(n, EMPTY_KEY)
    for t in range(n):
        m = n - t - 1
        for u, cnt in gaps[t].items():
            ending = u >> 1  # w j
            if form == "sigma2":
                if (u & 1) != 1 or not key_is_sigma2(ending):
                    continue
                rhs += Fraction(cnt, 2 ** t) * back_q(m, ending)
            else:
                rhs += Fraction(cnt, 2 ** t) * back_q(m, ending) / 2
    return lhs - rhs


# -- two-sided stitching ---------------------------------------------------------

def two_sided_partition(s, limit: int = 1 << 20) -> Partition:
    """Split ``s`` at an odd time, find a common one-letter buffer for the
    prefix and for the reversed suffix, and glue the two splits together.

    Only a sufficient condition: ``NoStitchFound`` does not mean ``s`` is not
    a shuffle square.
    """
    s = as_word(s)
    n = len(s)
    if n % 2 or s.count(0) % 2 or s.count(1) % 2:
        raise OddParity(str(s))
    fwd = evolve(s, limit=limit)
    bwd = evolve(s.reverse(), limit=limit)
    for cut in range(1, n, 2):
        for j in (0, 1):
            key = pack((j,))
            if key in fwd[cut].elements and key in bwd[n - cut].elements:
                head = backtrack(fwd[:cut + 1], key)
                back = backtrack(bwd[:n - cut + 1], key)
                a1 = [t + 1 for t, mv in enumerate(head) if mv == APPEND]
                a2 = [t + 1 for t, mv in enumerate(head) if mv != APPEND]
                # position p of rev(s) is position n - p + 1 of s
                b1 = [n - t for t, mv in enumerate(back) if mv == APPEND]
                b2 = [n - t for t, mv in enumerate(back) if mv != APPEND]
                p = Partition(tuple(sorted(a1 + b2)), tuple(sorted(a2 + b1)), Word())
                assert p.check(s), "stitched partition failed verification"
                return p
    raise NoStitchFound(str(s))
