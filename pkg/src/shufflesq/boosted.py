"""Boosted greedy: cycles of indicator, turnover and activation phases.

A cycle starts from a constant buffer ``side^k`` and ends at a constant
buffer ``0^X`` or ``1^X``.  Internally every cycle works on the view of the
input in which the starting letter is ``1`` (``working = actual ^ (1 - side)``),
so the phases only ever deal with leading ones.

Quasi-buffers are deques of symbols: ``0`` and ``1`` are letters, and a
negative int ``~tau`` is an indicator for the one read at time ``tau``.  That
one is provisionally matched; it turns into an append if the activation
phase spends the indicator as a one.

``boosted_cycle`` and friends are the reference implementation and record a
concrete buffer thread.  ``cycle_statistics`` and ``chain_statistics`` run
the same rules in compiled form for large Monte Carlo runs.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np

from .buffers import backtrack, evolve
from .errors import InvariantViolation, StreamExhausted, TooLarge
from .words import (APPEND, EMPTY_KEY, I, MATCH, Partition, QuasiBuffer, Word, _gen,
                    as_quasi, as_word, expand_I, expand_J, key_of, pack, partition_from_moves)

__all__ = [
    "BitStream", "PhaseState", "CycleResult", "CycleRecord", "BoostedRun", "Failure",
    "indicator_phase", "turnover_phase", "activation_phase", "boosted_cycle",
    "run_boosted", "constructive_partition", "verify_quasibuffer", "replay_moves",
    "cycle_statistics", "chain_statistics", "final_buffer_length",
]

INDICATOR_SHAPE = re.compile(r"^1*0*(i0*)*$")
AFTER_INDICATOR_SHAPE = re.compile(r"^0+(i0+)*$")
ACTIVATION_SHAPE = re.compile(r"^[0i]*1*$")


class BitStream:
    """Sequential reader over a finite word or an endless seeded bit source.

    ``pos`` is the number of bits consumed so far, i.e. the current time.
    """

    def __init__(self, bits=None, rng=None, chunk: int = 1 << 14, start: int = 0):
        if bits is not None:
            self._bits = list(as_word(bits).letters) if not isinstance(bits, list) else bits
            self._gen = None
        else:
            self._bits = []
            self._gen = _gen(rng)
        self._chunk = chunk
        self.pos = start

    def read(self, state: Optional[dict] = None) -> int:
        if self.pos >= len(self._bits):
            if self._gen is None:
                raise StreamExhausted(state or {})
            self._bits.extend(self._gen.integers(0, 2, size=self._chunk).tolist())
        b = self._bits[self.pos]
        self.pos += 1
        return b

    @property
    def finite(self) -> bool:
        return self._gen is None

    def __len__(self):
        return len(self._bits)

    def prefix(self, t: int) -> Word:
        return Word(tuple(self._bits[:t]))


@dataclass
class PhaseState:
    """Snapshot handed to an observer after every step of a cycle."""

    phase: str
    W: QuasiBuffer
    t: int
    side: int
    z: int = 0
    C3: int = 0
    mode: tuple = ("I",)


@dataclass
class CycleResult:
    X_star: int
    T: int
    end_phase: str
    side: int
    moves: list
    X: int = 0
    M: int = 0
    Z: int = 0
    Y: int = 0
    C3: int = 0
    T1: int = 0
    T2: int = 0
    k: int = 0


@dataclass
class CycleRecord:
    m: int
    X: int
    T: int
    end_phase: str
    side: int

    def to_dict(self):
        return {"m": self.m, "X": self.X, "T": self.T, "end_phase": self.end_phase, "side": self.side}


def _render(W) -> QuasiBuffer:
    return QuasiBuffer(tuple(I if s < 0 else s for s in W))


class _Cycle:
    """Mutable bookkeeping shared by the three phases of one cycle."""

    def __init__(self, stream, side, k, observer):
        self.stream = stream
        self.side = side
        self.flip = 1 - side
        self.t0 = stream.pos
        self.k = k
        self.moves = []
        self.observer = observer
        self.info = {"phase": "indicator", "k": k, "t0": self.t0, "side": side}

    def read(self) -> int:
        return self.stream.read(dict(self.info, moves=list(self.moves))) ^ self.flip

    @property
    def t(self):
        return self.stream.pos

    def set_move(self, tau, move):
        self.moves[tau - self.t0 - 1] = move

    def emit(self, phase, W, mode, z=0, C3=0):
        if self.observer is not None:
            self.observer(PhaseState(phase, _render(W), self.t, self.side, z, C3, mode))


def indicator_phase(cyc: _Cycle, drop_leftmost=True):
    """Read until ``k`` ones have been seen.

    Returns ``(W'', X, M)``; ``W''`` is None when no zero was read, in which
    case the empty word is a buffer.
    """
    W = deque([1] * cyc.k)
    X = 0
    while True:
        b = cyc.read()
        if b == 0:
            W.append(0)
            cyc.moves.append(APPEND)
            X += 1
        else:
            if W[0] != 1:
                raise InvariantViolation("indicator phase read a one without a leading one")
            W.popleft()
            W.append(~cyc.t)
            cyc.moves.append(MATCH)
        cyc.emit("indicator", W, ("I",))
        if W[0] != 1:
            break
    if X == 0:
        return None, 0, 0
    # keep only indicators followed by a zero
    syms = list(W)
    kept = [s for j, s in enumerate(syms) if s >= 0 or (j + 1 < len(syms) and syms[j + 1] == 0)]
    first = next((j for j, s in enumerate(kept) if s < 0), None)
    if first is not None and (drop_leftmost is True or (drop_leftmost == "needed" and first == 0)):
        del kept[first]
    M = sum(1 for s in kept if s < 0)
    W2 = deque(kept)
    cyc.emit("indicator", W2, ("I",))
    return W2, X, M


def turnover_phase(cyc: _Cycle, W2: deque):
    """Read the next run of ones and the zero after it.

    Returns ``(W, Z, turnover_times)`` where ``W = tail(W'')``.
    """
    cyc.info["phase"] = "turnover"
    times = []
    while True:
        b = cyc.read()
        if b == 0:
            if W2[0] != 0:
                raise InvariantViolation("quasi-buffer does not start with a zero")
            W2.popleft()
            cyc.moves.append(MATCH)
            break
        times.append(cyc.t)
        cyc.moves.append(APPEND)
        cyc.emit("turnover", W2, ("J", len(times)))
    return W2, len(times), times


def activation_phase(cyc: _Cycle, W: deque, z: int):
    """Match every remaining zero, spending up to ``z`` indicators as ones.

    Returns ``(ones_appended, Y, C3)``; the final buffer is ``1^(ones + z - C3)``.
    """
    cyc.info["phase"] = "activation"
    zeros = sum(1 for s in W if s == 0)
    C3 = ones = Y = 0
    cyc.emit("activation", W, ("J", z), z, 0)
    while zeros:
        b = cyc.read()
        if b == 0:
            while W[0] < 0:
                W.popleft()
            if W.popleft() != 0:
                raise InvariantViolation("activation matched a zero against a one")
            zeros -= 1
            cyc.moves.append(MATCH)
        else:
            Y += 1
            if W[0] < 0 and C3 < z:
                C3 += 1
                cyc.set_move(~W.popleft(), APPEND)
                cyc.moves.append(MATCH)
            else:
                W.append(1)
                ones += 1
                cyc.moves.append(APPEND)
        if C3 > z:
            raise InvariantViolation("indicator budget exceeded")
        cyc.emit("activation", W, ("J", z - C3), z, C3)
    return ones, Y, C3


def boosted_cycle(stream: BitStream, k: int, side: int = 1, drop_leftmost=True,
                  observer: Optional[Callable] = None, verify: bool = False) -> CycleResult:
    """One cycle from ``side^k``.

    ``drop_leftmost`` controls the deletion of the leftmost indicator after
    the indicator phase: ``True`` always deletes it, ``"needed"`` only when
    the quasi-buffer would otherwise start with an indicator.
    """
    if k < 1:
        raise ValueError("a cycle needs k >= 1")
    cyc = _Cycle(stream, side, k, observer)
    W2, X, M = indicator_phase(cyc, drop_leftmost)
    T1 = cyc.t
    if W2 is None:
        res = CycleResult(0, T1, "indicator", side, cyc.moves, 0, 0, 0, 0, 0, T1, T1, k)
    else:
        W, Z, times = turnover_phase(cyc, W2)
        T2 = cyc.t
        if Z == 0:
            res = CycleResult(X - 1, T2, "turnover", 1 - side, cyc.moves, X, M, 0, 0, 0, T1, T2, k)
        else:
            ones, Y, C3 = activation_phase(cyc, W, Z)
            for j, tau in enumerate(times):
                cyc.set_move(tau, MATCH if j < C3 else APPEND)
            X_star = ones + Z - C3
            if X_star != Y - 2 * C3 + Z:
                raise InvariantViolation("activation bookkeeping mismatch")
            res = CycleResult(X_star, cyc.t, "activation", side, cyc.moves, X, M, Z, Y, C3, T1, T2, k)
            if res.T - cyc.t0 != (k + X) + (Z + 1) + (X - 1 + Y):
                raise InvariantViolation("cycle length does not match phase counts")
    if verify:
        seg = stream._bits[cyc.t0:res.T]
        end = replay_moves(seg, (side,) * k, res.moves)
        if end != (res.side,) * res.X_star:
            raise InvariantViolation("replayed thread does not end at the claimed buffer")
    return res


def replay_moves(segment, start, moves) -> tuple:
    """Run a concrete buffer thread; raises if a match is not legal."""
    buf = deque(start)
    for c, mv in zip(segment, moves):
        if mv == APPEND:
            buf.append(c)
        else:
            if not buf or buf[0] != c:
                raise InvariantViolation("illegal match in buffer thread")
            buf.popleft()
    return tuple(buf)


# -- iterating cycles --------------------------------------------------------------

@dataclass
class BoostedRun:
    records: list
    moves: list
    T: int
    X: int
    side: int
    partial: dict = field(default_factory=dict)

    def M(self, t: int) -> int:
        """Index of the last cycle finished by time ``t`` (0 before the first)."""
        m = 0
        for r in self.records:
            if r.T <= t:
                m = r.m
            else:
                break
        return m

    def X_at(self, m: int) -> int:
        return 0 if m == 0 else self.records[m - 1].X

    def T_at(self, m: int) -> int:
        return 0 if m == 0 else self.records[m - 1].T

    def Y_upper(self, t: int) -> int:
        """``X_{M(t)} + (t - T_{M(t)})``, an upper bound on the shortest two-run buffer."""
        m = self.M(t)
        return self.X_at(m) + t - self.T_at(m)


def run_boosted(s, drop_leftmost=True, stop_at: Optional[int] = None, observer=None) -> BoostedRun:
    """Iterate cycles from the empty buffer until the word runs out.

    An empty buffer is restarted with one plain greedy step (always an
    append), after which the run continues from ``c^1`` for the letter ``c``
    just read; these steps are recorded with ``end_phase="bridge"``.
    """
    stream = s if isinstance(s, BitStream) else BitStream(s)
    records, moves = [], []
    X, side, T = 0, 1, stream.pos
    partial = {}
    while stop_at is None or T < stop_at:
        if X == 0:
            try:
                side = stream.read({"phase": "bridge"})
            except StreamExhausted as e:
                partial = e.state
                break
            moves.append(APPEND)
            X, T = 1, stream.pos
            records.append(CycleRecord(len(records) + 1, X, T, "bridge", side))
            continue
        try:
            res = boosted_cycle(stream, X, side, drop_leftmost, observer)
        except StreamExhausted as e:
            partial = e.state
            stream.pos = T
            break
        moves.extend(res.moves)
        X, T, side = res.X_star, res.T, res.side
        records.append(CycleRecord(len(records) + 1, X, T, res.end_phase, side))
    return BoostedRun(records, moves, T, X, side, partial)


def final_buffer_length(s, drop_leftmost=True) -> int:
    """Length of a concrete buffer at the end of ``s``: boosted cycles, then
    plain greedy steps over the unfinished suffix."""
    s = as_word(s)
    run = run_boosted(s, drop_leftmost)
    buf = deque([run.side] * run.X)
    for c in s.letters[run.T:]:
        if buf and buf[0] == c:
            buf.popleft()
        else:
            buf.append(c)
    return len(buf)


@dataclass
class Failure:
    reason: str
    detail: str = ""

    def __bool__(self):
        return False

    def to_dict(self):
        return {"reason": self.reason, "detail": self.detail}


def constructive_partition(s, tail_window: int = 24, drop_leftmost=True,
                           state_budget: int = 1 << 21):
    """Split ``s`` into two identical halves, or return a :class:`Failure`.

    Boosted cycles build a concrete thread up to roughly ``|s| - tail_window``
    (plain greedy steps cover any gap left by a cycle that ran out of input);
    an exact buffer-set search then finishes the suffix from the buffer reached.  A failure does not prove ``s`` is not a shuffle square.
    """
    s = as_word(s)
    n = len(s)
    if n % 2 or s.count(0) % 2:
        return Failure("OddCounts", "length or letter counts are odd")
    cut = max(n - tail_window, 0)
    run = run_boosted(s, drop_leftmost, stop_at=cut)
    moves = list(run.moves)
    # a cycle cut short by the end of the word leaves a gap before the
    # window; plain greedy steps keep the exact part at most tail_window long
    buf = deque([run.side] * run.X)
    T = run.T
    for c in s.letters[T:cut]:
        if buf and buf[0] == c:
            buf.popleft()
            moves.append(MATCH)
        else:
            buf.append(c)
            moves.append(APPEND)
        T += 1
    start = key_of(tuple(buf))
    try:
        hist = evolve(s[T:], init=start, target_len=0, limit=state_budget)
    except TooLarge as e:
        return Failure("TailUnreachable", str(e))
    if EMPTY_KEY not in hist[-1].elements:
        return Failure("TailUnreachable", f"no empty buffer reachable from {start.bit_length() - 1}-letter buffer at t={T}")
    moves += backtrack(hist, EMPTY_KEY)
    p = partition_from_moves(moves)
    if not p.check(s):
        raise InvariantViolation("constructed partition failed verification")
    return p


def verify_quasibuffer(W, s_prefix, mode=("I",), side: int = 1, limit: int = 20) -> bool:
    """Check every expansion of ``W`` against the exact buffer set of ``s_prefix``.

    ``mode`` is ``("I",)``, ``("J", z)`` or ``("B",)`` for a plain buffer.  With
    ``side=0`` the quasi-buffer is read in the complemented alphabet.
    """
    s_prefix = as_word(s_prefix)
    if len(s_prefix) > limit:
        raise TooLarge(f"quasi-buffer check limited to prefixes of length {limit}")
    if side == 0:
        s_prefix = s_prefix.complement()
    B = evolve(s_prefix)[-1].elements
    q = as_quasi(W)
    if mode[0] == "I":
        words = expand_I(q)
    elif mode[0] == "J":
        words = expand_J(q, mode[1])
    else:
        words = {Word(q.bar)}
    return all(pack(w.letters) in B for w in words)


# -- compiled cycle kernels ----------------------------------------------------------

_END_INDICATOR, _END_TURNOVER, _END_ACTIVATION = 0, 1, 2


@numba.njit(cache=True)
def _cycle(bits, pos, k, side, drop_mode, ghost, G, runs):
    """One cycle on ``bits`` from ``pos``.

    Returns ``(ok, pos, X_star, end, new_side, X, M, Z, Y, C3)``; ``ok`` is 0
    when the bits ran out mid-cycle.
    """
    n = bits.shape[0]
    flip = 1 - side
    # indicator phase: gaps G[j] of zeros before the (j+1)-th one
    g = 0
    j = 0
    while j < k:
        if pos >= n:
            return 0, pos, 0, 0, side, 0, 0, 0, 0, 0
        b = bits[pos] ^ flip
        pos += 1
        if b == 0:
            g += 1
        else:
            G[j] = g
            j += 1
            g = 0
    X = 0
    for j in range(k):
        X += G[j]
    if X == 0:
        Z = 0
        if ghost:
            while True:
                if pos >= n:
                    return 0, pos, 0, 0, side, 0, 0, 0, 0, 0
                b = bits[pos] ^ flip
                pos += 1
                if b == 0:
                    break
                Z += 1
        return 1, pos, 0, _END_INDICATOR, side, 0, 0, Z, 0, 0
    # surviving indicators separate zero runs
    nr = 1
    runs[0] = G[0]
    for j in range(k - 1):
        if G[j + 1] > 0:
            runs[nr] = G[j + 1]
            nr += 1
    if nr > 1 and (drop_mode == 1 or runs[0] == 0):
        runs[0] += runs[1]
        for r in range(1, nr - 1):
            runs[r] = runs[r + 1]
        nr -= 1
    M = nr - 1
    # turnover
    Z = 0
    while True:
        if pos >= n:
            return 0, pos, 0, 0, side, 0, 0, 0, 0, 0
        b = bits[pos] ^ flip
        pos += 1
        if b == 0:
            break
        Z += 1
    if Z == 0:
        return 1, pos, X - 1, _END_TURNOVER, 1 - side, X, M, 0, 0, 0
    # activation
    zeros = X - 1
    r = 0
    cur = runs[0] - 1
    C3 = 0
    Y = 0
    while zeros > 0:
        if pos >= n:
            return 0, pos, 0, 0, side, 0, 0, 0, 0, 0
        b = bits[pos] ^ flip
        pos += 1
        if cur == 0:
            # head is the indicator in front of run r + 1
            if b == 0:
                r += 1
                cur = runs[r] - 1
                zeros -= 1
            else:
                Y += 1
                if C3 < Z:
                    C3 += 1
                    r += 1
                    cur = runs[r]
        else:
            if b == 0:
                cur -= 1
                zeros -= 1
            else:
                Y += 1
    return 1, pos, Y - 2 * C3 + Z, _END_ACTIVATION, side, X, M, Z, Y, C3


@numba.njit(cache=True)
def _many_cycles(bits, k, side, drop_mode, ghost, out, start):
    G = np.zeros(k + 1, dtype=np.int64)
    runs = np.zeros(k + 1, dtype=np.int64)
    pos = 0
    i = start
    while i < out.shape[0]:
        ok, npos, xs, end, ns, X, M, Z, Y, C3 = _cycle(bits, pos, k, side, drop_mode, ghost, G, runs)
        if ok == 0:
            break
        out[i, 0] = xs
        out[i, 1] = npos - pos
        out[i, 2] = end
        out[i, 3] = X
        out[i, 4] = M
        out[i, 5] = Z
        out[i, 6] = Y
        out[i, 7] = C3
        pos = npos
        i += 1
    return i


STAT_FIELDS = ("X_star", "T_star", "end_phase", "X", "M", "Z", "Y", "C3")


def cycle_statistics(k: int, n_cycles: int, rng=None, drop_leftmost=True, ghost: bool = False,
                     chunk: int = 1 << 22) -> dict:
    """Independent cycles from ``1^k`` on fresh uniform bits.

    Returns arrays keyed by :data:`STAT_FIELDS`.  With ``ghost`` the run of
    ones after an empty indicator phase is still read, so ``Z`` is defined
    for every cycle.
    """
    g = _gen(rng)
    out = np.zeros((n_cycles, len(STAT_FIELDS)), dtype=np.int64)
    done = 0
    drop_mode = 1 if drop_leftmost is True else 0
    while done < n_cycles:
        bits = g.integers(0, 2, size=chunk, dtype=np.uint8)
        done = _many_cycles(bits, k, 1, drop_mode, ghost, out, done)
    return {name: out[:, j] for j, name in enumerate(STAT_FIELDS)}


@numba.njit(cache=True)
def _chain(bits, drop_mode, Xs, Ts, max_len):
    G = np.zeros(max_len, dtype=np.int64)
    runs = np.zeros(max_len, dtype=np.int64)
    n = bits.shape[0]
    pos = 0
    X = 0
    side = 1
    m = 0
    while m < Xs.shape[0]:
        if X == 0:
            if pos >= n:
                break
            side = bits[pos]
            pos += 1
            X = 1
        else:
            if X + 1 > G.shape[0]:
                break
            ok, npos, xs, end, ns, a, b, c, d, e = _cycle(bits, pos, X, side, drop_mode, False, G, runs)
            if ok == 0:
                break
            pos = npos
            X = xs
            side = ns
        Xs[m] = X
        Ts[m] = pos
        m += 1
    return m


def chain_statistics(n_bits: int, rng=None, drop_leftmost=True) -> tuple:
    """Run the cycle chain (with bridge steps) over ``n_bits`` uniform bits.

    Returns ``(X, T)`` arrays, one entry per cycle or bridge step.
    """
    g = _gen(rng)
    bits = g.integers(0, 2, size=n_bits, dtype=np.uint8)
    Xs = np.zeros(n_bits + 1, dtype=np.int64)
    Ts = np.zeros(n_bits + 1, dtype=np.int64)
    m = _chain(bits, 1 if drop_leftmost is True else 0, Xs, Ts, n_bits + 2)
    return Xs[:m], Ts[:m]
