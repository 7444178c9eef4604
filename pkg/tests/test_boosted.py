import math
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shufflesq import boosted
from shufflesq.boosted import (ACTIVATION_SHAPE, AFTER_INDICATOR_SHAPE, INDICATOR_SHAPE, BitStream,
                               boosted_cycle, chain_statistics, constructive_partition,
                               cycle_statistics, final_buffer_length, run_boosted,
                               verify_quasibuffer)
from shufflesq.buffers import evolve
from shufflesq.errors import StreamExhausted
from shufflesq.greedy import greedy_trace
from shufflesq.words import Rng, Word, key_of, random_even_parity_word, random_word

WORKED = "111" + "0110111010"


def _observe(stream, k, **kw):
    states = []
    res = boosted_cycle(stream, k, observer=states.append, **kw)
    return res, states


def test_worked_example_with_needed_deletion():
    res, states = _observe(BitStream(WORKED, start=3), 3, drop_leftmost="needed", verify=True)
    assert (res.X_star, res.T - 3, res.side) == (1, 10, 1)
    assert res.end_phase == "activation"
    after_indicator = [s for s in states if s.phase == "indicator"][-1]
    assert str(after_indicator.W) == "0i0"
    assert res.X == 2 and res.T1 - 3 == 5
    assert str([s for s in states if s.phase == "activation"][0].W) == "i0"
    assert res.Z == 2


def test_worked_example_with_unconditional_deletion():
    # deleting the leftmost indicator every time leaves 00, so both ones stay
    res, states = _observe(BitStream(WORKED, start=3), 3, verify=True)
    assert str([s for s in states if s.phase == "indicator"][-1].W) == "00"
    assert res.X_star == 3 and res.T - 3 == 10


def test_verify_quasibuffer_worked_example():
    assert verify_quasibuffer("0i0", WORKED[:8])
    assert verify_quasibuffer("00", WORKED[:8], mode=("B",))
    assert not verify_quasibuffer("1", WORKED[:8], mode=("B",))


def test_immediate_match():
    res = boosted_cycle(BitStream("1"), 1)
    assert res.X_star == 0 and res.end_phase == "indicator" and res.T == 1


def test_turnover_without_ones():
    # k = 1: read 0 then 1, W'' = 0; the next 0 is matched right away
    res = boosted_cycle(BitStream("010"), 1, verify=True)
    assert res.end_phase == "turnover" and res.Z == 0
    assert res.X_star == 0 and res.side == 0


def test_no_indicator_activation_is_greedy():
    # k = 1 with a single zero: W'' = 0, Z ones, then greedy zero matching
    res = boosted_cycle(BitStream("01" + "11" + "0" + "10"), 1, verify=True)
    assert res.M == 0 and res.C3 == 0
    assert res.X_star == res.Y + res.Z


def test_complemented_side():
    res = boosted_cycle(BitStream("0110111010".translate(str.maketrans("01", "10")), start=0), 3,
                        side=0, drop_leftmost="needed", verify=True)
    assert res.X_star == 1 and res.side == 0


@settings(max_examples=400)
@given(st.integers(1, 4), st.lists(st.integers(0, 1), min_size=24, max_size=24),
       st.sampled_from([True, "needed"]))
def test_phase_shapes_and_quasibuffer_soundness(k, tail, drop):
    s = Word((1,) * k + tuple(tail))
    states = []
    try:
        res = boosted_cycle(BitStream(s, start=k), k, drop_leftmost=drop,
                            observer=states.append, verify=True)
    except StreamExhausted:
        res = None
    for ps in states:
        text = str(ps.W)
        if ps.phase == "indicator":
            assert INDICATOR_SHAPE.match(text)
        elif ps.phase == "activation":
            assert ACTIVATION_SHAPE.match(text)
            assert ps.C3 <= ps.z
        if ps.t <= 20:
            assert verify_quasibuffer(ps.W, s[:ps.t], ps.mode), (ps, str(s))
    ind = [p for p in states if p.phase == "indicator"]
    if res is not None and res.X > 0:
        assert AFTER_INDICATOR_SHAPE.match(str(ind[-1].W))


def test_conservation_on_random_cycles():
    g = Rng(4).generator()
    for _ in range(3000):
        k = int(g.integers(1, 12))
        res = boosted_cycle(BitStream(rng=g), k, verify=True)
        if res.end_phase == "activation":
            assert res.T - (res.T1 - res.k - res.X) == (k + res.X) + (res.Z + 1) + (res.X - 1 + res.Y)


def test_indicator_phase_distribution():
    st_ = cycle_statistics(12, 100_000, Rng(12))
    X = st_["X"]
    n = X.size
    assert abs(X.mean() - 12) <= 4 * math.sqrt(24 / n)
    # variance of the sample variance for NB(12, 1/2) is about (m4 - s^4) / n
    assert abs(X.var() - 24) <= 4 * math.sqrt((np.mean((X - 12.0) ** 4) - 24 ** 2) / n)
    M = st_["M"][X > 0]
    from math import comb
    pmf = np.zeros(12)
    for j in range(12):
        pmf[max(j - 1, 0)] += comb(11, j) / 2 ** 11
    for m in range(11):
        f = np.mean(M == m)
        assert abs(f - pmf[m]) <= 4 * math.sqrt(pmf[m] * (1 - pmf[m]) / M.size) + 1e-12, m


def test_turnover_run_is_geometric():
    st_ = cycle_statistics(6, 100_000, Rng(13), ghost=True)
    Z = st_["Z"]
    n = Z.size
    for j in range(1, 11):
        p = 2.0 ** -j
        assert abs(np.mean(Z >= j) - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_activation_spend_is_binomial_min():
    st_ = cycle_statistics(12, 100_000, Rng(14))
    act = st_["end_phase"] == 2
    M, Z, C3 = st_["M"][act], st_["Z"][act], st_["C3"][act]
    from math import comb
    expected = np.zeros(40)
    for (m, z), cnt in zip(*np.unique(np.stack([M, Z], 1), axis=0, return_counts=True)):
        for j in range(m + 1):
            expected[min(j, z)] += cnt * comb(int(m), j) / 2 ** int(m)
    expected /= act.sum()
    for c in range(8):
        p = expected[c]
        assert abs(np.mean(C3 == c) - p) <= 4 * math.sqrt(p * (1 - p) / act.sum()) + 1e-12


def test_compiled_cycles_match_reference():
    g = Rng(15).generator()
    for _ in range(200):
        bits = g.integers(0, 2, size=3000, dtype=np.uint8)
        run = run_boosted(Word(tuple(bits.tolist())))
        Xs = np.zeros(3001, dtype=np.int64)
        Ts = np.zeros(3001, dtype=np.int64)
        m = boosted._chain(bits, 1, Xs, Ts, 3002)
        assert [r.X for r in run.records] == Xs[:m].tolist()
        assert [r.T for r in run.records] == Ts[:m].tolist()


def test_run_boosted_empty_and_partial():
    assert run_boosted("").records == []
    run = run_boosted("1101")
    assert run.T <= 4
    assert run.partial.get("phase") in (None, "indicator", "turnover", "activation", "bridge")


def test_records_are_sound():
    g = Rng(16)
    for i in range(300):
        n = 22 if i < 250 else 26
        s = random_word(n, rng=g.spawn(i))
        run = run_boosted(s)
        hist = evolve(s, target_len=None) if n <= 22 else None
        for r in run.records:
            if hist is not None:
                B = hist[r.T].elements
            else:
                B = evolve(s[:r.T])[-1].elements
            assert key_of((r.side,) * r.X) in B


def test_moves_replay_to_records():
    g = Rng(17).generator()
    for _ in range(100):
        s = random_word(500, rng=g)
        run = run_boosted(s)
        end = boosted.replay_moves(s.letters[:run.T], (), run.moves)
        assert end == (run.side,) * run.X


def test_cesaro_moment_does_not_drift():
    short = boosted_means(1000)
    long = boosted_means(4000)
    # no upward drift: two-sample comparison at 4 standard errors
    se = math.sqrt(np.var(short, ddof=1) / len(short) + np.var(long, ddof=1) / len(long))
    assert np.mean(long) - np.mean(short) <= 4 * se


def boosted_means(n_cycles):
    out = []
    for seed in range(20):
        X, _ = chain_statistics(40 * n_cycles, Rng(seed))
        X = X[:n_cycles].astype(float)
        out.append(np.mean(X ** 1.3))
    return np.array(out)


def test_constructive_partition_small():
    p = constructive_partition("0011")
    assert p and p.check("0011")
    f = constructive_partition("0001")
    assert not f and f.reason == "OddCounts"


def test_constructive_successes_verify():
    hits = 0
    for i in range(60):
        s = random_even_parity_word(400, Rng(18, i))
        p = constructive_partition(s)
        if p:
            hits += 1
            assert p.check(s)
        else:
            assert p.reason == "TailUnreachable"
    assert hits > 0


def test_boosted_beats_greedy_on_average():
    boost, greedy = [], []
    for i in range(1000):
        s = random_word(2000, rng=Rng(19, i))
        boost.append(final_buffer_length(s))
        greedy.append(len(greedy_trace(s).states[-1]))
    assert np.mean(boost) < np.mean(greedy)
