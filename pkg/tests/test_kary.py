import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shufflesq.buffers import evolve, recognize
from shufflesq.errors import DomainError, InvariantViolation, TooLarge
from shufflesq.greedy import greedy_step
from shufflesq.kary import (KaryState, alpha_bound, alpha_objective, check_supermultiplicative,
                            count_shuffle_squares, greedy_lower_bound, greedy_success_count,
                            kary_boosted_run, kary_boosted_step, kary_buffer_sets, kary_greedy_step,
                            kary_recognize, sample_mu, shuffle_square_counts)
from shufflesq.words import Indicator, Rng, Word, sigma2_encode, unpack

from oracles import bipartition_oracle


def test_greedy_step_examples():
    assert kary_greedy_step((), 2) == (2,)
    assert kary_greedy_step((2, 1), 2) == (1,)
    assert kary_greedy_step((2, 1), 0) == (2, 1, 0)


def test_greedy_step_reduces_to_binary():
    g = Rng(20).generator()
    b2 = sigma2_encode("")
    bk = ()
    for c in g.integers(0, 2, size=100_000).tolist():
        b2 = greedy_step(b2, c)
        bk = kary_greedy_step(bk, c)
        assert bk == b2.word.letters


def test_binary_reduction_exhaustive():
    for n in range(0, 11):
        for letters in itertools.product((0, 1), repeat=n):
            assert kary_recognize(letters) == recognize(letters)
        if n <= 8:
            for letters in itertools.product((0, 1), repeat=n):
                got = kary_buffer_sets(letters)[-1]
                want = {unpack(k) for k in evolve(letters)[-1].elements}
                assert got == want


def test_indicator_resolution_rules():
    a, b = 0, 1
    ind = Indicator(a, 5)
    W = (ind, b, 2, ind, 2, 1)  # head (a, tau), then b, u2 = (2,), u3 = (2, 1)
    st_ = KaryState(W)
    # letter a: W' = a b u2 u3, then drop the head
    assert kary_boosted_step(st_, a, 9).W == (b, 2, 2, 1)
    # letter b: W' = b u2 a u3, then drop the head
    assert kary_boosted_step(st_, b, 9).W == (2, a, 2, 1)
    # any other letter is appended
    assert kary_boosted_step(st_, 2, 9).W == W + (2,)


def test_pair_construction():
    # head 0 matched with a 1 behind it, then a foreign letter and a 0
    st_ = KaryState((0, 1))
    st_ = kary_boosted_step(st_, 0, 1)
    assert st_.W == (1,) and st_.last_match == (0, 1, 1)
    st_ = kary_boosted_step(st_, 2, 2)
    assert st_.pending == 1
    st_ = kary_boosted_step(st_, 0, 3)
    ind = Indicator(0, 1)
    assert st_.W == (1, ind, 2, ind)
    assert st_.pairs_made == 1 and st_.last_match is None


def test_malformed_pairs_are_caught():
    ind = Indicator(0, 1)
    with pytest.raises(InvariantViolation):
        KaryState((ind, 1)).check_pairs()
    with pytest.raises(InvariantViolation):
        KaryState((ind, 0, ind)).check_pairs()


def test_boosted_soundness_on_ternary_words():
    g = Rng(21).generator()
    pairs = 0
    for i in range(1000):
        n = int(g.integers(1, 19))
        s = tuple(g.integers(0, 3, size=n).tolist())
        final, states = kary_boosted_run(s, trace=True)
        hist = kary_buffer_sets(s)
        for t, st_ in enumerate(states):
            assert st_.resolutions() <= hist[t]
        pairs += final.pairs_made
    assert pairs > 0


def test_small_counts():
    assert count_shuffle_squares(2, 1) == 2
    assert count_shuffle_squares(2, 2) == 6
    for n in range(0, 9):
        assert count_shuffle_squares(2, n) >= math.comb(2 * n, n)


@pytest.mark.parametrize("k,n", [(2, 3), (3, 2), (3, 3), (4, 2)])
def test_counts_match_brute_force(k, n):
    words = np.array(list(itertools.product(range(k), repeat=2 * n)), dtype=np.uint8)
    assert count_shuffle_squares(k, n) == int(bipartition_oracle(words).sum())


def test_counted_words_have_even_letter_counts():
    for letters in itertools.product(range(3), repeat=6):
        if kary_recognize(letters):
            assert all(letters.count(c) % 2 == 0 for c in range(3))


def test_ternary_counts_and_lower_bound():
    counts = shuffle_square_counts(3, 4)
    assert check_supermultiplicative(counts)
    for n, c in counts.items():
        assert c >= greedy_success_count(3, n) >= greedy_lower_bound(3, n)
        assert greedy_lower_bound(3, n) == -(-math.comb(2 * n, n) * 2 ** n // (n + 1))


def test_greedy_success_count_by_simulation():
    for k, n in [(2, 3), (3, 2), (3, 3)]:
        hits = 0
        for letters in itertools.product(range(k), repeat=2 * n):
            b = ()
            for c in letters:
                b = kary_greedy_step(b, c)
            hits += b == ()
        assert hits == greedy_success_count(k, n)


def test_count_guards():
    with pytest.raises(TooLarge):
        count_shuffle_squares(3, 30)
    with pytest.raises(DomainError):
        count_shuffle_squares(0, 2)


def test_alpha_bound():
    a = alpha_bound(4, 2 + math.sqrt(3))
    assert a is not None and 2 / 4 <= a < 1
    assert alpha_objective(a, 4, 2 + math.sqrt(3)) < 0
    assert alpha_bound(4, 4) is None
    with pytest.raises(DomainError):
        alpha_bound(1)


def test_alpha_bound_monotone_in_growth_constant():
    prev = 0.0
    for b in np.linspace(2.2, 3.95, 15):
        a = alpha_bound(4, float(b))
        assert a is not None and a >= prev
        prev = a


@given(st.integers(2, 5), st.integers(0, 20), st.floats(0, 1))
def test_mu_samples(k, n, bias):
    s = sample_mu(k, n, bias, Rng(22))
    assert len(s) == n and all(0 <= c < k for c in s)
    assert s == sample_mu(k, n, bias, Rng(22))


def test_mu_bias_helps_the_algorithm():
    def rate(bias):
        ok = 0
        for i in range(400):
            s = sample_mu(3, 12, bias, Rng(23, i))
            ok += any(len(r) == 0 for r in kary_boosted_run(s).resolutions())
        return ok

    assert rate(0.9) > rate(0.0)
