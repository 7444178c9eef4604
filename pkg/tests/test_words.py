import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shufflesq.errors import InvalidSymbol, NotSigma2
from shufflesq.words import (EMPTY, EMPTY_KEY, Indicator, Partition, Rng, Sigma2Buffer, Word,
                             as_word, expand_I, expand_J, i_expansions, j_expansions,
                             kary_resolutions, key_complement, key_is_sigma2, key_of, key_reverse,
                             pack, parse_quasi, parse_word, partition_from_moves,
                             random_even_parity_word, random_word, render, sigma2_decode,
                             sigma2_encode, sigma2_words, unpack)

bits = st.lists(st.integers(0, 1), max_size=40).map(tuple)


def test_parse_binary_and_ternary():
    assert len(parse_word("100011100")) == 9
    assert parse_word("") == Word()
    w = parse_word("20121", 3)
    assert w.letters == (2, 0, 1, 2, 1) and w.k == 3


def test_parse_rejects_bad_symbols():
    with pytest.raises(InvalidSymbol) as e:
        parse_word("0120")
    assert e.value.position == 2
    with pytest.raises(InvalidSymbol):
        parse_word("01a")


def test_comma_separated_large_alphabet():
    w = parse_word("11,0,3", 12)
    assert w.letters == (11, 0, 3)
    assert render(w) == "11,0,3"


def test_word_operations():
    assert render(as_word("100").reverse()) == "001"
    assert render(as_word("1000").tail()) == "000"
    assert render(as_word("0011").complement()) == "1100"
    assert as_word("0110").count(1) == 2


@given(bits)
def test_text_round_trip(letters):
    w = Word(letters)
    assert parse_word(render(w)) == w


@given(bits)
def test_packing_round_trip(letters):
    key = pack(letters)
    assert unpack(key) == letters
    assert key_of(Word(letters)) == key
    assert key_reverse(key) == pack(letters[::-1])
    assert key_complement(key) == pack(tuple(1 - c for c in letters))


def test_packed_tail_and_append():
    key = key_of("0110")
    assert unpack(key >> 1) == (1, 1, 0)
    assert key & 1 == 0
    assert unpack(key + (2 << 4)) == (0, 1, 1, 0, 1)
    assert EMPTY_KEY == pack(())


def test_sigma2_examples():
    assert sigma2_encode("00011") == Sigma2Buffer(0, 3, 2)
    assert sigma2_encode("") == EMPTY and len(EMPTY) == 0
    assert sigma2_encode("111") == Sigma2Buffer(1, 3, 0)
    with pytest.raises(NotSigma2):
        sigma2_encode("010")


def test_sigma2_canonical_exhaustive():
    for n in range(13):
        seen = set()
        for letters in itertools.product((0, 1), repeat=n):
            try:
                b = sigma2_encode(letters)
            except NotSigma2:
                assert not key_is_sigma2(pack(letters))
                continue
            assert key_is_sigma2(pack(letters))
            assert sigma2_decode(b).letters == letters
            assert b not in seen
            seen.add(b)
        assert len(seen) == (2 * n if n else 1)
        assert set(sigma2_words(n)) == seen


def test_quasi_expansions_from_worked_example():
    assert {render(w) for w in expand_I("0i0")} == {"00", "1010"}
    assert {render(w) for w in expand_I("01")} == {"01"}
    assert {render(w) for w in expand_J("i0", 1)} == {"01", "10"}
    assert {render(w) for w in expand_J("i", 0)} == {""}
    assert {render(w) for w in expand_J("010", 3)} == {"010111"}


def test_expand_ii_brute_force():
    # separators: none -> "", either one -> 1 + 1, both -> 11 + 1 + 1
    assert {render(w) for w in expand_I("ii")} == {"", "11", "1111"}
    assert len(list(i_expansions("ii"))) == 4


@given(st.lists(st.sampled_from("01i"), max_size=9).map("".join), st.integers(0, 4))
def test_expansion_counts_and_lengths(text, z):
    q = parse_quasi(text)
    m = q.n_indicators
    exp = list(i_expansions(q))
    assert len(exp) == 2 ** m
    for r, w in exp:
        assert len(w) == len(q.bar) + 2 * r
    jexp = list(j_expansions(q, z))
    assert len(jexp) == sum(__import__("math").comb(m, r) for r in range(min(m, z) + 1))
    for r, w in jexp:
        assert len(w) == len(q.bar) + z


def test_kary_resolutions():
    a = Indicator(0, 3)
    res = set(kary_resolutions((a, 1, 2, a, 2)))
    assert res == {(0, 1, 2, 2), (1, 2, 0, 2)}


def test_partition_check():
    p = Partition((1, 3), (2, 4))
    assert p.check("0011")
    assert not p.check("0110")
    assert not Partition((1, 2), (2, 4)).check("0011")
    # buffer thread 0, 01, 1 leaves the residual 1
    q = partition_from_moves([0, 0, 1], residual=(1,))
    assert q.A1 == (1, 2) and q.A2 == (3,)
    assert q.check("010")
    assert not partition_from_moves([0, 0, 1], residual=(0,)).check("010")


def test_random_words_are_deterministic():
    assert random_word(0, rng=Rng(42)) == Word()
    a = random_word(16, rng=Rng(42))
    b = random_word(16, rng=Rng(42))
    assert a == b and len(a) == 16
    assert random_word(16, rng=Rng(42, 1)) != a or random_word(16, rng=Rng(42, 2)) != a


def test_even_parity_words_uniform():
    g = Rng(7).generator()
    counts = {}
    n = 100_000
    for _ in range(n):
        w = render(random_even_parity_word(4, g))
        counts[w] = counts.get(w, 0) + 1
    assert len(counts) == 8
    for w, c in counts.items():
        assert w.count("0") % 2 == 0
        p = 1 / 8
        assert abs(c / n - p) <= 4 * np.sqrt(p * (1 - p) / n)
