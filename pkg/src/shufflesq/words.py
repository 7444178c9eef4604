"""Words, two-run buffers, quasi-buffers, partitions and seeded randomness.

Binary words are packed into Python ints with a sentinel bit: a word
``w = w(1) w(2) ... w(L)`` is stored as ``(1 << L) | sum(w(i) << (i - 1))``, so
the first letter sits in the least significant bit and the empty word is ``1``.
With this layout ``tail`` is a right shift and appending letter ``c`` is
``key + ((1 + c) << L)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import EmptyWord, InvalidSymbol, NotSigma2

EMPTY_KEY = 1

# buffer-thread moves: the letter joins A1 (append) or A2 (match the head)
APPEND = 0
MATCH = 1


@dataclass(frozen=True)
class Word:
    """A finite word over the alphabet ``{0, ..., k-1}``."""

    letters: tuple = ()
    k: int = 2

    def __post_init__(self):
        letters = tuple(int(c) for c in self.letters)
        object.__setattr__(self, "letters", letters)
        for i, c in enumerate(letters):
            if not 0 <= c < self.k:
                raise InvalidSymbol(i, c)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item], self.k)
        return self.letters[item]

    def __add__(self, other):
        other = as_word(other, self.k)
        return Word(self.letters + other.letters, max(self.k, other.k))

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Word({render(self)!r})" if self.k == 2 else f"Word({render(self)!r}, k={self.k})"

    def reverse(self) -> Word:
        return Word(self.letters[::-1], self.k)

    def tail(self) -> Word:
        if not self.letters:
            raise EmptyWord("tail of the empty word")
        return Word(self.letters[1:], self.k)

    def complement(self) -> Word:
        if self.k != 2:
            raise ValueError("complement is defined for binary words only")
        return Word(tuple(1 - c for c in self.letters), 2)

    def count(self, letter: int) -> int:
        return self.letters.count(letter)

    def pack(self) -> int:
        if self.k != 2:
            raise ValueError("only binary words are bit-packed")
        return pack(self.letters)


WordLike = Union[Word, str, Sequence[int]]


def parse_word(text: str, k: int = 2) -> Word:
    """Parse ``'0'``/``'1'`` strings (digit strings for ``k <= 10``, comma
    separated integers otherwise)."""
    if k > 10 or "," in text:
        parts = [p.strip() for p in text.split(",")] if text.strip() else []
        letters = []
        for i, p in enumerate(parts):
            if not p.isdigit() or int(p) >= k:
                raise InvalidSymbol(i, p)
            letters.append(int(p))
        return Word(tuple(letters), k)
    letters = []
    for i, ch in enumerate(text):
        if not ch.isdigit() or int(ch) >= k:
            raise InvalidSymbol(i, ch)
        letters.append(int(ch))
    return Word(tuple(letters), k)


def render(w: WordLike) -> str:
    w = as_word(w)
    if w.k > 10:
        return ",".join(str(c) for c in w.letters)
    return "".join(str(c) for c in w.letters)


def as_word(w: WordLike, k: int = 2) -> Word:
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return parse_word(w, k)
    letters = tuple(int(c) for c in w)
    return Word(letters, max(k, max(letters, default=0) + 1))


def reverse(w: WordLike) -> Word:
    return as_word(w).reverse()


def tail(w: WordLike) -> Word:
    return as_word(w).tail()


def complement(w: WordLike) -> Word:
    return as_word(w).complement()


# -- bit-packed binary words -------------------------------------------------

def pack(letters: Iterable[int]) -> int:
    key = 0
    n = 0
    for c in letters:
        key |= c << n
        n += 1
    return key | (1 << n)


def unpack(key: int) -> tuple:
    n = key.bit_length() - 1
    return tuple((key >> i) & 1 for i in range(n))


def key_len(key: int) -> int:
    return key.bit_length() - 1


def key_str(key: int) -> str:
    return "".join("1" if (key >> i) & 1 else "0" for i in range(key.bit_length() - 1))


def key_of(w: WordLike) -> int:
    if isinstance(w, int):
        return w
    return pack(as_word(w).letters)


def key_reverse(key: int) -> int:
    n = key.bit_length() - 1
    bits = key ^ (1 << n)
    rev = int(format(bits, f"0{n}b")[::-1], 2) if n else 0
    return rev | (1 << n)


def key_complement(key: int) -> int:
    n = key.bit_length() - 1
    return key ^ ((1 << n) - 1)


def key_is_sigma2(key: int) -> bool:
    n = key.bit_length() - 1
    if n <= 2:
        return True
    bits = key ^ (1 << n)
    changes = (bits ^ (bits >> 1)) & ((1 << (n - 1)) - 1)
    return changes & (changes - 1) == 0


# -- two-run buffers -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class Sigma2Buffer:
    """Canonical word ``lead^a (1-lead)^b``; the empty word is ``(0, 0, 0)``.

    A pure run is always stored with ``b = 0``.
    """

    lead: int = 0
    a: int = 0
    b: int = 0

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.lead not in (0, 1):
            raise ValueError(f"bad two-run buffer {self!r}")
        if self.a == 0 and (self.b or self.lead):
            raise ValueError("non-canonical two-run buffer; use sigma2_encode")

    def __len__(self):
        return self.a + self.b

    def __str__(self):
        return str(self.lead) * self.a + str(1 - self.lead) * self.b

    @property
    def word(self) -> Word:
        return sigma2_decode(self)

    @property
    def head(self):
        return self.lead if self.a else None

    def mirror(self) -> Sigma2Buffer:
        return Sigma2Buffer(1 - self.lead, self.a, self.b) if self.a else self


EMPTY = Sigma2Buffer()


def sigma2_encode(w: WordLike) -> Sigma2Buffer:
    letters = as_word(w).letters
    if not letters:
        return EMPTY
    lead = letters[0]
    a = 1
    while a < len(letters) and letters[a] == lead:
        a += 1
    rest = letters[a:]
    if any(c == lead for c in rest):
        raise NotSigma2(f"{render(Word(letters))} has more than two runs")
    return Sigma2Buffer(lead, a, len(rest))


def sigma2_decode(b: Sigma2Buffer) -> Word:
    return Word((b.lead,) * b.a + (1 - b.lead,) * b.b)


def is_sigma2(w: WordLike) -> bool:
    try:
        sigma2_encode(w)
    except NotSigma2:
        return False
    return True


def sigma2_words(length: int) -> list:
    """All words of ``Sigma_2`` with the given length, as canonical buffers."""
    if length == 0:
        return [EMPTY]
    return [Sigma2Buffer(lead, a, length - a) for lead in (0, 1) for a in range(1, length + 1)]


# -- quasi-buffers ---------------------------------------------------------------

I = "i"


class Indicator(NamedTuple):
    """k-ary indicator ``(letter, tau)``; always appears twice in a quasi-buffer."""

    letter: int
    tau: int

    def __str__(self):
        return f"({self.letter}@{self.tau})"


@dataclass(frozen=True)
class QuasiBuffer:
    """Word over letters plus indicator symbols.

    Binary mode uses the single symbol ``I``; k-ary mode uses
    :class:`Indicator` pairs.
    """

    symbols: tuple = ()

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "".join(str(s) for s in self.symbols)

    @property
    def bar(self) -> tuple:
        """Letters left after deleting every indicator."""
        return tuple(s for s in self.symbols if isinstance(s, int))

    @property
    def n_indicators(self) -> int:
        return sum(1 for s in self.symbols if not isinstance(s, int))


def parse_quasi(text: str) -> QuasiBuffer:
    out = []
    for pos, ch in enumerate(text):
        if ch == I:
            out.append(I)
        elif ch in "01":
            out.append(int(ch))
        else:
            raise InvalidSymbol(pos, ch)
    return QuasiBuffer(tuple(out))


def as_quasi(q) -> QuasiBuffer:
    if isinstance(q, QuasiBuffer):
        return q
    if isinstance(q, str):
        return parse_quasi(q)
    return QuasiBuffer(tuple(q))


def i_partitions(q) -> Iterator[tuple]:
    """Yield every i-partition as ``(r, (u_0-bar, ..., u_r-bar))``.

    One partition per subset of indicator positions used as separators, so
    exactly ``2 ** n_indicators`` items are produced.
    """
    sym = as_quasi(q).symbols
    where = [j for j, s in enumerate(sym) if s == I]
    for r in range(len(where) + 1):
        for seps in itertools.combinations(where, r):
            pieces = []
            start = 0
            for j in seps:
                pieces.append(tuple(s for s in sym[start:j] if s != I))
                start = j + 1
            pieces.append(tuple(s for s in sym[start:] if s != I))
            yield r, tuple(pieces)


def _join_with_ones(pieces) -> tuple:
    out = list(pieces[0])
    for p in pieces[1:]:
        out.append(1)
        out.extend(p)
    return tuple(out)


def i_expansions(q) -> Iterator[tuple]:
    """``(r, 1^r u_0 1 u_1 ... 1 u_r)`` for every i-partition, duplicates kept."""
    for r, pieces in i_partitions(q):
        yield r, (1,) * r + _join_with_ones(pieces)


def j_expansions(q, z: int) -> Iterator[tuple]:
    """``(r, u_0 1 u_1 ... 1 u_r 1^(z-r))`` for every i-partition with ``r <= z``."""
    for r, pieces in i_partitions(q):
        if r <= z:
            yield r, _join_with_ones(pieces) + (1,) * (z - r)


def expand_I(q) -> set:
    """Words an indicator-buffer stands for (deduplicated)."""
    return {Word(w) for _, w in i_expansions(q)}


def expand_J(q, z: int) -> set:
    """Words an activation-buffer with ``z`` cached ones stands for."""
    return {Word(w) for _, w in j_expansions(q, z)}


def kary_resolutions(symbols: Sequence) -> Iterator[tuple]:
    """All letter words obtained by resolving each indicator pair.

    For a pair ``(a, tau)`` exactly one of the two occurrences becomes ``a``
    and the other is deleted.
    """
    pairs = {}
    for j, s in enumerate(symbols):
        if isinstance(s, Indicator):
            pairs.setdefault(s, []).append(j)
    keys = list(pairs)
    for choice in itertools.product((0, 1), repeat=len(keys)):
        keep = {pairs[key][c] for key, c in zip(keys, choice)}
        yield tuple(s.letter if isinstance(s, Indicator) else s
                    for j, s in enumerate(symbols)
                    if not isinstance(s, Indicator) or j in keep)


# -- partitions -----------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """Index sets (1-based) with ``s(A1) = s(A2) + residual``."""

    A1: tuple
    A2: tuple
    residual: Word = field(default_factory=Word)

    def check(self, s: WordLike) -> bool:
        s = as_word(s)
        n = len(s)
        a1, a2 = set(self.A1), set(self.A2)
        if a1 & a2 or a1 | a2 != set(range(1, n + 1)):
            return False
        if list(self.A1) != sorted(a1) or list(self.A2) != sorted(a2):
            return False
        if len(self.A1) - len(self.A2) != len(self.residual):
            return False
        left = [s[i - 1] for i in self.A1]
        right = [s[i - 1] for i in self.A2] + list(self.residual.letters)
        return left == right

    def to_dict(self):
        return {"A1": list(self.A1), "A2": list(self.A2), "residual": render(self.residual)}


def partition_from_moves(moves: Sequence[int], residual=()) -> Partition:
    """Appends go to ``A1``, matches to ``A2``."""
    a1 = tuple(t + 1 for t, m in enumerate(moves) if m == APPEND)
    a2 = tuple(t + 1 for t, m in enumerate(moves) if m != APPEND)
    return Partition(a1, a2, as_word(residual))


# -- randomness ---------------------------------------------------------------

@dataclass(frozen=True)
class Rng:
    """Counter-based splittable generator keyed by ``(seed, stream_index)``."""

    seed: int = 0
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, index: int) -> Rng:
        return Rng(self.seed, index)

    def bits(self, n: int) -> np.ndarray:
        return self.generator().integers(0, 2, size=n, dtype=np.uint8)


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, Rng):
        return rng.generator()
    return Rng(int(rng or 0)).generator()


def random_word(n: int, k: int = 2, rng=None) -> Word:
    g = _gen(rng)
    return Word(tuple(g.integers(0, k, size=n).tolist()), k)


def random_even_parity_word(n: int, rng=None) -> Word:
    """Uniform over binary words of length ``n`` with an even number of each letter."""
    if n % 2:
        raise ValueError("even-parity words need even length")
    g = _gen(rng)
    while True:
        letters = g.integers(0, 2, size=n)
        if int(letters.sum()) % 2 == 0:
            return Word(tuple(letters.tolist()), 2)
