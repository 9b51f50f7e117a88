"""Words in the free monoid on {alpha, beta} with the hat involution."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import QLatticeError


class WordError(QLatticeError):
    """Raised for malformed words or invalid intervals."""
    pass


class Letter(str, Enum):
    """The two generators; alpha types H-legs, beta types conjugate legs."""
    ALPHA = "a"
    BETA = "b"

    def hat(self) -> "Letter":
        return Letter.BETA if self is Letter.ALPHA else Letter.ALPHA


@dataclass(frozen=True, order=True)
class Word:
    """A finite word; the empty word is the unit e."""
    letters: tuple[Letter, ...] = ()

    @staticmethod
    def parse(text: str) -> "Word":
        """Parse the text encoding ("abab", "" for e)."""
        try:
            return Word(tuple(Letter(ch) for ch in text))
        except ValueError as e:
            raise WordError(f"Invalid word text {text!r}: {e}") from e

    @staticmethod
    def of(letters: Iterable[Letter]) -> "Word":
        return Word(tuple(letters))

    def __str__(self) -> str:
        return "".join(letter.value for letter in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self) or 'e'!r})"

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return Word(self.letters[key])
        return self.letters[key]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def hat(self) -> "Word":
        return hat(self)

    @property
    def is_empty(self) -> bool:
        return not self.letters


EMPTY = Word()
ALPHA = Word((Letter.ALPHA,))
BETA = Word((Letter.BETA,))


def letter_at(k: int) -> Letter:
    """Letter occupying global position k of the infinite word alpha beta alpha ..."""
    return Letter.ALPHA if k % 2 == 0 else Letter.BETA


def interval(i: int, j: int) -> Word:
    """Return the alternating word [i, j] of length j - i.

    Raises:
        WordError: If i > j or either index is negative.
    """
    if i < 0 or j < 0:
        raise WordError(f"Interval indices must be nonnegative, got [{i},{j}]")
    if i > j:
        raise WordError(f"Interval [{i},{j}] has i > j")
    return Word(tuple(letter_at(k) for k in range(i, j)))


def hat(w: Word) -> Word:
    """Reverse the word and flip every letter."""
    return Word(tuple(letter.hat() for letter in reversed(w.letters)))


def is_alternating(w: Word) -> bool:
    """True iff w has no factor alpha alpha or beta beta."""
    return all(a is not b for a, b in zip(w.letters, w.letters[1:]))


def interval_of(w: Word) -> tuple[int, int]:
    """Smallest (i, j) with interval(i, j) == w, for alternating w."""
    if not is_alternating(w):
        raise WordError(f"{w!r} is not alternating")
    if w.is_empty:
        return 0, 0
    start = 0 if w.letters[0] is Letter.ALPHA else 1
    return start, start + len(w)


def words_of_length(k: int) -> Iterator[Word]:
    """All 2**k words of length k in lexicographic order (a < b)."""
    for letters in itertools.product((Letter.ALPHA, Letter.BETA), repeat=k):
        yield Word(letters)


def all_words(max_len: int) -> Iterator[Word]:
    """All words of length at most max_len, shortest first."""
    for k in range(max_len + 1):
        yield from words_of_length(k)


def alternating_words(max_len: int) -> Iterator[Word]:
    """The alternating words of length at most max_len (e, a, b, ab, ba, ...)."""
    yield EMPTY
    for k in range(1, max_len + 1):
        yield interval(0, k)
        yield interval(1, k + 1)
