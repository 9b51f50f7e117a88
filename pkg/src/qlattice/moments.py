"""Exact character moment tables, noncrossing partitions and free cumulants.

The tilde transform evaluates moments of z.x, with z a Haar unitary free
from the character x, by summing over noncrossing partitions whose blocks
stay inside one alphabet. Mixed cumulants vanish, so only single-alphabet
blocks contribute.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterator, Mapping, Optional, Union

from .backends import Backend, DualGroupRep, tilde_group
from .errors import QLatticeError
from .words import EMPTY, Letter, Word, all_words, hat

logger = logging.getLogger(__name__)

MAX_PARTITION_SIZE = 14
HAAR_CHECK_LENGTH = 8

Z, Z_STAR, X, X_STAR = "z", "Z", "x", "X"
Z_ALPHABET = frozenset({Z, Z_STAR})
X_ALPHABET = frozenset({X, X_STAR})

Pattern = tuple[str, ...]
Number = Union[int, Fraction]


class MomentError(QLatticeError):
    """Raised when a moment or cumulant cannot be computed exactly."""
    pass


@dataclass
class MomentTable:
    """w -> dim Hom(1, v^(w)) for every word of length at most max_len."""
    entries: dict[Word, int]
    max_len: int

    def __getitem__(self, w: Word) -> int:
        try:
            return self.entries[w]
        except KeyError as e:
            raise MomentError(f"Moment of {w!r} is outside the table (max_len={self.max_len})") from e

    def __contains__(self, w: Word) -> bool:
        return w in self.entries

    def hom_dim(self, x: Word, y: Word) -> int:
        """dim Hom(v^(x), v^(y)) by Frobenius reciprocity."""
        return self[hat(x) + y]

    def symmetry_violations(self) -> list[Word]:
        """Words whose entry differs from the entry of their hat."""
        return sorted(
            w for w, value in self.entries.items()
            if hat(w) in self.entries and self.entries[hat(w)] != value
        )

    def restricted(self, predicate: Callable[[Word], bool]) -> "MomentTable":
        return MomentTable({w: v for w, v in self.entries.items() if predicate(w)}, self.max_len)

    def first_difference(self, other: "MomentTable") -> Optional[Word]:
        """Shortest (then lexicographically first) word where both tables are defined and differ."""
        common = sorted(set(self.entries) & set(other.entries), key=lambda w: (len(w), w))
        for w in common:
            if self.entries[w] != other.entries[w]:
                return w
        return None

    def to_dict(self) -> dict[str, Any]:
        ordered = sorted(self.entries.items(), key=lambda item: (len(item[0]), item[0]))
        return {"max_len": self.max_len, "entries": {str(w): int(v) for w, v in ordered}}

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "MomentTable":
        """
        Raises:
            MomentError: On missing fields, malformed words or negative entries.
        """
        try:
            entries = {Word.parse(text): int(value) for text, value in data["entries"].items()}
            max_len = int(data["max_len"])
        except (KeyError, TypeError, ValueError, QLatticeError) as e:
            raise MomentError(f"Invalid moment table: {e}") from e
        if any(v < 0 for v in entries.values()):
            raise MomentError("Moment table has negative entries")
        return MomentTable(entries, max_len)


def moments_from_backend(backend: Backend, max_len: int, threads: int = 1) -> MomentTable:
    """Tabulate backend.moment over all words of length at most max_len."""
    words = list(all_words(max_len))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        values = list(pool.map(backend.moment, words))
    table = MomentTable(dict(zip(words, values)), max_len)
    violations = table.symmetry_violations()
    if violations:
        logger.warning(f"{backend.label}: moment table not hat-symmetric at {violations[:5]}")
    logger.info(f"Moments of {backend.label} to length {max_len}: {len(words)} words")
    return table


@dataclass(frozen=True)
class NCPartition:
    """A noncrossing partition of {0, ..., k-1}; blocks sorted, each block increasing."""
    blocks: tuple[tuple[int, ...], ...]
    size: int = field(default=0)

    def __post_init__(self):
        if not self.size:
            object.__setattr__(self, "size", sum(len(b) for b in self.blocks))

    def is_noncrossing(self) -> bool:
        label = {}
        for index, block in enumerate(self.blocks):
            for point in block:
                label[point] = index
        for a, b, c, d in itertools.combinations(range(self.size), 4):
            if label[a] == label[c] and label[b] == label[d] and label[a] != label[b]:
                return False
        return True

    def __str__(self) -> str:
        return "|".join("".join(str(p + 1) for p in block) for block in self.blocks) or "()"


def _noncrossing(points: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for size in range(len(rest) + 1):
        for chosen in itertools.combinations(range(len(rest)), size):
            edges = (-1,) + chosen + (len(rest),)
            gaps = [rest[a + 1:b] for a, b in zip(edges, edges[1:])]
            block = (first,) + tuple(rest[c] for c in chosen)
            for parts in itertools.product(*(list(_noncrossing(g)) for g in gaps)):
                yield [block] + [b for part in parts for b in part]


def nc_partitions(k: int) -> Iterator[NCPartition]:
    """
    Enumerate NC(k); there are Catalan(k) of them.

    Raises:
        MomentError: If k is negative or exceeds MAX_PARTITION_SIZE.
    """
    if k < 0 or k > MAX_PARTITION_SIZE:
        raise MomentError(f"NC({k}) is outside the supported range 0..{MAX_PARTITION_SIZE}")
    for blocks in _noncrossing(tuple(range(k))):
        yield NCPartition(tuple(sorted(blocks)), k)


def _first_blocks(length: int, allowed: Callable[[int], bool]) -> Iterator[tuple[tuple[int, ...], list[range]]]:
    """Blocks containing position 0 with their gaps, for a word of the given length."""
    candidates = [p for p in range(1, length) if allowed(p)]
    for size in range(len(candidates) + 1):
        for chosen in itertools.combinations(candidates, size):
            block = (0,) + chosen
            edges = block + (length,)
            gaps = [range(a + 1, b) for a, b in zip(edges, edges[1:]) if b > a + 1]
            yield block, gaps


def _alphabet(letter: str) -> frozenset:
    return Z_ALPHABET if letter in Z_ALPHABET else X_ALPHABET


def is_mixed(pattern: Pattern) -> bool:
    return len({_alphabet(letter) for letter in pattern}) > 1


@dataclass
class CumulantTable:
    """Free cumulants of single-alphabet patterns over ``letters``; mixed patterns are zero."""
    letters: frozenset
    values: dict[Pattern, Fraction] = field(default_factory=dict)
    source: Optional[Callable[[Pattern], Fraction]] = field(default=None, repr=False)

    def covers(self, pattern: Pattern) -> bool:
        return set(pattern) <= self.letters

    def __getitem__(self, pattern: Pattern) -> Fraction:
        if is_mixed(pattern):
            return Fraction(0)
        if pattern in self.values:
            return self.values[pattern]
        if self.source is not None and self.covers(pattern):
            return self.values.setdefault(pattern, self.source(pattern))
        raise MomentError(f"No cumulant for pattern {''.join(pattern)!r}")

    def merged(self, other: "CumulantTable") -> "CumulantTable":
        """Joint table of two free families with disjoint letters."""
        tables = (self, other)

        def source(pattern: Pattern) -> Fraction:
            for table in tables:
                if table.covers(pattern):
                    return table[pattern]
            raise MomentError(f"No cumulant for pattern {''.join(pattern)!r}")

        return CumulantTable(self.letters | other.letters, {}, source)


def moment_to_cumulant(moments: Mapping[Pattern, Number], max_len: Optional[int] = None) -> CumulantTable:
    """
    Invert the moment-cumulant relation over noncrossing partitions.

    Uses m(w) = sum over blocks V containing the first letter of
    k(w|V) * prod m(gap) and solves for k(w) recursively.

    Args:
        moments: Moments of single-alphabet patterns; every subpattern that
            the recursion reaches must be present.
        max_len: Longest pattern to invert; defaults to every key given.

    Raises:
        MomentError: If a required moment is missing.
    """
    def moment(pattern: Pattern) -> Fraction:
        if not pattern:
            return Fraction(1)
        try:
            return Fraction(moments[pattern])
        except KeyError as e:
            raise MomentError(f"Required source moment {''.join(pattern)!r} is missing") from e

    @lru_cache(maxsize=None)
    def cumulant(pattern: Pattern) -> Fraction:
        value = moment(pattern)
        for block, gaps in _first_blocks(len(pattern), lambda p: True):
            if len(block) == len(pattern):
                continue
            term = cumulant(tuple(pattern[p] for p in block))
            for gap in gaps:
                term *= moment(tuple(pattern[p] for p in gap))
            value -= term
        return value

    keys = [p for p in moments if p and (max_len is None or len(p) <= max_len)]
    letters = frozenset(letter for p in moments for letter in p)
    return CumulantTable(letters, {p: cumulant(p) for p in keys}, cumulant)


def catalan(k: int) -> int:
    value = 1
    for i in range(k):
        value = value * 2 * (2 * i + 1) // (i + 2)
    return value


def haar_unitary_cumulant(pattern: Pattern) -> Fraction:
    """Free cumulant of a Haar unitary: (-1)^(m-1) Catalan(m-1) on alternating patterns of length 2m."""
    if not pattern or len(pattern) % 2 or not set(pattern) <= Z_ALPHABET:
        return Fraction(0)
    if any(a == b for a, b in zip(pattern, pattern[1:])):
        return Fraction(0)
    m = len(pattern) // 2
    return Fraction((-1) ** (m - 1) * catalan(m - 1))


def haar_unitary_moment(pattern: Pattern) -> Fraction:
    """tau of a word in z and z*: 1 iff the exponents cancel."""
    return Fraction(int(pattern.count(Z) == pattern.count(Z_STAR)))


def z_patterns(max_len: int) -> Iterator[Pattern]:
    for k in range(1, max_len + 1):
        yield from itertools.product((Z, Z_STAR), repeat=k)


def mixed_moment(pattern: Pattern, cumulants: CumulantTable, memo: Optional[dict] = None) -> Fraction:
    """tau of a word in free alphabets, summed over noncrossing single-alphabet partitions."""
    memo = {} if memo is None else memo

    def evaluate(word: Pattern) -> Fraction:
        if not word:
            return Fraction(1)
        cached = memo.get(word)
        if cached is not None:
            return cached
        alphabet = _alphabet(word[0])
        total = Fraction(0)
        for block, gaps in _first_blocks(len(word), lambda p: word[p] in alphabet):
            term = cumulants[tuple(word[p] for p in block)]
            if not term:
                continue
            for gap in gaps:
                term *= evaluate(word[gap.start:gap.stop])
                if not term:
                    break
            total += term
        memo[word] = total
        return total

    return evaluate(tuple(pattern))


@dataclass
class HaarCheck:
    """Mismatch counts of the closed-form Haar cumulants against the moment oracle."""
    max_len: int
    moment_mismatches: list[str]
    cumulant_mismatches: list[str]

    @property
    def passed(self) -> bool:
        return not self.moment_mismatches and not self.cumulant_mismatches


def validate_haar_cumulants(max_len: int = HAAR_CHECK_LENGTH) -> HaarCheck:
    """Rebuild tau on every z-word from the closed-form cumulants and invert the oracle moments."""
    closed_form = CumulantTable(Z_ALPHABET, {}, haar_unitary_cumulant)
    oracle = {p: haar_unitary_moment(p) for p in z_patterns(max_len)}
    inverted = moment_to_cumulant(oracle)
    memo: dict = {}
    moment_mismatches, cumulant_mismatches = [], []
    for pattern in z_patterns(max_len):
        if mixed_moment(pattern, closed_form, memo) != oracle[pattern]:
            moment_mismatches.append("".join(pattern))
        if inverted[pattern] != haar_unitary_cumulant(pattern):
            cumulant_mismatches.append("".join(pattern))
    check = HaarCheck(max_len, moment_mismatches, cumulant_mismatches)
    if not check.passed:
        logger.error(f"Haar cumulant check failed: {moment_mismatches[:3]} {cumulant_mismatches[:3]}")
    return check


@lru_cache(maxsize=None)
def _checked_haar(max_len: int) -> CumulantTable:
    check = validate_haar_cumulants(max_len)
    if not check.passed:
        raise MomentError(f"Haar unitary cumulants disagree with the moment oracle up to length {max_len}")
    return CumulantTable(Z_ALPHABET, {}, haar_unitary_cumulant)


def x_moments(table: MomentTable) -> dict[Pattern, int]:
    """The table as moments of the character x (alpha -> x, beta -> x*)."""
    return {
        tuple(X if letter is Letter.ALPHA else X_STAR for letter in w): value
        for w, value in table.entries.items()
        if not w.is_empty
    }


def expand_tilde_word(w: Word) -> Pattern:
    """alpha -> z x and beta -> x* z*."""
    pattern: list[str] = []
    for letter in w:
        pattern.extend((Z, X) if letter is Letter.ALPHA else (X_STAR, Z_STAR))
    return tuple(pattern)


def _as_integer(value: Fraction, w: Word) -> int:
    if value.denominator != 1 or value < 0:
        raise MomentError(f"Tilde moment of {w!r} is {value}, not a nonnegative integer")
    return int(value)


def tilde_moments(table: MomentTable, max_len: Optional[int] = None) -> MomentTable:
    """
    Moments of z.chi(v) for a Haar unitary z free from chi(v).

    Raises:
        MomentError: If the source table is too short or a result is not
            a nonnegative integer.
    """
    max_len = table.max_len if max_len is None else max_len
    if max_len > table.max_len:
        raise MomentError(f"Tilde table to length {max_len} needs source moments to that length")
    cumulants = _checked_haar(HAAR_CHECK_LENGTH).merged(moment_to_cumulant(x_moments(table)))
    memo: dict = {}
    entries = {EMPTY: 1}
    for w in all_words(max_len):
        if w.is_empty:
            continue
        entries[w] = _as_integer(mixed_moment(expand_tilde_word(w), cumulants, memo), w)
    logger.info(f"Tilde moments to length {max_len}: {sum(1 for v in entries.values() if v)} nonzero")
    return MomentTable(entries, max_len)


def word_oracle_tilde(backend: DualGroupRep, max_len: int, threads: int = 1) -> MomentTable:
    """Count identity-valued multi-indices in the tilde group by free-product normal forms.

    Raises:
        UnsupportedGroupError: If the tilde group of the backend's group cannot be formed.
    """
    return moments_from_backend(tilde_group(backend), max_len, threads)
