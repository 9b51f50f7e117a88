"""Tests for duals of discrete groups and the tilde group."""

import pytest

from qlattice.backends import (
    BackendConfigError,
    DualGroupRep,
    FreeAbelianGroup,
    FreeProduct,
    backend_from_dict,
    tilde_case,
    tilde_group,
)
from qlattice.words import EMPTY, Word, all_words, hat, is_alternating

Z2_WALKS = [1, 0, 4, 0, 36, 0, 400]
F2_WALKS = [1, 0, 4, 0, 28, 0, 232]


def brute_force_moment(backend: DualGroupRep, w: Word) -> int:
    return sum(1 for value in backend.word_values(w) if value == backend.group.identity)


class TestMoments:
    """Identity-valued multi-index counts."""

    @pytest.mark.parametrize("text,expected", [("", 1), ("a", 0), ("ab", 2), ("aa", 0), ("abab", 6), ("aabb", 6)])
    def test_z2_dual(self, z2_dual, text, expected):
        assert z2_dual.moment(Word.parse(text)) == expected

    @pytest.mark.parametrize("text,expected", [("ab", 2), ("abab", 6), ("aabb", 4), ("abba", 4)])
    def test_f2_dual(self, f2_dual, text, expected):
        assert f2_dual.moment(Word.parse(text)) == expected

    def test_pruned_count_matches_brute_force(self, z2_dual, f2_dual):
        for backend in (z2_dual, f2_dual):
            for w in all_words(6):
                assert backend.moment(w) == brute_force_moment(backend, w)

    def test_closed_walk_counts(self, z2_dual, f2_dual):
        assert z2_dual.closed_walk_counts(6) == Z2_WALKS
        assert f2_dual.closed_walk_counts(6) == F2_WALKS

    def test_relabeling_preserves_moments(self, f2_dual):
        swapped = f2_dual.relabeled([1, 0])
        for w in all_words(4):
            assert swapped.moment(w) == f2_dual.moment(w)

    def test_needs_generators(self):
        with pytest.raises(BackendConfigError, match="at least one generator"):
            DualGroupRep(FreeAbelianGroup(1), [])


class TestHoms:
    """Matrix-unit hom spaces."""

    def test_end_of_ab(self, z2_dual):
        ab = Word.parse("ab")
        assert z2_dual.hom_basis(ab, ab).dim == 6

    def test_frobenius_dimensions(self, f2_dual):
        for x in all_words(2):
            for y in all_words(2):
                assert f2_dual.hom_basis(x, y).dim == f2_dual.moment(hat(x) + y)

    def test_word_values_of_letter(self, z2_dual):
        assert z2_dual.word_values(Word.parse("a")) == z2_dual.generators
        assert z2_dual.word_values(EMPTY) == [z2_dual.group.identity]


class TestTilde:
    """The subgroup of Z * Gamma generated by z g_i."""

    def test_case_ii_for_z2(self, z2_dual):
        assert tilde_case(z2_dual).case == "ii"

    def test_case_i(self):
        group = FreeAbelianGroup(1)
        backend = DualGroupRep(group, [group.parse(1), group.parse(2)])
        assert tilde_case(backend).case == "i"

    def test_tilde_group_shape(self, z2_dual):
        tilde = tilde_group(z2_dual)
        assert isinstance(tilde.group, FreeProduct)
        assert tilde.n == 2
        assert tilde.label == "tilde(Z2-dual)"

    def test_tilde_matches_source_on_alternating_words(self, z2_dual, f2_dual):
        for backend in (z2_dual, f2_dual):
            tilde = tilde_group(backend)
            for w in all_words(4):
                if is_alternating(w):
                    assert tilde.moment(w) == backend.moment(w)

    def test_tilde_frees_commuting_generators(self, z2_dual, f2_dual):
        tilde = tilde_group(z2_dual)
        assert tilde.moment(Word.parse("aabb")) == f2_dual.moment(Word.parse("aabb")) == 4
        assert z2_dual.moment(Word.parse("aabb")) == 6


def test_describe_round_trip(f2_dual):
    copy = backend_from_dict(f2_dual.describe())
    for w in all_words(4):
        assert copy.moment(w) == f2_dual.moment(w)
