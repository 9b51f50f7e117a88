"""Tests for the free unitary (noncrossing diagram) backend."""

import numpy as np
import pytest

from qlattice.backends import SpanQRep, backend_from_dict, noncrossing_pairings
from qlattice.duality import Parity, jones_projection
from qlattice.words import EMPTY, Word, all_words, hat


class TestPairings:
    """Noncrossing alpha-beta matchings."""

    @pytest.mark.parametrize("text,count", [("", 1), ("ab", 1), ("aa", 0), ("abab", 2), ("aabb", 1), ("abba", 1), ("aba", 0)])
    def test_counts(self, text, count):
        assert len(noncrossing_pairings(Word.parse(text))) == count

    def test_catalan_on_alternating_words(self):
        assert [len(noncrossing_pairings(Word.parse("ab" * k))) for k in range(1, 6)] == [1, 2, 5, 14, 42]

    def test_pairings_join_opposite_letters(self):
        w = Word.parse("abbaab")
        for pairing in noncrossing_pairings(w):
            for left, right in pairing:
                assert w[left] is not w[right]


class TestSpanQ:
    """Hom spaces spanned by cups and caps."""

    def test_row_zero_catalan_dimensions(self, span_q1):
        assert [span_q1.cell(0, j).dim for j in range(5)] == [1, 1, 2, 5, 14]

    def test_deformed_dimensions(self, span_q12):
        assert [span_q12.cell(0, j).dim for j in range(4)] == [1, 1, 2, 5]
        assert span_q12.cell(1, 3).dim == 2

    def test_moments_count_pairings(self, span_q1, span_q12):
        for backend in (span_q1, span_q12):
            for w in all_words(6):
                assert backend.moment(w) == backend.pairing_count(w)

    def test_frobenius_dimensions(self, span_q12):
        for x in all_words(2):
            for y in all_words(2):
                assert span_q12.hom_basis(x, y).dim == span_q12.moment(hat(x) + y)

    def test_jones_projections_are_cell_elements(self, span_q12):
        dm = span_q12.duality
        assert span_q12.cell(0, 2).contains(jones_projection(dm, Parity.EVEN))
        assert span_q12.cell(1, 3).contains(jones_projection(dm, Parity.ODD))

    def test_pairing_vector_of_ab_is_xi_q(self, span_q12):
        vectors = span_q12.pairing_vectors(Word.parse("ab"))
        assert np.allclose(vectors[0], span_q12.duality.q.reshape(-1))

    def test_empty_word(self, span_q1):
        assert span_q1.moment(EMPTY) == 1
        assert span_q1.hom_basis(EMPTY, EMPTY).dim == 1

    def test_dimension(self, span_q12):
        assert span_q12.duality.d == pytest.approx(1.44 + 1 / 1.44)
        assert not span_q12.qdata.is_identity()


def test_describe_round_trip(span_q12):
    copy = backend_from_dict(span_q12.describe())
    assert isinstance(copy, SpanQRep)
    assert np.allclose(copy.qdata.q, span_q12.qdata.q)
