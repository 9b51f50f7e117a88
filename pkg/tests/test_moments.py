"""Tests for moment tables, free cumulants and the tilde transform."""

from fractions import Fraction

import pytest

from qlattice.moments import (
    CumulantTable,
    MomentError,
    MomentTable,
    catalan,
    expand_tilde_word,
    haar_unitary_cumulant,
    mixed_moment,
    moment_to_cumulant,
    moments_from_backend,
    nc_partitions,
    tilde_moments,
    validate_haar_cumulants,
    word_oracle_tilde,
    x_moments,
)
from qlattice.words import Word, all_words, is_alternating


def w(text: str) -> Word:
    return Word.parse(text)


class TestPartitions:
    """Noncrossing partitions and Catalan numbers."""

    @pytest.mark.parametrize("k", range(9))
    def test_counts_are_catalan(self, k):
        partitions = list(nc_partitions(k))
        assert len(partitions) == catalan(k)
        assert len(set(partitions)) == len(partitions)
        assert all(p.is_noncrossing() for p in partitions)

    def test_catalan_values(self):
        assert [catalan(k) for k in range(7)] == [1, 1, 2, 5, 14, 42, 132]

    def test_partition_str(self):
        assert sorted(str(p) for p in nc_partitions(2)) == ["12", "1|2"]

    @pytest.mark.parametrize("k", [-1, 15])
    def test_out_of_range(self, k):
        with pytest.raises(MomentError, match="outside the supported range"):
            list(nc_partitions(k))


class TestCumulants:
    """Moment-cumulant inversion and the Haar unitary."""

    def test_constant_variable(self):
        moments = {("x",) * k: 1 for k in range(1, 6)}
        table = moment_to_cumulant(moments)
        assert table[("x",)] == 1
        assert all(table[("x",) * k] == 0 for k in range(2, 6))

    def test_semicircle(self):
        moments = {("x",) * k: (catalan(k // 2) if k % 2 == 0 else 0) for k in range(1, 9)}
        table = moment_to_cumulant(moments)
        assert table[("x", "x")] == 1
        assert all(table[("x",) * k] == 0 for k in (1, 3, 4, 5, 6, 7, 8))

    def test_missing_moment(self):
        with pytest.raises(MomentError, match="missing"):
            moment_to_cumulant({("x", "x"): 1})

    def test_mixed_cumulants_vanish(self):
        assert CumulantTable(frozenset({"x"}))[("z", "x")] == 0

    def test_unknown_pattern(self):
        with pytest.raises(MomentError, match="No cumulant"):
            CumulantTable(frozenset({"x"}))[("x",)]

    @pytest.mark.parametrize("pattern, expected", [
        (("z", "Z"), 1),
        (("Z", "z"), 1),
        (("z", "Z", "z", "Z"), -1),
        (("z", "Z") * 3, 2),
        (("z", "z"), 0),
        (("z",), 0),
    ])
    def test_haar_cumulants(self, pattern, expected):
        assert haar_unitary_cumulant(pattern) == expected

    def test_haar_check(self):
        check = validate_haar_cumulants(8)
        assert check.passed
        assert check.moment_mismatches == []

    def test_free_product_moment(self):
        # tau(z x x* z*) = tau(x x*) for z free from x
        x_table = moment_to_cumulant({("x",): 0, ("X",): 0, ("x", "X"): 3, ("X", "x"): 3})
        joint = CumulantTable(frozenset({"z", "Z"}), {}, haar_unitary_cumulant).merged(x_table)
        assert mixed_moment(("z", "x", "X", "Z"), joint) == Fraction(3)
        assert mixed_moment(("z", "x", "z", "x"), joint) == 0


class TestMomentTable:
    """Moment tables of the backends."""

    def test_s3_moments(self, s3):
        table = moments_from_backend(s3, 6)
        assert [table[w("ab" * k)] for k in range(4)] == [1, 1, 3, 11]
        assert table[w("")] == 1
        assert table.symmetry_violations() == []

    def test_hom_dim_by_reciprocity(self, z2_dual):
        table = moments_from_backend(z2_dual, 4)
        assert table.hom_dim(w("ab"), w("ab")) == table[w("baab")]

    def test_missing_word(self, z2_dual):
        table = moments_from_backend(z2_dual, 2)
        with pytest.raises(MomentError, match="outside the table"):
            table[w("abab")]

    def test_first_difference(self, z2_dual, f2_dual):
        z2 = moments_from_backend(z2_dual, 4)
        f2 = moments_from_backend(f2_dual, 4)
        assert z2.first_difference(z2) is None
        assert z2.first_difference(f2) == w("aabb")

    def test_dict_round_trip(self, z2_dual):
        table = moments_from_backend(z2_dual, 4)
        assert MomentTable.from_dict(table.to_dict()) == table

    @pytest.mark.parametrize("data", [
        {"max_len": 1, "entries": {"a": -1}},
        {"max_len": 1, "entries": {"c": 1}},
        {"entries": {}},
    ])
    def test_from_dict_rejects(self, data):
        with pytest.raises(MomentError, match="moment table|negative"):
            MomentTable.from_dict(data)

    def test_x_moments(self, z2_dual):
        table = moments_from_backend(z2_dual, 2)
        moments = x_moments(table)
        assert moments[("x", "X")] == table[w("ab")]
        assert () not in moments


class TestTilde:
    """Moments of the free product with a Haar unitary."""

    def test_expand_word(self):
        assert expand_tilde_word(w("ab")) == ("z", "x", "X", "Z")
        assert expand_tilde_word(w("")) == ()

    def test_z2_values(self, z2_dual):
        tilde = tilde_moments(moments_from_backend(z2_dual, 4))
        assert tilde[w("aa")] == 0
        assert tilde[w("ab")] == 2
        assert tilde[w("aabb")] == 4

    @pytest.mark.parametrize("name", ["z2_dual", "f2_dual"])
    def test_cumulants_match_word_oracle(self, request, name):
        backend = request.getfixturevalue(name)
        tilde = tilde_moments(moments_from_backend(backend, 6))
        oracle = word_oracle_tilde(backend, 6)
        assert tilde.first_difference(oracle) is None

    @pytest.mark.parametrize("name", ["s3", "z2_dual", "f2_dual", "span_q12"])
    def test_even_alternating_words_unchanged(self, request, name):
        source = moments_from_backend(request.getfixturevalue(name), 6)
        tilde = tilde_moments(source)
        for word in all_words(6):
            if len(word) % 2 == 0 and is_alternating(word):
                assert tilde[word] == source[word], word

    @pytest.mark.parametrize("name", ["s3", "z2_dual", "f2_dual"])
    def test_odd_words_vanish(self, request, name):
        tilde = tilde_moments(moments_from_backend(request.getfixturevalue(name), 5))
        for word in all_words(5):
            if len(word) % 2 == 1:
                assert tilde[word] == 0, word

    @pytest.mark.parametrize("name", ["s3", "z2_dual", "f2_dual"])
    def test_tilde_is_idempotent(self, request, name):
        once = tilde_moments(moments_from_backend(request.getfixturevalue(name), 6))
        assert tilde_moments(once).first_difference(once) is None

    def test_free_unitary_is_its_own_tilde(self, span_q12):
        source = moments_from_backend(span_q12, 6)
        assert tilde_moments(source).first_difference(source) is None

    def test_shorter_tilde_table(self, f2_dual):
        tilde = tilde_moments(moments_from_backend(f2_dual, 6), max_len=4)
        assert tilde.max_len == 4
        assert w("ababab") not in tilde

    def test_source_too_short(self, z2_dual):
        with pytest.raises(MomentError, match="needs source moments"):
            tilde_moments(moments_from_backend(z2_dual, 2), max_len=4)
