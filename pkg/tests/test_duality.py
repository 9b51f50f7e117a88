"""Tests for Q-operator duality data."""

import numpy as np
import pytest

from qlattice.duality import (
    DualityError,
    Parity,
    QData,
    canonical_trace,
    cap,
    conditional_expectation,
    cup,
    direct_sum_qdata,
    dual_qdata,
    jones_projection,
    make_duality,
    make_qdata,
    q_from_F,
    tensor_qdata,
    verify_duality,
)
from qlattice.tensorops import from_matrix, identity
from qlattice.words import EMPTY, Word


def random_positive(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m @ m.conj().T + n * np.eye(n)


Q_CASES = [
    np.eye(2),
    np.diag([1.0, 1.0]),
    np.diag([1.2, 1 / 1.2]),
    np.diag([1.7, 1 / 1.7]),
    random_positive(3, seed=7),
]


class TestQData:
    """Tests for validation and normalization of Q."""

    def test_normalization_balances_traces(self):
        qdata = make_qdata(np.diag([2.0, 1.0]))
        q2 = np.trace(qdata.q @ qdata.q).real
        qinv2 = np.trace(qdata.q_inv @ qdata.q_inv).real
        assert q2 == pytest.approx(qinv2)
        assert qdata.d == pytest.approx(q2)

    def test_identity_dimension(self):
        qdata = QData.identity(3)
        assert qdata.d == pytest.approx(3.0)
        assert qdata.is_identity()

    def test_rejects_non_hermitian(self):
        with pytest.raises(DualityError, match="Hermitian"):
            make_qdata([[1.0, 1.0], [0.0, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(DualityError, match="positive-definite"):
            make_qdata(np.diag([1.0, -1.0]))

    def test_rejects_bad_conditioning(self):
        with pytest.raises(DualityError, match="spread"):
            make_qdata(np.diag([1e4, 1e-4]))

    def test_rejects_non_square(self):
        with pytest.raises(DualityError, match="square"):
            make_qdata(np.ones((2, 3)))

    def test_from_dict_diagonal_shorthand(self):
        qdata = QData.from_dict({"q_diag": [1.2, 1 / 1.2]})
        assert qdata.n == 2
        assert qdata.d == pytest.approx(1.44 + 1 / 1.44)

    def test_from_dict_checks_n(self):
        with pytest.raises(DualityError, match="Declared n=3"):
            QData.from_dict({"n": 3, "q": [[1, 0], [0, 1]]})

    def test_from_dict_needs_q(self):
        with pytest.raises(DualityError, match="either"):
            QData.from_dict({"n": 2})

    def test_q_from_identity_F(self):
        assert q_from_F(np.eye(2)).is_identity()

    def test_q_from_singular_F(self):
        with pytest.raises(DualityError, match="singular"):
            q_from_F(np.zeros((2, 2)))


class TestQConstructions:
    """Tests for Q of tensor products, direct sums and duals."""

    def test_tensor_dimension_is_multiplicative(self):
        a, b = make_qdata(np.diag([1.2, 1 / 1.2])), make_qdata(np.eye(3))
        assert tensor_qdata(a, b).d == pytest.approx(a.d * b.d)

    def test_direct_sum_dimension_is_additive(self):
        a, b = make_qdata(np.diag([1.2, 1 / 1.2])), make_qdata(np.eye(3))
        assert direct_sum_qdata(a, b).d == pytest.approx(a.d + b.d)

    def test_dual_has_the_same_dimension(self):
        a = make_qdata(random_positive(3, seed=3))
        assert dual_qdata(a).d == pytest.approx(a.d)


class TestDualityMaps:
    """Tests for cups, caps and Jones projections."""

    @pytest.mark.parametrize("q", Q_CASES)
    def test_verify_duality(self, q):
        report = verify_duality(make_duality(q), tol=1e-9)
        assert report.passed(1e-9), report.to_dict()
        assert "jones_relation" in report.residuals
        assert "jones_vectors" in report.residuals

    def test_lambda_is_inverse_square_dimension(self):
        dm = make_duality(np.diag([1.2, 1 / 1.2]))
        assert dm.lam == pytest.approx(dm.d ** -2)

    def test_cup_matrix_of_letters(self):
        q = np.diag([1.2, 1 / 1.2])
        dm = make_duality(q)
        assert np.allclose(dm.cup_matrix(Word.parse("a")), dm.q)
        assert np.allclose(dm.cup_matrix(Word.parse("b")), np.linalg.inv(dm.q).T)

    def test_cup_and_cap_types(self):
        dm = make_duality(np.eye(2))
        w = Word.parse("ab")
        assert cup(dm, w).target == Word.parse("abab")
        assert cap(dm, w).source == Word.parse("abab")
        assert cup(dm, EMPTY).matrix.shape == (1, 1)

    @pytest.mark.parametrize("parity", list(Parity))
    def test_jones_projection_is_projection(self, parity):
        dm = make_duality(random_positive(2, seed=1))
        e = jones_projection(dm, parity)
        assert (e @ e - e).norm() < 1e-10
        assert (e.adjoint() - e).norm() < 1e-10
        assert np.trace(e.matrix).real == pytest.approx(1.0)

    def test_parity_of(self):
        assert Parity.of(2) is Parity.EVEN
        assert Parity.of(3) is Parity.ODD


class TestTraces:
    """Tests for the canonical trace and conditional expectations."""

    def test_trace_of_identity_is_one(self):
        dm = make_duality(np.diag([1.2, 1 / 1.2]))
        for w in ("a", "ab", "aba"):
            assert canonical_trace(dm, identity(2, Word.parse(w))).real == pytest.approx(1.0)

    def test_trace_of_jones_projection_is_lambda(self):
        dm = make_duality(np.diag([1.2, 1 / 1.2]))
        e = jones_projection(dm, Parity.EVEN)
        assert canonical_trace(dm, e).real == pytest.approx(dm.lam)

    def test_expectation_is_unital(self):
        dm = make_duality(np.diag([1.7, 1 / 1.7]))
        a, b = Word.parse("a"), Word.parse("b")
        result = conditional_expectation(dm, a, b, a, identity(2, Word.parse("aba")))
        assert np.allclose(result.matrix, np.eye(2))

    def test_expectation_preserves_trace(self):
        dm = make_duality(random_positive(2, seed=5))
        rng = np.random.default_rng(0)
        w = Word.parse("ab")
        x = from_matrix(rng.standard_normal((4, 4)), 2, w, w)
        reduced = conditional_expectation(dm, EMPTY, Word.parse("a"), Word.parse("b"), x)
        assert canonical_trace(dm, reduced) == pytest.approx(canonical_trace(dm, x))

    def test_expectation_rejects_wrong_type(self):
        dm = make_duality(np.eye(2))
        with pytest.raises(DualityError, match="endomorphism"):
            conditional_expectation(dm, EMPTY, Word.parse("a"), EMPTY, identity(2, Word.parse("b")))
