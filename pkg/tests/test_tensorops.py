"""Tests for leg-typed tensor maps and operator spans."""

import numpy as np
import pytest

from qlattice.tensorops import (
    LegSpace,
    OperatorSpan,
    TensorMap,
    TensorTypeError,
    algebra_closure,
    compose,
    from_matrix,
    hs_inner,
    identity,
    matrix_from_json,
    matrix_to_json,
    orthonormalize,
    orthonormalize_array,
    pad,
    span_distance,
    tensor,
    xi,
)
from qlattice.words import EMPTY, Word

A = Word.parse("a")
B = Word.parse("b")
AB = Word.parse("ab")


class TestTensorMap:
    """Tests for typed maps."""

    def test_shape_is_checked(self):
        with pytest.raises(TensorTypeError, match="does not match"):
            from_matrix(np.eye(3), 2, A, A)

    def test_matrix_is_read_only(self):
        m = identity(2, A)
        with pytest.raises(ValueError):
            m.matrix[0, 0] = 5

    def test_compose_checks_words_not_only_dimensions(self):
        x = from_matrix(np.eye(2), 2, A, A)
        y = from_matrix(np.eye(2), 2, B, B)
        with pytest.raises(TensorTypeError, match="Cannot compose"):
            compose(x, y)

    def test_compose_and_adjoint(self):
        rng = np.random.default_rng(0)
        m1 = rng.standard_normal((2, 4))
        m2 = rng.standard_normal((4, 2))
        x = from_matrix(m1, 2, AB, A)
        y = from_matrix(m2, 2, A, AB)
        assert np.allclose((x @ y).matrix, m1 @ m2)
        assert (x @ y).source == A
        assert np.allclose(x.adjoint().matrix, m1.T)
        assert x.adjoint().source == A

    def test_tensor_orders_legs(self):
        a = from_matrix([[1, 2], [3, 4]], 2, A, A)
        b = from_matrix([[0, 1], [1, 0]], 2, B, B)
        t = tensor(a, b)
        assert t.source == AB
        assert np.allclose(t.matrix, np.kron(a.matrix, b.matrix))

    def test_pad(self):
        a = from_matrix([[1, 2], [3, 4]], 2, A, A)
        padded = pad(a, left=B, right=B)
        assert padded.source == Word.parse("bab")
        assert np.allclose(padded.matrix, np.kron(np.eye(2), np.kron(a.matrix, np.eye(2))))

    def test_xi_is_row_major_vec(self):
        a = np.array([[1, 2], [3, 4]])
        v = xi(a)
        assert v.source == EMPTY and v.target == AB
        assert np.allclose(v.matrix[:, 0], [1, 2, 3, 4])

    def test_xi_rejects_non_square(self):
        with pytest.raises(TensorTypeError, match="square"):
            xi(np.ones((2, 3)))

    def test_hs_inner_and_norm(self):
        a = from_matrix([[1, 0], [0, 1j]], 2, A, A)
        assert hs_inner(a, a) == pytest.approx(2.0)
        assert a.norm() == pytest.approx(np.sqrt(2))

    def test_arithmetic(self):
        a = identity(2, A)
        assert np.allclose((a + a).matrix, 2 * np.eye(2))
        assert np.allclose((a - a).matrix, 0)
        assert np.allclose((3 * a).matrix, 3 * np.eye(2))
        with pytest.raises(TensorTypeError, match="Cannot combine"):
            a + identity(2, B)


class TestOperatorSpan:
    """Tests for orthonormal spans."""

    def test_orthonormalize_drops_dependent_maps(self):
        a = from_matrix([[1, 0], [0, 0]], 2, A, A)
        b = from_matrix([[0, 0], [0, 1]], 2, A, A)
        span = orthonormalize([a, b, a + b])
        assert span.dim == 2
        gram = np.einsum("aij,bij->ab", span.stack.conj(), span.stack)
        assert np.allclose(gram, np.eye(2))

    def test_empty_input_gives_empty_span(self):
        bare = orthonormalize([])
        assert bare.dim == 0
        assert bare.n == 1
        assert bare.domain == Word() and bare.codomain == Word()
        span = orthonormalize([], n=2, domain=A, codomain=A)
        assert span.dim == 0

    def test_contains_and_residual(self):
        span = orthonormalize([identity(2, A)])
        assert span.contains(identity(2, A).scale(3))
        off = from_matrix([[0, 1], [0, 0]], 2, A, A)
        assert not span.contains(off)
        assert span.residual(off.matrix) == pytest.approx(1.0)

    def test_conjugated_keeps_dimension(self):
        rng = np.random.default_rng(1)
        stack = rng.standard_normal((3, 2, 2))
        span = orthonormalize_array(stack, 2, A, A)
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        assert span.conjugated(q, q.T).dim == span.dim

    def test_span_distance(self):
        rng = np.random.default_rng(2)
        span = orthonormalize_array(rng.standard_normal((2, 2, 2)), 2, A, A)
        mixed = OperatorSpan(2, A, A, np.stack([span.stack[0] + span.stack[1], span.stack[0] - span.stack[1]]) / np.sqrt(2))
        assert span_distance(span, mixed) < 1e-10
        smaller = OperatorSpan(2, A, A, span.stack[:1])
        assert span_distance(span, smaller) == 1.0

    def test_algebra_closure_of_matrix_unit_is_full_algebra(self):
        e12 = from_matrix([[0, 1], [0, 0]], 2, A, A)
        assert algebra_closure([e12]).dim == 4

    def test_algebra_closure_of_diagonal(self):
        d = from_matrix([[1, 0], [0, 2]], 2, A, A)
        assert algebra_closure([d]).dim == 2


def test_matrix_json_round_trip():
    m = np.array([[1 + 2j, 0], [3, -1j]])
    assert np.allclose(matrix_from_json(matrix_to_json(m)), m)
    assert np.allclose(matrix_from_json([[1, 2], [3, 4]]), [[1, 2], [3, 4]])


def test_leg_space_dim():
    assert LegSpace(3, Word.parse("aba")).dim == 27
    assert LegSpace(3, EMPTY).dim == 1
