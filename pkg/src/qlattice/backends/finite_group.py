"""Unitary representations of finite groups (Haar state = normalized counting measure)."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from ..duality import QData
from ..tensorops import DEFAULT_TOL, OperatorSpan, matrix_to_json
from ..words import Letter, Word, hat
from .base import Backend, BackendConfigError, BackendError
from .groups import FiniteGroup

logger = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
RANGE_BLOCK = 8


def _gaussian_integer(z: complex, tol: float = 1e-9) -> Optional[tuple[int, int]]:
    re, im = round(z.real), round(z.imag)
    if abs(z.real - re) < tol and abs(z.imag - im) < tol:
        return int(re), int(im)
    return None


def _gauss_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


class FiniteGroupRep(Backend):
    """A finite group with a unitary representation pi on H = C^n."""

    kind = "finite_group"

    def __init__(
        self,
        mult_table: Any,
        rep: Sequence[Any],
        identity: int = 0,
        tol: float = DEFAULT_TOL,
        label: Optional[str] = None,
    ):
        """
        Args:
            mult_table: Square table with mult_table[g][h] = index of gh.
            rep: One n x n unitary matrix per group element.
            identity: Index of the identity element.
            tol: Tolerance for the unitarity and homomorphism checks.

        Raises:
            BackendConfigError: If the table is not a group law or rep is not a
                unitary representation of it.
        """
        self.group = FiniteGroup(mult_table, identity)
        matrices = [np.asarray(m, dtype=complex) for m in rep]
        if len(matrices) != self.group.order:
            raise BackendConfigError(
                f"Expected {self.group.order} representation matrices, got {len(matrices)}"
            )
        n = matrices[0].shape[0]
        for g, m in enumerate(matrices):
            if m.shape != (n, n):
                raise BackendConfigError(f"pi({g}) has shape {m.shape}, expected {(n, n)}")
            if np.linalg.norm(m.conj().T @ m - np.eye(n)) > tol * n * 10:
                raise BackendConfigError(f"pi({g}) is not unitary")
        table = self.group.table
        for g in range(self.group.order):
            for h in range(self.group.order):
                if np.linalg.norm(matrices[g] @ matrices[h] - matrices[table[g, h]]) > tol * n * 10:
                    raise BackendConfigError(f"pi is not multiplicative at ({g}, {h})")
        self.rep = matrices
        self.characters = [complex(np.trace(m)) for m in matrices]
        super().__init__(QData.identity(n), label=label)

    @property
    def order(self) -> int:
        return self.group.order

    def leg_matrix(self, g: int, letter: Letter) -> np.ndarray:
        return self.rep[g] if letter is Letter.ALPHA else self.rep[g].conj()

    def _averaged_range(self, w: Word, columns: int) -> np.ndarray:
        """Image of the averaging projector (1/|G|) sum_g rho_w(g) on random vectors."""
        n, length = self.n, len(w)
        rng = np.random.default_rng(length)
        start = rng.standard_normal((n ** length, columns)) + 1j * rng.standard_normal(
            (n ** length, columns)
        )
        total = np.zeros_like(start)
        for g in range(self.order):
            tensor_form = start.reshape((n,) * length + (columns,))
            for leg, letter in enumerate(w):
                tensor_form = np.moveaxis(
                    np.tensordot(self.leg_matrix(g, letter), tensor_form, axes=([1], [leg])), 0, leg
                )
            total += tensor_form.reshape(n ** length, columns)
        return total / self.order

    def fixed_vectors(self, w: Word, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Orthonormal basis (rows) of the invariant vectors of v^{(w)}.

        The averaging operator is the orthogonal projection onto its eigenvalue-1
        eigenspace. Its range is sampled on random vectors, doubling the sample
        until the rank falls short of the sample width or the sample spans the
        whole space, so the rank never depends on the character sum.
        """
        if not w:
            return np.ones((1, 1), dtype=complex)
        dim = self.n ** len(w)
        columns = min(dim, RANGE_BLOCK)
        while True:
            sample = self._averaged_range(w, columns)
            u, s, _ = np.linalg.svd(sample, full_matrices=False)
            if s.size == 0 or s[0] <= tol:
                return np.zeros((0, dim), dtype=complex)
            rank = int(np.sum(s > tol * s[0]))
            if rank < columns or columns == dim:
                return u[:, :rank].T
            columns = min(dim, 2 * columns)

    def fixed_point_rank(self, w: Word, tol: float = DEFAULT_TOL) -> int:
        return self.fixed_vectors(w, tol).shape[0]

    def _compute_hom(self, x: Word, y: Word, tol: float) -> OperatorSpan:
        return self._span_from_vectors(x, y, self.fixed_vectors(hat(x) + y, tol), tol)

    def _compute_moment(self, w: Word) -> int:
        """(1/|G|) sum_g prod chi(g) or conj(chi(g)) over the letters, exactly when possible."""
        exact = [_gaussian_integer(c) for c in self.characters]
        if all(value is not None for value in exact):
            total_re = 0
            for value in exact:
                term = (1, 0)
                for letter in w:
                    factor = value if letter is Letter.ALPHA else (value[0], -value[1])
                    term = _gauss_mul(term, factor)
                total_re += term[0]
            result = Fraction(total_re, self.order)
            if result.denominator != 1:
                raise BackendError(f"Character sum for {w!r} is not an integer: {result}")
            return result.numerator
        total = 0j
        for chi in self.characters:
            term = 1 + 0j
            for letter in w:
                term *= chi if letter is Letter.ALPHA else chi.conjugate()
            total += term
        value = total.real / self.order
        rounded = round(value)
        if abs(value - rounded) > INTEGRALITY_TOL or abs(total.imag) / self.order > INTEGRALITY_TOL:
            raise BackendError(f"Character sum for {w!r} is not an integer: {total / self.order}")
        return int(rounded)

    def closed_walk_counts(self, k_max: int) -> list[int]:
        """(1/|G|) sum_g (chi(g) + conj chi(g))^k by exact arithmetic."""
        exact = [_gaussian_integer(c) for c in self.characters]
        if not all(value is not None for value in exact):
            return super().closed_walk_counts(k_max)
        traces = [2 * value[0] for value in exact]
        counts = []
        for k in range(k_max + 1):
            result = Fraction(sum(t ** k for t in traces), self.order)
            if result.denominator != 1:
                raise BackendError(f"Closed walk count at k={k} is not an integer: {result}")
            counts.append(result.numerator)
        return counts

    def describe(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "mult_table": self.group.table.tolist(),
            "identity": self.group.identity,
            "rep": [matrix_to_json(m) for m in self.rep],
        }


def symmetric_group_s3() -> FiniteGroupRep:
    """S3 in its 2-dimensional irreducible representation (rotations and reflections of a triangle)."""
    c, s = -0.5, np.sqrt(3) / 2
    rotation = np.array([[c, -s], [s, c]])
    reflection = np.array([[1.0, 0.0], [0.0, -1.0]])
    elements = [
        np.eye(2),
        rotation,
        rotation @ rotation,
        reflection,
        reflection @ rotation,
        reflection @ rotation @ rotation,
    ]
    order = len(elements)
    table = [
        [
            next(k for k in range(order) if np.allclose(elements[g] @ elements[h], elements[k]))
            for h in range(order)
        ]
        for g in range(order)
    ]
    return FiniteGroupRep(table, elements, identity=0, label="S3")
