"""Leg-typed dense linear algebra on the spaces H^{(x)} of a word x.

Alpha-legs are copies of H = C^n, beta-legs copies of the conjugate space,
modelled as C^n with the conjugate basis. Multi-indices are ordered
lexicographically with the leftmost leg most significant, so the Kronecker
product of two maps acts on the concatenated legs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import QLatticeError
from .words import EMPTY, Word

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


class TensorTypeError(QLatticeError):
    """Raised when leg signatures or matrix shapes do not fit together."""
    pass


@dataclass(frozen=True)
class LegSpace:
    """The space H^{(word)} for dim H = n."""
    n: int
    word: Word

    @property
    def dim(self) -> int:
        return self.n ** len(self.word)

    def __str__(self) -> str:
        return f"H^({self.word or 'e'}) n={self.n}"


@dataclass(frozen=True, eq=False)
class TensorMap:
    """A linear map H^{(domain)} -> H^{(codomain)} stored as a dense matrix."""
    domain: LegSpace
    codomain: LegSpace
    matrix: np.ndarray

    def __post_init__(self):
        if self.domain.n != self.codomain.n:
            raise TensorTypeError(
                f"Domain and codomain disagree on n: {self.domain.n} vs {self.codomain.n}"
            )
        matrix = np.asarray(self.matrix, dtype=complex)
        expected = (self.codomain.dim, self.domain.dim)
        if matrix.shape != expected:
            raise TensorTypeError(
                f"Matrix shape {matrix.shape} does not match {self.codomain} <- {self.domain}"
            )
        matrix = matrix.copy()
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def source(self) -> Word:
        return self.domain.word

    @property
    def target(self) -> Word:
        return self.codomain.word

    def adjoint(self) -> "TensorMap":
        return TensorMap(self.codomain, self.domain, self.matrix.conj().T)

    def scale(self, c: complex) -> "TensorMap":
        return TensorMap(self.domain, self.codomain, c * self.matrix)

    def __matmul__(self, other: "TensorMap") -> "TensorMap":
        return compose(self, other)

    def __add__(self, other: "TensorMap") -> "TensorMap":
        _check_parallel(self, other)
        return TensorMap(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other: "TensorMap") -> "TensorMap":
        _check_parallel(self, other)
        return TensorMap(self.domain, self.codomain, self.matrix - other.matrix)

    def __rmul__(self, c: complex) -> "TensorMap":
        return self.scale(c)

    def norm(self) -> float:
        """Hilbert-Schmidt norm."""
        return float(np.linalg.norm(self.matrix))

    def __repr__(self) -> str:
        return f"TensorMap({self.source or 'e'} -> {self.target or 'e'}, n={self.n})"


def _check_parallel(a: TensorMap, b: TensorMap) -> None:
    if a.domain != b.domain or a.codomain != b.codomain:
        raise TensorTypeError(f"Cannot combine {a!r} with {b!r}")


def from_matrix(matrix: Any, n: int, domain: Word, codomain: Word) -> TensorMap:
    return TensorMap(LegSpace(n, domain), LegSpace(n, codomain), np.asarray(matrix))


def identity(n: int, word: Word = EMPTY) -> TensorMap:
    space = LegSpace(n, word)
    return TensorMap(space, space, np.eye(space.dim))


def xi(a: Any) -> TensorMap:
    """The canonical map L(H) -> H (x) conj(H): sum a_ij h_i (x) conj(h_j).

    Returns a map e -> ab, i.e. a column vector.

    Raises:
        TensorTypeError: If ``a`` is not square.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise TensorTypeError(f"xi expects a square matrix, got shape {a.shape}")
    n = a.shape[0]
    return from_matrix(a.reshape(n * n, 1), n, EMPTY, Word.parse("ab"))


def tensor(*maps: TensorMap) -> TensorMap:
    """Kronecker product respecting leg order."""
    if not maps:
        raise TensorTypeError("tensor() needs at least one map")
    result = maps[0]
    for other in maps[1:]:
        if other.n != result.n:
            raise TensorTypeError(f"Cannot tensor n={result.n} with n={other.n}")
        result = TensorMap(
            LegSpace(result.n, result.source + other.source),
            LegSpace(result.n, result.target + other.target),
            np.kron(result.matrix, other.matrix),
        )
    return result


def compose(a: TensorMap, b: TensorMap) -> TensorMap:
    """Return a o b; the leg words must agree exactly.

    Raises:
        TensorTypeError: On a signature mismatch, even when dimensions agree.
    """
    if a.domain != b.codomain:
        raise TensorTypeError(
            f"Cannot compose {a!r} after {b!r}: {a.source or 'e'} != {b.target or 'e'}"
        )
    return TensorMap(b.domain, a.codomain, a.matrix @ b.matrix)


def pad(x: TensorMap, left: Word = EMPTY, right: Word = EMPTY) -> TensorMap:
    """id_left (x) x (x) id_right."""
    matrix = x.matrix
    if left:
        matrix = np.kron(np.eye(x.n ** len(left)), matrix)
    if right:
        matrix = np.kron(matrix, np.eye(x.n ** len(right)))
    return TensorMap(
        LegSpace(x.n, left + x.source + right),
        LegSpace(x.n, left + x.target + right),
        matrix,
    )


def hs_inner(a: TensorMap, b: TensorMap) -> complex:
    """<a, b> = Tr(a* b)."""
    _check_parallel(a, b)
    return complex(np.vdot(a.matrix, b.matrix))


@dataclass(frozen=True, eq=False)
class OperatorSpan:
    """A Hilbert-Schmidt orthonormal basis of a subspace of L(H^{(domain)}, H^{(codomain)}).

    The basis is held as an array of shape (dim, dim codomain, dim domain).
    """
    n: int
    domain: Word
    codomain: Word
    stack: np.ndarray

    def __post_init__(self):
        stack = np.asarray(self.stack, dtype=complex)
        rows, cols = self.n ** len(self.codomain), self.n ** len(self.domain)
        if stack.size == 0:
            stack = np.zeros((0, rows, cols), dtype=complex)
        if stack.shape[1:] != (rows, cols):
            raise TensorTypeError(f"Span basis shape {stack.shape} does not fit {rows}x{cols}")
        stack = stack.copy()
        stack.setflags(write=False)
        object.__setattr__(self, "stack", stack)

    @property
    def dim(self) -> int:
        return self.stack.shape[0]

    def __len__(self) -> int:
        return self.dim

    @property
    def basis(self) -> list[TensorMap]:
        return [from_matrix(m, self.n, self.domain, self.codomain) for m in self.stack]

    @property
    def columns(self) -> np.ndarray:
        """Flattened basis vectors as the columns of a matrix."""
        return self.stack.reshape(self.dim, -1).T

    def coordinates(self, matrix: np.ndarray) -> np.ndarray:
        return self.stack.reshape(self.dim, -1).conj() @ np.asarray(matrix).reshape(-1)

    def project(self, matrix: np.ndarray) -> np.ndarray:
        """Orthogonal (Hilbert-Schmidt) projection of a matrix onto the span."""
        coords = self.coordinates(matrix)
        return np.tensordot(coords, self.stack, axes=1)

    def residual(self, matrix: np.ndarray) -> float:
        matrix = np.asarray(matrix, dtype=complex)
        return float(np.linalg.norm(matrix - self.project(matrix)))

    def contains(self, x: TensorMap, tol: float = DEFAULT_TOL) -> bool:
        scale = max(1.0, x.norm())
        return self.residual(x.matrix) <= tol * scale

    def element(self, coefficients: Sequence[complex]) -> TensorMap:
        matrix = np.tensordot(np.asarray(coefficients, dtype=complex), self.stack, axes=1)
        return from_matrix(matrix, self.n, self.domain, self.codomain)

    def random_element(self, rng: np.random.Generator) -> TensorMap:
        coefficients = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        if self.dim == 0:
            return from_matrix(
                np.zeros(self.stack.shape[1:]), self.n, self.domain, self.codomain
            )
        return self.element(coefficients)

    def conjugated(self, left: np.ndarray, right: np.ndarray) -> "OperatorSpan":
        """Span of left @ b @ right over the basis; unitary factors keep orthonormality."""
        return OperatorSpan(self.n, self.domain, self.codomain, left @ self.stack @ right)

    def __repr__(self) -> str:
        return f"OperatorSpan({self.domain or 'e'} -> {self.codomain or 'e'}, dim={self.dim})"


def empty_span(n: int, domain: Word, codomain: Word) -> OperatorSpan:
    return OperatorSpan(n, domain, codomain, np.zeros((0, n ** len(codomain), n ** len(domain))))


def orthonormalize_array(
    stack: np.ndarray, n: int, domain: Word, codomain: Word, tol: float = DEFAULT_TOL
) -> OperatorSpan:
    """Orthonormal basis of the span of the matrices in ``stack`` (shape m x rows x cols)."""
    rows, cols = n ** len(codomain), n ** len(domain)
    stack = np.asarray(stack, dtype=complex).reshape(-1, rows * cols)
    if stack.shape[0] == 0:
        return empty_span(n, domain, codomain)
    u, s, _ = linalg.svd(stack.T, full_matrices=False)
    if s.size == 0 or s[0] <= np.finfo(float).tiny:
        return empty_span(n, domain, codomain)
    rank = int(np.sum(s > tol * s[0]))
    basis = u[:, :rank].T.reshape(rank, rows, cols)
    return OperatorSpan(n, domain, codomain, basis)


def orthonormalize(
    maps: Iterable[TensorMap],
    tol: float = DEFAULT_TOL,
    *,
    n: Optional[int] = None,
    domain: Optional[Word] = None,
    codomain: Optional[Word] = None,
) -> OperatorSpan:
    """HS-orthonormal basis of the span of ``maps``, dimension = numerical rank.

    An empty input yields the empty span; missing signature parts default
    to n = 1 and the empty word.

    Raises:
        TensorTypeError: If the maps disagree on their signature.
    """
    maps = list(maps)
    if not maps:
        return empty_span(1 if n is None else n, domain or EMPTY, codomain or EMPTY)
    first = maps[0]
    for other in maps[1:]:
        _check_parallel(first, other)
    stack = np.stack([m.matrix for m in maps])
    return orthonormalize_array(stack, first.n, first.source, first.target, tol)


def algebra_closure(generators: Iterable[TensorMap], tol: float = DEFAULT_TOL) -> OperatorSpan:
    """Unital *-algebra generated by endomorphisms of one leg space."""
    generators = list(generators)
    if not generators:
        raise TensorTypeError("algebra_closure needs at least one generator")
    first = generators[0]
    if first.source != first.target:
        raise TensorTypeError(f"{first!r} is not an endomorphism")
    gens = np.stack([g.matrix for g in generators] + [g.matrix.conj().T for g in generators])
    unit = np.eye(first.domain.dim)[None]
    span = orthonormalize_array(
        np.concatenate([unit, gens]), first.n, first.source, first.target, tol
    )
    while True:
        products = np.einsum("aij,bjk->abik", span.stack, gens).reshape(-1, *unit.shape[1:])
        grown = orthonormalize_array(
            np.concatenate([span.stack, products]), first.n, first.source, first.target, tol
        )
        logger.debug(f"algebra_closure: dim {span.dim} -> {grown.dim}")
        if grown.dim == span.dim:
            return grown
        span = grown


def span_distance(a: OperatorSpan, b: OperatorSpan) -> float:
    """Sine of the largest principal angle; 1.0 when dimensions differ."""
    if (a.n, a.domain, a.codomain) != (b.n, b.domain, b.codomain) or a.dim != b.dim:
        return 1.0
    if a.dim == 0:
        return 0.0
    angles = linalg.subspace_angles(a.columns, b.columns)
    return float(np.sin(np.max(angles)))


def matrix_to_json(matrix: np.ndarray) -> list:
    """Nested rows of [re, im] pairs."""
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def matrix_from_json(data: Any) -> np.ndarray:
    """Inverse of matrix_to_json; plain real entries are accepted too.

    Raises:
        TensorTypeError: If the data is not a rectangular matrix.
    """
    try:
        rows = []
        for row in data:
            entries = []
            for entry in row:
                if isinstance(entry, (list, tuple)):
                    re, im = entry
                    entries.append(complex(float(re), float(im)))
                else:
                    entries.append(complex(entry))
            rows.append(entries)
        matrix = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as e:
        raise TensorTypeError(f"Malformed matrix data: {e}") from e
    if matrix.ndim != 2:
        raise TensorTypeError(f"Expected a matrix, got shape {matrix.shape}")
    return matrix
