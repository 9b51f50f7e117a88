"""The lattice of endomorphism algebras A_ij = End(v^[i,j]) with its Jones projections,
trace and conditional expectations, plus numerical checks of the lattice axioms."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

import numpy as np
from scipy import linalg

from .backends import Backend
from .duality import (
    DualityMaps,
    Parity,
    canonical_trace,
    conditional_expectation,
    cup,
    jones_projection,
    right_weight,
)
from .errors import QLatticeError
from .tensorops import (
    DEFAULT_TOL,
    OperatorSpan,
    TensorMap,
    from_matrix,
    orthonormalize_array,
    pad,
    span_distance,
)
from .words import EMPTY, interval

logger = logging.getLogger(__name__)

Cell = tuple[int, int]

DEFAULT_BOUNDS = {2: 5, 3: 4}
FALLBACK_BOUND = 3
VERIFY_TOL = 1e-8


class LatticeError(QLatticeError):
    """Raised for lattice requests outside the built range."""
    pass


def default_bound(n: int) -> int:
    return DEFAULT_BOUNDS.get(n, FALLBACK_BOUND)


def cells_up_to(bound: int) -> Iterator[Cell]:
    for i in range(bound + 1):
        for j in range(i, bound + 1):
            yield i, j


@dataclass(frozen=True)
class _TauFrame:
    """Coordinates in which the tau inner product of End(H^[i,j]) is Hilbert-Schmidt."""
    root: np.ndarray
    root_inv: np.ndarray
    span: OperatorSpan


@dataclass
class PopaLattice:
    """The cells A_ij for 0 <= i <= j <= bound of one backend."""
    backend: Backend
    bound: int
    tol: float
    cells: dict[Cell, OperatorSpan]
    jones: dict[int, TensorMap]
    _frames: dict[Cell, _TauFrame] = field(default_factory=dict, repr=False)

    @property
    def duality(self) -> DualityMaps:
        return self.backend.duality

    @property
    def n(self) -> int:
        return self.backend.n

    @property
    def d(self) -> float:
        return self.duality.d

    @property
    def lam(self) -> float:
        return self.duality.lam

    def cell(self, i: int, j: int) -> OperatorSpan:
        try:
            return self.cells[(i, j)]
        except KeyError as e:
            raise LatticeError(f"Cell A_{i},{j} is outside the lattice built to {self.bound}") from e

    def dims(self) -> dict[Cell, int]:
        return {key: span.dim for key, span in self.cells.items()}

    def row_dims(self, i: int = 0) -> list[int]:
        return [self.cell(i, j).dim for j in range(i, self.bound + 1)]

    def embed(self, x: TensorMap, source: Cell, target: Cell) -> TensorMap:
        """Pad x in End(H^[i,j]) with identities out to [k,l]."""
        (i, j), (k, l) = source, target
        if not k <= i <= j <= l:
            raise LatticeError(f"A_{i},{j} is not contained in A_{k},{l}")
        return pad(x, left=interval(k, i), right=interval(j, l))

    def jones_in(self, k: int, target: Cell) -> TensorMap:
        """e_k as an element of A_target."""
        return self.embed(self.jones[k], (k - 2, k), target)

    def trace(self, x: TensorMap) -> complex:
        return canonical_trace(self.duality, x)

    def _frame(self, key: Cell) -> _TauFrame:
        frame = self._frames.get(key)
        if frame is None:
            word = interval(*key)
            weights = right_weight(self.duality, word)
            w, v = linalg.eigh(weights)
            root = (v * np.sqrt(w)) @ v.conj().T
            root_inv = (v / np.sqrt(w)) @ v.conj().T
            span = self.cell(*key)
            span = orthonormalize_array(span.stack @ root, self.n, word, word, self.tol)
            frame = self._frames.setdefault(key, _TauFrame(root, root_inv, span))
        return frame

    def project(self, x: TensorMap, target: Cell) -> TensorMap:
        """tau-orthogonal projection of an endomorphism of H^target onto A_target."""
        frame = self._frame(target)
        projected = frame.span.project(x.matrix @ frame.root) @ frame.root_inv
        return from_matrix(projected, self.n, x.source, x.target)

    def expectation(self, x: TensorMap, source: Cell, target: Cell) -> TensorMap:
        """E_{A_target}(x) for x in End(H^source): contract the rectangle, then project."""
        (i, j), (k, l) = source, target
        if not i <= k <= l <= j:
            raise LatticeError(f"Cannot take E onto A_{k},{l} from End over [{i},{j}]")
        contracted = conditional_expectation(
            self.duality, interval(i, k), interval(k, l), interval(l, j), x
        )
        return self.project(contracted, target)

    def gram(self, key: Cell) -> np.ndarray:
        """Gram matrix (tau(b_m^* b_n)) of the cell basis."""
        span = self.cell(*key)
        word = interval(*key)
        weights = right_weight(self.duality, word)
        g = np.einsum("mji,njk,ki->mn", span.stack.conj(), span.stack, weights)
        return g / self.d ** len(word)

    def random_element(self, key: Cell, rng: np.random.Generator) -> TensorMap:
        """Random element of A_key with unit Hilbert-Schmidt norm."""
        x = self.cell(*key).random_element(rng)
        norm = x.norm()
        return x.scale(1 / norm) if norm > 0 else x

    def to_dict(self) -> dict[str, Any]:
        return {
            "backend": self.backend.describe(),
            "n": self.n,
            "bound": self.bound,
            "d": self.d,
            "lambda": self.lam,
            "index": index(self),
            "dims": {f"{i},{j}": dim for (i, j), dim in sorted(self.dims().items())},
        }


def build_lattice(
    backend: Backend,
    bound: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    max_bound: Optional[int] = None,
) -> PopaLattice:
    """
    Fill every cell A_ij, 0 <= i <= j <= bound, and install the Jones projections.

    Args:
        backend: Source of the hom spaces.
        bound: Largest row/column index; defaults per n.
        tol: Rank tolerance passed to the backend.
        threads: Worker threads for cell construction.
        max_bound: Overrides the configured maximum for this n.

    Raises:
        LatticeError: If the bound exceeds the configured maximum.
    """
    limit = max_bound if max_bound is not None else default_bound(backend.n)
    bound = default_bound(backend.n) if bound is None else bound
    if bound < 0 or bound > limit:
        raise LatticeError(f"Bound {bound} outside [0, {limit}] for n={backend.n}")

    keys = list(cells_up_to(bound))

    def build(key: Cell) -> OperatorSpan:
        return backend.cell(*key, tol=tol)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        spans = list(pool.map(build, keys))
    cells = dict(zip(keys, spans))

    dm = backend.duality
    jones = {k: jones_projection(dm, Parity.of(k)) for k in range(2, bound + 1)}
    lattice = PopaLattice(backend=backend, bound=bound, tol=tol, cells=cells, jones=jones)
    logger.info(f"Built lattice of {backend.label} to bound {bound}: row 0 dims {lattice.row_dims(0)}")
    return lattice


def index(lattice: PopaLattice) -> float:
    """lambda^-1 = d^2."""
    return 1.0 / lattice.lam


@dataclass
class AxiomReport:
    """Largest residual of every checked identity."""
    residuals: dict[str, float]
    seed: int
    min_gram_eigenvalue: float
    checks: dict[str, int] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failures(self, tol: float = VERIFY_TOL) -> list[str]:
        failed = sorted(name for name, value in self.residuals.items() if not value <= tol)
        if not self.min_gram_eigenvalue > 0:
            failed.append("trace_positivity")
        return failed

    def passed(self, tol: float = VERIFY_TOL) -> bool:
        return not self.failures(tol)

    def to_dict(self, tol: float = VERIFY_TOL) -> dict[str, Any]:
        return {
            "residuals": dict(sorted(self.residuals.items())),
            "max_residual": self.max_residual,
            "min_gram_eigenvalue": self.min_gram_eigenvalue,
            "checks": dict(sorted(self.checks.items())),
            "seed": self.seed,
            "passed": self.passed(tol),
        }


class _Residuals:
    def __init__(self):
        self.values: dict[str, float] = {}
        self.counts: dict[str, int] = {}

    def add(self, name: str, value: float) -> None:
        self.values[name] = max(self.values.get(name, 0.0), float(value))
        self.counts[name] = self.counts.get(name, 0) + 1


def _check_scalars_and_inclusions(lattice: PopaLattice, out: _Residuals) -> None:
    for (i, j), span in lattice.cells.items():
        if i == j:
            out.add("scalar_cells", abs(span.dim - 1))
        for target in ((i - 1, j), (i, j + 1)):
            if target not in lattice.cells:
                continue
            container = lattice.cell(*target)
            for b in span.basis:
                out.add("inclusion", container.residual(lattice.embed(b, (i, j), target).matrix))


def _check_commuting_squares(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> None:
    keys = sorted(lattice.cells)
    for first in keys:
        for second in keys:
            (i, j), (k, l) = first, second
            r, s = max(i, k), min(j, l)
            if r > s:
                continue
            container = (min(i, k), max(j, l))
            x = lattice.random_element(container, rng)
            direct = lattice.expectation(x, container, (r, s))
            one = lattice.expectation(
                lattice.embed(lattice.expectation(x, container, second), second, container),
                container,
                first,
            )
            other = lattice.expectation(
                lattice.embed(lattice.expectation(x, container, first), first, container),
                container,
                second,
            )
            out.add("commuting_square", (one - lattice.embed(direct, (r, s), first)).norm())
            out.add("commuting_square", (other - lattice.embed(direct, (r, s), second)).norm())


def _check_jones_conditions(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> None:
    bound = lattice.bound
    for i, j in sorted(lattice.cells):
        if i <= j - 1 and j + 1 <= bound:
            x = lattice.random_element((i, j), rng)
            e = lattice.jones_in(j + 1, (i, j + 1))
            big = lattice.embed(x, (i, j), (i, j + 1))
            reduced = lattice.embed(lattice.expectation(x, (i, j), (i, j - 1)), (i, j - 1), (i, j + 1))
            out.add("jones_horizontal", (e @ big @ e - reduced @ e).norm())
        if i >= 1 and i + 1 <= j:
            x = lattice.random_element((i, j), rng)
            e = lattice.jones_in(i + 1, (i - 1, j))
            big = lattice.embed(x, (i, j), (i - 1, j))
            reduced = lattice.embed(lattice.expectation(x, (i, j), (i + 1, j)), (i + 1, j), (i - 1, j))
            out.add("jones_vertical", (e @ big @ e - reduced @ e).norm())


def _check_markov_conditions(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> None:
    lam = lattice.lam
    for i, j in sorted(lattice.cells):
        if j + 2 <= lattice.bound:
            outer = (i, j + 2)
            x = lattice.random_element(outer, rng)
            e = lattice.jones_in(j + 2, outer)
            reduced = lattice.expectation(x @ e, outer, (i, j + 1))
            lhs = lattice.embed(reduced, (i, j + 1), outer).scale(1 / lam) @ e
            out.add("markov_horizontal", (lhs - x @ e).norm())
        if j >= i + 2:
            x = lattice.random_element((i, j), rng)
            e = lattice.jones_in(i + 2, (i, j))
            reduced = lattice.expectation(x @ e, (i, j), (i + 1, j))
            lhs = lattice.embed(reduced, (i + 1, j), (i, j)).scale(1 / lam) @ e
            out.add("markov_vertical", (lhs - x @ e).norm())


def _check_commutation(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> None:
    bound = lattice.bound
    for i, j in sorted(lattice.cells):
        for k in range(j, bound + 1):
            for l in range(k, bound + 1):
                x = lattice.embed(lattice.random_element((i, j), rng), (i, j), (i, l))
                y = lattice.embed(lattice.random_element((k, l), rng), (k, l), (i, l))
                out.add("commutation", (x @ y - y @ x).norm())


def _check_jones_sequence(lattice: PopaLattice, out: _Residuals) -> None:
    bound = lattice.bound
    full = (0, bound)
    es = {k: lattice.jones_in(k, full) for k in lattice.jones}
    lam = lattice.lam
    for k, e in es.items():
        out.add("jones_projection", (e @ e - e).norm() + (e.adjoint() - e).norm())
        for m, f in es.items():
            if abs(k - m) == 1:
                out.add("jones_sequence", (e @ f @ e - e.scale(lam)).norm())
            elif abs(k - m) >= 2:
                out.add("jones_sequence", (e @ f - f @ e).norm())
        for i in range(0, k - 1):
            for l in range(k, bound + 1):
                e_cell = lattice.jones_in(k, (i, l))
                out.add("jones_membership", lattice.cell(i, l).residual(e_cell.matrix))


def _check_traces(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> float:
    dm = lattice.duality
    min_eigenvalue = np.inf
    for key in sorted(lattice.cells):
        word = interval(*key)
        g = lattice.gram(key)
        out.add("trace_hermitian", np.linalg.norm(g - g.conj().T))
        min_eigenvalue = min(min_eigenvalue, float(linalg.eigvalsh((g + g.conj().T) / 2)[0]))
        ident = from_matrix(np.eye(lattice.n ** len(word)), lattice.n, word, word)
        out.add("trace_unit", abs(lattice.trace(ident) - 1))

        x = lattice.random_element(key, rng)
        left = conditional_expectation(dm, word, EMPTY, EMPTY, x).matrix[0, 0]
        out.add("corner_traces", abs(left - lattice.trace(x)))

        i, j = key
        for target in ((i + 1, j), (i, j - 1)):
            if target[0] > target[1]:
                continue
            out.add("trace_expectation", abs(lattice.trace(lattice.expectation(x, key, target)) - lattice.trace(x)))
    return float(min_eigenvalue)


def _check_double_step(lattice: PopaLattice, rng: np.random.Generator, out: _Residuals) -> None:
    dm = lattice.duality
    for i, j in sorted(lattice.cells):
        if j - i < 2:
            continue
        t = lattice.random_element((i, j), rng)
        e = lattice.jones_in(j, (i, j))
        lhs = lattice.expectation(e @ t @ e, (i, j), (i, j - 2))
        gamma = interval(j - 2, j - 1)
        rest = interval(i, j - 2)
        rhs = pad(cup(dm, gamma).adjoint(), left=rest) @ t @ pad(cup(dm, gamma), left=rest)
        out.add("double_step", (lhs - rhs.scale(lattice.lam ** 1.5)).norm())


def verify_axioms(lattice: PopaLattice, tol: float = VERIFY_TOL, seed: int = 0) -> AxiomReport:
    """
    Check the lattice axioms on seeded random elements.

    Covers scalar corners and inclusions, commuting squares, the horizontal and
    vertical Jones and Markov conditions, commutation of disjoint cells, the
    Jones sequence relations and cell membership, trace positivity and
    compatibility with the expectations, and the double-step expectation identity.
    """
    if lattice.bound < 3:
        logger.warning(f"Lattice bound {lattice.bound} < 3: several axioms have no instances")
    rng = np.random.default_rng(seed)
    out = _Residuals()
    _check_scalars_and_inclusions(lattice, out)
    _check_commuting_squares(lattice, rng, out)
    _check_jones_conditions(lattice, rng, out)
    _check_markov_conditions(lattice, rng, out)
    _check_commutation(lattice, rng, out)
    _check_jones_sequence(lattice, out)
    min_eigenvalue = _check_traces(lattice, rng, out)
    _check_double_step(lattice, rng, out)

    report = AxiomReport(out.values, seed, min_eigenvalue, out.counts)
    failures = report.failures(tol)
    if failures:
        logger.warning(f"Axiom check failed for {lattice.backend.label}: {', '.join(failures)}")
    else:
        logger.info(f"Axioms hold for {lattice.backend.label}, max residual {report.max_residual:.3g}")
    return report


@dataclass
class ShiftReport:
    """Span distances between A_ij and A_{i+2,j+2}."""
    distances: dict[str, float]

    @property
    def max_distance(self) -> float:
        return max(self.distances.values(), default=0.0)

    def passed(self, tol: float = VERIFY_TOL) -> bool:
        return self.max_distance <= tol

    def to_dict(self) -> dict[str, Any]:
        return {"distances": dict(sorted(self.distances.items())), "max_distance": self.max_distance}


def shift_check(lattice: PopaLattice) -> ShiftReport:
    """Compare A_ij with A_{i+2,j+2} as subspaces of the same matrix space."""
    distances = {}
    for i, j in sorted(lattice.cells):
        if (i + 2, j + 2) in lattice.cells:
            distances[f"{i},{j}"] = span_distance(lattice.cell(i, j), lattice.cell(i + 2, j + 2))
    if lattice.bound < 4:
        logger.warning(f"Shift check at bound {lattice.bound} compares only short cells")
    return ShiftReport(distances)
