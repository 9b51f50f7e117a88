"""Concrete representations of a lattice: normalization, and the universal closure category."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.stats import unitary_group

from .backends import lift_to_hom, lower_to_vector
from .duality import DualityError, DualityMaps, Parity, QData, jones_projection, make_duality, make_qdata
from .errors import QLatticeError
from .lattice import Cell, PopaLattice
from .moments import MomentTable
from .tensorops import DEFAULT_TOL, OperatorSpan, TensorMap, from_matrix, orthonormalize_array, pad, xi
from .words import EMPTY, Letter, Word, all_words, hat, interval, is_alternating

logger = logging.getLogger(__name__)

MIN_CONDITIONING = 1e-6
MAX_ROUNDS = 12


class NormalizationError(QLatticeError):
    """Raised when a representation cannot be brought to normal form."""
    pass


class NotNormalizableError(NormalizationError):
    """Raised when the image of e_2 is not a rank-one projection."""
    pass


class InconsistentRepresentationError(NormalizationError):
    """Raised when a Jones image is spanned by a (near-)singular matrix."""
    pass


class ClosureError(QLatticeError):
    """Raised when the closure iteration does not stabilize or a request leaves its window."""
    pass


@dataclass
class PopaRepresentation:
    """Cells A_ij realized on H^[i,j] together with the images of the Jones projections."""
    n: int
    cells: dict[Cell, OperatorSpan]
    jones_images: dict[int, TensorMap]
    lam: float

    @property
    def bound(self) -> int:
        return max(j for _, j in self.cells)

    def jones_in(self, k: int, target: Cell) -> TensorMap:
        i, j = target
        return pad(self.jones_images[k], left=interval(i, k - 2), right=interval(k, j))


def representation_from_lattice(lattice: PopaLattice) -> PopaRepresentation:
    """The identity representation of a built lattice."""
    return PopaRepresentation(lattice.n, dict(lattice.cells), dict(lattice.jones), lattice.lam)


def _leg_unitary(unitaries: Sequence[np.ndarray], start: int, stop: int) -> np.ndarray:
    v = np.eye(1, dtype=complex)
    for position in range(start, stop):
        v = np.kron(v, unitaries[position])
    return v


def conjugate_representation(rep: PopaRepresentation, unitaries: Sequence[np.ndarray]) -> PopaRepresentation:
    """
    Conjugate every cell by the leg unitaries: unitaries[k] acts on global leg k.

    Raises:
        NormalizationError: If fewer unitaries than legs are given.
    """
    if len(unitaries) < rep.bound:
        raise NormalizationError(f"Need {rep.bound} leg unitaries, got {len(unitaries)}")
    cells = {}
    for (i, j), span in rep.cells.items():
        v = _leg_unitary(unitaries, i, j)
        cells[(i, j)] = span.conjugated(v, v.conj().T)
    images = {}
    for k, e in rep.jones_images.items():
        v = _leg_unitary(unitaries, k - 2, k)
        images[k] = from_matrix(v @ e.matrix @ v.conj().T, rep.n, e.source, e.target)
    return PopaRepresentation(rep.n, cells, images, rep.lam)


def random_leg_unitaries(n: int, count: int, seed: int, fix_first: bool = True) -> list[np.ndarray]:
    """Seeded Haar unitaries, one per leg; the first is the identity unless fix_first is False."""
    rng = np.random.default_rng(seed)
    unitaries = [np.asarray(unitary_group.rvs(n, random_state=rng)) for _ in range(count)]
    if fix_first and count:
        unitaries[0] = np.eye(n, dtype=complex)
    return unitaries


def _image_vector(e: np.ndarray, tol: float) -> np.ndarray:
    """Unit vector spanning the image of a rank-one projection."""
    values, vectors = linalg.eigh((e + e.conj().T) / 2)
    order = np.argsort(values)[::-1]
    values = np.abs(values[order])
    if values[0] <= tol:
        raise NotNormalizableError("Jones image vanishes")
    if values.size > 1 and values[1] > tol * values[0]:
        raise NotNormalizableError(
            f"Jones image has rank > 1 (second eigenvalue {values[1]:.3g} vs {values[0]:.3g})"
        )
    return vectors[:, order[0]]


def _check_conditioning(matrix: np.ndarray, what: str) -> None:
    s = linalg.svdvals(matrix)
    if s[-1] < MIN_CONDITIONING * s[0]:
        raise InconsistentRepresentationError(f"{what} is singular (condition {s[0] / s[-1]:.3g})")


def _unitary_part(matrix: np.ndarray) -> np.ndarray:
    u, _ = linalg.polar(matrix, side="left")
    return u


@dataclass
class NormalizationResult:
    """The normalized representation, its Q, and the leg unitaries that produced it."""
    representation: PopaRepresentation
    qdata: QData
    unitaries: list[np.ndarray]
    jones_relation_residuals: dict[int, float] = field(default_factory=dict)
    dimension_residual: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.qdata.d,
            "q_eigenvalues": [float(x) for x in linalg.eigvalsh(self.qdata.q)],
            "jones_relation_residuals": {str(k): v for k, v in sorted(self.jones_relation_residuals.items())},
            "dimension_residual": self.dimension_residual,
        }


def normalize(rep: PopaRepresentation, tol: float = DEFAULT_TOL) -> NormalizationResult:
    """
    Find leg unitaries and Q such that the conjugated representation sends
    e_k to the Jones projections of Q.

    Step one reads E off the image of e_2 and splits E = P U; P normalized is
    Q and conj(U) corrects the second leg. Each later image C xi(N) then
    fixes the next leg through the unitary part of (N^-1 T)^t, where T is Q
    or (Q^-1)^t by parity. The first leg is never moved.

    Raises:
        NotNormalizableError: If the image of e_2 is not rank one.
        InconsistentRepresentationError: If some image is spanned by a
            singular matrix or Q is unusable.
    """
    n = rep.n
    if 2 not in rep.jones_images:
        raise NotNormalizableError("Representation has no image of e_2")

    nu = _image_vector(rep.jones_images[2].matrix, tol)
    e_mat = nu.reshape(n, n)
    trace = np.trace(e_mat)
    if abs(trace) > tol:
        e_mat = e_mat * (abs(trace) / trace)
    _check_conditioning(e_mat, "E from the image of e_2")
    u, p = linalg.polar(e_mat, side="left")
    try:
        qdata = make_qdata(p, normalize=True)
    except DualityError as e:
        raise InconsistentRepresentationError(f"Positive part of E is not an admissible Q: {e}") from e

    q = qdata.q
    targets = {Parity.EVEN: q, Parity.ODD: np.linalg.inv(q).T}
    unitaries = [np.eye(n, dtype=complex), u.conj()]
    jones_relation_residuals = {}
    previous = e_mat / np.linalg.norm(e_mat)
    lam = rep.lam
    for s in range(3, rep.bound + 1):
        if s not in rep.jones_images:
            raise NotNormalizableError(f"Representation has no image of e_{s}")
        raw = rep.jones_images[s].matrix
        nu_raw = _image_vector(raw, tol)
        f = nu_raw.reshape(n, n).T
        relation = (f.conj().T @ f) @ (previous.conj().T @ previous) - lam * np.eye(n)
        jones_relation_residuals[s] = float(np.linalg.norm(relation))
        previous = nu_raw.reshape(n, n)

        v = np.kron(unitaries[s - 2], np.eye(n))
        nu = _image_vector(v @ raw @ v.conj().T, tol)
        t = targets[Parity.of(s)]
        overlap = np.vdot(xi(t).matrix[:, 0], nu)
        if abs(overlap) > tol:
            nu = nu * (abs(overlap) / overlap)
        n_mat = nu.reshape(n, n)
        _check_conditioning(n_mat, f"N from the image of e_{s}")
        unitaries.append(_unitary_part((np.linalg.inv(n_mat) @ t).T))
        logger.debug(f"normalize: leg {s - 1} fixed, Jones relation residual {jones_relation_residuals[s]:.3g}")

    unitaries = unitaries[: max(rep.bound, 2)]
    normalized = conjugate_representation(rep, unitaries)
    dimension_residual = abs(qdata.d - lam ** -0.5)
    logger.info(f"Normalized representation: d={qdata.d:.12g}, |d - lambda^-1/2|={dimension_residual:.3g}")
    return NormalizationResult(normalized, qdata, unitaries, jones_relation_residuals, dimension_residual)


@dataclass
class NormalizationReport:
    """Residuals of the normal-form conditions."""
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.max_residual <= tol

    def to_dict(self) -> dict[str, Any]:
        return {"residuals": dict(sorted(self.residuals.items())), "max_residual": self.max_residual}


def check_normalized(rep: PopaRepresentation, qdata: QData) -> NormalizationReport:
    """Compare Jones images with the projections of Q and check padding of nested cells."""
    dm = make_duality(qdata)
    residuals = {
        "trace_symmetry": abs(np.trace(qdata.q @ qdata.q) - np.trace(qdata.q_inv @ qdata.q_inv)),
        "dimension": abs(dm.d - rep.lam ** -0.5),
        "jones": 0.0,
        "padding": 0.0,
        "jones_membership": 0.0,
    }
    for k, image in rep.jones_images.items():
        expected = jones_projection(dm, Parity.of(k))
        residuals["jones"] = max(residuals["jones"], float(np.linalg.norm(image.matrix - expected.matrix)))
    for (i, j), span in rep.cells.items():
        for big in ((i - 1, j), (i, j + 1)):
            if big not in rep.cells:
                continue
            container = rep.cells[big]
            for b in span.basis:
                padded = pad(b, left=interval(big[0], i), right=interval(j, big[1]))
                residuals["padding"] = max(residuals["padding"], container.residual(padded.matrix))
    for k in rep.jones_images:
        for (i, j), span in rep.cells.items():
            if i <= k - 2 and k <= j:
                residual = span.residual(rep.jones_in(k, (i, j)).matrix)
                residuals["jones_membership"] = max(residuals["jones_membership"], residual)
    return NormalizationReport({name: float(value) for name, value in residuals.items()})


class Schedule(str, Enum):
    """Order in which a closure round updates the tracked spaces."""
    JACOBI = "jacobi"
    GAUSS_SEIDEL = "gauss_seidel"


def _orthonormal_rows(stack: np.ndarray, tol: float) -> np.ndarray:
    if stack.shape[0] == 0:
        return stack
    _, s, vh = linalg.svd(stack, full_matrices=False)
    if s.size == 0 or s[0] <= np.finfo(float).tiny:
        return stack[:0]
    return vh[: int(np.sum(s > tol * s[0]))]


@dataclass
class ClosureCategory:
    """
    Invariant vectors V(w) = hom(e, w) of the category generated by the cups,
    the caps and the seeded algebras, for every word up to the window length.
    Every hom(x, y) is recovered from V(hat(x) y) by Frobenius reciprocity.
    """
    duality: DualityMaps
    seeded_cells: dict[Word, OperatorSpan]
    vectors: dict[Word, np.ndarray]
    window: int
    tol: float
    rounds: int
    history: list[dict[str, int]] = field(default_factory=list, repr=False)
    _homs: dict[tuple[Word, Word], OperatorSpan] = field(default_factory=dict, repr=False)

    def vector_dim(self, w: Word) -> int:
        if len(w) > self.window:
            raise ClosureError(f"{w!r} is longer than the closure window {self.window}")
        return self.vectors[w].shape[0]

    def hom_dim(self, x: Word, y: Word) -> int:
        return self.vector_dim(hat(x) + y)

    def hom(self, x: Word, y: Word) -> OperatorSpan:
        key = (x, y)
        if key not in self._homs:
            rows = self.vectors[hat(x) + y] if len(x) + len(y) <= self.window else None
            if rows is None:
                raise ClosureError(f"hom({x or 'e'}, {y or 'e'}) is outside the closure window {self.window}")
            stack = lift_to_hom(self.duality, x, y, rows) if rows.shape[0] else np.zeros((0,))
            self._homs[key] = orthonormalize_array(stack, self.duality.n, x, y, self.tol)
        return self._homs[key]

    def end_dims(self, max_len: int) -> dict[Word, int]:
        """dim End(x) for the alternating words with 2|x| inside the window."""
        return {
            w: self.hom_dim(w, w)
            for w in all_words(max_len)
            if is_alternating(w) and 2 * len(w) <= self.window
        }

    def to_dict(self) -> dict[str, Any]:
        ordered = sorted(self.vectors, key=lambda w: (len(w), w))
        return {
            "window": self.window,
            "rounds": self.rounds,
            "dims": {str(w): int(self.vectors[w].shape[0]) for w in ordered},
        }


class _ClosureState:
    """Candidate generation for one target word from the current vector spaces."""

    def __init__(self, dm: DualityMaps, window: int, tol: float):
        self.dm = dm
        self.n = dm.n
        self.window = window
        self.tol = tol
        a, b = Word((Letter.ALPHA,)), Word((Letter.BETA,))
        self.cups = {Letter.ALPHA: dm.cup_matrix(a), Letter.BETA: dm.cup_matrix(b)}

    def _tensor(self, t: Word, vectors: Mapping[Word, np.ndarray]) -> list[np.ndarray]:
        out = []
        for cut in range(1, len(t)):
            left, right = vectors[t[:cut]], vectors[t[cut:]]
            if left.shape[0] and right.shape[0]:
                out.append(np.einsum("ai,bj->abij", left, right).reshape(-1, self.n ** len(t)))
        return out

    def _caps(self, t: Word, vectors: Mapping[Word, np.ndarray]) -> list[np.ndarray]:
        if len(t) + 2 > self.window:
            return []
        out = []
        for position in range(len(t) + 1):
            for letter in Letter:
                pair = Word((letter, letter.hat()))
                rows = vectors[t[:position] + pair + t[position:]]
                if not rows.shape[0]:
                    continue
                shaped = rows.reshape(rows.shape[0], self.n ** position, self.n, self.n, -1)
                contracted = np.einsum("mpijq,ij->mpq", shaped, self.cups[letter].conj())
                out.append(contracted.reshape(rows.shape[0], -1))
        return out

    def _rotations(self, t: Word, vectors: Mapping[Word, np.ndarray]) -> list[np.ndarray]:
        out = []
        m = self.n ** (len(t) - 1)
        last, first = t[-1], t[0]
        rows = vectors[Word((last,)) + t[:-1]]
        if rows.shape[0]:
            c = self.cups[last.hat()]
            g = c.conj().T @ c
            shaped = rows.reshape(rows.shape[0], self.n, m)
            out.append(np.einsum("msw,sj->mwj", shaped, g).reshape(rows.shape[0], -1))
        rows = vectors[t[1:] + Word((first,))]
        if rows.shape[0]:
            c = self.cups[first]
            h = c @ c.conj().T
            shaped = rows.reshape(rows.shape[0], m, self.n)
            out.append(np.einsum("mws,is->miw", shaped, h).reshape(rows.shape[0], -1))
        return out

    def _adjoints(self, t: Word, vectors: Mapping[Word, np.ndarray]) -> list[np.ndarray]:
        rows = vectors[hat(t)]
        if not rows.shape[0]:
            return []
        return [rows.conj() @ self.dm.cup_matrix(t).T]

    def grow(self, t: Word, vectors: Mapping[Word, np.ndarray]) -> np.ndarray:
        parts = [vectors[t]]
        parts += self._tensor(t, vectors)
        parts += self._caps(t, vectors)
        parts += self._rotations(t, vectors)
        parts += self._adjoints(t, vectors)
        return _orthonormal_rows(np.concatenate(parts), self.tol)


def _initial_vectors(
    dm: DualityMaps, seeds: Mapping[Word, OperatorSpan], window: int, tol: float
) -> dict[Word, np.ndarray]:
    n = dm.n
    vectors = {w: np.zeros((0, n ** len(w)), dtype=complex) for w in all_words(window)}
    vectors[EMPTY] = np.ones((1, 1), dtype=complex)
    if window >= 2:
        for letter in Letter:
            w = Word((letter, letter.hat()))
            vectors[w] = dm.cup_matrix(Word((letter,))).reshape(1, -1).astype(complex)
    for x, span in seeds.items():
        if 2 * len(x) > window or span.dim == 0:
            continue
        w = hat(x) + x
        lowered = lower_to_vector(dm, x, span.stack)
        vectors[w] = _orthonormal_rows(np.concatenate([vectors[w], lowered]), tol)
    return vectors


def closure(
    dm: DualityMaps,
    seeds: Mapping[Word, OperatorSpan],
    words: Optional[Iterable[tuple[Word, Word]]] = None,
    tol: float = DEFAULT_TOL,
    window: Optional[int] = None,
    max_rounds: int = MAX_ROUNDS,
    schedule: Schedule = Schedule.JACOBI,
    threads: int = 1,
) -> ClosureCategory:
    """
    Close the cups, caps and seeded algebras under tensor products,
    contractions, rotations and adjoints, inside a window of word lengths.

    Args:
        dm: Duality maps of the representation.
        seeds: Algebras A_x on alternating words x.
        words: Hom pairs that must be answerable; the window defaults to
            the longest |x| + |y| plus two.
        tol: Relative rank cutoff.
        window: Longest tracked word, overriding the default.
        max_rounds: Iteration cap.
        schedule: Jacobi rounds recompute every space from the previous
            round; Gauss-Seidel rounds update in place, shortest words first.
        threads: Worker threads for Jacobi rounds.

    Raises:
        ClosureError: If a seed is not alternating, or no fixed point is
            reached within max_rounds.
    """
    schedule = Schedule(schedule)
    for x in seeds:
        if not is_alternating(x):
            raise ClosureError(f"Seed word {x!r} is not alternating")
    if window is None:
        pairs = list(words or [])
        if pairs:
            window = max(len(x) + len(y) for x, y in pairs) + 2
        else:
            window = 2 * max((len(x) for x in seeds), default=1)

    state = _ClosureState(dm, window, tol)
    vectors = _initial_vectors(dm, seeds, window, tol)
    targets = [w for w in all_words(window) if not w.is_empty]
    history = [{str(w): v.shape[0] for w, v in vectors.items()}]

    for round_index in range(1, max_rounds + 1):
        before = {w: v.shape[0] for w, v in vectors.items()}
        if schedule is Schedule.JACOBI:
            snapshot = dict(vectors)
            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                grown = list(pool.map(lambda t: state.grow(t, snapshot), targets))
            vectors.update(zip(targets, grown))
        else:
            for t in targets:
                vectors[t] = state.grow(t, vectors)
        after = {w: v.shape[0] for w, v in vectors.items()}
        history.append({str(w): d for w, d in after.items()})
        changed = sum(1 for w in after if after[w] != before[w])
        logger.debug(f"closure round {round_index} ({schedule.value}): {changed} spaces grew")
        if not changed:
            logger.info(f"Closure stabilized after {round_index} rounds, window {window}")
            return ClosureCategory(dm, dict(seeds), vectors, window, tol, round_index, history)

    raise ClosureError(f"Closure did not stabilize within {max_rounds} rounds (window {window})")


def seeds_from_lattice(lattice: PopaLattice, max_len: Optional[int] = None) -> dict[Word, OperatorSpan]:
    """The cells A_ij keyed by their words; shifted copies of a word are the same algebra."""
    seeds: dict[Word, OperatorSpan] = {}
    for (i, j), span in sorted(lattice.cells.items()):
        w = interval(i, j)
        if max_len is not None and len(w) > max_len:
            continue
        seeds.setdefault(w, span)
    return seeds


def closure_from_lattice(
    lattice: PopaLattice,
    max_len: int,
    schedule: Schedule = Schedule.JACOBI,
    threads: int = 1,
    max_rounds: int = MAX_ROUNDS,
) -> ClosureCategory:
    """Closure answering every hom(x, y) with |x| + |y| <= max_len."""
    window = max_len + 2
    seeds = seeds_from_lattice(lattice, window // 2)
    return closure(
        lattice.duality, seeds, tol=lattice.tol, window=window,
        max_rounds=max_rounds, schedule=schedule, threads=threads,
    )


def universal_hom_dims(cc: ClosureCategory, max_len: int) -> MomentTable:
    """
    dim hom(e, w) for every word of length at most max_len.

    Raises:
        ClosureError: If max_len exceeds the closure window.
    """
    if max_len > cc.window:
        raise ClosureError(f"max_len {max_len} exceeds the closure window {cc.window}")
    return MomentTable({w: cc.vector_dim(w) for w in all_words(max_len)}, max_len)
