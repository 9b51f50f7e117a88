"""Q-operator duality data: quantum dimension, cups and caps, Jones projections,
canonical traces and conditional expectations."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
from scipy import linalg

from .errors import QLatticeError
from .tensorops import (
    DEFAULT_TOL,
    TensorMap,
    compose,
    from_matrix,
    identity,
    matrix_from_json,
    matrix_to_json,
    pad,
    tensor,
    xi,
)
from .words import ALPHA, BETA, EMPTY, Letter, Word, all_words, hat

logger = logging.getLogger(__name__)

MAX_EIGENVALUE_SPREAD = 1e6


class DualityError(QLatticeError):
    """Raised for invalid Q-operators or mistyped duality computations."""
    pass


class Parity(str, Enum):
    """Parity of a Jones projection index."""
    EVEN = "even"
    ODD = "odd"

    @staticmethod
    def of(k: int) -> "Parity":
        return Parity.EVEN if k % 2 == 0 else Parity.ODD


@dataclass(frozen=True, eq=False)
class QData:
    """A positive-definite Q with Tr(Q^2) = Tr(Q^-2) (unless built unnormalized)."""
    n: int
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex).copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @staticmethod
    def identity(n: int) -> "QData":
        return QData(n, np.eye(n))

    @property
    def q_inv(self) -> np.ndarray:
        return np.linalg.inv(self.q)

    @property
    def d(self) -> float:
        return float(np.trace(self.q @ self.q).real)

    def is_identity(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.linalg.norm(self.q - np.eye(self.n)) < tol * max(1.0, self.n))

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "q": matrix_to_json(self.q)}

    @staticmethod
    def from_dict(data: dict[str, Any], normalize: bool = True) -> "QData":
        """Parse {"n", "q"} or the diagonal shorthand {"q_diag"}.

        Raises:
            DualityError: On missing or inconsistent fields.
        """
        if "q_diag" in data:
            q_raw = np.diag([float(v) for v in data["q_diag"]])
        elif "q" in data:
            q_raw = matrix_from_json(data["q"])
        else:
            raise DualityError("QData needs either 'q' or 'q_diag'")
        if "n" in data and int(data["n"]) != q_raw.shape[0]:
            raise DualityError(f"Declared n={data['n']} but Q is {q_raw.shape[0]}x{q_raw.shape[1]}")
        return make_qdata(q_raw, normalize=normalize)


def make_qdata(q_raw: Any, normalize: bool = True, tol: float = DEFAULT_TOL) -> QData:
    """Validate a positive matrix and rescale it so that Tr(Q^2) = Tr(Q^-2).

    Raises:
        DualityError: If the input is not Hermitian positive-definite or is too
            badly conditioned.
    """
    q_raw = np.asarray(q_raw, dtype=complex)
    if q_raw.ndim != 2 or q_raw.shape[0] != q_raw.shape[1] or q_raw.shape[0] == 0:
        raise DualityError(f"Q must be a nonempty square matrix, got shape {q_raw.shape}")
    scale = max(1.0, float(np.linalg.norm(q_raw)))
    if np.linalg.norm(q_raw - q_raw.conj().T) > tol * scale * 10:
        raise DualityError("Q is not Hermitian")
    q_raw = (q_raw + q_raw.conj().T) / 2
    eigenvalues = linalg.eigvalsh(q_raw)
    if eigenvalues[0] <= 0:
        raise DualityError(f"Q is not positive-definite (smallest eigenvalue {eigenvalues[0]:.3g})")
    if eigenvalues[-1] / eigenvalues[0] > MAX_EIGENVALUE_SPREAD:
        raise DualityError(
            f"Q eigenvalue spread {eigenvalues[-1] / eigenvalues[0]:.3g} exceeds {MAX_EIGENVALUE_SPREAD:g}"
        )
    if normalize:
        s = (np.sum(eigenvalues ** -2.0) / np.sum(eigenvalues ** 2.0)) ** 0.25
        q_raw = s * q_raw
        logger.debug(f"Normalized Q by s={s:.12g}")
    return QData(q_raw.shape[0], q_raw)


def q_from_F(f: Any) -> QData:
    """Q for the universal algebra defined by an invertible F: normalized transpose of sqrt(F*F).

    Raises:
        DualityError: If F is singular.
    """
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise DualityError(f"F must be square, got shape {f.shape}")
    singular = linalg.svdvals(f)
    if singular[-1] <= 1e-12 * singular[0]:
        raise DualityError("F is singular")
    w, v = linalg.eigh(f.conj().T @ f)
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    return make_qdata(root.T)


def tensor_qdata(a: QData, b: QData) -> QData:
    """Q of a tensor product of corepresentations."""
    return QData(a.n * b.n, np.kron(a.q, b.q))


def direct_sum_qdata(a: QData, b: QData) -> QData:
    """Q of a direct sum of corepresentations."""
    return QData(a.n + b.n, linalg.block_diag(a.q, b.q))


def dual_qdata(a: QData) -> QData:
    """Q of the canonical dual: the inverse transpose."""
    return QData(a.n, np.linalg.inv(a.q.T))


@dataclass(frozen=True, eq=False)
class DualityMaps:
    """The four cup/cap maps of a Q-operator together with d and lambda."""
    qdata: QData
    i_alpha: TensorMap
    i_beta: TensorMap
    p_alpha: TensorMap
    p_beta: TensorMap
    d: float
    lam: float
    _cups: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n(self) -> int:
        return self.qdata.n

    @property
    def q(self) -> np.ndarray:
        return self.qdata.q

    def letter_cup(self, letter: Letter) -> TensorMap:
        return self.i_alpha if letter is Letter.ALPHA else self.i_beta

    def cup_matrix(self, word: Word) -> np.ndarray:
        """Matrix of cup(word) reshaped to (dim word) x (dim hat(word))."""
        with self._lock:
            cached = self._cups.get(word)
        if cached is None:
            vector = cup(self, word).matrix[:, 0]
            cached = vector.reshape(self.n ** len(word), self.n ** len(word))
            cached.setflags(write=False)
            with self._lock:
                self._cups[word] = cached
        return cached


def make_duality(q_raw: Union[QData, Any], normalize: bool = True) -> DualityMaps:
    """Build the duality maps of a (possibly raw) positive matrix.

    Raises:
        DualityError: If the matrix is not an admissible Q.
    """
    qdata = q_raw if isinstance(q_raw, QData) else make_qdata(q_raw, normalize=normalize)
    q = qdata.q
    i_alpha = xi(q)
    i_beta_matrix = xi(np.linalg.inv(q).T).matrix
    i_beta = from_matrix(i_beta_matrix, qdata.n, EMPTY, Word.parse("ba"))
    d = float(np.trace(q @ q).real)
    return DualityMaps(
        qdata=qdata,
        i_alpha=i_alpha,
        i_beta=i_beta,
        p_alpha=i_beta.adjoint(),
        p_beta=i_alpha.adjoint(),
        d=d,
        lam=d ** -2,
    )


def cup(dm: DualityMaps, word: Word) -> TensorMap:
    """The map i_word : e -> word hat(word), nested letter by letter."""
    if word.is_empty:
        return identity(dm.n)
    first, rest = word[:1], word[1:]
    outer = dm.letter_cup(first[0])
    if rest.is_empty:
        return outer
    inner = pad(cup(dm, rest), left=first, right=hat(first))
    return compose(inner, outer)


def cap(dm: DualityMaps, word: Word) -> TensorMap:
    """The map p_word : hat(word) word -> e, the adjoint of cup(hat(word))."""
    return cup(dm, hat(word)).adjoint()


def nested_cap(dm: DualityMaps, word: Word) -> TensorMap:
    """p_word built by the nesting rule p_rs = p_s (id_hat(s) (x) p_r (x) id_s)."""
    if word.is_empty:
        return identity(dm.n)
    if len(word) == 1:
        return dm.p_alpha if word[0] is Letter.ALPHA else dm.p_beta
    r, s = word[:1], word[1:]
    middle = pad(nested_cap(dm, r), left=hat(s), right=s)
    return compose(nested_cap(dm, s), middle)


def jones_projection(dm: DualityMaps, parity: Parity) -> TensorMap:
    """Rank-one projection d^-1 i p onto C xi(Q) (even) or C xi((Q^-1)^t) (odd)."""
    if parity is Parity.EVEN:
        return compose(dm.i_alpha, dm.p_beta).scale(1 / dm.d)
    return compose(dm.i_beta, dm.p_alpha).scale(1 / dm.d)


def left_weight(dm: DualityMaps, r: Word) -> np.ndarray:
    c = dm.cup_matrix(hat(r))
    return c.conj().T @ c


def right_weight(dm: DualityMaps, w: Word) -> np.ndarray:
    c = dm.cup_matrix(w)
    return c @ c.conj().T


def conditional_expectation(
    dm: DualityMaps, r: Word, a: Word, w: Word, x: TensorMap
) -> TensorMap:
    """E_{r,a,w}(x) = d(r)^-1 d(w)^-1 (p_r (x) id_a (x) p_hat(w))(id (x) x (x) id)(i_hat(r) (x) id_a (x) i_w).

    Raises:
        DualityError: If x is not an endomorphism of H^{(r a w)}.
    """
    full = r + a + w
    if x.source != full or x.target != full or x.n != dm.n:
        raise DualityError(f"Expected an endomorphism of {full or 'e'}, got {x!r}")
    dr, da, dw = (dm.n ** len(part) for part in (r, a, w))
    tensor6 = x.matrix.reshape(dr, da, dw, dr, da, dw)
    result = np.einsum(
        "iajkbl,ik,lj->ab", tensor6, left_weight(dm, r), right_weight(dm, w), optimize=True
    )
    result = result / dm.d ** (len(r) + len(w))
    return from_matrix(result, dm.n, a, a)


def canonical_trace(dm: DualityMaps, x: TensorMap, w: Optional[Word] = None) -> complex:
    """tau_w(x) = d^-|w| Tr(x M_w), the full contraction with nested cups."""
    w = x.source if w is None else w
    return complex(conditional_expectation(dm, EMPTY, EMPTY, w, x).matrix[0, 0])


@dataclass
class DualityReport:
    """Residuals of the duality identities."""
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max_residual <= tol

    def to_dict(self) -> dict[str, Any]:
        return {"residuals": dict(sorted(self.residuals.items())), "max_residual": self.max_residual}


def _snake_residuals(dm: DualityMaps, word: Word) -> tuple[float, float]:
    ident = identity(dm.n, word)
    left = compose(
        pad(cap(dm, word), left=word),
        pad(cup(dm, word), right=word),
    )
    w_hat = hat(word)
    right = compose(
        pad(cap(dm, w_hat), right=word),
        pad(cup(dm, w_hat), left=word),
    )
    return (left - ident).norm(), (right - ident).norm()


def verify_duality(dm: DualityMaps, tol: float = DEFAULT_TOL, max_len: int = 3) -> DualityReport:
    """Check the snake, loop and nesting identities plus the Jones relation."""
    residuals: dict[str, float] = {}
    for letter_word in (ALPHA, BETA):
        first, second = _snake_residuals(dm, letter_word)
        residuals[f"snake_{letter_word}_1"] = first
        residuals[f"snake_{letter_word}_2"] = second
    residuals["loop_alpha"] = abs(compose(dm.p_beta, dm.i_alpha).matrix[0, 0] - dm.d)
    residuals["loop_beta"] = abs(compose(dm.p_alpha, dm.i_beta).matrix[0, 0] - dm.d)
    residuals["normalization"] = abs(
        np.trace(dm.q @ dm.q) - np.trace(dm.qdata.q_inv @ dm.qdata.q_inv)
    )

    for word in all_words(max_len):
        if len(word) < 2:
            continue
        residuals[f"nesting_{word}"] = (nested_cap(dm, word) - cap(dm, word)).norm()
        first, second = _snake_residuals(dm, word)
        residuals[f"snake_{word}"] = max(first, second)

    e = pad(jones_projection(dm, Parity.EVEN), right=ALPHA)
    f = pad(jones_projection(dm, Parity.ODD), left=ALPHA)
    residuals["jones_relation"] = (f @ e @ f - f.scale(dm.lam)).norm()
    residuals["jones_relation_dual"] = (e @ f @ e - e.scale(dm.lam)).norm()

    e_vector = dm.q / np.sqrt(np.trace(dm.q @ dm.q).real)
    f_vector = dm.qdata.q_inv / np.sqrt(np.trace(dm.qdata.q_inv @ dm.qdata.q_inv).real)
    product = (f_vector.conj().T @ f_vector) @ (e_vector.conj().T @ e_vector)
    residuals["jones_vectors"] = float(np.linalg.norm(product - dm.lam * np.eye(dm.n)))

    report = DualityReport({k: float(v) for k, v in residuals.items()})
    if report.passed(tol):
        logger.debug(f"Duality verified, max residual {report.max_residual:.3g}")
    else:
        logger.warning(f"Duality residual {report.max_residual:.3g} exceeds {tol:g}")
    return report
