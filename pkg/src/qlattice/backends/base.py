"""Common backend interface: memoized hom spaces and moments, Frobenius helpers."""

from __future__ import annotations

import logging
import threading
from abc import ABC, abstractmethod
from typing import Any, Optional

import numpy as np

from ..duality import DualityMaps, QData, make_duality
from ..errors import QLatticeError
from ..tensorops import DEFAULT_TOL, OperatorSpan, orthonormalize_array
from ..words import Word, hat, interval, words_of_length

logger = logging.getLogger(__name__)


class BackendError(QLatticeError):
    """Raised when a backend cannot answer a query."""
    pass


class BackendConfigError(BackendError):
    """Raised for malformed or inconsistent backend descriptions."""
    pass


def lift_to_hom(dm: DualityMaps, x: Word, y: Word, vectors: np.ndarray) -> np.ndarray:
    """Map vectors of H^{(hat(x) y)} to matrices H^{(x)} -> H^{(y)}.

    T = (p_hat(x) (x) id_y)(id_x (x) v); returns shape (m, dim y, dim x).
    """
    dim_x, dim_y = dm.n ** len(x), dm.n ** len(y)
    cups = dm.cup_matrix(x)
    v = np.asarray(vectors).reshape(-1, dim_x, dim_y)
    return np.einsum("as,msb->mba", cups.conj(), v)


def lower_to_vector(dm: DualityMaps, x: Word, matrices: np.ndarray) -> np.ndarray:
    """Inverse of lift_to_hom: v = (id_hat(x) (x) T) i_hat(x); returns shape (m, dim hat(x) y)."""
    cups = dm.cup_matrix(hat(x))
    t = np.asarray(matrices)
    return np.einsum("sa,mba->msb", cups, t).reshape(t.shape[0], -1)


class Backend(ABC):
    """A source of intertwiner spaces Hom(v^{(x)}, v^{(y)}) for one corepresentation v."""

    kind: str = "abstract"

    def __init__(self, qdata: QData, label: Optional[str] = None):
        self._qdata = qdata
        self.label = label or self.kind
        self._duality: Optional[DualityMaps] = None
        self._homs: dict[tuple[Word, Word, float], OperatorSpan] = {}
        self._moments: dict[Word, int] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self._qdata.n

    @property
    def qdata(self) -> QData:
        return self._qdata

    @property
    def duality(self) -> DualityMaps:
        if self._duality is None:
            self._duality = make_duality(self._qdata)
        return self._duality

    def hom_basis(self, x: Word, y: Word, tol: float = DEFAULT_TOL) -> OperatorSpan:
        """Orthonormal basis of Hom(v^{(x)}, v^{(y)}), memoized per (x, y, tol)."""
        key = (x, y, tol)
        with self._lock:
            cached = self._homs.get(key)
        if cached is not None:
            return cached
        span = self._compute_hom(x, y, tol)
        logger.debug(f"{self.label}: hom({x or 'e'}, {y or 'e'}) has dim {span.dim}")
        with self._lock:
            return self._homs.setdefault(key, span)

    def cell(self, i: int, j: int, tol: float = DEFAULT_TOL) -> OperatorSpan:
        w = interval(i, j)
        return self.hom_basis(w, w, tol)

    def moment(self, w: Word) -> int:
        """dim Hom(1, v^{(w)}), memoized."""
        with self._lock:
            cached = self._moments.get(w)
        if cached is not None:
            return cached
        value = int(self._compute_moment(w))
        with self._lock:
            return self._moments.setdefault(w, value)

    def closed_walk_counts(self, k_max: int) -> list[int]:
        """dim Hom(1, (v + hat v)^{(k)}) for k = 0..k_max, summed word by word."""
        return [sum(self.moment(w) for w in words_of_length(k)) for k in range(k_max + 1)]

    def hom_dim_via_frobenius(self, x: Word, y: Word) -> int:
        return self.moment(hat(x) + y)

    def _span_from_vectors(self, x: Word, y: Word, vectors: np.ndarray, tol: float) -> OperatorSpan:
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.size == 0:
            return orthonormalize_array(np.zeros((0,)), self.n, x, y, tol)
        stack = lift_to_hom(self.duality, x, y, vectors)
        return orthonormalize_array(stack, self.n, x, y, tol)

    @abstractmethod
    def _compute_hom(self, x: Word, y: Word, tol: float) -> OperatorSpan:
        ...

    @abstractmethod
    def _compute_moment(self, w: Word) -> int:
        ...

    @abstractmethod
    def describe(self) -> dict[str, Any]:
        """JSON descriptor round-trippable through load_backend."""
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, n={self.n})"
