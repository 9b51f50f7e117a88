"""The free unitary backend: hom spaces generated by cups and caps of a Q-operator alone."""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Any, Optional

import numpy as np

from ..duality import DualityMaps, Parity, QData, jones_projection, make_duality
from ..tensorops import DEFAULT_TOL, OperatorSpan, matrix_to_json, orthonormalize_array
from ..words import Letter, Word, hat
from .base import Backend

logger = logging.getLogger(__name__)

MAX_CLOSURE_ROUNDS = 8

Pairing = tuple[tuple[int, int], ...]


@lru_cache(maxsize=None)
def noncrossing_pairings(w: Word) -> tuple[Pairing, ...]:
    """Noncrossing perfect matchings of the letters of w joining alpha to beta."""

    @lru_cache(maxsize=None)
    def between(lo: int, hi: int) -> tuple[Pairing, ...]:
        if lo >= hi:
            return ((),)
        result = []
        for partner in range(lo + 1, hi, 2):
            if w[partner] is w[lo]:
                continue
            for inner in between(lo + 1, partner):
                for outer in between(partner + 1, hi):
                    result.append(((lo, partner),) + inner + outer)
        return tuple(result)

    if len(w) % 2:
        return ()
    return between(0, len(w))


class SpanQRep(Backend):
    """Intertwiners of the universal pair attached to Q: noncrossing cup/cap diagrams."""

    kind = "span_q"

    def __init__(self, duality: DualityMaps, label: Optional[str] = None):
        self._dm = duality
        super().__init__(duality.qdata, label=label)
        self._duality = duality

    @staticmethod
    def from_q(q_raw: Any, label: Optional[str] = None) -> "SpanQRep":
        return SpanQRep(make_duality(q_raw), label=label)

    @staticmethod
    def from_qdata(qdata: QData, label: Optional[str] = None) -> "SpanQRep":
        return SpanQRep(make_duality(qdata), label=label)

    def _pair_matrix(self, first: Letter) -> np.ndarray:
        """Components of the cup joining a left leg of type ``first`` to its partner."""
        q = self._dm.q
        return q if first is Letter.ALPHA else np.linalg.inv(q).T

    def pairing_vectors(self, w: Word) -> np.ndarray:
        """One vector of H^{(w)} per noncrossing pairing, as rows."""
        pairings = noncrossing_pairings(w)
        size = self.n ** len(w)
        if not w:
            return np.ones((1, 1), dtype=complex)
        vectors = np.zeros((len(pairings), size), dtype=complex)
        for row, pairing in enumerate(pairings):
            operands: list[Any] = []
            for left, right in pairing:
                operands.extend([self._pair_matrix(w[left]), [left, right]])
            vectors[row] = np.einsum(*operands, list(range(len(w)))).reshape(-1)
        return vectors

    def _generators(self, w: Word) -> list[np.ndarray]:
        """Jones projections placed on every adjacent alpha-beta pair of w."""
        gens = []
        for position in range(len(w) - 1):
            pair = w[position:position + 2]
            if pair[0] is pair[1]:
                continue
            parity = Parity.EVEN if pair[0] is Letter.ALPHA else Parity.ODD
            e = jones_projection(self._dm, parity).matrix
            left = np.eye(self.n ** position)
            right = np.eye(self.n ** (len(w) - position - 2))
            gens.append(np.kron(np.kron(left, e), right))
        return gens

    def _compute_hom(self, x: Word, y: Word, tol: float) -> OperatorSpan:
        """Diagram span closed under composition with the Jones generators at both ends."""
        span = self._span_from_vectors(x, y, self.pairing_vectors(hat(x) + y), tol)
        left_gens, right_gens = self._generators(y), self._generators(x)
        for round_index in range(MAX_CLOSURE_ROUNDS):
            if span.dim == 0 or not (left_gens or right_gens):
                return span
            products = [span.stack]
            products += [g @ span.stack for g in left_gens]
            products += [span.stack @ g for g in right_gens]
            grown = orthonormalize_array(np.concatenate(products), self.n, x, y, tol)
            logger.debug(f"span_q hom({x or 'e'},{y or 'e'}) round {round_index}: {span.dim} -> {grown.dim}")
            if grown.dim == span.dim:
                return grown
            span = grown
        return span

    def _compute_moment(self, w: Word) -> int:
        """Numerical rank of the diagram vectors of w."""
        if not w:
            return 1
        vectors = self.pairing_vectors(w)
        if vectors.shape[0] == 0:
            return 0
        s = np.linalg.svd(vectors, compute_uv=False)
        return int(np.sum(s > DEFAULT_TOL * s[0]))

    def pairing_count(self, w: Word) -> int:
        return len(noncrossing_pairings(w))

    def describe(self) -> dict[str, Any]:
        return {"type": self.kind, "q": matrix_to_json(self.qdata.q)}
