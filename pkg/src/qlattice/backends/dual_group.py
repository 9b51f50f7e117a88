"""Duals of discrete groups: v = diag(u_g1, ..., u_gn) in the group C*-algebra."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from ..duality import QData
from ..tensorops import OperatorSpan
from ..words import Letter, Word
from .base import Backend, BackendConfigError
from .groups import Element, FreeAbelianGroup, FreeProduct, Group

logger = logging.getLogger(__name__)


class DualGroupRep(Backend):
    """The corepresentation diag(u_g1, ..., u_gn) of a discrete group's dual."""

    kind = "dual_group"

    def __init__(self, group: Group, generators: Sequence[Element], label: Optional[str] = None):
        """
        Args:
            group: The discrete group, in normal-form representation.
            generators: Elements g1..gn (repetitions allowed).

        Raises:
            BackendConfigError: If no generators are given.
        """
        if not generators:
            raise BackendConfigError("dual_group needs at least one generator")
        self.group = group
        self.generators = list(generators)
        self._inverses = [group.inverse(g) for g in self.generators]
        self._max_norm = max(group.norm(g) for g in self.generators)
        self._values: dict[Word, list[Element]] = {}
        super().__init__(QData.identity(len(self.generators)), label=label)

    def step(self, letter: Letter, index: int) -> Element:
        return self.generators[index] if letter is Letter.ALPHA else self._inverses[index]

    def _steps_needed(self, element: Element) -> int:
        if self._max_norm == 0:
            return 0
        return -(-self.group.norm(element) // self._max_norm)

    def word_values(self, w: Word) -> list[Element]:
        """Group value of every multi-index of H^{(w)}, in basis order."""
        with self._lock:
            cached = self._values.get(w)
        if cached is not None:
            return cached
        values = [self.group.identity]
        for letter in w:
            steps = [self.step(letter, i) for i in range(self.n)]
            values = [self.group.multiply(v, s) for v in values for s in steps]
        with self._lock:
            self._values[w] = values
        return values

    def _compute_hom(self, x: Word, y: Word, tol: float) -> OperatorSpan:
        """Matrix units E_{J,I} with word_y(J) = word_x(I)."""
        sources: dict[Element, list[int]] = defaultdict(list)
        for index, value in enumerate(self.word_values(x)):
            sources[value].append(index)
        units = []
        rows, cols = self.n ** len(y), self.n ** len(x)
        for j, value in enumerate(self.word_values(y)):
            for i in sources.get(value, ()):
                units.append((j, i))
        stack = np.zeros((len(units), rows, cols), dtype=complex)
        for k, (j, i) in enumerate(units):
            stack[k, j, i] = 1.0
        return OperatorSpan(self.n, x, y, stack)

    def _compute_moment(self, w: Word) -> int:
        """Count multi-indices evaluating to the identity, pruned to the returnable ball."""
        states: dict[Element, int] = {self.group.identity: 1}
        for t, letter in enumerate(w):
            remaining = len(w) - t - 1
            steps = [self.step(letter, i) for i in range(self.n)]
            following: dict[Element, int] = defaultdict(int)
            for element, count in states.items():
                for s in steps:
                    product = self.group.multiply(element, s)
                    if self._steps_needed(product) <= remaining:
                        following[product] += count
            states = following
        return states.get(self.group.identity, 0)

    def walk_distribution(self, length: int) -> list[dict[Element, int]]:
        """Number of walks from e to each element with steps g_i^{+-1}, for lengths 0..length."""
        steps = self.generators + self._inverses
        layers = [{self.group.identity: 1}]
        for _ in range(length):
            following: dict[Element, int] = defaultdict(int)
            for element, count in layers[-1].items():
                for s in steps:
                    following[self.group.multiply(element, s)] += count
            layers.append(dict(following))
        return layers

    def closed_walk_counts(self, k_max: int) -> list[int]:
        """Closed walks of length k, split at the midpoint: sum_g N_a(g) N_b(g^-1)."""
        layers = self.walk_distribution((k_max + 1) // 2)
        counts = []
        for k in range(k_max + 1):
            a, b = k // 2, k - k // 2
            first, second = layers[a], layers[b]
            counts.append(
                sum(count * second.get(self.group.inverse(g), 0) for g, count in first.items())
            )
        return counts

    def relabeled(self, permutation: Sequence[int]) -> "DualGroupRep":
        return DualGroupRep(self.group, [self.generators[i] for i in permutation], label=self.label)

    def describe(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "group": self.group.describe(),
            "generators": [self.group.to_spec(g) for g in self.generators],
        }


@dataclass(frozen=True)
class TildeCase:
    """Which branch of the free-product description applies."""
    first_in_subgroup: bool
    subgroup_generators: tuple

    @property
    def case(self) -> str:
        return "i" if self.first_in_subgroup else "ii"


def tilde_case(b: DualGroupRep) -> TildeCase:
    """Decide whether g1 lies in H = <g1^-1 g_i>.

    Raises:
        UnsupportedGroupError: If membership cannot be decided for the group kind.
    """
    group = b.group
    first_inverse = group.inverse(b.generators[0])
    subgroup = tuple(group.multiply(first_inverse, g) for g in b.generators[1:])
    return TildeCase(group.contains(list(subgroup), b.generators[0]), subgroup)


def tilde_group(b: DualGroupRep) -> DualGroupRep:
    """The subgroup of Z * Gamma generated by z g_1, ..., z g_n, in a normalized presentation.

    When g1 lies in H the generators z g_i are used as is; otherwise the
    isomorphic copy of Z * H generated by z, z h_2, ..., z h_n with
    h_i = g1^-1 g_i is returned.

    Raises:
        UnsupportedGroupError: If membership in H cannot be decided.
    """
    case = tilde_case(b)
    product = FreeProduct([FreeAbelianGroup(1), b.group])
    z = product.embed(0, (1,))
    if case.first_in_subgroup:
        generators = [product.multiply(z, product.embed(1, g)) for g in b.generators]
    else:
        generators = [z] + [product.multiply(z, product.embed(1, h)) for h in case.subgroup_generators]
    logger.info(f"tilde group of {b.label}: case {case.case}, {len(generators)} generators")
    return DualGroupRep(product, generators, label=f"tilde({b.label})")
