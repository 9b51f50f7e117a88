"""Discrete groups with solvable word problem: normal forms and subgroup membership.

Element specs used in backend files:

- free abelian: integer exponent vector, e.g. ``[1, 0]``
- free: integer exponent sequence read cyclically over the basis,
  ``[e1, e2, ..., ek, e(k+1), ...]`` meaning x1^e1 x2^e2 ... xk^ek x1^e(k+1) ...
- finite: element index, ``3`` or ``[3]``
- free product: list of ``[factor_index, element_spec]`` syllables
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import deque
from enum import Enum
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .base import BackendConfigError, BackendError

logger = logging.getLogger(__name__)

Element = Hashable


class UnsupportedGroupError(BackendError):
    """Raised when a group kind lacks the requested decision procedure."""
    pass


class GroupKind(str, Enum):
    """Supported presentation kinds."""
    FREE = "free"
    FREE_ABELIAN = "free_abelian"
    FINITE = "finite"
    FREE_PRODUCT = "free_product"


class Group(ABC):
    """A group given by normal forms."""

    kind: GroupKind

    @property
    @abstractmethod
    def identity(self) -> Element:
        ...

    @abstractmethod
    def multiply(self, a: Element, b: Element) -> Element:
        ...

    @abstractmethod
    def inverse(self, a: Element) -> Element:
        ...

    @abstractmethod
    def parse(self, spec: Any) -> Element:
        ...

    @abstractmethod
    def to_spec(self, a: Element) -> Any:
        ...

    @abstractmethod
    def describe(self) -> dict[str, Any]:
        ...

    def norm(self, a: Element) -> int:
        """Word length in the group's own basis; 0 when no length is available."""
        return 0

    def contains(self, generators: Sequence[Element], target: Element) -> bool:
        """Decide target in <generators>.

        Raises:
            UnsupportedGroupError: If the kind has no membership procedure.
        """
        raise UnsupportedGroupError(f"Subgroup membership is not available for {self.kind.value}")

    def product(self, elements: Iterable[Element]) -> Element:
        result = self.identity
        for element in elements:
            result = self.multiply(result, element)
        return result


def lattice_contains(generators: Sequence[Sequence[int]], target: Sequence[int]) -> bool:
    """Integer lattice membership by Euclidean row reduction to echelon form."""
    remaining = [list(g) for g in generators if any(g)]
    width = len(target)
    pivots: list[tuple[int, list[int]]] = []
    for col in range(width):
        active = [row for row in remaining if row[col] != 0]
        rest = [row for row in remaining if row[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda row: abs(row[col]))
            head = active[0]
            reduced = [head]
            for row in active[1:]:
                factor = row[col] // head[col]
                row = [r - factor * h for r, h in zip(row, head)]
                if row[col] != 0:
                    reduced.append(row)
                elif any(row):
                    rest.append(row)
            active = reduced
        if active:
            pivots.append((col, active[0]))
        remaining = rest
    vector = list(target)
    for col, row in pivots:
        if vector[col] % row[col] != 0:
            return False
        factor = vector[col] // row[col]
        vector = [v - factor * r for v, r in zip(vector, row)]
    return not any(vector)


class FreeAbelianGroup(Group):
    """Z^rank with exponent-vector elements."""

    kind = GroupKind.FREE_ABELIAN

    def __init__(self, rank: int):
        if rank < 1:
            raise BackendConfigError(f"free_abelian rank must be positive, got {rank}")
        self.rank = rank

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def norm(self, a) -> int:
        return sum(abs(x) for x in a)

    def parse(self, spec: Any):
        values = [spec] if isinstance(spec, int) else list(spec)
        exponents = [0] * self.rank
        for index, value in enumerate(values):
            exponents[index % self.rank] += int(value)
        return tuple(exponents)

    def to_spec(self, a):
        return list(a)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "rank": self.rank}

    def contains(self, generators, target) -> bool:
        return lattice_contains(generators, target)


class FreeGroup(Group):
    """Free group on x1..x_rank; elements are reduced tuples of signed letters +-(i+1)."""

    kind = GroupKind.FREE

    def __init__(self, rank: int):
        if rank < 1:
            raise BackendConfigError(f"free rank must be positive, got {rank}")
        self.rank = rank

    @property
    def identity(self) -> tuple[int, ...]:
        return ()

    def multiply(self, a, b):
        result = list(a)
        for letter in b:
            if result and result[-1] == -letter:
                result.pop()
            else:
                result.append(letter)
        return tuple(result)

    def inverse(self, a):
        return tuple(-letter for letter in reversed(a))

    def norm(self, a) -> int:
        return len(a)

    def parse(self, spec: Any):
        values = [spec] if isinstance(spec, int) else list(spec)
        letters: list[int] = []
        for index, exponent in enumerate(values):
            generator = index % self.rank + 1
            sign = 1 if exponent > 0 else -1
            letters.extend([sign * generator] * abs(int(exponent)))
        return self.multiply((), tuple(letters))

    def to_spec(self, a):
        """Cyclic exponent sequence (inverse of parse)."""
        spec: list[int] = []
        position = 0
        for letter in a:
            generator = abs(letter) - 1
            sign = 1 if letter > 0 else -1
            if spec and (position - 1) % self.rank == generator and spec[-1] * sign > 0:
                spec[-1] += sign
                continue
            while position % self.rank != generator:
                spec.append(0)
                position += 1
            spec.append(sign)
            position += 1
        return spec

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "rank": self.rank}

    def contains(self, generators, target) -> bool:
        """Membership through the folded core graph of the subgroup."""
        edges: list[tuple[int, int, int]] = []
        vertex_count = 1
        for word in generators:
            if not word:
                continue
            current = 0
            for position, letter in enumerate(word):
                if position == len(word) - 1:
                    following = 0
                else:
                    following = vertex_count
                    vertex_count += 1
                if letter > 0:
                    edges.append((current, letter, following))
                else:
                    edges.append((following, -letter, current))
                current = following
        outgoing, incoming, find = _fold(edges, vertex_count)
        root = find(0)
        current = root
        for letter in target:
            if letter > 0:
                current = outgoing.get((current, letter))
            else:
                current = incoming.get((current, -letter))
            if current is None:
                return False
        return current == root


def _fold(edges: list[tuple[int, int, int]], vertex_count: int):
    parent = list(range(vertex_count))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    while True:
        outgoing: dict[tuple[int, int], int] = {}
        incoming: dict[tuple[int, int], int] = {}
        merged = False
        for u, label, v in edges:
            u, v = find(u), find(v)
            seen = outgoing.setdefault((u, label), v)
            if seen != v:
                parent[find(seen)] = v
                merged = True
                break
            seen = incoming.setdefault((v, label), u)
            if seen != u:
                parent[find(seen)] = u
                merged = True
                break
        if not merged:
            return outgoing, incoming, find


class FiniteGroup(Group):
    """A finite group given by its multiplication table."""

    kind = GroupKind.FINITE

    def __init__(self, table: Any, identity: int = 0):
        table = np.asarray(table, dtype=int)
        validate_group_table(table, identity)
        self.table = table
        self._identity = int(identity)
        self._inverses = [int(np.nonzero(table[g] == identity)[0][0]) for g in range(len(table))]

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def identity(self) -> int:
        return self._identity

    def multiply(self, a, b):
        return int(self.table[a, b])

    def inverse(self, a):
        return self._inverses[a]

    def parse(self, spec: Any):
        value = spec[0] if isinstance(spec, (list, tuple)) else spec
        value = int(value)
        if not 0 <= value < self.order:
            raise BackendConfigError(f"Element index {value} outside group of order {self.order}")
        return value

    def to_spec(self, a):
        return int(a)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "mult_table": self.table.tolist(), "identity": self._identity}

    def contains(self, generators, target) -> bool:
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            g = queue.popleft()
            for s in generators:
                h = self.multiply(g, s)
                if h not in seen:
                    seen.add(h)
                    queue.append(h)
        return target in seen


def validate_group_table(table: np.ndarray, identity: int = 0) -> None:
    """Check that a square table is a group law.

    Raises:
        BackendConfigError: On any violated group axiom.
    """
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise BackendConfigError(f"Multiplication table must be square, got shape {table.shape}")
    order = table.shape[0]
    if table.min() < 0 or table.max() >= order:
        raise BackendConfigError("Multiplication table entries out of range")
    if not 0 <= identity < order:
        raise BackendConfigError(f"Identity index {identity} out of range")
    elements = np.arange(order)
    if not (np.array_equal(table[identity], elements) and np.array_equal(table[:, identity], elements)):
        raise BackendConfigError(f"Element {identity} is not a two-sided identity")
    for g in range(order):
        if len(set(table[g].tolist())) != order or len(set(table[:, g].tolist())) != order:
            raise BackendConfigError(f"Row or column {g} is not a permutation (no inverses)")
    if not np.array_equal(table[table], table[:, table]):
        raise BackendConfigError("Multiplication table is not associative")


class FreeProduct(Group):
    """Free product of factor groups; elements are tuples of (factor, element) syllables."""

    kind = GroupKind.FREE_PRODUCT

    def __init__(self, factors: Sequence[Group]):
        if not factors:
            raise BackendConfigError("free_product needs at least one factor")
        self.factors = list(factors)

    @property
    def identity(self) -> tuple:
        return ()

    def _push(self, syllables: list, syllable: tuple[int, Element]) -> None:
        index, element = syllable
        factor = self.factors[index]
        if syllables and syllables[-1][0] == index:
            merged = factor.multiply(syllables.pop()[1], element)
            if merged != factor.identity:
                syllables.append((index, merged))
        elif element != factor.identity:
            syllables.append((index, element))

    def multiply(self, a, b):
        syllables = list(a)
        for syllable in b:
            self._push(syllables, syllable)
        return tuple(syllables)

    def inverse(self, a):
        return tuple((index, self.factors[index].inverse(element)) for index, element in reversed(a))

    def embed(self, index: int, element: Element) -> tuple:
        if element == self.factors[index].identity:
            return ()
        return ((index, element),)

    def norm(self, a) -> int:
        return sum(self.factors[index].norm(element) for index, element in a)

    def parse(self, spec: Any):
        syllables: list = []
        try:
            for index, element_spec in spec:
                index = int(index)
                self._push(syllables, (index, self.factors[index].parse(element_spec)))
        except (TypeError, ValueError, IndexError) as e:
            raise BackendConfigError(f"Malformed free product element {spec!r}: {e}") from e
        return tuple(syllables)

    def to_spec(self, a):
        return [[index, self.factors[index].to_spec(element)] for index, element in a]

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "factors": [f.describe() for f in self.factors]}

    def contains(self, generators, target) -> bool:
        generators = [g for g in generators if g != self.identity]
        if target == self.identity:
            return True
        single = self._single_factor(list(generators) + [target])
        if single is not None:
            factor = self.factors[single]
            return factor.contains([g[0][1] for g in generators], target[0][1])
        for index, factor in enumerate(self.factors):
            if isinstance(factor, FreeAbelianGroup):
                images = [self._abelian_image(g, index) for g in generators]
                if not lattice_contains(images, self._abelian_image(target, index)):
                    return False
        raise UnsupportedGroupError(
            "Subgroup membership in a free product is only decided within one factor "
            "or through an abelian exponent-sum obstruction"
        )

    def _single_factor(self, elements: list) -> int | None:
        indices = set()
        for element in elements:
            if len(element) > 1:
                return None
            indices.update(index for index, _ in element)
        return indices.pop() if len(indices) == 1 else None

    def _abelian_image(self, element, index: int) -> tuple[int, ...]:
        factor = self.factors[index]
        image = factor.identity
        for syllable_index, value in element:
            if syllable_index == index:
                image = factor.multiply(image, value)
        return image


def parse_group(data: dict[str, Any]) -> Group:
    """Build a group from its JSON descriptor.

    Raises:
        BackendConfigError: On an unknown kind or malformed fields.
    """
    try:
        kind = GroupKind(data["kind"])
    except (KeyError, ValueError) as e:
        raise BackendConfigError(f"Unknown or missing group kind in {data!r}") from e
    try:
        if kind is GroupKind.FREE:
            return FreeGroup(int(data["rank"]))
        if kind is GroupKind.FREE_ABELIAN:
            return FreeAbelianGroup(int(data["rank"]))
        if kind is GroupKind.FINITE:
            return FiniteGroup(data["mult_table"], int(data.get("identity", 0)))
        return FreeProduct([parse_group(factor) for factor in data["factors"]])
    except KeyError as e:
        raise BackendConfigError(f"Group descriptor {kind.value} is missing field {e}") from e
