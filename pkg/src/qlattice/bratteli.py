"""Simple-summand decomposition of the lattice cells and their inclusion diagrams."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import networkx as nx
import numpy as np
from scipy import linalg

from .lattice import Cell, LatticeError, PopaLattice
from .tensorops import from_matrix
from .words import interval

logger = logging.getLogger(__name__)

CLUSTER_TOL = 1e-6
CENTER_SAMPLES = 3
CENTER_CUTOFF_SCALE = 100


class BratteliError(LatticeError):
    """Raised when a cell cannot be split into simple summands unambiguously."""
    pass


@dataclass
class Summand:
    """One simple summand M_dim(C) of a cell algebra."""
    dim: int
    weight: float
    projection: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        """Matrix rank of the minimal central projection on H^[i,j]."""
        return int(round(np.trace(self.projection).real))


@dataclass
class BratteliData:
    """Summands of every cell and integer inclusion matrices between neighbouring cells."""
    summands: dict[Cell, list[Summand]]
    inclusions: dict[tuple[Cell, Cell], np.ndarray]

    def dims(self, key: Cell) -> list[int]:
        return [s.dim for s in self.summands[key]]

    def weights(self, key: Cell) -> list[float]:
        return [s.weight for s in self.summands[key]]

    def consistency_residuals(self) -> dict[str, float]:
        """Dimension bookkeeping across inclusions and trace-weight normalization."""
        residuals = {}
        for (small, big), mult in self.inclusions.items():
            pushed = np.array(self.dims(small)) @ mult
            residuals[f"{small}->{big}"] = float(np.abs(pushed - np.array(self.dims(big))).max(initial=0))
        for key in self.summands:
            total = sum(s.dim * s.weight for s in self.summands[key])
            residuals[f"weights{key}"] = abs(total - 1.0)
        return residuals

    def to_dict(self) -> dict[str, Any]:
        return {
            "cells": {
                f"{i},{j}": {"dims": self.dims((i, j)), "weights": self.weights((i, j))}
                for i, j in sorted(self.summands)
            },
            "inclusions": {
                f"{a[0]},{a[1]}->{b[0]},{b[1]}": mult.tolist()
                for (a, b), mult in sorted(self.inclusions.items())
            },
        }

    def graph(self, row: int = 0) -> nx.DiGraph:
        """The inclusion chain A_{row,row} in A_{row,row+1} in ... as a layered graph."""
        g = nx.DiGraph()
        columns = sorted(j for i, j in self.summands if i == row)
        for j in columns:
            for c, summand in enumerate(self.summands[(row, j)]):
                g.add_node(f"{j}:{c}", layer=j, dim=summand.dim, weight=summand.weight)
        for j in columns:
            key = ((row, j), (row, j + 1))
            if key not in self.inclusions:
                continue
            mult = self.inclusions[key]
            for c, c_big in zip(*np.nonzero(mult)):
                g.add_edge(f"{j}:{c}", f"{j + 1}:{c_big}", multiplicity=int(mult[c, c_big]))
        return g

    def to_dot(self, row: int = 0) -> str:
        """DOT text with one rank per column index, edges labeled by multiplicity."""
        g = self.graph(row)
        lines = [f"digraph bratteli_row_{row} {{", "  rankdir=TB;"]
        layers: dict[int, list[str]] = {}
        for node, data in g.nodes(data=True):
            layers.setdefault(data["layer"], []).append(node)
            lines.append(f'  "{node}" [label="{data["dim"]}"];')
        for layer in sorted(layers):
            members = " ".join(f'"{node}";' for node in layers[layer])
            lines.append(f"  {{ rank=same; {members} }}")
        for source, target, data in g.edges(data=True):
            lines.append(f'  "{source}" -> "{target}" [label="{data["multiplicity"]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _rank(matrix: np.ndarray, tol: float) -> int:
    s = linalg.svdvals(matrix)
    if s.size == 0 or s[0] <= np.finfo(float).tiny:
        return 0
    return int(np.sum(s > tol * s[0]))


def _center(stack: np.ndarray, rng: np.random.Generator, tol: float) -> np.ndarray:
    """Coefficient vectors (columns) of the central elements of the algebra spanned by ``stack``."""
    m = stack.shape[0]
    samples = []
    for _ in range(CENTER_SAMPLES):
        coefficients = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        samples.append(np.tensordot(coefficients, stack, axes=1))
    blocks = []
    for g in samples:
        commutators = stack @ g - g @ stack
        blocks.append(commutators.reshape(m, -1).T)
    system = np.concatenate(blocks)
    # absolute cutoff: on a commutative cell every commutator is rounding noise
    cutoff = max(tol, 1e-12) * CENTER_CUTOFF_SCALE * max(1.0, float(np.abs(stack).max()))
    _, s, vh = linalg.svd(system, full_matrices=False)
    rank = int(np.sum(s > cutoff))
    return vh[rank:].conj().T


def _decompose(lattice: PopaLattice, key: Cell, rng: np.random.Generator, tol: float) -> list[Summand]:
    span = lattice.cell(*key)
    word = interval(*key)
    if span.dim == 1:
        ident = np.eye(lattice.n ** len(word))
        return [Summand(1, 1.0, ident)]

    center = _center(span.stack, rng, tol)
    z = np.tensordot(center @ rng.standard_normal(center.shape[1]), span.stack, axes=1)
    h = z + z.conj().T
    values, vectors = linalg.eigh(h)
    scale = max(1.0, float(np.abs(values).max()))
    breaks = np.nonzero(np.diff(values) > CLUSTER_TOL * scale)[0]
    groups = np.split(np.arange(values.size), breaks + 1)
    if len(groups) != center.shape[1]:
        raise BratteliError(
            f"Cell A_{key[0]},{key[1]}: {len(groups)} eigenvalue clusters for a center of dimension "
            f"{center.shape[1]}"
        )

    summands = []
    for group in groups:
        v = vectors[:, group]
        projection = v @ v.conj().T
        corner = projection @ span.stack @ projection
        dim = int(round(np.sqrt(_rank(corner.reshape(span.dim, -1), tol))))
        trace = lattice.trace(from_matrix(projection, lattice.n, word, word)).real
        summands.append(Summand(dim, float(trace) / dim, projection))
    summands.sort(key=lambda s: (s.dim, s.weight))
    return summands


def _inclusion(lattice: PopaLattice, small: Cell, big: Cell, data: dict[Cell, list[Summand]]) -> np.ndarray:
    word = interval(*small)
    mult = np.zeros((len(data[small]), len(data[big])), dtype=int)
    for c, s in enumerate(data[small]):
        lifted = lattice.embed(from_matrix(s.projection, lattice.n, word, word), small, big).matrix
        for c_big, b in enumerate(data[big]):
            minimal_rank = b.rank / b.dim
            overlap = np.trace(b.projection @ lifted).real
            mult[c, c_big] = int(round(overlap / (s.dim * minimal_rank)))
    return mult


def bratteli(lattice: PopaLattice, tol: Optional[float] = None, seed: int = 0) -> BratteliData:
    """
    Split every cell into simple summands and count inclusion multiplicities.

    The center of each cell is the joint null space of commutators with a few
    random elements; minimal central projections are the spectral projections
    of a random self-adjoint central element.

    Raises:
        BratteliError: If the spectral clusters do not match the center.
    """
    tol = lattice.tol if tol is None else tol
    rng = np.random.default_rng(seed)
    summands = {key: _decompose(lattice, key, rng, tol) for key in sorted(lattice.cells)}

    inclusions = {}
    for i, j in sorted(lattice.cells):
        for big in ((i, j + 1), (i - 1, j)):
            if big in lattice.cells:
                inclusions[((i, j), big)] = _inclusion(lattice, (i, j), big, summands)

    logger.info(f"Bratteli data for {lattice.backend.label}: row 0 summands "
                f"{[[s.dim for s in summands[(0, j)]] for j in range(lattice.bound + 1)]}")
    return BratteliData(summands, inclusions)

