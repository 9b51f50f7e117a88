"""Popa standard-invariant lattices from compact quantum group corepresentations."""

__version__ = "0.1.0"

from .amenability import Verdict, kesten_test, lattice_amenability_test
from .backends import DualGroupRep, FiniteGroupRep, SpanQRep, load_backend
from .duality import DualityMaps, QData, make_duality, make_qdata, verify_duality
from .errors import QLatticeError
from .lattice import PopaLattice, build_lattice, shift_check, verify_axioms
from .moments import MomentTable, moments_from_backend, tilde_moments, word_oracle_tilde
from .reconstruct import closure, normalize, universal_hom_dims
from .words import Letter, Word

__all__ = [
    "DualGroupRep",
    "DualityMaps",
    "FiniteGroupRep",
    "Letter",
    "MomentTable",
    "PopaLattice",
    "QData",
    "QLatticeError",
    "SpanQRep",
    "Verdict",
    "Word",
    "build_lattice",
    "closure",
    "kesten_test",
    "lattice_amenability_test",
    "load_backend",
    "make_duality",
    "make_qdata",
    "moments_from_backend",
    "normalize",
    "shift_check",
    "tilde_moments",
    "universal_hom_dims",
    "verify_axioms",
    "verify_duality",
    "word_oracle_tilde",
]
