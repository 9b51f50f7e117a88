"""Concrete sources of intertwiner spaces for a fixed corepresentation."""

from .base import Backend, BackendConfigError, BackendError, lift_to_hom, lower_to_vector
from .dual_group import DualGroupRep, TildeCase, tilde_case, tilde_group
from .finite_group import FiniteGroupRep, symmetric_group_s3
from .groups import (
    FiniteGroup,
    FreeAbelianGroup,
    FreeGroup,
    FreeProduct,
    Group,
    GroupKind,
    UnsupportedGroupError,
    parse_group,
)
from .loader import BackendType, backend_from_dict, load_backend
from .span_q import SpanQRep, noncrossing_pairings

__all__ = [
    "Backend",
    "BackendConfigError",
    "BackendError",
    "BackendType",
    "DualGroupRep",
    "FiniteGroup",
    "FiniteGroupRep",
    "FreeAbelianGroup",
    "FreeGroup",
    "FreeProduct",
    "Group",
    "GroupKind",
    "SpanQRep",
    "TildeCase",
    "UnsupportedGroupError",
    "backend_from_dict",
    "lift_to_hom",
    "load_backend",
    "lower_to_vector",
    "noncrossing_pairings",
    "parse_group",
    "symmetric_group_s3",
    "tilde_case",
    "tilde_group",
]
