"""Backend descriptors: parsing the JSON files that select a corepresentation."""

from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Union

from ..duality import DualityError, QData, make_duality, q_from_F
from ..tensorops import TensorTypeError, matrix_from_json
from .base import Backend, BackendConfigError
from .dual_group import DualGroupRep
from .finite_group import FiniteGroupRep
from .groups import parse_group
from .span_q import SpanQRep

logger = logging.getLogger(__name__)


class BackendType(str, Enum):
    """Enumeration of backend descriptor types."""
    FINITE_GROUP = "finite_group"
    DUAL_GROUP = "dual_group"
    SPAN_Q = "span_q"


def _finite_group(data: dict[str, Any]) -> FiniteGroupRep:
    rep = [matrix_from_json(m) for m in data["rep"]]
    return FiniteGroupRep(
        data["mult_table"], rep, identity=int(data.get("identity", 0)), label=data.get("label")
    )


def _dual_group(data: dict[str, Any]) -> DualGroupRep:
    group = parse_group(data["group"])
    generators = [group.parse(spec) for spec in data["generators"]]
    return DualGroupRep(group, generators, label=data.get("label"))


def _span_q(data: dict[str, Any]) -> SpanQRep:
    if "F" in data:
        qdata = q_from_F(matrix_from_json(data["F"]))
    else:
        qdata = QData.from_dict(data)
    return SpanQRep(make_duality(qdata), label=data.get("label"))


_BUILDERS = {
    BackendType.FINITE_GROUP: _finite_group,
    BackendType.DUAL_GROUP: _dual_group,
    BackendType.SPAN_Q: _span_q,
}


def backend_from_dict(data: dict[str, Any]) -> Backend:
    """
    Build a backend from its descriptor.

    Raises:
        BackendConfigError: On an unknown type or malformed fields.
    """
    if not isinstance(data, dict):
        raise BackendConfigError(f"Backend descriptor must be an object, got {type(data).__name__}")
    try:
        kind = BackendType(data["type"])
    except (KeyError, ValueError) as e:
        raise BackendConfigError(f"Unknown or missing backend type: {data.get('type')!r}") from e

    try:
        backend = _BUILDERS[kind](data)
    except BackendConfigError:
        raise
    except KeyError as e:
        raise BackendConfigError(f"Backend descriptor {kind.value} is missing field {e}") from e
    except (DualityError, TensorTypeError, TypeError, ValueError) as e:
        raise BackendConfigError(f"Invalid {kind.value} descriptor: {e}") from e

    logger.info(f"Loaded backend {backend.label} (n={backend.n})")
    return backend


def load_backend(source: Union[str, Path, dict[str, Any]]) -> Backend:
    """
    Load a backend from a JSON file path or an already-parsed descriptor.

    Raises:
        BackendConfigError: If the file cannot be read, is not JSON, or
            describes an invalid backend.
    """
    if isinstance(source, dict):
        return backend_from_dict(source)

    path = Path(source)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise BackendConfigError(f"Failed to parse backend JSON {path}: {e}") from e
    except OSError as e:
        raise BackendConfigError(f"Failed to read backend file {path}: {e}") from e

    if isinstance(data, dict):
        data.setdefault("label", path.stem)
    return backend_from_dict(data)
