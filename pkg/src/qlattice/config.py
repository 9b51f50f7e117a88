"""Run configuration for the command-line interface."""

import logging
import os
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import QLatticeError
from .lattice import default_bound

logger = logging.getLogger(__name__)

THREADS_ENV = "QLATTICE_THREADS"
MAX_MAX_LEN = 10
MIN_K_MAX = 2
MAX_K_MAX = 24
MAX_TOL = 1e-3
MAX_MARGIN = 0.2


class ConfigError(QLatticeError):
    """Exception raised for invalid run configurations."""
    pass


class Command(str, Enum):
    LATTICE = "lattice"
    MOMENTS = "moments"
    TILDE = "tilde"
    AMENABILITY = "amenability"


class TildeMethod(str, Enum):
    CUMULANT = "cumulant"
    ORACLE = "oracle"
    CLOSURE = "closure"
    ALL = "all"


class AmenabilityTest(str, Enum):
    KESTEN = "kesten"
    LATTICE = "lattice"


class OutputFormat(str, Enum):
    JSON = "json"
    DOT = "dot"


class ConfigKey(str, Enum):
    """Enumeration of configuration keys."""
    COMMAND = "command"
    BACKEND_PATH = "backend_path"
    BOUND = "bound"
    K_MAX = "k_max"
    MAX_LEN = "max_len"
    TOL = "tol"
    MARGIN = "margin"
    SEED = "seed"
    METHOD = "method"
    TEST = "test"
    FORMAT = "format"
    OUTPUT_PATH = "output_path"
    STRICT = "strict"
    THREADS = "threads"


@dataclass
class RunConfig:
    """Schema for one CLI run with validation and defaults."""

    command: str = Command.LATTICE.value
    backend_path: Optional[Path] = None

    # Sizes
    bound: Optional[int] = None  # resolved per n
    k_max: int = 12
    max_len: int = 6

    # Numerics
    tol: float = 1e-9
    margin: float = 0.02
    seed: int = 0

    # Command options
    method: str = TildeMethod.ALL.value
    test: str = AmenabilityTest.KESTEN.value
    format: str = OutputFormat.JSON.value
    output_path: Optional[Path] = None
    strict: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        """Coerce paths and resolve the thread count."""
        if isinstance(self.backend_path, str):
            self.backend_path = Path(self.backend_path)
        if isinstance(self.output_path, str):
            self.output_path = Path(self.output_path)
        if self.threads is None:
            self.threads = self._get_default_threads()

    @staticmethod
    def _get_default_threads() -> int:
        """Thread count from QLATTICE_THREADS, else 1."""
        value = os.environ.get(THREADS_ENV)
        if not value:
            return 1
        try:
            return int(value)
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={value!r}")
            return 1

    def resolved_bound(self, n: int) -> int:
        return default_bound(n) if self.bound is None else self.bound

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        data = asdict(self)
        for key in (ConfigKey.BACKEND_PATH.value, ConfigKey.OUTPUT_PATH.value):
            if data[key] is not None:
                data[key] = str(data[key])
        return data

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "RunConfig":
        """Create from dictionary; missing keys take their defaults."""
        defaults = RunConfig(threads=1)
        return RunConfig(
            command=data.get("command", defaults.command),
            backend_path=data.get("backend_path"),
            bound=data.get("bound"),
            k_max=data.get("k_max", defaults.k_max),
            max_len=data.get("max_len", defaults.max_len),
            tol=data.get("tol", defaults.tol),
            margin=data.get("margin", defaults.margin),
            seed=data.get("seed", defaults.seed),
            method=data.get("method", defaults.method),
            test=data.get("test", defaults.test),
            format=data.get("format", defaults.format),
            output_path=data.get("output_path"),
            strict=data.get("strict", False),
            threads=data.get("threads"),
        )

    def validate(self, n: Optional[int] = None) -> tuple[bool, Optional[str]]:
        """
        Validate the configuration; bounds are checked against n when known.

        Returns:
            (is_valid, error_message)
        """
        enums = (
            (ConfigKey.COMMAND, self.command, Command),
            (ConfigKey.METHOD, self.method, TildeMethod),
            (ConfigKey.TEST, self.test, AmenabilityTest),
            (ConfigKey.FORMAT, self.format, OutputFormat),
        )
        for key, value, enum in enums:
            if value not in {member.value for member in enum}:
                return False, f"Invalid {key.value}: {value}"

        if self.backend_path is None:
            return False, "No backend file given"

        if not isinstance(self.tol, (int, float)) or not 0 < self.tol <= MAX_TOL:
            return False, f"Invalid tol: {self.tol} (must lie in (0, {MAX_TOL:g}])"

        if not isinstance(self.margin, (int, float)) or not 0 < self.margin <= MAX_MARGIN:
            return False, f"Invalid margin: {self.margin} (must lie in (0, {MAX_MARGIN:g}])"

        if not isinstance(self.seed, int) or self.seed < 0:
            return False, f"Invalid seed: {self.seed}"

        if not isinstance(self.max_len, int) or not 0 <= self.max_len <= MAX_MAX_LEN:
            return False, f"Invalid max_len: {self.max_len} (must lie in [0, {MAX_MAX_LEN}])"

        if not isinstance(self.k_max, int) or not MIN_K_MAX <= self.k_max <= MAX_K_MAX:
            return False, f"Invalid k_max: {self.k_max} (must lie in [{MIN_K_MAX}, {MAX_K_MAX}])"

        if not isinstance(self.threads, int) or self.threads < 1:
            return False, f"Invalid threads: {self.threads}"

        if self.bound is not None:
            if not isinstance(self.bound, int) or self.bound < 0:
                return False, f"Invalid bound: {self.bound}"
            if n is not None and self.bound > default_bound(n):
                return False, f"Bound {self.bound} exceeds the maximum {default_bound(n)} for n={n}"

        return True, None

    def require_valid(self, n: Optional[int] = None) -> None:
        """
        Raises:
            ConfigError: If validate() fails.
        """
        is_valid, error = self.validate(n)
        if not is_valid:
            raise ConfigError(error)
