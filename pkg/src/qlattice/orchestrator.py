"""Command runners: load the backend, offload the numerics, write the report, pick the exit code."""

import asyncio
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar

from .amenability import Verdict, is_integer_square, kesten_test, lattice_amenability_test
from .backends import Backend, BackendConfigError, DualGroupRep, load_backend
from .bratteli import BratteliError, bratteli
from .config import AmenabilityTest, Command, ConfigError, OutputFormat, RunConfig, TildeMethod
from .errors import QLatticeError
from .lattice import VERIFY_TOL, build_lattice, default_bound, index, shift_check, verify_axioms
from .moments import MomentTable, moments_from_backend, tilde_moments, word_oracle_tilde
from .reconstruct import closure_from_lattice, universal_hom_dims
from .words import is_alternating

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

T = TypeVar("T")


async def _offload(func: Callable[..., T], *args, **kwargs) -> T:
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(None, functools.partial(func, *args, **kwargs))


def write_report(text: str, output_path: Optional[Path]) -> None:
    """
    Write report text to a file, or to stdout when no path is given.

    Raises:
        ConfigError: If the file cannot be written.
    """
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(text)
    except OSError as e:
        raise ConfigError(f"Failed to write report {output_path}: {e}") from e
    logger.info(f"Report written to {output_path}")


def write_json(report: dict[str, Any], output_path: Optional[Path]) -> None:
    write_report(json.dumps(report, sort_keys=True, indent=2) + "\n", output_path)


async def load(cfg: RunConfig) -> Backend:
    """
    Load the backend named by the config and check the config against its n.

    Raises:
        ConfigError: If the config is invalid for this backend.
        BackendConfigError: If the backend file is unreadable or malformed.
    """
    cfg.require_valid()
    backend = await _offload(load_backend, cfg.backend_path)
    cfg.require_valid(backend.n)
    return backend


async def cmd_lattice(cfg: RunConfig, backend: Backend) -> int:
    """Build the lattice, run every verification and write the report (or the DOT graph)."""
    bound = cfg.resolved_bound(backend.n)
    lattice = await _offload(build_lattice, backend, bound, cfg.tol, cfg.threads)
    axioms = await _offload(verify_axioms, lattice, VERIFY_TOL, cfg.seed)
    shift = await _offload(shift_check, lattice)

    report = lattice.to_dict()
    report["axioms"] = axioms.to_dict()
    report["shift"] = shift.to_dict()
    passed = axioms.passed() and shift.passed()

    try:
        data = await _offload(bratteli, lattice, None, cfg.seed)
    except BratteliError as e:
        logger.error(f"Bratteli decomposition failed: {e}")
        data = None
        passed = False
    if data is not None:
        consistency = data.consistency_residuals()
        report["bratteli"] = data.to_dict()
        report["bratteli"]["consistency"] = dict(sorted(consistency.items()))
        passed = passed and max(consistency.values(), default=0.0) <= VERIFY_TOL

    report["index_is_square"] = is_integer_square(index(lattice))
    report["passed"] = passed

    if cfg.format == OutputFormat.DOT.value and data is not None:
        write_report(data.to_dot(0), cfg.output_path)
    else:
        if cfg.format == OutputFormat.DOT.value:
            logger.warning("No Bratteli data for DOT output, writing the JSON report instead")
        write_json(report, cfg.output_path)

    if not passed:
        logger.error(f"Lattice verification failed for {backend.label}: "
                     f"axioms {axioms.failures()}, shift distance {shift.max_distance:.3g}")
        return EXIT_FAILED
    return EXIT_OK


async def cmd_moments(cfg: RunConfig, backend: Backend) -> int:
    """Write the moment table of the backend up to max_len."""
    table = await _offload(moments_from_backend, backend, cfg.max_len, cfg.threads)
    report = {"backend": backend.describe(), "label": backend.label, "moments": table.to_dict()}
    write_json(report, cfg.output_path)

    violations = table.symmetry_violations()
    if violations:
        logger.error(f"Moment table is not hat-symmetric at {', '.join(str(w) for w in violations[:5])}")
        return EXIT_FAILED
    return EXIT_OK


async def _closure_table(cfg: RunConfig, backend: Backend) -> MomentTable:
    bound = (cfg.max_len + 2) // 2 + 1
    lattice = await _offload(
        build_lattice, backend, bound, cfg.tol, cfg.threads, max(bound, default_bound(backend.n))
    )
    cc = await _offload(closure_from_lattice, lattice, cfg.max_len, threads=cfg.threads)
    return universal_hom_dims(cc, cfg.max_len)


async def cmd_tilde(cfg: RunConfig, backend: Backend) -> int:
    """
    Compute the tilde moment table by the requested method(s) and check agreement.

    Every table is also checked against the source moments on alternating words.

    Raises:
        ConfigError: If the oracle is requested for a backend that is not a group dual.
    """
    method = TildeMethod(cfg.method)
    is_dual = isinstance(backend, DualGroupRep)
    if method is TildeMethod.ORACLE and not is_dual:
        raise ConfigError(f"The word oracle needs a dual_group backend, got {backend.kind}")

    methods = [TildeMethod.CUMULANT, TildeMethod.ORACLE, TildeMethod.CLOSURE] if method is TildeMethod.ALL else [method]
    if not is_dual and TildeMethod.ORACLE in methods:
        logger.info(f"Skipping the word oracle for {backend.kind} backend")
        methods.remove(TildeMethod.ORACLE)

    source = await _offload(moments_from_backend, backend, cfg.max_len, cfg.threads)
    tables: dict[TildeMethod, MomentTable] = {}
    for m in methods:
        if m is TildeMethod.CUMULANT:
            tables[m] = await _offload(tilde_moments, source, cfg.max_len)
        elif m is TildeMethod.ORACLE:
            tables[m] = await _offload(word_oracle_tilde, backend, cfg.max_len, cfg.threads)
        else:
            tables[m] = await _closure_table(cfg, backend)

    first_difference = None
    reference_method, reference = next(iter(tables.items()))
    for m, table in tables.items():
        w = reference.first_difference(table)
        if w is not None:
            logger.error(f"{reference_method.value} and {m.value} differ first at {str(w) or 'e'!r}: "
                         f"{reference.entries.get(w)} vs {table.entries.get(w)}")
            first_difference = first_difference or {"word": str(w), "methods": [reference_method.value, m.value]}

    alternating_mismatches = sorted(
        {str(w) for table in tables.values() for w in table.entries
         if is_alternating(w) and table[w] != source[w]}
    )
    if alternating_mismatches:
        logger.error(f"Tilde moments differ from the source on alternating words {alternating_mismatches[:5]}")

    agreement = first_difference is None and not alternating_mismatches
    report = {
        "backend": backend.describe(),
        "label": backend.label,
        "max_len": cfg.max_len,
        "methods": [m.value for m in tables],
        "source": source.to_dict(),
        "tables": {m.value: table.to_dict() for m, table in tables.items()},
        "agreement": agreement,
        "first_difference": first_difference,
        "alternating_mismatches": alternating_mismatches,
    }
    write_json(report, cfg.output_path)
    return EXIT_OK if agreement else EXIT_FAILED


async def cmd_amenability(cfg: RunConfig, backend: Backend) -> int:
    """Run the Kesten or the lattice test and report the verdict."""
    test = AmenabilityTest(cfg.test)
    if test is AmenabilityTest.KESTEN:
        estimate = await _offload(kesten_test, backend, cfg.k_max, cfg.margin)
        d = backend.duality.d
        report = estimate.to_dict()
        report.update({"n": backend.n, "d": d, "index": d * d, "index_is_square": is_integer_square(d * d)})
        verdict = estimate.verdict
    else:
        result = await _offload(lattice_amenability_test, backend, cfg.k_max, cfg.margin)
        report = result.to_dict()
        verdict = result.verdict
    report.update({"test": test.value, "label": backend.label})
    write_json(report, cfg.output_path)

    if verdict is Verdict.INCONCLUSIVE and cfg.strict:
        logger.error(f"Inconclusive {test.value} verdict for {backend.label} under --strict")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


_COMMANDS = {
    Command.LATTICE: cmd_lattice,
    Command.MOMENTS: cmd_moments,
    Command.TILDE: cmd_tilde,
    Command.AMENABILITY: cmd_amenability,
}


async def run(cfg: RunConfig) -> int:
    """
    Run one command end to end.

    Returns:
        0 on success, 1 on a verification or agreement failure, 2 on a
        configuration, loading or I/O error, 3 on an inconclusive verdict
        under --strict.
    """
    try:
        backend = await load(cfg)
        return await _COMMANDS[Command(cfg.command)](cfg, backend)
    except (ConfigError, BackendConfigError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except QLatticeError as e:
        logger.error(f"{cfg.command} failed: {e}")
        return EXIT_FAILED
