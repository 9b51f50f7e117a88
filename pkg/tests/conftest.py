"""Shared backend fixtures."""

from pathlib import Path

import pytest

from qlattice.backends import DualGroupRep, FreeAbelianGroup, FreeGroup, SpanQRep, symmetric_group_s3

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "backends"


def z2_dual_backend() -> DualGroupRep:
    group = FreeAbelianGroup(2)
    return DualGroupRep(group, [group.parse([1, 0]), group.parse([0, 1])], label="Z2-dual")


def f2_dual_backend() -> DualGroupRep:
    group = FreeGroup(2)
    return DualGroupRep(group, [group.parse([1]), group.parse([0, 1])], label="F2-dual")


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def s3():
    """S3 in its 2-dimensional irreducible representation."""
    return symmetric_group_s3()


@pytest.fixture(scope="session")
def z2_dual():
    return z2_dual_backend()


@pytest.fixture(scope="session")
def f2_dual():
    return f2_dual_backend()


@pytest.fixture(scope="session")
def span_q1():
    """O_2^+: Q = I on C^2."""
    return SpanQRep.from_q([[1.0, 0.0], [0.0, 1.0]], label="span_q-1")


@pytest.fixture(scope="session")
def span_q12():
    return SpanQRep.from_q([[1.2, 0.0], [0.0, 1 / 1.2]], label="span_q-1.2")
