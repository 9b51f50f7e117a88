"""Root of the qlattice exception hierarchy."""


class QLatticeError(Exception):
    """Base class for every error raised by qlattice."""
    pass
