"""Exception hierarchy shared across the package.

Two broad failure classes are distinguished so callers (notably the CLI)
can map them to distinct exit codes: problems with the *data* handed in,
and problems arising from the *numerics* while processing valid data.
"""


class BspcoaError(Exception):
    """Base class for all package-specific errors."""


class DataError(BspcoaError):
    """Invalid or degenerate input data (bad shapes, negative counts, ...)."""


class NumericalError(BspcoaError):
    """Numerical failure on structurally valid input (e.g. indefinite system)."""
