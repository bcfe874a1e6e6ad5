"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: DataError -> 2,
NumericalError -> 3. Plain ValueError from bad arguments is treated as a
usage problem by callers.
"""


class DataError(Exception):
    """Malformed or inconsistent input data (files, manifests, samples)."""


class NumericalError(Exception):
    """Numerical failure: singular matrix, degenerate sample, no convergence."""
