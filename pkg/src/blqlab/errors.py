"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes: I/O trouble is 1,
validation failures are 2, solver failures are 3, and a report whose
asserted checks fail exits 4 without raising.
"""

from __future__ import annotations


class BlqError(Exception):
    """Base class for all package errors."""


class ValidationError(BlqError):
    """Malformed or inconsistent input data.

    ``field`` names the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class UsageError(BlqError):
    """An operation was called with an incompatible argument combination."""


class SolverError(BlqError):
    """A numerical solve failed to produce an acceptable result."""


class NoStabilizingSolutionError(SolverError):
    """The steady Riccati iteration found no positive definite solution."""


class IntegrationError(SolverError):
    """An ODE/PDE sweep produced non-finite values or broke an invariant."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class RankDeficiencyError(SolverError):
    """A constraint matrix was rank deficient.

    Under the Hautus full-rank condition on (A - lambda*I, B, C) the
    stacked constraint map (A, C, B) has full row rank, so hitting this
    usually means the stabilizability precondition does not hold.
    """
