"""Exception types raised by the solvers and the CLI."""


class AlohaTFError(Exception):
    """Base class for all package errors."""


class DomainError(AlohaTFError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidParameters(DomainError):
    """A restricted control violates its parameter constraints."""


class InvalidN(DomainError):
    """The number of users is not a valid positive integer."""


class ZeroVector(DomainError):
    """Jain fairness is undefined for the all-zero rate vector."""


class OutOfRegime(DomainError):
    """The target throughput lies outside the two-value regime [theta_n, 1)."""


class GridTooCoarse(DomainError):
    """A throughput grid is too coarse to resolve the critical intervals."""


class NoFeasiblePoint(AlohaTFError):
    """The oracle grid contains no point satisfying the throughput band."""
