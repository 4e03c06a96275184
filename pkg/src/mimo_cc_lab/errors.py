"""Exception hierarchy shared by every module of the package."""


class MimoCCError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MimoCCError, ValueError):
    """A parameter lies outside its documented domain."""


class ProblemTooLargeError(InvalidArgumentError):
    """Refusal to build a problem whose constraint count explodes."""


class NumericDomainError(MimoCCError, ValueError):
    """A matrix is not Hermitian / PSD within tolerance."""


class InfeasibleError(MimoCCError, ValueError):
    """No feasible point exists for the requested configuration."""


class SolverFailure(MimoCCError, RuntimeError):
    """An iterative solver did not converge.

    Parameters
    ----------
    message : str
        Human readable reason.
    best : object, optional
        Best feasible point found before giving up (a ``CovarianceSet`` for
        the multicast solvers).
    rate : float, optional
        Objective value attained at ``best``.
    """

    def __init__(self, message, best=None, rate=None):
        super().__init__(message)
        self.best = best
        self.rate = rate


class DegenerateTrialError(MimoCCError, RuntimeError):
    """A Monte Carlo trial produced a zero transmission rate."""
