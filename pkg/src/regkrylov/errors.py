"""Exception hierarchy shared by all solvers and problem generators."""

from __future__ import annotations


class RegKrylovError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(RegKrylovError, ValueError):
    """Vector or matrix dimensions do not match the operator."""


class NumericError(RegKrylovError, ArithmeticError):
    """Non-finite values entered or appeared in a computation."""


class FormatError(RegKrylovError, ValueError):
    """A file could not be parsed."""


class UnsupportedError(RegKrylovError, ValueError):
    """A file is well-formed but uses a feature that is not supported."""


class DegenerateOperatorError(RegKrylovError, ValueError):
    """The operator is (numerically) zero."""


class DegenerateDataError(RegKrylovError, ValueError):
    """The data vector is zero."""


class StateError(RegKrylovError, RuntimeError):
    """An object was queried in a state where the answer does not exist yet."""


class SingularJacobianError(NumericError):
    """The Newton system could not be factorized."""


class InfeasibleSigmaError(RegKrylovError, ValueError):
    """The discrepancy target cannot be met by any regularization parameter."""


class SingularRegularizerError(RegKrylovError, ValueError):
    """The regularization matrix is singular."""


class DegenerateSecantError(RegKrylovError, ArithmeticError):
    """Regularized and unregularized residuals coincide, the secant update is undefined."""


class SolverError(RegKrylovError):
    """An iterative solve stopped early.

    The partially computed result is attached so that callers can inspect
    or salvage it.
    """

    def __init__(self, message, *, x=None, lam=None, trace=None, k=None):
        super().__init__(message)
        self.x = x
        self.lam = lam
        self.trace = trace
        self.k = k


class BreakdownError(SolverError):
    """Golub-Kahan bidiagonalization hit an invariant subspace.

    ``x`` holds the least-squares solution restricted to the Krylov
    subspace built so far, which is the exact least-squares solution of
    the full problem.
    """


class StagnationError(SolverError, NumericError):
    """Backtracking shrank the step below the stagnation floor."""


class NoiseDominatedError(SolverError, ValueError):
    """``||b|| <= sigma``: the zero vector already satisfies the discrepancy."""
