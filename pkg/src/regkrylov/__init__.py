"""Noise-constrained Tikhonov regularization on Golub-Kahan Krylov subspaces."""

from . import bidiag, gbit, lagrange, problems, projected_newton
from .config import SolverConfig
from .errors import (
    BreakdownError,
    DegenerateDataError,
    DegenerateOperatorError,
    DegenerateSecantError,
    DimensionError,
    FormatError,
    InfeasibleSigmaError,
    NoiseDominatedError,
    NumericError,
    RegKrylovError,
    SingularJacobianError,
    SingularRegularizerError,
    SolverError,
    StagnationError,
    StateError,
    UnsupportedError,
)
from .operators import (
    DenseOperator,
    IdentityOperator,
    LinearOperator,
    RayProjector,
    ScaledOperator,
    SeparableBlur,
    SparseOperator,
    StencilBlur,
    aslinearoperator,
    load_matrix_market,
    scale_to_unit_norm,
    write_matrix_market,
)
from .trace import ConvergenceTrace, SolveResult

__version__ = "0.1.0"
