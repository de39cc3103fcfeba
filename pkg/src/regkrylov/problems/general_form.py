"""General-form Tikhonov ``min ||L(x - x0)||`` reduced to standard form.

With ``z = L(x - x0)`` the problem becomes a standard-form one for
``A L^{-1}`` and data ``r0 = b - A x0``; the solution maps back as
``x = x0 + L^{-1} z``. Only square invertible ``L`` is supported.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionError, SingularRegularizerError
from ..operators import LinearOperator
from .base import InverseProblem

__all__ = [
    "DiagonalRegularizer",
    "DenseRegularizer",
    "StandardFormOperator",
    "GeneralFormProblem",
    "to_standard_form",
    "from_standard_form",
]


class DiagonalRegularizer(LinearOperator):
    backend = "dense"

    def __init__(self, diagonal):
        d = np.asarray(diagonal, dtype=float)
        if d.ndim != 1:
            raise DimensionError("diagonal must be a 1-d array")
        if not np.all(np.isfinite(d)) or np.any(d == 0):
            raise SingularRegularizerError("diagonal regularizer has a zero or non-finite entry")
        super().__init__((d.size, d.size))
        self.diagonal = d

    def _matvec(self, v):
        return self.diagonal * v

    _rmatvec = _matvec

    def solve(self, v):
        return v / self.diagonal

    solve_transpose = solve

    def to_dense(self):
        return np.diag(self.diagonal)


class DenseRegularizer(LinearOperator):
    """Square ``L`` with an LU factorization kept for solves."""

    backend = "dense"

    def __init__(self, matrix):
        L = np.asarray(matrix, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise DimensionError(f"regularizer must be square, got shape {L.shape}")
        super().__init__(L.shape)
        self.matrix = L
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(L, check_finite=True)
        pivots = np.abs(np.diagonal(lu))
        if pivots.min() <= np.finfo(float).eps * L.shape[0] * max(pivots.max(), 1e-300):
            raise SingularRegularizerError("regularization matrix is numerically singular")
        self._lu = (lu, piv)

    def _matvec(self, v):
        return self.matrix @ v

    def _rmatvec(self, u):
        return self.matrix.T @ u

    def solve(self, v):
        return sla.lu_solve(self._lu, v)

    def solve_transpose(self, v):
        return sla.lu_solve(self._lu, v, trans=1)

    def to_dense(self):
        return self.matrix.copy()


class StandardFormOperator(LinearOperator):
    """Lazy ``A L^{-1}``; only the wrapper's counters move."""

    def __init__(self, A: LinearOperator, L):
        if L.shape != (A.cols, A.cols):
            raise DimensionError(f"L has shape {L.shape}, expected {(A.cols, A.cols)}")
        super().__init__(A.shape)
        self.A = A
        self.L = L
        self.backend = f"{A.backend}*inv(L)"

    def _matvec(self, v):
        return self.A._matvec(self.L.solve(v))

    def _rmatvec(self, u):
        return self.L.solve_transpose(self.A._rmatvec(u))


@dataclass
class GeneralFormProblem:
    base: InverseProblem
    L: LinearOperator
    x0: np.ndarray

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        n = self.base.op.cols
        if self.x0.shape != (n,):
            raise DimensionError(f"x0 has shape {self.x0.shape}, expected ({n},)")
        if self.L.shape != (n, n):
            raise DimensionError(f"L has shape {self.L.shape}, expected {(n, n)}")
        if not hasattr(self.L, "solve"):
            raise SingularRegularizerError("regularizer provides no solve(), cannot invert L")


def to_standard_form(gp: GeneralFormProblem) -> InverseProblem:
    base = gp.base
    r0 = base.b - base.op._matvec(gp.x0)
    return InverseProblem(
        op=StandardFormOperator(base.op, gp.L),
        b=r0,
        epsilon=base.epsilon,
        eta=base.eta,
        seed=base.seed,
    )


def from_standard_form(z, gp: GeneralFormProblem) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != gp.x0.shape:
        raise DimensionError(f"z has shape {z.shape}, expected {gp.x0.shape}")
    return gp.x0 + gp.L.solve(z)
