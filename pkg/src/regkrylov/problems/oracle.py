"""Dense reference solvers and solution checks.

Everything here works on dense copies of the operator and never touches the
operator's product counters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import DimensionError, InfeasibleSigmaError
from ..operators import LinearOperator, aslinearoperator

__all__ = [
    "ORACLE_MAX_N",
    "KKTReport",
    "DenseSVD",
    "oracle_solve",
    "oracle_solve_general",
    "check_kkt",
    "discrepancy_curve",
]

ORACLE_MAX_N = 200
_REL_TOL = 1e-12


def _dense(op_or_matrix) -> np.ndarray:
    if isinstance(op_or_matrix, LinearOperator):
        return op_or_matrix.to_dense()
    return np.asarray(op_or_matrix, dtype=float)


class DenseSVD:
    """Thin SVD of ``A`` with the data split into range and orthogonal parts."""

    def __init__(self, A, b):
        A = _dense(A)
        b = np.asarray(b, dtype=float)
        if b.shape != (A.shape[0],):
            raise DimensionError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
        self.U, self.s, self.Vt = np.linalg.svd(A, full_matrices=False)
        self.beta = self.U.T @ b
        self.b_norm = float(np.linalg.norm(b))
        self.perp_norm = float(np.linalg.norm(b - self.U @ self.beta))

    def residual_alpha(self, alpha: float) -> float:
        """``||A x_alpha - b||`` for the Tikhonov solution with parameter ``alpha``."""
        f = alpha / (self.s**2 + alpha)
        return float(np.sqrt(np.sum((f * self.beta) ** 2) + self.perp_norm**2))

    def solution_alpha(self, alpha: float) -> np.ndarray:
        return self.Vt.T @ (self.s / (self.s**2 + alpha) * self.beta)

    def curve_lambda(self, lam: float) -> tuple[np.ndarray, float, float]:
        """``x_lam``, ``||A x_lam - b||`` and the Schur-complement derivative at ``lam``."""
        q = lam * self.s**2 + 1.0
        x = self.Vt.T @ (lam * self.s / q * self.beta)
        residual = float(np.sqrt(np.sum((self.beta / q) ** 2) + self.perp_norm**2))
        d_prime = -float(np.sum(self.s**2 * self.beta**2 / q**3))
        return x, residual, d_prime


def _bisect_log(residual, sigma, start):
    """Find ``alpha`` with ``residual(alpha) = sigma`` for increasing ``residual``."""
    lo = hi = start
    while residual(lo) >= sigma:
        lo /= 10.0
        if lo < 1e-300:
            raise InfeasibleSigmaError("could not bracket the discrepancy target from below")
    while residual(hi) <= sigma:
        hi *= 10.0
        if hi > 1e300:
            raise InfeasibleSigmaError("could not bracket the discrepancy target from above")
    log_lo, log_hi = np.log(lo), np.log(hi)
    for _ in range(400):
        mid = 0.5 * (log_lo + log_hi)
        d = residual(np.exp(mid))
        if abs(d - sigma) <= _REL_TOL * sigma:
            return float(np.exp(mid))
        if d < sigma:
            log_lo = mid
        else:
            log_hi = mid
        if log_hi - log_lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
    return float(np.exp(0.5 * (log_lo + log_hi)))


def oracle_solve(op_dense, b, sigma) -> tuple[np.ndarray, float]:
    """Solve the noise-constrained Tikhonov problem by bisection on ``log alpha``.

    Returns ``(x, lam)`` with ``lam = 1/alpha``.

    Raises
    ------
    InfeasibleSigmaError
        ``sigma`` is not strictly between the least-squares residual and ``||b||``.
    """
    svd = DenseSVD(op_dense, b)
    if svd.Vt.shape[1] > ORACLE_MAX_N:
        raise DimensionError(f"oracle limited to n <= {ORACLE_MAX_N}, got {svd.Vt.shape[1]}")
    if not svd.perp_norm < sigma < svd.b_norm:
        raise InfeasibleSigmaError(
            f"sigma = {sigma:.6g} must lie in ({svd.perp_norm:.6g}, {svd.b_norm:.6g})"
        )
    start = float(svd.s[0] ** 2) if svd.s.size and svd.s[0] > 0 else 1.0
    alpha = _bisect_log(svd.residual_alpha, sigma, start)
    return svd.solution_alpha(alpha), 1.0 / alpha


def oracle_solve_general(A, b, L, x0, sigma) -> tuple[np.ndarray, float]:
    """General-form reference: each residual evaluation solves the stacked
    least-squares problem ``[A; sqrt(alpha) L] x = [b; sqrt(alpha) L x0]``."""
    A, L = _dense(A), _dense(L)
    b = np.asarray(b, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    Lx0 = L @ x0

    def solution(alpha):
        M = np.vstack([A, np.sqrt(alpha) * L])
        rhs = np.concatenate([b, np.sqrt(alpha) * Lx0])
        return np.linalg.lstsq(M, rhs, rcond=None)[0]

    def residual(alpha):
        return float(np.linalg.norm(A @ solution(alpha) - b))

    far = float(np.linalg.norm(A @ x0 - b))
    x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
    near = float(np.linalg.norm(A @ x_ls - b))
    if not near < sigma < far:
        raise InfeasibleSigmaError(f"sigma = {sigma:.6g} must lie in ({near:.6g}, {far:.6g})")
    start = float(np.linalg.norm(A, 2) ** 2 / max(np.linalg.norm(L, 2) ** 2, 1e-300))
    alpha = _bisect_log(residual, sigma, start)
    return solution(alpha), 1.0 / alpha


@dataclass(frozen=True)
class KKTReport:
    stationarity_relres: float
    discrepancy_relerr: float

    def to_dict(self):
        return {
            "stationarity_relres": self.stationarity_relres,
            "discrepancy_relerr": self.discrepancy_relerr,
        }


def check_kkt(op, b, x, lam, sigma) -> KKTReport:
    """Relative residuals of the Tikhonov normal equations and of the discrepancy target."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    op = aslinearoperator(op)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    atb = op._rmatvec(b)
    r = op._matvec(x) - b
    g = op._rmatvec(r) + x / lam  # (A^T A + I/lam) x - A^T b
    return KKTReport(
        stationarity_relres=float(np.linalg.norm(g) / np.linalg.norm(atb)),
        discrepancy_relerr=float(abs(np.linalg.norm(r) - sigma) / sigma),
    )


def _cg_solve(op, lam, rhs, rtol, maxiter):
    n = op.cols
    M = spla.LinearOperator(
        (n, n), matvec=lambda v: lam * op._rmatvec(op._matvec(v)) + v, dtype=float
    )
    x, info = spla.cg(M, rhs, rtol=rtol, atol=0.0, maxiter=maxiter)
    return x, info == 0


def discrepancy_curve(op, b, lambdas, method="auto", rtol=1e-10, maxiter=None):
    """Residual norm and Schur-complement derivative along a grid of ``lambda``.

    Returns a list of ``(lambda, residual, d_prime, ok)``. ``method="svd"``
    uses one dense SVD, ``"cg"`` solves the shifted normal equations twice
    per point; ``"auto"`` picks the SVD up to ``ORACLE_MAX_N`` unknowns.
    Invalid grid points are returned with ``ok = False`` and NaN values.
    """
    op = aslinearoperator(op)
    b = np.asarray(b, dtype=float)
    if method == "auto":
        method = "svd" if op.cols <= ORACLE_MAX_N else "cg"
    if method not in ("svd", "cg"):
        raise ValueError(f"unknown method {method!r}")
    svd = DenseSVD(op, b) if method == "svd" else None
    maxiter = maxiter or 10 * op.cols
    rows = []
    for lam in lambdas:
        lam = float(lam)
        if not (np.isfinite(lam) and lam > 0):
            rows.append((lam, np.nan, np.nan, False))
            continue
        if svd is not None:
            _, residual, d_prime = svd.curve_lambda(lam)
            ok = np.isfinite(residual) and np.isfinite(d_prime)
        else:
            x, ok1 = _cg_solve(op, lam, lam * op._rmatvec(b), rtol, maxiter)
            r = op._matvec(x) - b
            g = op._rmatvec(r)
            w, ok2 = _cg_solve(op, lam, g, rtol, maxiter)
            residual = float(np.linalg.norm(r))
            d_prime = -float(g @ w)
            ok = ok1 and ok2 and np.isfinite(residual) and np.isfinite(d_prime)
        rows.append((lam, residual, d_prime, bool(ok)))
    return rows
