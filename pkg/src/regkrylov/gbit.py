"""Generalized bidiagonal-Tikhonov (GBiT).

Reference solver sharing the Golub-Kahan basis with the projected Newton
method. In every Krylov dimension it solves the projected least-squares and
Tikhonov problems at the current ``alpha`` and moves ``alpha`` by one secant
step towards the discrepancy target.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import bidiag
from .config import SolverConfig
from .errors import BreakdownError, DegenerateSecantError, NoiseDominatedError
from .operators import LinearOperator
from .projected_newton import _least_squares_in_subspace, _rhs, eval_F_bar, eval_projected_F
from .trace import ConvergenceTrace, SolveResult

__all__ = ["GbitState", "projected_solves", "update_alpha", "solve"]

log = logging.getLogger(__name__)


@dataclass
class GbitState:
    alpha: float
    y: np.ndarray
    z: np.ndarray
    k: int


def _qr_solve(M, rhs):
    Q, R = np.linalg.qr(M)
    d = np.abs(np.diagonal(R))
    if d.size and d.min() <= np.finfo(float).eps * M.shape[1] * d.max():
        raise BreakdownError("projected bidiagonal matrix is rank deficient")
    return np.linalg.solve(R, Q.T @ rhs) if d.size else np.zeros(0)


def projected_solves(B, c, alpha):
    """Solve the projected problems of one GBiT step.

    Returns ``(z, y)`` with ``z = argmin ||B z - c||`` and ``y`` the solution
    of ``(B^T B + alpha I) y = B^T c``. Both go through QR of ``B`` and of the
    stacked matrix ``[B; sqrt(alpha) I]`` so ``B^T B`` is never formed.

    Raises
    ------
    BreakdownError
        ``B`` is rank deficient.
    """
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    k = B.shape[1]
    z = _qr_solve(B, c)
    stacked = np.vstack([B, np.sqrt(alpha) * np.eye(k)])
    y = _qr_solve(stacked, np.concatenate([c, np.zeros(k)]))
    return z, y


def update_alpha(alpha_prev, r_z, r_y, sigma):
    """Secant update ``alpha * |(sigma - r_z) / (r_y - r_z)|``.

    Raises
    ------
    DegenerateSecantError
        ``r_y == r_z``.
    """
    if r_y == r_z:
        raise DegenerateSecantError(f"regularized and plain residuals coincide ({r_y!r})")
    return abs((sigma - r_z) / (r_y - r_z)) * alpha_prev


def solve(
    op: LinearOperator,
    b,
    sigma: float,
    config: SolverConfig | None = None,
    callback: Callable[[GbitState], None] | None = None,
) -> SolveResult:
    """Run GBiT with the same stopping rule as the projected Newton method.

    The iteration stops once ``||F(x_k, 1/alpha_k)|| <= tol``, evaluated in the
    Krylov subspace, so each iteration costs exactly one product with ``A``
    and one with ``A^T``.

    Raises
    ------
    NoiseDominatedError
        ``||b|| <= sigma``.
    BreakdownError
        Only with ``on_breakdown="raise"``.
    """
    cfg = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    beta0 = float(np.linalg.norm(b))
    if beta0 <= sigma:
        raise NoiseDominatedError(
            f"||b|| = {beta0:.6g} <= sigma = {sigma:.6g}", x=np.zeros(op.cols)
        )

    mv_start = op.stats.total
    trace = ConvergenceTrace("gbit", extra_columns=("krylov_dim", "secant_frozen"))
    state = bidiag.init(op, b, reorth=cfg.reorth)
    alpha = cfg.initial_alpha
    tol = cfg.tol
    if cfg.tol_mode == "relative":
        lam0 = 1.0 / alpha
        tol = cfg.tol * np.hypot(lam0 * beta0 * state.alphas[0], 0.5 * (beta0**2 - sigma**2))

    frozen = False
    y = np.zeros(0)
    f_norm = np.inf
    status = "max_iterations"
    iteration = 0
    for iteration in range(1, cfg.maxit + 1):
        if not frozen:
            bidiag.expand(state, op)
            B = bidiag.b_matrix(state)
            if state.breakdown is not None:
                if cfg.on_breakdown == "raise":
                    raise BreakdownError(
                        f"Krylov subspace became invariant at k={state.k}",
                        x=_least_squares_in_subspace(state, B),
                        lam=1.0 / alpha,
                        trace=trace,
                        k=state.k,
                    )
                frozen = True
            else:
                B_sq = bidiag.b_matrix(state, square=True)
        c = _rhs(B.shape[0], beta0)
        z, y = projected_solves(B, c, alpha)
        r_z = float(np.linalg.norm(B @ z - c))
        r_y = float(np.linalg.norm(B @ y - c))
        secant_frozen = False
        try:
            alpha = update_alpha(alpha, r_z, r_y, sigma)
        except DegenerateSecantError:
            log.debug("degenerate secant step at k=%d; alpha kept at %g", state.k, alpha)
            secant_frozen = True

        lam = 1.0 / alpha
        if frozen:
            f_norm = float(np.linalg.norm(eval_projected_F(B, y, lam, beta0, sigma)))
        else:
            f_norm = eval_F_bar(B_sq, np.append(y, 0.0), lam, beta0, sigma)
        trace.append(
            iter=iteration,
            f_norm=f_norm,
            residual=r_y,
            **{"lambda": lam},
            gamma=1.0,
            backtracks=0,
            mv_total=op.stats.total - mv_start,
            krylov_dim=state.k,
            secant_frozen=secant_frozen,
        )
        if callback is not None:
            callback(GbitState(alpha=alpha, y=y, z=z, k=state.k))
        if f_norm <= tol:
            status = "converged"
            break

    return SolveResult(
        solver="gbit",
        x=state.combine_V(y),
        lam=1.0 / alpha,
        converged=status == "converged",
        status=status,
        iterations=iteration,
        mv_total=op.stats.total - mv_start,
        trace=trace,
        f_norm=f_norm,
        krylov_dim=state.k,
        info={"breakdown": None if state.breakdown is None else asdict(state.breakdown)},
    )
