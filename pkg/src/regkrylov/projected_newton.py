"""Projected Newton method for noise-constrained Tikhonov regularization.

Solves

    min 1/2 ||x||^2   subject to   1/2 ||A x - b||^2 = 1/2 sigma^2

by applying, in every Golub-Kahan step, one Newton step to the KKT system
projected onto the current Krylov subspace

    F_k(y, lam) = ( lam B^T (B y - c) + y ;  1/2 ||B y - c||^2 - 1/2 sigma^2 ),

with ``B = B_{k+1,k}`` and ``c = ||b|| e_1``. The lifted step is a descent
direction for ``1/2 ||F(x, lam)||^2`` in the full space; a backtracking line
search on that merit function, evaluated through the square block
``B_{k+1,k+1}``, makes the iteration globally convergent. On exit
``x = V_k y`` satisfies ``(A^T A + I/lam) x = A^T b`` and
``||A x - b|| = sigma`` up to ``tol``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import bidiag
from .config import SolverConfig
from .errors import (
    BreakdownError,
    DimensionError,
    NoiseDominatedError,
    SingularJacobianError,
    StagnationError,
)
from .operators import LinearOperator
from .trace import ConvergenceTrace, SolveResult

__all__ = [
    "eval_projected_F",
    "eval_projected_jacobian",
    "newton_step",
    "eval_F_bar",
    "line_search",
    "LineSearchResult",
    "NewtonIterate",
    "StepInfo",
    "solve",
]

log = logging.getLogger(__name__)


def _rhs(rows: int, beta0: float) -> np.ndarray:
    c = np.zeros(rows)
    c[0] = beta0
    return c


def _bidiag_matvec(B, y):
    """``B @ y`` for a lower bidiagonal ``B`` in O(k)."""
    d = np.diagonal(B)
    s = np.diagonal(B, -1)
    out = np.zeros(B.shape[0])
    out[: d.size] = d * y[: d.size]
    out[1 : 1 + s.size] += s * y[: s.size]
    return out


def _bidiag_rmatvec(B, t):
    """``B.T @ t`` for a lower bidiagonal ``B`` in O(k)."""
    d = np.diagonal(B)
    s = np.diagonal(B, -1)
    out = np.zeros(B.shape[1])
    out[: d.size] = d * t[: d.size]
    out[: s.size] += s * t[1 : 1 + s.size]
    return out


def eval_projected_F(B, y, lam, beta0, sigma) -> np.ndarray:
    """Projected KKT residual ``F_k(y, lam)`` of length ``k + 1``.

    ``B`` is any lower bidiagonal block whose column count matches ``y``;
    pass ``B_{k+1,k+1}`` and a zero-padded ``y`` to get the full-space
    residual of the current iterate.
    """
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    if B.ndim != 2 or y.ndim != 1 or B.shape[1] != y.size:
        raise DimensionError(f"B has shape {B.shape}, y has shape {y.shape}")
    t = _bidiag_matvec(B, y)
    t[0] -= beta0
    grad = lam * _bidiag_rmatvec(B, t) + y
    return np.append(grad, 0.5 * np.dot(t, t) - 0.5 * sigma**2)


def eval_projected_jacobian(B, y, lam, beta0) -> np.ndarray:
    """Symmetric ``(k+1) x (k+1)`` Jacobian of :func:`eval_projected_F`."""
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    if B.ndim != 2 or y.ndim != 1 or B.shape[1] != y.size:
        raise DimensionError(f"B has shape {B.shape}, y has shape {y.shape}")
    k = y.size
    t = B @ y - _rhs(B.shape[0], beta0)
    g = B.T @ t
    J = np.zeros((k + 1, k + 1))
    J[:k, :k] = lam * (B.T @ B) + np.eye(k)
    J[:k, k] = g
    J[k, :k] = g
    return J


def newton_step(B, y_bar, lam, beta0, sigma):
    """Solve ``J_k (dy; dlam) = -F_k`` by LU with partial pivoting.

    Returns
    -------
    dy : ndarray, shape (k,)
    dlam : float

    Raises
    ------
    SingularJacobianError
        A zero (or numerically zero) pivot was met.
    """
    F = eval_projected_F(B, y_bar, lam, beta0, sigma)
    if not np.any(F):
        return np.zeros(len(y_bar)), 0.0
    J = eval_projected_jacobian(B, y_bar, lam, beta0)
    # Near the least-squares limit the Schur complement -g^T (lam B^T B + I)^{-1} g
    # is legitimately tiny, so only an exactly vanishing pivot counts as singular.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(J, check_finite=True)
    pivots = np.abs(np.diagonal(lu))
    if pivots.min() == 0.0:
        raise SingularJacobianError(f"projected Jacobian of order {J.shape[0]} is singular")
    d = scipy.linalg.lu_solve((lu, piv), -F)
    if not np.all(np.isfinite(d)):
        raise SingularJacobianError(f"Newton step of order {J.shape[0]} is not finite")
    return d[:-1], float(d[-1])


def eval_F_bar(B_sq, y_bar, lam, beta0, sigma) -> float:
    """``||F(x_k, lam_k)||`` from the square block ``B_{k+1,k+1}``.

    ``y_bar`` is the new coefficient vector padded with a trailing zero. No
    operator products are needed.
    """
    return float(np.linalg.norm(eval_projected_F(B_sq, y_bar, lam, beta0, sigma)))


@dataclass
class LineSearchResult:
    gamma: float
    y: np.ndarray
    lam: float
    f_norm: float
    backtracks: int


def line_search(
    dy,
    dlam: float,
    y_bar,
    lam: float,
    f_prev: float,
    merit: Callable[[np.ndarray, float], float],
    config: SolverConfig | None = None,
) -> LineSearchResult:
    """Positivity-safeguarded Armijo backtracking.

    Starts from ``gamma = 1``; if ``lam + dlam <= 0`` the step is first cut
    to ``gamma = -tau * lam / dlam``. Then ``gamma`` shrinks by ``tau``
    until ``1/2 merit(y, lam)^2 < (1/2 - c gamma) f_prev^2``.

    ``merit(y, lam)`` must return ``||F||`` at the trial point.

    Raises
    ------
    StagnationError
        ``gamma`` fell below ``config.gamma_min``.
    """
    cfg = config or SolverConfig()
    y_bar = np.asarray(y_bar, dtype=float)
    dy = np.asarray(dy, dtype=float)
    gamma = 1.0
    if lam + dlam <= 0:
        gamma = -cfg.tau * lam / dlam
    target = f_prev**2
    backtracks = 0
    while True:
        y_new = y_bar + gamma * dy
        lam_new = lam + gamma * dlam
        f_new = merit(y_new, lam_new)
        if 0.5 * f_new**2 < (0.5 - cfg.c * gamma) * target:
            return LineSearchResult(gamma, y_new, lam_new, f_new, backtracks)
        gamma *= cfg.tau
        backtracks += 1
        if gamma < cfg.gamma_min:
            raise StagnationError(
                f"line search stagnated: gamma={gamma:.3e} < {cfg.gamma_min:.1e}, ||F||={f_prev:.3e}"
            )


@dataclass
class NewtonIterate:
    y: np.ndarray
    lam: float
    gamma: float
    k: int
    f_norm: float


@dataclass
class StepInfo:
    """Snapshot handed to the ``callback`` of :func:`solve` after every accepted step.

    ``B`` is the ``(k+1) x k`` block the Newton step was computed with,
    ``y_bar``/``lam_prev`` the point it was computed at and ``f_prev`` the
    projected residual norm there. ``frozen`` is true once the subspace is
    invariant and no longer grows.
    """

    iteration: int
    k: int
    state: bidiag.BidiagState
    B: np.ndarray
    y_bar: np.ndarray
    lam_prev: float
    f_prev: float
    dy: np.ndarray
    dlam: float
    iterate: NewtonIterate
    backtracks: int
    frozen: bool


def _least_squares_in_subspace(state, B):
    z, *_ = np.linalg.lstsq(B, _rhs(B.shape[0], state.beta0), rcond=None)
    return state.combine_V(z)


def solve(
    op: LinearOperator,
    b,
    sigma: float,
    config: SolverConfig | None = None,
    callback: Callable[[StepInfo], None] | None = None,
) -> SolveResult:
    """Run the projected Newton method.

    Parameters
    ----------
    op : LinearOperator
        System matrix, ``m x n``.
    b : array, shape (m,)
        Noisy data.
    sigma : float
        Discrepancy target ``eta * epsilon``.
    config : SolverConfig, optional
    callback : callable, optional
        Called with a :class:`StepInfo` after each accepted step.

    Returns
    -------
    SolveResult
        ``status`` is ``"converged"`` or ``"max_iterations"``.

    Raises
    ------
    NoiseDominatedError
        ``||b|| <= sigma``; ``x = 0`` is returned on the exception.
    BreakdownError
        Only with ``on_breakdown="raise"``; carries the least-squares solution.
    StagnationError, SingularJacobianError
        Floating-point failure of the line search or the Newton solve.
    """
    cfg = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    beta0 = float(np.linalg.norm(b))
    if beta0 <= sigma:
        raise NoiseDominatedError(
            f"||b|| = {beta0:.6g} <= sigma = {sigma:.6g}: x = 0 already satisfies the discrepancy",
            x=np.zeros(op.cols),
        )

    mv_start = op.stats.total
    trace = ConvergenceTrace("pn", extra_columns=("krylov_dim",))
    state = bidiag.init(op, b, reorth=cfg.reorth)
    lam = float(cfg.lambda0)
    y = np.zeros(0)

    tol = cfg.tol
    if cfg.tol_mode == "relative":
        # ||F(0, lam0)||: A^T b = beta0 * mu0 * v0.
        f0 = np.hypot(lam * beta0 * state.alphas[0], 0.5 * (beta0**2 - sigma**2))
        tol = cfg.tol * f0

    frozen = False
    B = B_sq = None
    f_norm = np.inf
    status = "max_iterations"
    iteration = 0

    for iteration in range(1, cfg.maxit + 1):
        if not frozen:
            bidiag.expand(state, op)
            if state.breakdown is not None:
                B = bidiag.b_matrix(state)
                if cfg.on_breakdown == "raise":
                    raise BreakdownError(
                        f"Krylov subspace became invariant at k={state.k} ({state.breakdown.kind} breakdown)",
                        x=_least_squares_in_subspace(state, B),
                        lam=lam,
                        trace=trace,
                        k=state.k,
                    )
                log.debug("breakdown %s at k=%d; continuing in invariant subspace", state.breakdown, state.k)
                frozen = True
            else:
                B = bidiag.b_matrix(state)
                B_sq = bidiag.b_matrix(state, square=True)
            y_bar = np.append(y, 0.0)
        else:
            y_bar = y

        if frozen:
            def merit(yy, ll, B=B):
                return float(np.linalg.norm(eval_projected_F(B, yy, ll, beta0, sigma)))
        else:
            def merit(yy, ll, B_sq=B_sq):
                return eval_F_bar(B_sq, np.append(yy, 0.0), ll, beta0, sigma)

        f_prev = float(np.linalg.norm(eval_projected_F(B, y_bar, lam, beta0, sigma)))
        try:
            dy, dlam = newton_step(B, y_bar, lam, beta0, sigma)
            ls = line_search(dy, dlam, y_bar, lam, f_prev, merit, cfg)
        except (StagnationError, SingularJacobianError) as exc:
            exc.x = state.combine_V(y)
            exc.lam, exc.trace, exc.k = lam, trace, state.k
            raise

        lam_prev = lam
        y, lam, f_norm = ls.y, ls.lam, ls.f_norm
        t = _bidiag_matvec(B, y)
        t[0] -= beta0
        trace.append(
            iter=iteration,
            f_norm=f_norm,
            residual=float(np.linalg.norm(t)),
            **{"lambda": lam},
            gamma=ls.gamma,
            backtracks=ls.backtracks,
            mv_total=op.stats.total - mv_start,
            krylov_dim=state.k,
        )
        if callback is not None:
            callback(
                StepInfo(
                    iteration=iteration,
                    k=state.k,
                    state=state,
                    B=B,
                    y_bar=y_bar,
                    lam_prev=lam_prev,
                    f_prev=f_prev,
                    dy=dy,
                    dlam=dlam,
                    iterate=NewtonIterate(y=y, lam=lam, gamma=ls.gamma, k=state.k, f_norm=f_norm),
                    backtracks=ls.backtracks,
                    frozen=frozen,
                )
            )
        if f_norm <= tol:
            status = "converged"
            break

    x = state.combine_V(y)
    return SolveResult(
        solver="pn",
        x=x,
        lam=lam,
        converged=status == "converged",
        status=status,
        iterations=iteration,
        mv_total=op.stats.total - mv_start,
        trace=trace,
        f_norm=f_norm,
        krylov_dim=state.k,
        info={"breakdown": None if state.breakdown is None else asdict(state.breakdown)},
    )
