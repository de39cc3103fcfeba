"""Full-space Lagrange/Newton method with matrix-free MINRES inner solves.

Works directly on ``F(x, lam)`` in ``R^{n+1}``. Each outer step solves the
symmetric indefinite Newton system approximately with MINRES and then
backtracks on the weighted merit function

    m(x, lam) = 1/2 ||lam A^T(Ax-b) + x||^2 + w/2 (1/2 ||Ax-b||^2 - 1/2 sigma^2)^2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import SolverConfig
from .errors import DimensionError, NoiseDominatedError, NumericError, StagnationError
from .operators import LinearOperator
from .trace import ConvergenceTrace, SolveResult

__all__ = [
    "KKTPoint",
    "MinresConfig",
    "evaluate_point",
    "eval_F",
    "apply_jacobian",
    "minres",
    "merit_m",
    "solve",
]

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class MinresConfig:
    rel_tol: float = 1e-6
    max_inner: int = 100

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_inner < 1:
            raise ValueError(f"max_inner must be >= 1, got {self.max_inner}")


@dataclass(frozen=True)
class KKTPoint:
    """A primal-dual point with its residual ``r = Ax - b`` and ``g = A^T r`` cached."""

    x: np.ndarray
    lam: float
    r: np.ndarray
    g: np.ndarray

    def F(self, sigma: float) -> np.ndarray:
        return np.append(self.lam * self.g + self.x, 0.5 * (self.r @ self.r) - 0.5 * sigma**2)


def evaluate_point(op: LinearOperator, b, x, lam) -> KKTPoint:
    """Form the cached residuals at ``(x, lam)``; one product with A and one with A^T."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if x.shape != (op.cols,) or b.shape != (op.rows,):
        raise DimensionError(
            f"x has shape {x.shape}, b has shape {b.shape}, operator is {op.shape}"
        )
    r = op.apply(x) - b
    return KKTPoint(x=x, lam=float(lam), r=r, g=op.apply_transpose(r))


def eval_F(op: LinearOperator, b, x, lam, sigma) -> np.ndarray:
    """``(lam A^T(Ax-b) + x ; 1/2||Ax-b||^2 - 1/2 sigma^2)``."""
    return evaluate_point(op, b, x, lam).F(sigma)


def apply_jacobian(op: LinearOperator, point: KKTPoint, v) -> np.ndarray:
    """Product of the KKT Jacobian at ``point`` with ``v = (v_x, v_lam)``.

    Uses the cached ``g`` so each call costs one product with A and one with A^T.
    """
    v = np.asarray(v, dtype=float)
    n = op.cols
    if v.shape != (n + 1,):
        raise DimensionError(f"expected a vector of length {n + 1}, got shape {v.shape}")
    vx, vl = v[:n], v[n]
    top = point.lam * op.apply_transpose(op.apply(vx)) + vx + vl * point.g
    return np.append(top, point.g @ vx)


def minres(apply: Callable[[np.ndarray], np.ndarray], rhs, rel_tol=1e-6, max_inner=100):
    """Unpreconditioned MINRES for a symmetric, possibly indefinite operator.

    Starts from zero. Returns ``(x, relres, iters)`` where ``relres`` is the
    recurrence estimate of ``||rhs - apply(x)|| / ||rhs||``. The residual norm
    is nonincreasing, so on hitting ``max_inner`` the last iterate is the best.

    Raises
    ------
    NumericError
        A recurrence quantity became non-finite.
    """
    rhs = np.asarray(rhs, dtype=float)
    x = np.zeros_like(rhs)
    beta1 = float(np.linalg.norm(rhs))
    if beta1 == 0.0:
        return x, 0.0, 0
    eps = np.finfo(float).eps

    r1 = rhs.copy()
    r2 = rhs.copy()
    y = rhs.copy()
    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    cs, sn = -1.0, 0.0
    w = np.zeros_like(rhs)
    w2 = np.zeros_like(rhs)
    relres = 1.0
    iters = 0
    for iters in range(1, max_inner + 1):
        v = y / beta
        y = apply(v)
        if iters >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        oldb = beta
        beta = float(np.linalg.norm(y))

        # apply the previous rotation, then build the new one
        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), eps)
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w
        if not (np.isfinite(phibar) and np.isfinite(beta) and np.all(np.isfinite(x))):
            raise NumericError(f"MINRES produced non-finite values at iteration {iters}")

        relres = abs(phibar) / beta1
        if relres <= rel_tol or beta <= eps * beta1:
            break
    return x, relres, iters


def _merit(F, w):
    n = F.size - 1
    return 0.5 * float(F[:n] @ F[:n]) + 0.5 * w * F[n] ** 2


def merit_m(op: LinearOperator, b, x, lam, sigma, w=1.0) -> float:
    if not w > 0:
        raise ValueError(f"merit weight must be positive, got {w}")
    return _merit(eval_F(op, b, x, lam, sigma), w)


def solve(
    op: LinearOperator,
    b,
    sigma: float,
    config: SolverConfig | None = None,
    callback: Callable[[KKTPoint], None] | None = None,
) -> SolveResult:
    """Newton's method on the full KKT system with merit backtracking.

    Trial points that come within ``sqrt(eps) ||A^T b||`` of ``A^T(Ax-b) = 0``
    are rejected like failed Armijo tests. Every trial point costs two
    operator products, and these are included in ``mv_total``.

    Raises
    ------
    NoiseDominatedError
        ``||b|| <= sigma``.
    StagnationError
        Backtracking drove the step below ``gamma_min``.
    """
    cfg = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if np.linalg.norm(b) <= sigma:
        raise NoiseDominatedError(
            f"||b|| = {np.linalg.norm(b):.6g} <= sigma = {sigma:.6g}", x=np.zeros(op.cols)
        )
    n = op.cols
    mv_start = op.stats.total
    trace = ConvergenceTrace("lagrange", extra_columns=("inner_iters",))

    point = evaluate_point(op, b, np.zeros(n), cfg.lambda0)
    guard = _SQRT_EPS * float(np.linalg.norm(point.g))  # g = -A^T b at x = 0
    F = point.F(sigma)
    f_norm = float(np.linalg.norm(F))
    tol = cfg.tol * f_norm if cfg.tol_mode == "relative" else cfg.tol

    status = "converged" if f_norm <= tol else "max_iterations"
    inner_counts = []
    iteration = 0
    while status != "converged" and iteration < cfg.maxit:
        iteration += 1
        merit = _merit(F, cfg.w)
        step, _, inner = minres(
            lambda v: apply_jacobian(op, point, v),
            -F,
            rel_tol=cfg.minres_tol,
            max_inner=cfg.minres_maxit,
        )
        inner_counts.append(inner)
        dx, dlam = step[:n], float(step[n])

        gamma = 1.0
        if point.lam + dlam <= 0.0:
            gamma = -cfg.tau * point.lam / dlam
        backtracks = 0
        while True:
            if gamma < cfg.gamma_min:
                raise StagnationError(
                    f"Lagrange line search stalled at outer iteration {iteration}",
                    x=point.x,
                    lam=point.lam,
                    trace=trace,
                )
            trial = evaluate_point(op, b, point.x + gamma * dx, point.lam + gamma * dlam)
            F_trial = trial.F(sigma)
            ok = (
                np.all(np.isfinite(F_trial))
                and np.linalg.norm(trial.g) >= guard
                and _merit(F_trial, cfg.w) <= (1.0 - 2.0 * cfg.c * gamma) * merit
            )
            if ok:
                break
            gamma *= cfg.tau
            backtracks += 1

        point, F = trial, F_trial
        f_norm = float(np.linalg.norm(F))
        trace.append(
            iter=iteration,
            f_norm=f_norm,
            residual=float(np.linalg.norm(point.r)),
            **{"lambda": point.lam},
            gamma=gamma,
            backtracks=backtracks,
            mv_total=op.stats.total - mv_start,
            inner_iters=inner,
        )
        if callback is not None:
            callback(point)
        if f_norm <= tol:
            status = "converged"

    return SolveResult(
        solver="lagrange",
        x=point.x,
        lam=point.lam,
        converged=status == "converged",
        status=status,
        iterations=iteration,
        mv_total=op.stats.total - mv_start,
        trace=trace,
        f_norm=f_norm,
        info={"avg_inner": float(np.mean(inner_counts)) if inner_counts else 0.0},
    )
