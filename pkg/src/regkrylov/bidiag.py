"""Incremental Golub-Kahan (lower) bidiagonalization.

After :func:`init` and ``k`` calls to :func:`expand` the state holds
``U_{k+1} = [u_0..u_k]``, ``V_{k+1} = [v_0..v_k]``, diagonal ``mu_0..mu_k``
and subdiagonal ``nu_1..nu_k`` such that

    A V_k     = U_{k+1} B_{k+1,k}
    A^T U_{k+1} = V_k B_{k+1,k}^T + mu_k v_k e_{k+1}^T

A vanishing coefficient marks an invariant Krylov subspace. It is stored as an
exact zero and recorded in :attr:`BidiagState.breakdown`; no further vectors
are generated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BreakdownError, DegenerateDataError, StateError
from .operators import LinearOperator

__all__ = [
    "Breakdown",
    "BidiagState",
    "init",
    "expand",
    "b_matrix",
    "orthogonality_defect",
]

_SQRT_EPS = np.sqrt(np.finfo(float).eps)
_REORTH_TRIGGER = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Breakdown:
    kind: str  # "mu" or "nu"
    index: int


@dataclass
class BidiagState:
    U: list = field(default_factory=list)
    V: list = field(default_factory=list)
    alphas: list = field(default_factory=list)  # mu_0, mu_1, ...
    betas: list = field(default_factory=list)  # nu_1, nu_2, ...
    beta0: float = 0.0
    reorth: bool = True
    breakdown: Breakdown | None = None
    reorth_dots: int = 0
    reorth_axpys: int = 0
    _scale: float = 1.0

    @property
    def k(self) -> int:
        """Number of completed expansions (``len(betas)``)."""
        return len(self.betas)

    @property
    def breakdown_tol(self) -> float:
        return _SQRT_EPS * max(1.0, self._scale)

    def basis_U(self, cols: int | None = None) -> np.ndarray:
        cols = len(self.U) if cols is None else cols
        return np.column_stack(self.U[:cols])

    def basis_V(self, cols: int | None = None) -> np.ndarray:
        cols = len(self.V) if cols is None else cols
        return np.column_stack(self.V[:cols])

    def combine_V(self, y) -> np.ndarray:
        """Return ``V_j y`` for ``j = len(y)`` without stacking the basis."""
        y = np.asarray(y, dtype=float)
        if y.size > len(self.V):
            raise StateError(f"need {y.size} basis vectors, only {len(self.V)} stored")
        out = np.zeros_like(self.V[0])
        for coef, v in zip(y, self.V):
            out += coef * v
        return out


def _orthogonalize(w, basis, state):
    """Modified Gram-Schmidt against ``basis``, repeated once if the norm collapses."""
    before = np.linalg.norm(w)
    for q in basis:
        w -= np.dot(q, w) * q
    state.reorth_dots += len(basis)
    state.reorth_axpys += len(basis)
    if np.linalg.norm(w) < _REORTH_TRIGGER * before:
        for q in basis:
            w -= np.dot(q, w) * q
        state.reorth_dots += len(basis)
        state.reorth_axpys += len(basis)
    return w


def init(op: LinearOperator, b, reorth: bool = True) -> BidiagState:
    """Start the factorization with ``u_0 = b/||b||``; one transpose product.

    Raises
    ------
    DegenerateDataError
        ``b`` is zero.
    BreakdownError
        ``A^T b`` vanishes, so no Krylov vector exists.
    """
    b = np.asarray(b, dtype=float)
    beta0 = float(np.linalg.norm(b))
    if beta0 == 0.0:
        raise DegenerateDataError("right-hand side is zero")
    u0 = b / beta0
    r0 = op.apply_transpose(u0)
    mu0 = float(np.linalg.norm(r0))
    state = BidiagState(beta0=beta0, reorth=reorth, _scale=mu0)
    state.U.append(u0)
    if mu0 <= state.breakdown_tol:
        raise BreakdownError("A^T b = 0: b is orthogonal to the range of A", x=np.zeros(op.cols), k=0)
    state.alphas.append(mu0)
    state.V.append(r0 / mu0)
    return state


def expand(state: BidiagState, op: LinearOperator) -> BidiagState:
    """Append ``nu_{k+1}, u_{k+1}, mu_{k+1}, v_{k+1}``; one product with A and one with A^T.

    On breakdown the offending coefficient is stored as ``0.0`` and
    ``state.breakdown`` is set. Calling again after a breakdown raises
    :class:`StateError`.
    """
    if state.breakdown is not None:
        raise StateError(f"bidiagonalization already broke down ({state.breakdown})")
    k = state.k
    p = op.apply(state.V[k]) - state.alphas[k] * state.U[k]
    if state.reorth:
        p = _orthogonalize(p, state.U, state)
    nu = float(np.linalg.norm(p))
    # mu_k and nu_{k+1} sit in the same row/column of B; the tolerance
    # tracks the running maximum of all coefficients.
    if nu <= state.breakdown_tol:
        state.betas.append(0.0)
        state.breakdown = Breakdown("nu", k + 1)
        return state
    state._scale = max(state._scale, nu)
    state.betas.append(nu)
    u = p / nu
    state.U.append(u)

    r = op.apply_transpose(u) - nu * state.V[k]
    if state.reorth:
        r = _orthogonalize(r, state.V, state)
    mu = float(np.linalg.norm(r))
    if mu <= state.breakdown_tol:
        state.alphas.append(0.0)
        state.breakdown = Breakdown("mu", k + 1)
        return state
    state._scale = max(state._scale, mu)
    state.alphas.append(mu)
    state.V.append(r / mu)
    return state


def b_matrix(state: BidiagState, square: bool = False, k: int | None = None) -> np.ndarray:
    """Dense ``B_{k+1,k}`` (or ``B_{k+1,k+1}`` with ``square=True``).

    ``k`` defaults to the current iteration index ``state.k``.

    Raises
    ------
    StateError
        The requested block needs coefficients that were never computed.
    """
    k = state.k if k is None else k
    if k < 0 or k > state.k:
        raise StateError(f"iteration {k} not reached (state at {state.k})")
    cols = k + 1 if square else k
    if cols > len(state.alphas):
        raise StateError(f"B_{{{k + 1},{cols}}} needs mu_{cols - 1}, which does not exist")
    B = np.zeros((k + 1, cols))
    idx = np.arange(cols)
    B[idx, idx] = state.alphas[:cols]
    sub = np.arange(min(k, cols))
    B[sub + 1, sub] = state.betas[: sub.size]
    return B


def orthogonality_defect(state: BidiagState) -> tuple[float, float]:
    """``max |Q^T Q - I|`` for the stored U and V bases."""
    out = []
    for basis in (state.U, state.V):
        Q = np.column_stack(basis)
        out.append(float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1])))))
    return out[0], out[1]
