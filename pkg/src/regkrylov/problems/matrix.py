"""Problems built from explicit matrices: Matrix Market files or seeded random ones."""

from __future__ import annotations

import os

import numpy as np

from ..operators import DenseOperator, LinearOperator, load_matrix_market, scale_to_unit_norm
from .base import InverseProblem, add_noise

__all__ = ["sine_solution", "make_matrix_problem", "make_random_problem"]


def sine_solution(n: int) -> np.ndarray:
    """``x_i = sin(2 pi i / (n + 1))`` for ``i = 1..n``."""
    h = 2.0 * np.pi / (n + 1)
    return np.sin(h * np.arange(1, n + 1))


def make_matrix_problem(source, level=0.1, seed=0, eta=1.0) -> InverseProblem:
    """Load (or take) a matrix, scale it to unit 2-norm and add noise to ``A x_sine``.

    Wide matrices are transposed on load so that ``m >= n``.
    """
    if isinstance(source, LinearOperator):
        op = source
        path = None
    else:
        path = os.fspath(source)
        op = load_matrix_market(path)
    op = scale_to_unit_norm(op)
    x_exact = sine_solution(op.cols)
    b_exact = op._matvec(x_exact)
    b, epsilon = add_noise(b_exact, level, seed)
    spec = {"generator": "mtx", "matrix": path, "level": level, "seed": seed, "eta": eta}
    return InverseProblem(
        op=op, b=b, epsilon=epsilon, eta=eta, b_exact=b_exact, x_exact=x_exact, seed=seed, spec=spec
    )


def make_random_problem(m=60, n=40, seed=0, level=0.1, eta=1.0, decay=0.8) -> InverseProblem:
    """Ill-conditioned ``m x n`` matrix with singular values ``decay**i`` and random singular vectors."""
    if m < n:
        raise ValueError(f"need m >= n, got {m} x {n}")
    if not 0 < decay <= 1:
        raise ValueError(f"decay must lie in (0, 1], got {decay}")
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((m, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = decay ** np.arange(n)
    op = DenseOperator((U * s) @ V.T)
    x_exact = sine_solution(n)
    b_exact = op._matvec(x_exact)
    b, epsilon = add_noise(b_exact, level, seed + 1)
    spec = {"generator": "random", "m": m, "n": n, "seed": seed, "level": level, "eta": eta, "decay": decay}
    return InverseProblem(
        op=op, b=b, epsilon=epsilon, eta=eta, b_exact=b_exact, x_exact=x_exact, seed=seed, spec=spec
    )
