"""Dense full-space KKT quantities used as oracles."""

import numpy as np


def F_dense(A, b, x, lam, sigma):
    r = A @ x - b
    return np.append(lam * A.T @ r + x, 0.5 * r @ r - 0.5 * sigma**2)


def J_dense(A, b, x, lam):
    n = A.shape[1]
    g = A.T @ (A @ x - b)
    J = np.zeros((n + 1, n + 1))
    J[:n, :n] = lam * A.T @ A + np.eye(n)
    J[:n, n] = g
    J[n, :n] = g
    return J
