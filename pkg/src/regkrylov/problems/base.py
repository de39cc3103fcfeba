"""Problem container and noise model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError
from ..operators import LinearOperator

__all__ = ["InverseProblem", "add_noise"]


@dataclass
class InverseProblem:
    """Operator, noisy data and the discrepancy target ``sigma = eta * epsilon``.

    ``spec`` records how the problem was generated so it can be rebuilt
    from a bundle; it is empty for problems assembled by hand.
    """

    op: LinearOperator
    b: np.ndarray
    epsilon: float
    eta: float = 1.0
    b_exact: np.ndarray | None = None
    x_exact: np.ndarray | None = None
    seed: int | None = None
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.op.rows,):
            raise ValueError(f"b has shape {self.b.shape}, operator has {self.op.rows} rows")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def sigma(self) -> float:
        return self.eta * self.epsilon

    @property
    def shape(self):
        return self.op.shape


def add_noise(b_exact, level: float, seed) -> tuple[np.ndarray, float]:
    """Add Gaussian noise rescaled to norm ``level * ||b_exact||`` exactly.

    Returns ``(b, epsilon)``.
    """
    b_exact = np.asarray(b_exact, dtype=float)
    if not level > 0:
        raise ValueError(f"noise level must be positive, got {level}")
    norm = float(np.linalg.norm(b_exact))
    if norm == 0.0:
        raise DegenerateDataError("exact data is zero, relative noise is undefined")
    g = np.random.default_rng(seed).standard_normal(b_exact.shape)
    epsilon = level * norm
    e = epsilon * g / np.linalg.norm(g)
    return b_exact + e, epsilon
