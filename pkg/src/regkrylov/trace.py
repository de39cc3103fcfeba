"""Per-iteration convergence records and solver results."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

BASE_COLUMNS = ("iter", "f_norm", "residual", "lambda", "gamma", "backtracks", "mv_total")


@dataclass
class ConvergenceTrace:
    """Append-only table of iteration records.

    Every solver writes the :data:`BASE_COLUMNS`; solver-specific columns
    (``inner_iters`` for the Lagrange method, ``krylov_dim`` for the Krylov
    solvers, ...) are listed in ``extra_columns`` and appended after them.
    """

    solver: str
    extra_columns: tuple = ()
    records: list = field(default_factory=list)

    def append(self, **values) -> None:
        missing = [c for c in BASE_COLUMNS + tuple(self.extra_columns) if c not in values]
        if missing:
            raise KeyError(f"trace record missing columns {missing}")
        self.records.append(values)

    @property
    def columns(self) -> tuple:
        return BASE_COLUMNS + tuple(self.extra_columns)

    def __len__(self):
        return len(self.records)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    @property
    def last(self) -> dict | None:
        return self.records[-1] if self.records else None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for rec in self.records:
                writer.writerow([_fmt(rec[c]) for c in self.columns])


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class SolveResult:
    """Outcome of one solver run.

    ``lam`` is the Lagrange multiplier, i.e. ``1/alpha`` for the Tikhonov
    parameter ``alpha``. ``krylov_dim`` is the dimension of the final
    subspace for the Krylov solvers and ``None`` for the Lagrange method.
    """

    solver: str
    x: np.ndarray
    lam: float
    converged: bool
    status: str
    iterations: int
    mv_total: int
    trace: ConvergenceTrace
    f_norm: float
    krylov_dim: int | None = None
    info: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return 1.0 / self.lam
