"""Solver configuration shared by the three solvers and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class SolverConfig:
    """Knobs for :mod:`projected_newton`, :mod:`gbit` and :mod:`lagrange`.

    ``lambda0`` is the initial Lagrange multiplier (``1/alpha``). A large value
    keeps the projected Newton iterates away from flat parts of the
    discrepancy curve; ``lambda0=1`` reproduces the deblurring protocol.
    ``alpha0`` seeds GBiT and defaults to ``1/lambda0``.

    ``tol`` is absolute on ``||F||`` unless ``tol_mode="relative"``, in which
    case it is scaled by ``||F(0, lambda0)||``.

    ``on_breakdown="continue"`` keeps iterating inside the invariant Krylov
    subspace (where the projected problem is exact); ``"raise"`` stops with
    :class:`~regkrylov.errors.BreakdownError` carrying the least-squares
    solution.
    """

    lambda0: float = 1e5
    alpha0: float | None = None
    tol: float = 1e-3
    maxit: int = 500
    tau: float = 0.9
    c: float = 1e-4
    gamma_min: float = 1e-12
    reorth: bool = True
    tol_mode: str = "absolute"
    on_breakdown: str = "continue"
    # Lagrange method only
    w: float = 1.0
    minres_tol: float = 1e-6
    minres_maxit: int = 100

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0}")
        if self.alpha0 is not None and not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not 0 < self.c < 1:
            raise ValueError(f"Armijo constant c must lie in (0, 1), got {self.c}")
        if not 0 < self.tau < 1:
            raise ValueError(f"backtracking factor tau must lie in (0, 1), got {self.tau}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.maxit) < 1:
            raise ValueError(f"maxit must be at least 1, got {self.maxit}")
        if not self.gamma_min > 0:
            raise ValueError("gamma_min must be positive")
        if self.tol_mode not in ("absolute", "relative"):
            raise ValueError(f"tol_mode must be 'absolute' or 'relative', got {self.tol_mode!r}")
        if self.on_breakdown not in ("continue", "raise"):
            raise ValueError(f"on_breakdown must be 'continue' or 'raise', got {self.on_breakdown!r}")
        if not self.w > 0:
            raise ValueError(f"merit weight w must be positive, got {self.w}")
        if not 0 < self.minres_tol < 1:
            raise ValueError(f"minres_tol must lie in (0, 1), got {self.minres_tol}")
        if int(self.minres_maxit) < 1:
            raise ValueError("minres_maxit must be at least 1")
        self.maxit = int(self.maxit)
        self.minres_maxit = int(self.minres_maxit)

    @property
    def initial_alpha(self) -> float:
        return 1.0 / self.lambda0 if self.alpha0 is None else self.alpha0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**data)
