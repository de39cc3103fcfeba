import numpy as np
import pytest

from regkrylov.config import SolverConfig
from regkrylov.trace import BASE_COLUMNS, ConvergenceTrace


def test_defaults():
    cfg = SolverConfig()
    assert (cfg.lambda0, cfg.tau, cfg.c, cfg.maxit, cfg.tol, cfg.reorth) == (1e5, 0.9, 1e-4, 500, 1e-3, True)
    assert cfg.initial_alpha == 1e-5
    assert SolverConfig(alpha0=0.3).initial_alpha == 0.3


@pytest.mark.parametrize(
    "kwargs",
    [
        {"lambda0": 0.0},
        {"tau": 1.0},
        {"c": 0.0},
        {"tol": -1.0},
        {"maxit": 0},
        {"tol_mode": "weird"},
        {"on_breakdown": "ignore"},
        {"w": 0.0},
        {"minres_tol": 1.0},
        {"alpha0": -1.0},
    ],
)
def test_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_dict_round_trip():
    cfg = SolverConfig(lambda0=2.0, reorth=False, tol=1e-8)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        SolverConfig.from_dict({"lambda_zero": 1.0})


def test_trace_csv(tmp_path):
    tr = ConvergenceTrace("pn", extra_columns=("krylov_dim",))
    row = dict(iter=1, f_norm=0.1, residual=2.0, gamma=1.0, backtracks=0, mv_total=3, krylov_dim=1)
    row["lambda"] = 1 / 3
    tr.append(**row)
    with pytest.raises(KeyError):
        tr.append(iter=2)
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == ",".join(BASE_COLUMNS + ("krylov_dim",))
    assert float(lines[1].split(",")[3]) == 1 / 3
    assert len(tr) == 1 and np.array_equal(tr.column("mv_total"), [3.0])
