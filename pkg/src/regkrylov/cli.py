"""Command-line frontend.

Exit codes: 0 converged, 1 bad input, 2 iteration limit reached,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import gbit, lagrange, projected_newton
from .config import SolverConfig
from .errors import NumericError, RegKrylovError, SolverError
from .problems import (
    check_kkt,
    discrepancy_curve,
    load_bundle,
    make_blur_problem,
    make_matrix_problem,
    make_tomo_problem,
    save_bundle,
)
from .problems.bundle import write_vector

log = logging.getLogger("regkrylov")

SOLVERS = {"pn": projected_newton.solve, "gbit": gbit.solve, "lagrange": lagrange.solve}
EXIT_OK, EXIT_BAD_INPUT, EXIT_MAXIT, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "REGKRYLOV_SEED"
_DEFAULT_SIZE = {"blur": 64, "tomo": 32}


class UsageError(Exception):
    pass


# problem and config assembly


def resolve_seed(cli_seed):
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return cli_seed
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def problem_spec_from_args(args) -> dict:
    if args.bundle:
        return {"bundle": str(Path(args.bundle).resolve())}
    if args.problem is None:
        raise UsageError("either --problem or --bundle is required")
    spec = {
        "generator": args.problem,
        "level": args.noise,
        "eta": args.eta,
        "seed": resolve_seed(args.seed),
    }
    if args.problem == "mtx":
        if not args.matrix:
            raise UsageError("--problem mtx needs --matrix FILE")
        spec["matrix"] = str(Path(args.matrix).resolve())
    else:
        spec["size"] = args.size if args.size is not None else _DEFAULT_SIZE[args.problem]
    if args.problem == "blur":
        spec["psf"] = args.psf
    if args.problem == "tomo":
        spec["angles"] = args.angles
    return spec


def build_problem(spec: dict):
    if "bundle" in spec:
        return load_bundle(spec["bundle"])
    kind = spec.get("generator")
    if kind == "blur":
        return make_blur_problem(spec["size"], spec["psf"], spec["level"], spec["seed"], spec["eta"])
    if kind == "tomo":
        return make_tomo_problem(spec["size"], spec["angles"], spec["level"], spec["seed"], spec["eta"])
    if kind == "mtx":
        return make_matrix_problem(spec["matrix"], spec["level"], spec["seed"], spec["eta"])
    raise UsageError(f"unknown problem generator {kind!r}")


def config_from_args(args) -> SolverConfig:
    names = ("lambda0", "alpha0", "tol", "tol_mode", "maxit", "w", "minres_tol", "minres_maxit")
    fields = {k: getattr(args, k, None) for k in names}
    fields["reorth"] = getattr(args, "reorth", "on") == "on"
    return SolverConfig(**{k: v for k, v in fields.items() if v is not None})


def manifest_from_args(args, solvers) -> dict:
    if args.manifest:
        try:
            manifest = json.loads(Path(args.manifest).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from exc
        for key in ("problem", "solvers", "config"):
            if key not in manifest:
                raise UsageError(f"manifest lacks {key!r}")
        if args.out:
            manifest["out"] = args.out
        return manifest
    return {
        "problem": problem_spec_from_args(args),
        "solvers": solvers,
        "config": config_from_args(args).to_dict(),
        "out": args.out,
    }


def _check_solvers(names):
    for name in names:
        if name not in SOLVERS:
            raise UsageError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")


def _out_dir(manifest) -> Path:
    if not manifest.get("out"):
        raise UsageError("--out DIR is required")
    out = Path(manifest["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _run(name, problem, cfg):
    """Solve on a fresh-counter copy; returns ``(result, error)``."""
    op = problem.op.with_fresh_stats()
    try:
        result = SOLVERS[name](op, problem.b, problem.sigma, cfg)
    except (SolverError, NumericError) as exc:
        return None, exc
    if result.mv_total != op.stats.total:
        raise AssertionError(f"trace reports {result.mv_total} products, counters {op.stats.total}")
    return result, None


def _exit_code(result, error):
    if error is not None:
        return EXIT_NUMERIC if isinstance(error, NumericError) else EXIT_MAXIT
    return EXIT_OK if result.converged else EXIT_MAXIT


# subcommands


def cmd_solve(args) -> int:
    _check_solvers([args.solver])
    manifest = manifest_from_args(args, [args.solver])
    if len(manifest["solvers"]) != 1:
        raise UsageError("solve runs exactly one solver")
    _check_solvers(manifest["solvers"])
    name = manifest["solvers"][0]
    cfg = SolverConfig.from_dict(manifest["config"])
    out = _out_dir(manifest)
    problem = build_problem(manifest["problem"])

    result, error = _run(name, problem, cfg)
    if error is not None:
        log.error("%s failed: %s", name, error)
        if getattr(error, "trace", None) is not None:
            error.trace.to_csv(out / "trace.csv")
        _write_json(out / "summary.json", {"solver": name, "status": type(error).__name__, "converged": False})
        _write_json(out / "manifest.json", manifest)
        return _exit_code(None, error)

    result.trace.to_csv(out / "trace.csv")
    write_vector(out, "solution", result.x)
    kkt = check_kkt(problem.op, problem.b, result.x, result.lam, problem.sigma)
    summary = {
        "solver": name,
        "status": result.status,
        "converged": result.converged,
        "iters": result.iterations,
        "krylov_dim": result.krylov_dim,
        "mv_total": result.mv_total,
        "lambda": result.lam,
        "f_norm": result.f_norm,
        "sigma": problem.sigma,
        "kkt": kkt.to_dict(),
    }
    summary.update({k: v for k, v in result.info.items() if k == "avg_inner"})
    _write_json(out / "summary.json", summary)
    _write_json(out / "manifest.json", manifest)
    print(
        f"{name}: {result.status} after {result.iterations} iterations, "
        f"{result.mv_total} products, lambda = {result.lam:.6g}"
    )
    return _exit_code(result, None)


COMPARE_COLUMNS = (
    "solver",
    "status",
    "converged",
    "iters",
    "krylov_dim",
    "avg_inner",
    "mv_total",
    "lambda",
    "f_norm",
    "stationarity_relres",
    "discrepancy_relerr",
)


def cmd_compare(args) -> int:
    names = [s.strip() for s in args.solvers.split(",") if s.strip()]
    manifest = manifest_from_args(args, names)
    names = manifest["solvers"]
    _check_solvers(names)
    if len(set(names)) < 2:
        raise UsageError("compare needs at least two distinct solvers")
    cfg = SolverConfig.from_dict(manifest["config"])
    out = _out_dir(manifest)
    problem = build_problem(manifest["problem"])

    rows = []
    for name in sorted(set(names)):
        result, error = _run(name, problem, cfg)
        row = dict.fromkeys(COMPARE_COLUMNS, "")
        row["solver"] = name
        if error is not None:
            row.update(status=type(error).__name__, converged=0)
        else:
            kkt = check_kkt(problem.op, problem.b, result.x, result.lam, problem.sigma)
            row.update(
                status=result.status,
                converged=int(result.converged),
                iters=result.iterations,
                krylov_dim="" if result.krylov_dim is None else result.krylov_dim,
                avg_inner=result.info.get("avg_inner", ""),
                mv_total=result.mv_total,
                **{"lambda": repr(result.lam)},
                f_norm=repr(result.f_norm),
                stationarity_relres=repr(kkt.stationarity_relres),
                discrepancy_relerr=repr(kkt.discrepancy_relerr),
            )
        rows.append(row)
        print(f"{name}: {row['status']}")
    with open(out / "comparison.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    _write_json(out / "manifest.json", manifest)
    return EXIT_OK


def parse_grid(text):
    """``LO:HI:N`` for a log-spaced grid, or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if not (lo > 0 and hi > lo and n >= 2):
                raise ValueError
            return np.geomspace(lo, hi, n)
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"bad lambda grid {text!r}; use LO:HI:N or a comma list") from None


def cmd_dcurve(args) -> int:
    manifest = manifest_from_args(args, [])
    out = _out_dir(manifest)
    problem = build_problem(manifest["problem"])
    grid = parse_grid(args.lambda_grid)
    rows = discrepancy_curve(problem.op, problem.b, grid)
    with open(out / "dcurve.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("lambda", "residual", "d_prime", "ok"))
        for lam, residual, d_prime, ok in rows:
            writer.writerow((repr(lam), repr(residual), repr(d_prime), int(ok)))
    manifest["lambda_grid"] = args.lambda_grid
    _write_json(out / "manifest.json", manifest)
    flagged = sum(not r[3] for r in rows)
    print(f"{len(rows)} grid points, {flagged} flagged, sigma = {problem.sigma:.6g}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if not args.out:
        raise UsageError("--out DIR is required")
    spec = problem_spec_from_args(args)
    problem = build_problem(spec)
    save_bundle(problem, args.out)
    print(f"wrote {problem.op.rows}x{problem.op.cols} problem to {args.out}")
    return EXIT_OK


# argument parsing


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--problem", choices=("blur", "tomo", "mtx"))
    g.add_argument("--bundle", help="load the problem from a bundle directory")
    g.add_argument("--matrix", help="Matrix Market file for --problem mtx")
    g.add_argument("--size", type=int, help="pixels per side (blur 64, tomo 32)")
    g.add_argument("--angles", type=int, default=48)
    g.add_argument("--psf", default="gaussian:2", help="gaussian:STD or motion:LENGTH,ANGLE")
    g.add_argument("--noise", type=float, default=0.1, help="relative noise level")
    g.add_argument("--eta", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    g.add_argument("--manifest", help="replay a manifest.json from an earlier run")
    p.add_argument("--out", help="output directory")


def _add_solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda0", type=float)
    g.add_argument("--alpha0", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--tol-mode", choices=("absolute", "relative"))
    g.add_argument("--maxit", type=int)
    g.add_argument("--reorth", choices=("on", "off"), default="on")
    g.add_argument("--w", type=float, help="merit weight for the Lagrange method")
    g.add_argument("--minres-tol", type=float)
    g.add_argument("--minres-maxit", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regkrylov", description="Noise-constrained Tikhonov solvers on Krylov subspaces."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--solver", default="pn")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several solvers on the same problem")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--solvers", default="pn,gbit,lagrange", help="comma-separated list")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dcurve", help="tabulate the discrepancy curve")
    _add_problem_args(p)
    p.add_argument("--lambda-grid", default="1e-4:1e4:50", help="LO:HI:N (log-spaced) or a comma list")
    p.set_defaults(func=cmd_dcurve)

    p = sub.add_parser("generate", help="write a problem bundle")
    _add_problem_args(p)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which would collide with the iteration-limit code
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, RegKrylovError, ValueError, OSError, KeyError) as exc:
        print(f"regkrylov: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
