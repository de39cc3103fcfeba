"""Test problems, noise model and dense reference solvers."""

from .base import InverseProblem, add_noise
from .blur import gaussian_kernel, make_blur_problem, motion_psf, parse_psf
from .bundle import load_bundle, save_bundle
from .general_form import (
    DenseRegularizer,
    DiagonalRegularizer,
    GeneralFormProblem,
    StandardFormOperator,
    from_standard_form,
    to_standard_form,
)
from .images import peaks, shepp_logan
from .matrix import make_matrix_problem, make_random_problem, sine_solution
from .oracle import KKTReport, check_kkt, discrepancy_curve, oracle_solve, oracle_solve_general
from .tomo import make_tomo_problem, parallel_beam_matrix

__all__ = [
    "InverseProblem",
    "add_noise",
    "gaussian_kernel",
    "motion_psf",
    "parse_psf",
    "make_blur_problem",
    "make_tomo_problem",
    "parallel_beam_matrix",
    "make_matrix_problem",
    "make_random_problem",
    "sine_solution",
    "peaks",
    "shepp_logan",
    "DiagonalRegularizer",
    "DenseRegularizer",
    "StandardFormOperator",
    "GeneralFormProblem",
    "to_standard_form",
    "from_standard_form",
    "KKTReport",
    "check_kkt",
    "discrepancy_curve",
    "oracle_solve",
    "oracle_solve_general",
    "save_bundle",
    "load_bundle",
]
