"""Explicit second-order one-step predictor-corrector solver for decoupled FBSDEs."""

from .analysis import (
    ConvergenceReport, ConvergenceRow, build_report, convergence_rate, run_convergence_study, worker_count,
)
from .errors import ConfigurationError, NumericalEvaluationError
from .fields import SpatialGrid, TimeMesh, ValueField, build_grid, field_from_functions, field_from_values
from .problems import FbsdeProblem, example1, example2, get_problem, linear, terminal_z_from_phi
from .quadrature import QuadratureRule, expect, expect_weighted, hermite_rule
from .scheme import SchemeParams, SolveResult, backward_step, corrector, predictor, solve
from .spline import CubicSpline, eval_spline, fit
from .stability import DeviationReport, PerturbationSpec, deviation, solve_perturbed

__version__ = "0.1.0"
