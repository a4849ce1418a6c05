"""Numerical fixed points of the d-th minimum recursive distributional
equation, with Monte-Carlo and finite-graph cross-checks."""

__version__ = "0.1.0"

from .dist_core import (Grid, GridError, Lip1Certificate, TailFunction, certify_d1, empirical_tail,
                        evaluate, integrate_right, inverse, ks_distance, make_standard, mixture,
                        random_monotone_start, sup_distance, translate)
from .fixed_point import (ConvergenceError, FixedPointResult, SolveConfig, solve, two_cycle_check,
                          uniqueness_probe)
from .rde_operator import (IntegralFunction, TailDiagnostics, apply_I, apply_P, apply_T, derivative_T,
                           iterate_T, tail_diagnostics)
from .shift_analysis import (ShiftProfile, ShiftTrace, contraction_check, estimate_gamma,
                             shift_profile, shift_trace)

__all__ = [
    "ConvergenceError",
    "FixedPointResult",
    "Grid",
    "GridError",
    "IntegralFunction",
    "Lip1Certificate",
    "ShiftProfile",
    "ShiftTrace",
    "SolveConfig",
    "TailDiagnostics",
    "TailFunction",
    "apply_I",
    "apply_P",
    "apply_T",
    "certify_d1",
    "contraction_check",
    "derivative_T",
    "empirical_tail",
    "estimate_gamma",
    "evaluate",
    "integrate_right",
    "inverse",
    "iterate_T",
    "ks_distance",
    "make_standard",
    "mixture",
    "random_monotone_start",
    "shift_profile",
    "shift_trace",
    "solve",
    "sup_distance",
    "tail_diagnostics",
    "translate",
    "two_cycle_check",
    "uniqueness_probe",
]
