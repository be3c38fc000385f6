"""Robust split feasibility with polytopic matrix uncertainty.

Find x in C with ``A x in Q`` for every A in ``conv{A_1..A_k}``, measure
violation with the residual ``exc(conv{A_i x}, Q) + dist(x, C)``, and
estimate or certify global error bounds for it.
"""

from .certify import (BoundCertificate, SlaterReport, check_nominal_conditions, check_slater,
                      core_error_bound, estimate_c_hat)
from .geometry.sets import (Ball, Box, FinGenCone, Halfspaces, NonnegOrthant, NonposOrthant,
                            Singleton, WholeSpace, distance, project)
from .io import dump_problem, load_problem
from .oracle import EmpiricalTau, empirical_tau, solv_distance
from .residual import Problem, Region, Tolerances, subdifferential_data, subgradient
from .solver import SolveConfig, SolveReport, polish_polyhedral, solve
from .uncertainty import UncertaintySet, excess, sur_inf_estimate

__version__ = "0.1.0"

__all__ = [
    "Ball", "BoundCertificate", "Box", "EmpiricalTau", "FinGenCone", "Halfspaces", "NonnegOrthant",
    "NonposOrthant", "Problem", "Region", "Singleton", "SlaterReport", "SolveConfig", "SolveReport",
    "Tolerances", "UncertaintySet", "WholeSpace", "check_nominal_conditions", "check_slater",
    "core_error_bound", "distance", "dump_problem", "empirical_tau", "estimate_c_hat", "excess",
    "load_problem", "polish_polyhedral", "project", "solv_distance", "solve",
    "subdifferential_data", "subgradient", "sur_inf_estimate",
]
