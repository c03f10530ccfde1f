"""Multi-point distributions of TASEP on a ring: finite time and the large-time limit."""

__version__ = "0.1.0"

from .bethe import (BetheRootSet, RingGeometry, RootSolverError, eval_Hz, eval_lz, eval_rz,
                    root_identity_errors, solve_bethe_roots)
from .finite import (DistributionResult, FiniteQuery, InitialCondition, check_L_independence,
                     joint_cdf_general, joint_cdf_step, mixed_event_prob_finite, power_radii,
                     scale_parameters, transition_probability, translate_query)
from .limit import LimitRootSet, ScaledQuery, eval_F, eval_F_mixed, limit_roots
from .numerics import DEFAULTS, ContourScheme, Tolerances, nested_contour_integral
from .sim import MCEstimate, SimConfig, exact_cdf_small, mc_joint_cdf, simulate_path
from .specfun import A1, A2, Bfun, hfun, polylog

__all__ = [
    "A1", "A2", "Bfun", "BetheRootSet", "ContourScheme", "DEFAULTS", "DistributionResult",
    "FiniteQuery", "InitialCondition", "LimitRootSet", "MCEstimate", "RingGeometry",
    "RootSolverError", "ScaledQuery", "SimConfig", "Tolerances", "check_L_independence",
    "eval_F", "eval_F_mixed", "eval_Hz", "eval_lz", "eval_rz", "exact_cdf_small", "hfun",
    "joint_cdf_general", "joint_cdf_step", "limit_roots", "mc_joint_cdf",
    "mixed_event_prob_finite", "nested_contour_integral", "polylog", "power_radii",
    "root_identity_errors", "scale_parameters", "simulate_path", "solve_bethe_roots",
    "transition_probability", "translate_query",
]
