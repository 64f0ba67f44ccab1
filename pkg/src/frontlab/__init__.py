"""Traveling fronts of a reaction-diffusion model with nonlocal advection.

Closed-form speed bounds (:mod:`frontlab.bounds`), phase-plane shooting for the
local model (:mod:`frontlab.shooting`), the screened-Poisson potential
(:mod:`frontlab.helmholtz`) and the truncated boundary-value construction for
the nonlocal model (:mod:`frontlab.nonlocal_bvp`).
"""

from .bounds import (a_star, sigma_bounds, sigma_lower, sigma_upper, theorem3_speed_cap,
                     verify_subsolution)
from .core import (FrontlabError, Grid1D, ModelParams, PhaseState, SigmaBounds,
                   ValidationError, WaveProfile, grid_for_spacing, make_grid, parse, serialize,
                   validate_params)
from .helmholtz import KernelSpec, PotentialField, convolve_extended, potential_from_profile
from .nonlocal_bvp import (NonlocalSolveReport, TruncationConfig, TruncationG,
                           continue_theta_alpha, lambda_continuation, solve_truncated)
from .shooting import Outcome, classify, profile_from_shot, sigma_star

__version__ = "0.1.0"

__all__ = [
    "FrontlabError", "Grid1D", "KernelSpec", "ModelParams", "NonlocalSolveReport", "Outcome",
    "PhaseState", "PotentialField", "SigmaBounds", "TruncationConfig", "TruncationG",
    "ValidationError", "WaveProfile", "a_star", "classify", "continue_theta_alpha",
    "convolve_extended", "grid_for_spacing", "lambda_continuation", "make_grid", "parse",
    "potential_from_profile", "profile_from_shot", "serialize", "sigma_bounds", "sigma_lower",
    "sigma_star", "sigma_upper", "solve_truncated", "theorem3_speed_cap", "validate_params",
    "verify_subsolution",
]
